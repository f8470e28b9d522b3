"""
Mixed tensor fields Ω^k(chart; S^l T chart) in canonical form.

A term is keyed by (FormIndex, SymIndex): a strictly increasing tuple of
variable indices for dx^{i1}∧...∧dx^{ik} and a weakly increasing tuple for
∂_{j1}∨...∨∂_{jl}. Symmetric monomials carry no multinomial factor.

Text form, one term per summand:

    2 * q1 * dq1^dq3 | v1.v2 - (q2 + 1) * v3
"""
import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np

from backend.errors import ChartMismatch, DegreeTooHigh, DslSyntaxError, MixedDegrees
from backend.polyring import Polynomial, as_fraction, format_rational

_WORD = re.compile(r'([A-Za-z_]\w*)(?:\^(\d+))?')
_NUMBER = re.compile(r'(\d+)(?:/(\d+))?')


@dataclass(frozen=True)
class Chart:
    variables: tuple
    kind: str = "base"
    base: Optional["Chart"] = None

    @classmethod
    def base_chart(cls, m, prefix="q"):
        return cls(tuple(f"{prefix}{i + 1}" for i in range(m)))

    @classmethod
    def cotangent_of(cls, base):
        if base.kind != "base":
            raise ChartMismatch("Cotangent charts are built over base charts")
        fiber = tuple(f"p{i + 1}" for i in range(base.dimension))
        return cls(base.variables + fiber, "cotangent", base)

    @property
    def dimension(self):
        return len(self.variables)

    @property
    def is_cotangent(self):
        return self.kind == "cotangent"

    @property
    def base_dimension(self):
        return self.base.dimension if self.is_cotangent else self.dimension

    def q_index(self, i):
        return i

    def p_index(self, i):
        return self.base_dimension + i

    @property
    def fiber_vars(self):
        m = self.base_dimension
        return tuple(range(m, 2 * m)) if self.is_cotangent else ()

    def poly(self, c=0):
        return Polynomial.constant(self.variables, c)

    def coordinate(self, i):
        return Polynomial.variable(self.variables, i)

    def vector_token(self, i):
        if self.is_cotangent:
            return f"v{self.variables[i]}"
        return f"v{i + 1}"

    def form_token(self, i):
        return f"d{self.variables[i]}"

    def __str__(self):
        if self.is_cotangent:
            return f"T*R^{self.base_dimension}"
        return f"R^{self.dimension}"


def base_chart(m):
    return Chart.base_chart(m)


def cotangent_chart(m):
    return Chart.cotangent_of(Chart.base_chart(m))


def sort_form_word(word):
    """Sort a wedge word; returns (sign, sorted tuple), sign 0 on a repeated index."""
    word = list(word)
    if len(set(word)) != len(word):
        return 0, None
    sign = 1
    # bubble sort keeps track of transpositions
    for i in range(len(word)):
        for j in range(len(word) - 1 - i):
            if word[j] > word[j + 1]:
                word[j], word[j + 1] = word[j + 1], word[j]
                sign = -sign
    return sign, tuple(word)


class MixedField:
    __slots__ = ("chart", "k", "l", "terms")

    def __init__(self, chart, k, l, terms=None):
        self.chart = chart
        self.k = k
        self.l = l
        self.terms = {}
        for (form, sym), coeff in (terms or {}).items():
            if len(form) != k or len(sym) != l:
                raise MixedDegrees(f"Term {(form, sym)} does not have bidegree ({k},{l})")
            if not coeff.is_zero():
                self.terms[(tuple(form), tuple(sym))] = coeff

    # --- Constructors ---
    @classmethod
    def zero(cls, chart, k=0, l=0):
        return cls(chart, k, l)

    @classmethod
    def from_polynomial(cls, chart, p):
        if not isinstance(p, Polynomial):
            p = chart.poly(p)
        if p.variables != chart.variables:
            raise ChartMismatch("Polynomial does not live on this chart")
        return cls(chart, 0, 0, {((), ()): p})

    @classmethod
    def parse(cls, text, chart):
        return parse_field(text, chart)

    # --- Properties ---
    @property
    def bidegree(self):
        return self.k, self.l

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def coefficient(self, form=(), sym=()):
        return self.terms.get((tuple(form), tuple(sym)), self.chart.poly(0))

    def scalar(self):
        """The (0,0) field as a Polynomial."""
        if (self.k, self.l) != (0, 0) and self.terms:
            raise MixedDegrees(f"Field of bidegree ({self.k},{self.l}) is not a function")
        return self.coefficient((), ())

    def items(self):
        return sorted(self.terms.items(), key=lambda item: item[0])

    def map_coefficients(self, fn):
        return MixedField(self.chart, self.k, self.l, {key: fn(c) for key, c in self.terms.items()})

    # --- Equality ---
    def __eq__(self, other):
        if not isinstance(other, MixedField):
            return NotImplemented
        if self.chart != other.chart or self.terms != other.terms:
            return False
        return not self.terms or (self.k, self.l) == (other.k, other.l)

    def __hash__(self):
        return hash((self.chart, frozenset(self.terms.items())))

    # --- Linear structure ---
    def _check_chart(self, other):
        if self.chart != other.chart:
            raise ChartMismatch(f"Fields live on different charts: {self.chart} vs {other.chart}")

    def __add__(self, other):
        if not isinstance(other, MixedField):
            return NotImplemented
        self._check_chart(other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        if (self.k, self.l) != (other.k, other.l):
            raise MixedDegrees(f"Cannot add bidegrees ({self.k},{self.l}) and ({other.k},{other.l})")
        terms = dict(self.terms)
        for key, c in other.terms.items():
            s = terms[key] + c if key in terms else c
            if s.is_zero():
                terms.pop(key, None)
            else:
                terms[key] = s
        return MixedField(self.chart, self.k, self.l, terms)

    def __neg__(self):
        return self.map_coefficients(lambda c: -c)

    def __sub__(self, other):
        if not isinstance(other, MixedField):
            return NotImplemented
        return self + (-other)

    def scale(self, c):
        if isinstance(c, Polynomial):
            return self.map_coefficients(lambda v: v * c)
        c = as_fraction(c)
        return self.map_coefficients(lambda v: v.scale(c))

    def __mul__(self, other):
        if isinstance(other, MixedField):
            return product(self, other)
        if isinstance(other, (int, Fraction, Polynomial)):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, Polynomial)):
            return self.scale(other)
        return NotImplemented

    # --- Text form ---
    def word_text(self, form, sym):
        parts = []
        if form:
            parts.append("^".join(self.chart.form_token(i) for i in form))
        if sym:
            parts.append(".".join(self.chart.vector_token(j) for j in sym))
        return " | ".join(parts)

    def __str__(self):
        if not self.terms:
            return "0"
        pieces = []
        for i, ((form, sym), c) in enumerate(self.items()):
            word = self.word_text(form, sym)
            negative = False
            if len(c.terms) == 1:
                (exps, value), = c.terms.items()
                negative = value < 0
                mono = c.monomial_text(exps)
                mag = format_rational(abs(value))
                coeff_parts = [] if (abs(value) == 1 and (mono or word)) else [mag]
                if mono:
                    coeff_parts.append(mono)
                body = " * ".join(coeff_parts + ([word] if word else []))
            else:
                body = f"({c})" + (f" * {word}" if word else "")
            if i == 0:
                pieces.append(f"-{body}" if negative else body)
            else:
                pieces.append(f"- {body}" if negative else f"+ {body}")
        return " ".join(pieces)

    def __repr__(self):
        return f"MixedField(({self.k},{self.l}), {str(self)!r}, chart={self.chart})"


def normalize(chart, raw_terms, k=None, l=None):
    """Canonicalize raw (form word, sym word, coefficient) triples."""
    terms = {}
    for form, sym, coeff in raw_terms:
        if k is None:
            k, l = len(form), len(sym)
        elif (len(form), len(sym)) != (k, l):
            raise MixedDegrees(f"Term bidegree ({len(form)},{len(sym)}) differs from ({k},{l})")
        if not isinstance(coeff, Polynomial):
            coeff = chart.poly(coeff)
        sign, word = sort_form_word(form)
        if sign == 0 or coeff.is_zero():
            continue
        key = (word, tuple(sorted(sym)))
        c = coeff if sign > 0 else -coeff
        if key in terms:
            c = terms[key] + c
        terms[key] = c
    return MixedField(chart, k or 0, l or 0, terms)


def product(A, B):
    """Wedge on the form part, symmetric product on the tensor part."""
    if A.chart != B.chart:
        raise ChartMismatch(f"Fields live on different charts: {A.chart} vs {B.chart}")
    raw = []
    for (f1, s1), c1 in A.terms.items():
        for (f2, s2), c2 in B.terms.items():
            raw.append((f1 + f2, s1 + s2, c1 * c2))
    return normalize(A.chart, raw, A.k + B.k, A.l + B.l)


# --- Convenience constructors ---

def scalar_field(chart, p):
    return MixedField.from_polynomial(chart, p)


def vector_field(chart, coeffs):
    raw = [((), (j,), c) for j, c in enumerate(coeffs)]
    return normalize(chart, raw, 0, 1)


def one_form(chart, coeffs):
    raw = [((i,), (), c) for i, c in enumerate(coeffs)]
    return normalize(chart, raw, 1, 0)


def basis_field(chart, form=(), sym=(), coeff=1):
    return normalize(chart, [(tuple(form), tuple(sym), coeff)])


# --- Parsing ---

def parse_field(text, chart):
    index = {name: i for i, name in enumerate(chart.variables)}
    n = len(text)
    raw = []
    pos = 0

    def skip(p):
        while p < n and text[p].isspace():
            p += 1
        return p

    def closing(p):
        depth = 0
        for q in range(p, n):
            if text[q] == "(":
                depth += 1
            elif text[q] == ")":
                depth -= 1
                if depth == 0:
                    return q
        raise DslSyntaxError("Unbalanced parenthesis", p)

    def vector_index(name, p):
        rest = name[1:]
        if rest.isdigit() and 1 <= int(rest) <= chart.dimension:
            return int(rest) - 1
        if rest in index:
            return index[rest]
        raise DslSyntaxError(f"Unknown vector basis symbol {name!r}", p)

    pos = skip(pos)
    if pos == n:
        raise DslSyntaxError("Empty field text", pos)
    first = True
    while pos < n:
        sign = 1
        if text[pos] in "+-":
            sign = -1 if text[pos] == "-" else 1
            pos = skip(pos + 1)
        elif not first:
            raise DslSyntaxError(f"Expected '+' or '-', saw {text[pos]!r}", pos)
        first = False
        coeff = chart.poly(sign)
        form, sym = [], []
        while True:
            if pos < n and text[pos] == "(":
                end = closing(pos)
                coeff = coeff * Polynomial.parse(text[pos + 1:end], chart.variables)
                pos = end + 1
            elif (m := _NUMBER.match(text, pos)):
                coeff = coeff.scale(Fraction(int(m.group(1)), int(m.group(2) or 1)))
                pos = m.end()
            elif (m := _WORD.match(text, pos)):
                name, power = m.group(1), int(m.group(2) or 1)
                if name in index:
                    coeff = coeff * chart.coordinate(index[name]) ** power
                elif name.startswith("d") and name[1:] in index:
                    form.extend([index[name[1:]]] * power)
                elif name.startswith("v"):
                    sym.extend([vector_index(name, pos)] * power)
                else:
                    raise DslSyntaxError(f"Unknown symbol {name!r}", pos)
                pos = m.end()
            else:
                raise DslSyntaxError("Expected a factor", pos)
            pos = skip(pos)
            if pos < n and text[pos] in "*^|.":
                pos = skip(pos + 1)
                continue
            break
        raw.append((tuple(form), tuple(sym), coeff))
    return normalize(chart, raw)


# --- Random fields for the fuzz harness ---

@lru_cache(maxsize=None)
def monomials_up_to(nvars, degree):
    return [e for e in itertools.product(range(degree + 1), repeat=nvars) if sum(e) <= degree]


def random_polynomial(chart, max_degree, rng, max_terms=3):
    monos = monomials_up_to(chart.dimension, max_degree)
    count = int(rng.integers(1, max_terms + 1))
    picks = rng.choice(len(monos), size=min(count, len(monos)), replace=False)
    terms = {}
    for idx in picks:
        num = int(rng.integers(1, 4)) * (1 if rng.random() < 0.5 else -1)
        den = 2 if rng.random() < 0.2 else 1
        terms[monos[int(idx)]] = Fraction(num, den)
    return Polynomial(chart.variables, terms)


def random_field(chart, k, l, max_degree, seed, density=0.5):
    """Deterministic random field; `seed` may be an int or a numpy Generator."""
    if k > chart.dimension:
        raise DegreeTooHigh(f"Form degree {k} exceeds chart dimension {chart.dimension}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    terms = {}
    n = chart.dimension
    for form in itertools.combinations(range(n), k):
        for sym in itertools.combinations_with_replacement(range(n), l):
            if rng.random() < density:
                terms[(form, sym)] = random_polynomial(chart, max_degree, rng)
    return MixedField(chart, k, l, terms)
