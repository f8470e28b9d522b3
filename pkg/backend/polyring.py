"""
Exact multivariate polynomials over the rationals.

A Polynomial is bound to a tuple of variable names (the chart it lives on)
and stores a dict from dense exponent tuples to nonzero Fractions. Values
are immutable; every operation returns a new polynomial in canonical form.

Text form (round-trip stable):

    3/2 * q1^2 * p2 - q1 + 5
"""
import re
from fractions import Fraction

from backend.errors import ChartMismatch, DimensionMismatch, DslSyntaxError

_NUMBER = re.compile(r'(\d+)(?:/(\d+))?')
_POWER = re.compile(r'([A-Za-z_]\w*)(?:\^(\d+))?')


def as_fraction(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"Expected an exact rational, got {type(value).__name__}")


def format_rational(c):
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def graded_lex_key(exponents):
    return (sum(exponents), exponents)


class Polynomial:
    __slots__ = ("variables", "terms")

    def __init__(self, variables, terms=None):
        self.variables = tuple(variables)
        self.terms = {}
        n = len(self.variables)
        for exps, c in (terms or {}).items():
            exps = tuple(exps)
            if len(exps) != n:
                raise DimensionMismatch(f"Exponent vector {exps} does not fit {n} variables")
            c = as_fraction(c)
            if c != 0:
                self.terms[exps] = self.terms.get(exps, 0) + c
                if self.terms[exps] == 0:
                    del self.terms[exps]

    # --- Constructors ---
    @classmethod
    def zero(cls, variables):
        return cls(variables)

    @classmethod
    def constant(cls, variables, c):
        return cls(variables, {(0,) * len(tuple(variables)): c})

    @classmethod
    def variable(cls, variables, index):
        variables = tuple(variables)
        exps = [0] * len(variables)
        exps[index] = 1
        return cls(variables, {tuple(exps): 1})

    @classmethod
    def _raw(cls, variables, terms):
        # terms already canonical (no zeros)
        p = cls.__new__(cls)
        p.variables = variables
        p.terms = terms
        return p

    # --- Basic properties ---
    @property
    def nvars(self):
        return len(self.variables)

    def is_zero(self):
        return not self.terms

    def is_constant(self):
        return all(not any(e) for e in self.terms)

    def constant_term(self):
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def degree(self):
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(self.variables, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.variables == other.variables and self.terms == other.terms

    def __hash__(self):
        return hash((self.variables, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    # --- Arithmetic ---
    def _coerce(self, other):
        if isinstance(other, Polynomial):
            if other.variables != self.variables:
                raise ChartMismatch(f"Polynomials live on different charts: {self.variables} vs {other.variables}")
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.constant(self.variables, other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        terms = dict(self.terms)
        for e, c in other.terms.items():
            s = terms.get(e, 0) + c
            if s:
                terms[e] = s
            else:
                terms.pop(e, None)
        return Polynomial._raw(self.variables, terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        terms = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = terms.get(e, 0) + c1 * c2
                if s:
                    terms[e] = s
                else:
                    terms.pop(e, None)
        return Polynomial._raw(self.variables, terms)

    __rmul__ = __mul__

    def scale(self, c):
        c = as_fraction(c)
        if c == 0:
            return Polynomial.zero(self.variables)
        return Polynomial._raw(self.variables, {e: v * c for e, v in self.terms.items()})

    def __pow__(self, n):
        result = Polynomial.constant(self.variables, 1)
        for _ in range(n):
            result = result * self
        return result

    # --- Calculus and evaluation ---
    def partial_derivative(self, var):
        if not 0 <= var < self.nvars:
            raise DimensionMismatch(f"Variable index {var} outside chart of dimension {self.nvars}")
        terms = {}
        for e, c in self.terms.items():
            if e[var]:
                d = list(e)
                d[var] -= 1
                terms[tuple(d)] = c * e[var]
        return Polynomial._raw(self.variables, terms)

    def evaluate(self, point):
        if len(point) != self.nvars:
            raise DimensionMismatch(f"Point has {len(point)} entries, chart has {self.nvars} variables")
        point = [as_fraction(x) for x in point]
        total = Fraction(0)
        for e, c in self.terms.items():
            value = c
            for x, k in zip(point, e):
                if k:
                    value *= x ** k
            total += value
        return total

    def fiber_degree(self, exps, fiber_vars):
        return sum(exps[i] for i in fiber_vars)

    def fiber_homogeneous_components(self, fiber_vars):
        fiber_vars = tuple(fiber_vars)
        components = {}
        for e, c in self.terms.items():
            components.setdefault(self.fiber_degree(e, fiber_vars), {})[e] = c
        return {d: Polynomial._raw(self.variables, t) for d, t in sorted(components.items())}

    def embed(self, variables, positions):
        """Re-express on a larger chart; variable i moves to index positions[i]."""
        variables = tuple(variables)
        terms = {}
        for e, c in self.terms.items():
            new = [0] * len(variables)
            for i, k in enumerate(e):
                new[positions[i]] += k
            terms[tuple(new)] = c
        return Polynomial(variables, terms)

    # --- Text form ---
    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda item: graded_lex_key(item[0]), reverse=True)

    def monomial_text(self, exps):
        factors = []
        for name, k in zip(self.variables, exps):
            if k == 1:
                factors.append(name)
            elif k > 1:
                factors.append(f"{name}^{k}")
        return " * ".join(factors)

    def __str__(self):
        if not self.terms:
            return "0"
        pieces = []
        for i, (e, c) in enumerate(self.sorted_terms()):
            mono = self.monomial_text(e)
            mag = abs(c)
            if mono and mag == 1:
                body = mono
            elif mono:
                body = f"{format_rational(mag)} * {mono}"
            else:
                body = format_rational(mag)
            if i == 0:
                pieces.append(body if c > 0 else f"-{body}")
            else:
                pieces.append(f"+ {body}" if c > 0 else f"- {body}")
        return " ".join(pieces)

    def __repr__(self):
        return f"Polynomial({str(self)!r}, variables={self.variables})"

    @classmethod
    def parse(cls, text, variables):
        variables = tuple(variables)
        index = {name: i for i, name in enumerate(variables)}
        result = cls.zero(variables)
        pos = 0
        n = len(text)

        def skip(p):
            while p < n and text[p].isspace():
                p += 1
            return p

        pos = skip(pos)
        if pos == n:
            raise DslSyntaxError("Empty polynomial", pos)
        first = True
        while pos < n:
            sign = 1
            if text[pos] in "+-":
                sign = -1 if text[pos] == "-" else 1
                pos = skip(pos + 1)
            elif not first:
                raise DslSyntaxError(f"Expected '+' or '-', saw {text[pos]!r}", pos)
            first = False
            coeff = Fraction(sign)
            exps = [0] * len(variables)
            while True:
                m = _NUMBER.match(text, pos)
                if m:
                    coeff *= Fraction(int(m.group(1)), int(m.group(2) or 1))
                    pos = m.end()
                else:
                    m = _POWER.match(text, pos)
                    if not m:
                        raise DslSyntaxError("Expected a number or a variable", pos)
                    name = m.group(1)
                    if name not in index:
                        raise DslSyntaxError(f"Unknown variable {name!r}", pos)
                    exps[index[name]] += int(m.group(2) or 1)
                    pos = m.end()
                pos = skip(pos)
                if pos < n and text[pos] == "*":
                    pos = skip(pos + 1)
                    continue
                break
            result = result + cls(variables, {tuple(exps): coeff})
        return result

    def to_sympy(self):
        import sympy
        symbols = sympy.symbols(self.variables)
        expr = sympy.Integer(0)
        for e, c in self.terms.items():
            term = sympy.Rational(c.numerator, c.denominator)
            for s, k in zip(symbols, e):
                term *= s ** k
            expr += term
        return expr


# --- Operations as free functions ---

def poly_arith(a, b, op):
    if a.variables != b.variables:
        raise ChartMismatch(f"Polynomials live on different charts: {a.variables} vs {b.variables}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"Unknown polynomial operation {op!r}")


def partial_derivative(p, var):
    return p.partial_derivative(var)


def evaluate(p, point):
    return p.evaluate(point)


def fiber_homogeneous_components(p, fiber_vars):
    return p.fiber_homogeneous_components(fiber_vars)
