"""
Expression language over mixed fields.

Grammar (ASCII; ∧ ⊗ ∨ · − are accepted as aliases of ^ | . * -):

    sum     := product (('+' | '-') product)*
    product := unary (('*' | '^' | '|' | '.' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' INT)*
    atom    := INT | NAME '(' [sum (',' sum)*] ')' | NAME | '(' sum ')'

Names resolve to environment bindings first, then to chart tokens:
q1, dq1 and v1 on the base chart, p1, dp1, vq1 and vp1 on the cotangent
chart. Base scalar forms are pulled back when they meet cotangent fields.
"""
import json
import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction

from backend import calculus, connection, cotangent
from backend.errors import (ArityError, BadValence, ChartMismatch, DslSyntaxError, FnsError, UnboundSymbol,
                            UnknownOperator)
from backend.fields import Chart, MixedField, basis_field

logger = logging.getLogger(__name__)

ALIASES = {"∧": "^", "⊗": "|", "∨": ".", "·": "*", "−": "-"}
PRODUCT_OPS = "*^|./"
_TOKEN = re.compile(r'\s*(?:(\d+)|([A-Za-z_]\w*)|(.))')


@dataclass(frozen=True)
class Node:
    kind: str  # symbol | literal | apply
    value: str
    args: tuple = ()
    position: int = 0


# --- Lexing ---

class TokenStream:
    def __init__(self, src):
        self.src = src
        self.tokens = []
        for m in _TOKEN.finditer(src):
            if m.group(0).strip() == "":
                continue
            start = m.start(m.lastindex)
            if m.group(1):
                self.tokens.append(("int", m.group(1), start))
            elif m.group(2):
                self.tokens.append(("name", m.group(2), start))
            else:
                ch = m.group(3)
                ch = ALIASES.get(ch, ch)
                if ch not in "+-*^|./(),":
                    raise DslSyntaxError(f"Unrecognized character {m.group(3)!r}", start)
                self.tokens.append(("sym", ch, start))
        self.pos = 0

    def next(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else ("eof", "", len(self.src))

    def second(self):
        return self.tokens[self.pos + 1] if self.pos + 1 < len(self.tokens) else ("eof", "", len(self.src))

    def advance(self):
        token = self.next()
        self.pos += 1
        return token

    def eat(self, value):
        kind, text, where = self.next()
        if kind == "eof":
            raise DslSyntaxError(f"Unexpected end of input, expected {value!r}", where)
        if text != value:
            raise DslSyntaxError(f"Expected {value!r}, saw {text!r}", where)
        return self.advance()

    def check_eof(self):
        kind, text, where = self.next()
        if kind != "eof":
            raise DslSyntaxError(f"Unexpected {text!r} after expression", where)


# --- Parsing ---

def parse_expression(text):
    tokens = TokenStream(text)
    ast = parse_sum(tokens)
    tokens.check_eof()
    return ast


def parse_sum(tokens):
    left = parse_product(tokens)
    while tokens.next()[0] == "sym" and tokens.next()[1] in "+-":
        _, op, where = tokens.advance()
        left = Node("apply", op, (left, parse_product(tokens)), where)
    return left


def parse_product(tokens):
    left = parse_unary(tokens)
    while tokens.next()[0] == "sym" and tokens.next()[1] in PRODUCT_OPS:
        _, op, where = tokens.advance()
        left = Node("apply", op, (left, parse_unary(tokens)), where)
    return left


def parse_unary(tokens):
    kind, text, where = tokens.next()
    if kind == "sym" and text == "-":
        tokens.advance()
        return Node("apply", "neg", (parse_unary(tokens),), where)
    return parse_power(tokens)


def parse_power(tokens):
    base = parse_atom(tokens)
    while tokens.next()[1] == "^" and tokens.second()[0] == "int":
        _, _, where = tokens.advance()
        _, exponent, at = tokens.advance()
        base = Node("apply", "^", (base, Node("literal", exponent, (), at)), where)
    return base


def parse_atom(tokens):
    kind, text, where = tokens.next()
    if kind == "eof":
        raise DslSyntaxError("Unexpected end of input", where)
    if kind == "int":
        tokens.advance()
        return Node("literal", text, (), where)
    if kind == "name":
        tokens.advance()
        if tokens.next()[1] != "(":
            return Node("symbol", text, (), where)
        if text not in OPERATORS:
            raise UnknownOperator(f"Unknown operator {text!r} at offset {where}")
        tokens.eat("(")
        args = []
        if tokens.next()[1] != ")":
            args.append(parse_sum(tokens))
            while tokens.next()[1] == ",":
                tokens.advance()
                args.append(parse_sum(tokens))
        tokens.eat(")")
        arity = OPERATORS[text][0]
        if len(args) != arity:
            raise ArityError(f"{text} takes {arity} argument(s), got {len(args)} at offset {where}")
        return Node("apply", text, tuple(args), where)
    if text == "(":
        tokens.advance()
        inner = parse_sum(tokens)
        tokens.eat(")")
        return Node("apply", "()", (inner,), where)
    raise DslSyntaxError(f"Unexpected {text!r}", where)


def to_text(node):
    """Inverse of parse_expression up to whitespace."""
    if node.kind != "apply":
        return node.value
    if node.value == "()":
        return f"({to_text(node.args[0])})"
    if node.value == "neg":
        return f"-{to_text(node.args[0])}"
    if node.value in OPERATORS:
        return f"{node.value}({','.join(to_text(a) for a in node.args)})"
    left, right = node.args
    return f"{to_text(left)}{node.value}{to_text(right)}"


# --- Evaluation ---

@dataclass
class EvalContext:
    base: Chart
    connection: object = None
    environment: dict = field(default_factory=dict)

    @classmethod
    def for_dimension(cls, m, conn=None, environment=None):
        base = Chart.base_chart(m)
        if conn is not None and conn.chart != base:
            base = conn.chart
        return cls(base, conn, dict(environment or {}))

    @property
    def cotangent(self):
        return Chart.cotangent_of(self.base)

    @property
    def conn(self):
        if self.connection is None:
            self.connection = connection.levi_civita(connection.euclidean_metric(self.base.dimension))
        return self.connection

    def resolve(self, name, where):
        if name in self.environment:
            return self.environment[name]
        base, cot = self.base, self.cotangent
        base_names = {v: i for i, v in enumerate(base.variables)}
        cot_names = {v: i for i, v in enumerate(cot.variables)}
        rest = name[1:]
        if name in base_names:
            return MixedField.from_polynomial(base, base.coordinate(base_names[name]))
        if name in cot_names:
            return MixedField.from_polynomial(cot, cot.coordinate(cot_names[name]))
        if name.startswith("d") and rest in base_names:
            return basis_field(base, form=(base_names[rest],))
        if name.startswith("d") and rest in cot_names:
            return basis_field(cot, form=(cot_names[rest],))
        if name.startswith("v") and rest.isdigit() and 1 <= int(rest) <= base.dimension:
            return basis_field(base, sym=(int(rest) - 1,))
        if name.startswith("v") and rest in cot_names:
            return basis_field(cot, sym=(cot_names[rest],))
        raise UnboundSymbol(f"Unbound symbol {name!r} at offset {where}")

    # chart promotion
    def lift(self, value):
        if isinstance(value, MixedField) and value.chart == self.base:
            if value.l != 0:
                raise ChartMismatch(f"Only scalar forms are pulled back to {self.cotangent}, got ({value.k},{value.l})")
            return cotangent.pullback(value, self.cotangent)
        return value

    def unify(self, a, b):
        if isinstance(a, MixedField) and isinstance(b, MixedField) and a.chart != b.chart:
            if a.chart == self.base and b.chart.is_cotangent:
                a = self.lift(a)
            elif b.chart == self.base and a.chart.is_cotangent:
                b = self.lift(b)
        return a, b

    def as_field(self, value, chart=None):
        if isinstance(value, MixedField):
            return value
        return MixedField.from_polynomial(chart or self.cotangent, value)


def _int_arg(value, name):
    if isinstance(value, Fraction) and value.denominator == 1 and value >= 0:
        return int(value)
    raise BadValence(f"{name} expects a non-negative integer, got {value}")


def _cot(ctx, value):
    return ctx.lift(ctx.as_field(value))


OPERATORS = {
    "d": (1, lambda ctx, a: calculus.exterior_d(ctx.as_field(a))),
    "i": (2, lambda ctx, K, w: calculus.insert(*ctx.unify(ctx.as_field(K), ctx.as_field(w)))),
    "L": (2, lambda ctx, K, w: calculus.lie_derivative(*ctx.unify(ctx.as_field(K), ctx.as_field(w)))),
    "FN": (2, lambda ctx, K, L: calculus.fn_bracket(*ctx.unify(ctx.as_field(K), ctx.as_field(L)))),
    "NR": (2, lambda ctx, K, L: calculus.nr_bracket(*ctx.unify(ctx.as_field(K), ctx.as_field(L)))),
    "SCH": (2, lambda ctx, U, V: calculus.schouten(*ctx.unify(ctx.as_field(U, ctx.base), ctx.as_field(V, ctx.base)))),
    "XI": (2, lambda ctx, A, B: calculus.extended_insert(*ctx.unify(ctx.as_field(A), ctx.as_field(B)))),
    "rho": (1, lambda ctx, w: cotangent.rho_extend(_cot(ctx, w))),
    "H": (1, lambda ctx, w: cotangent.hamiltonian(_cot(ctx, w))),
    "h": (1, lambda ctx, A: cotangent.h_map(ctx.as_field(A, ctx.base))),
    "pb": (1, lambda ctx, A: cotangent.pullback(ctx.as_field(A, ctx.base), ctx.cotangent)),
    "pbinv": (2, lambda ctx, w, l: cotangent.pullback_inverse(_cot(ctx, w), _int_arg(l, "pbinv"))),
    "gp1": (2, lambda ctx, a, b: cotangent.graded_poisson_1(_cot(ctx, a), _cot(ctx, b))),
    "gp2": (2, lambda ctx, a, b: cotangent.graded_poisson_2(_cot(ctx, a), _cot(ctx, b))),
    "I": (0, lambda ctx: cotangent.vertical_euler(ctx.cotangent)),
    "P": (1, lambda ctx, w: cotangent.poincare_primitive(ctx.as_field(w))),
    "nabla": (1, lambda ctx, A: connection.cov_exterior_diff(ctx.conn, ctx.as_field(A, ctx.base))),
    "dg": (1, lambda ctx, A: connection.delta_g(ctx.conn.metric, ctx.as_field(A, ctx.base))),
    "dgp": (1, lambda ctx, A: connection.delta_g_prime(ctx.conn.metric, ctx.as_field(A, ctx.base))),
    "Dop": (1, lambda ctx, S: connection.schouten_with_metric_defect(ctx.conn, ctx.as_field(S, ctx.base))),
    "NB": (2, lambda ctx, A, B: connection.nabla_bracket(ctx.conn, ctx.as_field(A, ctx.base), ctx.as_field(B, ctx.base))),
}


def _binary(ctx, op, a, b, where):
    numbers = not isinstance(a, MixedField) and not isinstance(b, MixedField)
    if op == "/":
        if isinstance(b, MixedField):
            raise BadValence(f"Division by a field at offset {where}")
        if b == 0:
            raise BadValence(f"Division by zero at offset {where}")
        return a / b if numbers else a.scale(1 / b)
    if numbers:
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        return a * b
    if op in "+-":
        chart = a.chart if isinstance(a, MixedField) else b.chart
        a, b = ctx.unify(ctx.as_field(a, chart), ctx.as_field(b, chart))
        return a + b if op == "+" else a - b
    if not isinstance(a, MixedField):
        return b.scale(a)
    if not isinstance(b, MixedField):
        return a.scale(b)
    a, b = ctx.unify(a, b)
    return a * b


def _evaluate(node, ctx):
    if node.kind == "literal":
        return Fraction(int(node.value))
    if node.kind == "symbol":
        return ctx.resolve(node.value, node.position)
    op = node.value
    if op == "()":
        return _evaluate(node.args[0], ctx)
    if op == "neg":
        value = _evaluate(node.args[0], ctx)
        return -value
    if op == "^" and node.args[1].kind == "literal":
        base = _evaluate(node.args[0], ctx)
        n = int(node.args[1].value)
        if not isinstance(base, MixedField):
            return base ** n
        result = MixedField.from_polynomial(base.chart, 1)
        for _ in range(n):
            result = result * base
        return result
    if op in OPERATORS:
        arity, fn = OPERATORS[op]
        if len(node.args) != arity:
            raise ArityError(f"{op} takes {arity} argument(s), got {len(node.args)}")
        return fn(ctx, *[_evaluate(a, ctx) for a in node.args])
    left, right = (_evaluate(a, ctx) for a in node.args)
    return _binary(ctx, op, left, right, node.position)


def evaluate_expression(ast, environment=None, context=None):
    """Evaluate an AST (or expression text) to a MixedField."""
    if isinstance(ast, str):
        ast = parse_expression(ast)
    if context is None:
        charts = [v.chart for v in (environment or {}).values()]
        m = charts[0].base_dimension if charts else 2
        context = EvalContext.for_dimension(m, environment=environment)
    elif environment:
        context.environment.update(environment)
    return context.as_field(_evaluate(ast, context))


def load_environment(filepath, context):
    """Bind the names of a JSON document {name: expression text} in order."""
    try:
        with open(filepath, 'r') as f:
            document = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise FnsError(f"cannot read environment file {filepath}: {e}") from e
    for name, text in document.items():
        context.environment[name] = evaluate_expression(text, context=context)
        logger.debug("Bound %s = %s", name, context.environment[name])
    return context.environment
