"""Closed-form term expressions in the index variable ``n``.

Parsing, printing and evaluation of term expressions. Evaluation carries two
channels: the plain float value (which may overflow or underflow) and the
natural log of its magnitude, computed structurally so that it stays finite
for terms such as ``2^(-n)`` at ``n = 10**13``.

A third evaluator, :func:`log_ratio`, computes ``log a(m) - log a(n)`` node by
node without ever subtracting two large logarithms, which keeps ratios such as
``a(2n)/a(n)`` accurate to a few ulps even when they sit next to 1/2.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Union

__all__ = [
    "Num",
    "Var",
    "Const",
    "Neg",
    "BinOp",
    "Call",
    "Expr",
    "ExprSyntaxError",
    "DomainError",
    "PositivityError",
    "TermValue",
    "SeriesSpec",
    "parse",
    "to_source",
    "evaluate",
    "eval_term",
    "log_ratio",
    "log_ratio_parts",
    "check_positivity",
]

LN2 = math.log(2.0)
FUNCTIONS = ("ln", "log2", "exp", "sqrt", "abs")
CONSTANTS = {"pi": math.pi, "e": math.e}


# --------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Var, Const, Neg, BinOp, Call]


class ExprSyntaxError(ValueError):
    """Malformed expression; ``offset`` is the byte offset of the bad token."""

    def __init__(self, message: str, offset: int, expected: Iterable[str] = ()):
        self.offset = offset
        self.expected = tuple(sorted(set(expected)))
        detail = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{message} at offset {offset}{detail}")


class DomainError(ArithmeticError):
    """Evaluation left the real domain or produced a non-finite value."""

    def __init__(self, message: str, index: int | None = None):
        self.index = index
        self.message = message
        super().__init__(message if index is None else f"{message} at n={index}")


class PositivityError(DomainError):
    """A term that must be strictly positive was not."""


# --------------------------------------------------------------------------
# Tokenizer / recursive-descent parser

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)


@dataclass
class _Token:
    kind: str  # "num", "name", "op", "end"
    text: str
    offset: int


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(source):
        if source[pos:].strip() == "":
            break
        m = _TOKEN.match(source, pos)
        if m is None or m.end() == pos:
            start = pos + (len(source[pos:]) - len(source[pos:].lstrip()))
            raise ExprSyntaxError(f"unexpected character {source[start]!r}", start)
        kind = m.lastgroup
        tokens.append(_Token(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(_Token("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.pos = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> None:
        if self.tok.text != text or self.tok.kind == "end":
            raise ExprSyntaxError(f"unexpected {self._describe()}", self.tok.offset, [text])
        self.advance()

    def _describe(self) -> str:
        return "end of input" if self.tok.kind == "end" else f"token {self.tok.text!r}"

    def parse(self) -> Expr:
        node = self.expr()
        if self.tok.kind != "end":
            raise ExprSyntaxError(
                f"unexpected {self._describe()}", self.tok.offset, ["+", "-", "*", "/", "^", "end"]
            )
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            return Neg(self.factor())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            # exponent is a power, not a factor: "2^-n" must be written "2^(-n)"
            return BinOp("^", base, self.power())
        return base

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            value = float(tok.text)
            if not math.isfinite(value):
                raise ExprSyntaxError(f"number {tok.text!r} out of range", tok.offset)
            self.advance()
            return Num(value)
        if tok.kind == "name":
            self.advance()
            if tok.text == "n":
                return Var()
            if tok.text in CONSTANTS:
                return Const(tok.text)
            if tok.text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(tok.text, arg)
            raise ExprSyntaxError(f"unknown identifier {tok.text!r}", tok.offset)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        raise ExprSyntaxError(
            f"unexpected {self._describe()}",
            tok.offset,
            ["NUMBER", "n", "pi", "e", "(", *FUNCTIONS],
        )


def parse(source: str) -> Expr:
    """Parse a term expression into an AST.

    Raises :class:`ExprSyntaxError` carrying the offending offset.
    """
    if not source or not source.strip():
        raise ExprSyntaxError("empty expression", 0, ["NUMBER", "n", "("])
    return _Parser(source).parse()


def _fmt_num(x: float) -> str:
    if x.is_integer() and abs(x) < 1e16:
        return str(int(x))
    return repr(x)


def to_source(node: Expr) -> str:
    """Print an AST back to grammar-valid source.

    Compound operands are always parenthesized, so the output re-parses to the
    same tree regardless of precedence.
    """

    def wrap(child: Expr) -> str:
        text = to_source(child)
        return f"({text})" if isinstance(child, (BinOp, Neg)) else text

    if isinstance(node, Num):
        return _fmt_num(node.value)
    if isinstance(node, Var):
        return "n"
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Neg):
        return f"-{wrap(node.arg)}"
    if isinstance(node, BinOp):
        return f"{wrap(node.left)}{node.op}{wrap(node.right)}"
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


# --------------------------------------------------------------------------
# Dual-channel evaluation
#
# Every node evaluates to (value, log|value|, sign). ``value`` is the plain
# float and may be 0.0/inf after under/overflow; the log channel is built
# structurally and stays finite.


def _reliable(v: float, lg: float) -> bool:
    # trustworthy iff an exact zero or a finite, non-underflowed float
    if v == 0.0:
        return lg == -math.inf
    return math.isfinite(v) and abs(v) >= 1e-300


def _from_value(v: float) -> tuple[float, float, int]:
    if v == 0.0:
        return 0.0, -math.inf, 0
    return v, math.log(abs(v)), 1 if v > 0 else -1


def _exp_signed(lg: float, s: int) -> float:
    try:
        return s * math.exp(lg)
    except OverflowError:
        return s * math.inf


def _signed_logsum(terms: list[tuple[float, int]]) -> tuple[float, int]:
    """log|sum s_i e^{lg_i}| and its sign, without leaving the log domain."""
    live = [(lg, s) for lg, s in terms if s != 0 and lg != -math.inf]
    if not live:
        return -math.inf, 0
    top = max(lg for lg, _ in live)
    acc = math.fsum(s * math.exp(lg - top) for lg, s in live)
    if acc == 0.0:
        return -math.inf, 0
    return top + math.log(abs(acc)), 1 if acc > 0 else -1


def _to_real(v: float, lg: float, s: int) -> float:
    if math.isfinite(v):
        return v
    return _exp_signed(lg, s)


def evaluate(node: Expr, n: float) -> tuple[float, float, int]:
    """Evaluate ``node`` at index ``n``; returns ``(value, log|value|, sign)``."""
    if isinstance(node, Num):
        return _from_value(node.value)
    if isinstance(node, Var):
        return _from_value(float(n))
    if isinstance(node, Const):
        return _from_value(CONSTANTS[node.name])
    if isinstance(node, Neg):
        v, lg, s = evaluate(node.arg, n)
        return -v, lg, -s
    if isinstance(node, Call):
        return _eval_call(node.func, evaluate(node.arg, n))
    if isinstance(node, BinOp):
        return _eval_binop(node.op, evaluate(node.left, n), evaluate(node.right, n))
    raise TypeError(f"not an expression node: {node!r}")


def _eval_binop(op, a, b):
    va, la, sa = a
    vb, lb, sb = b
    if op in "+-":
        if op == "-":
            vb, sb = -vb, -sb
        if _reliable(va, la) and _reliable(vb, lb):
            return _from_value(va + vb)
        lg, s = _signed_logsum([(la, sa), (lb, sb)])
        return _exp_signed(lg, s), lg, s
    if op == "*":
        s = sa * sb
        lg = la + lb if s else -math.inf
        v = va * vb
        if math.isnan(v):
            v = _exp_signed(lg, s)
        return v, lg, s
    if op == "/":
        if sb == 0:
            raise DomainError("division by zero")
        s = sa * sb
        lg = la - lb if sa else -math.inf
        if vb == 0.0 or not math.isfinite(vb) or not math.isfinite(va):
            v = _exp_signed(lg, s)
        else:
            v = va / vb
        return v, lg, s
    if op == "^":
        e = _to_real(vb, lb, sb)
        if not math.isfinite(e):
            raise DomainError("non-finite exponent")
        if sa == 0:
            if e > 0:
                return 0.0, -math.inf, 0
            raise DomainError("zero raised to a non-positive power")
        if sa < 0:
            if not float(e).is_integer():
                raise DomainError("negative base with non-integer exponent")
            s = -1 if int(e) % 2 else 1
        else:
            s = 1
        lg = e * la
        try:
            v = math.pow(va, e) if math.isfinite(va) and va != 0.0 else _exp_signed(lg, s)
        except OverflowError:
            v = s * math.inf
        if v == 0.0 and lg != -math.inf:
            v = 0.0
        return v, lg, s
    raise ValueError(op)


def _eval_call(func, a):
    v, lg, s = a
    if func in ("ln", "log2"):
        if s <= 0:
            raise DomainError(f"{func} of a non-positive quantity")
        out = lg if func == "ln" else lg / LN2
        return _from_value(out)
    if func == "exp":
        x = _to_real(v, lg, s)
        if math.isnan(x) or x == math.inf:
            raise DomainError("exp overflow")
        try:
            ev = math.exp(x)
        except OverflowError:
            ev = math.inf
        return ev, x, 1
    if func == "sqrt":
        if s < 0:
            raise DomainError("sqrt of a negative quantity")
        if s == 0:
            return 0.0, -math.inf, 0
        if math.isfinite(v) and v != 0.0:
            return math.sqrt(v), lg / 2, 1
        return _exp_signed(lg / 2, 1), lg / 2, 1
    if func == "abs":
        return abs(v), lg, abs(s)
    raise ValueError(func)


# --------------------------------------------------------------------------
# Structural log-differences
#
# _delta returns (value, log|value|, sign, dlog, dvalue) where
# dlog = log|f(m)| - log|f(n)| and dvalue = f(m) - f(n). dlog is kept as a
# pair (k, r) meaning k*ln2 + r, so that the exact doubling n -> 2n cancels
# exactly against ln 2 downstream. Sums combine the children's relative
# changes, logs of logs use log1p, so no step subtracts two nearly equal
# large numbers.


class _SignChange(Exception):
    """A subexpression changes sign between the two indices; the structural
    difference does not apply."""


ZERO_D = (0.0, 0.0)


def _flat(d: tuple[float, float]) -> float:
    k, r = d
    return k * LN2 + r if k else r


def _delta(node: Expr, n: int, m: int):
    if isinstance(node, (Num, Const)):
        v, lg, s = evaluate(node, n)
        return v, lg, s, ZERO_D, 0.0
    if isinstance(node, Var):
        v, lg, s = _from_value(float(n))
        if m >= 2 * n:
            d = (1.0, math.log1p((m - 2 * n) / (2 * n)))
        else:
            d = (0.0, math.log1p((m - n) / n))
        return v, lg, s, d, float(m - n)
    if isinstance(node, Neg):
        v, lg, s, d, dv = _delta(node.arg, n, m)
        return -v, lg, -s, d, -dv
    if isinstance(node, Call):
        return _delta_call(node.func, _delta(node.arg, n, m))
    if isinstance(node, BinOp):
        return _delta_binop(node.op, _delta(node.left, n, m), _delta(node.right, n, m))
    raise TypeError(f"not an expression node: {node!r}")


def _dvalue(v, lg, s, d):
    dlg = _flat(d)
    if dlg == 0.0:
        return 0.0
    if not s:
        return 0.0
    try:
        return _exp_signed(lg, s) * math.expm1(dlg)
    except OverflowError:
        return math.copysign(math.inf, s * dlg)


def _delta_binop(op, a, b):
    va, la, sa, da, dva = a
    vb, lb, sb, db, dvb = b
    v, lg, s = _eval_binop(op, (va, la, sa), (vb, lb, sb))
    if op in "+-":
        sign_b = -1 if op == "-" else 1
        if s == 0:
            raise _SignChange
        parts = [(si * s * math.exp(lgi - lg), di) for lgi, si, di in ((la, sa, da), (lb, sign_b * sb, db)) if si]
        # factor out the ln2-multiple of the heaviest child
        k = max(parts, key=lambda p: abs(p[0]))[1][0]
        rel = math.fsum(w * math.expm1((dk - k) * LN2 + dr) for w, (dk, dr) in parts if (dk - k) or dr)
        if rel <= -1.0:
            raise _SignChange
        d = (k, math.log1p(rel))
        return v, lg, s, d, _dvalue(v, lg, s, d)
    if op == "*":
        d = (da[0] + db[0], da[1] + db[1])
    elif op == "/":
        d = (da[0] - db[0], da[1] - db[1])
    elif op == "^":
        e = _to_real(vb, lb, sb)
        if sa < 0 and dvb != 0.0:
            e_m = e + dvb
            if not float(e_m).is_integer() or int(e_m) % 2 != int(e) % 2:
                raise _SignChange
        d = (e * da[0], e * da[1])
        if dvb != 0.0:
            d = (d[0], d[1] + dvb * (la + _flat(da)))
    else:
        raise ValueError(op)
    return v, lg, s, d, _dvalue(v, lg, s, d)


def _delta_call(func, a):
    va, la, sa, da, dva = a
    v, lg, s = _eval_call(func, (va, la, sa))
    if func in ("ln", "log2"):
        # value = la (scaled); its change is da, its relative change da/la
        scale = 1.0 if func == "ln" else 1.0 / LN2
        if la == 0.0:
            raise _SignChange
        change = _flat(da)
        rel = change / la
        if rel <= -1.0:
            raise _SignChange
        return v, lg, s, (0.0, math.log1p(rel)), change * scale
    if func == "exp":
        d = (0.0, dva)
        return v, lg, s, d, _dvalue(v, lg, s, d)
    if func == "sqrt":
        d = (da[0] / 2, da[1] / 2)
        return v, lg, s, d, _dvalue(v, lg, s, d)
    if func == "abs":
        return v, lg, s, da, _dvalue(v, lg, s, da)
    raise ValueError(func)


def _logs_positive(node: Expr, n: int) -> bool:
    """True when every ln/log2 inside ``node`` evaluates to a positive number at n."""
    if isinstance(node, Call):
        if not _logs_positive(node.arg, n):
            return False
        if node.func in ("ln", "log2"):
            _, lg, s = evaluate(node.arg, n)
            return s > 0 and lg > 0
        return True
    if isinstance(node, Neg):
        return _logs_positive(node.arg, n)
    if isinstance(node, BinOp):
        return _logs_positive(node.left, n) and _logs_positive(node.right, n)
    return True


# --------------------------------------------------------------------------
# Series specs


@dataclass(frozen=True)
class TermValue:
    value: float  # may be 0.0 or inf when outside the float range
    log: float


@dataclass(frozen=True)
class SeriesSpec:
    """An evaluable positive-term sequence ``a(n)``.

    ``first_index`` defaults to the smallest ``n`` in 1..16 where evaluation is
    finite and every logarithm in the expression is already positive (so
    ``1/(n*ln(n)^2)`` starts at 2 and ``1/(n*ln(n)*ln(ln(n)))`` at 3).
    """

    ast: Expr
    source_text: str
    first_index: int = field(default=1)

    @classmethod
    def from_source(cls, source: str, first_index: int | None = None) -> "SeriesSpec":
        ast = parse(source)
        if first_index is None:
            first_index = _probe_first_index(ast)
        if first_index < 1:
            raise ValueError("first_index must be a positive integer")
        return cls(ast, source, first_index)

    def term(self, n: int) -> TermValue:
        return eval_term(self, n)

    def log_ratio(self, n: int, m: int) -> float:
        return log_ratio(self, n, m)

    def log_ratio_parts(self, n: int, m: int) -> tuple[float, float]:
        return log_ratio_parts(self, n, m)

    def to_json(self) -> dict:
        return {"term": self.source_text, "first_index": self.first_index}


def _probe_first_index(ast: Expr, limit: int = 16) -> int:
    for n in range(1, limit + 1):
        try:
            v, lg, s = evaluate(ast, n)
        except (DomainError, ZeroDivisionError, OverflowError, ValueError):
            continue
        if math.isfinite(lg) and _logs_positive(ast, n):
            return n
    raise DomainError(f"expression is not evaluable for any n in 1..{limit}")


def eval_term(spec: SeriesSpec, n: int) -> TermValue:
    """Return ``a(n)`` with its log-magnitude channel.

    Raises :class:`PositivityError` if the term is not strictly positive and
    :class:`DomainError` if it cannot be evaluated.
    """
    if n < spec.first_index:
        raise ValueError(f"n={n} precedes first_index={spec.first_index}")
    try:
        v, lg, s = evaluate(spec.ast, n)
    except DomainError as exc:
        raise DomainError(str(exc), n) from None
    except (ZeroDivisionError, OverflowError, ValueError) as exc:
        raise DomainError(str(exc), n) from None
    if s <= 0:
        raise PositivityError("non-positive term", n)
    if math.isnan(lg) or lg in (math.inf, -math.inf) or math.isnan(v):
        raise DomainError("non-finite term", n)
    return TermValue(v, lg)


def log_ratio_parts(spec: SeriesSpec, n: int, m: int) -> tuple[float, float]:
    """``log a(m) - log a(n)`` as ``(k, r)`` with value ``k*ln2 + r``.

    Computed structurally, without large-log cancellation; ``k`` collects the
    exact ln 2 contributions of the doubling ``n -> 2n``. Falls back to the
    difference of the two log channels (``k = 0``) when a subexpression changes
    sign in between, e.g. ``(-1)^n``.
    """
    try:
        v, lg, s, d, _ = _delta(spec.ast, n, m)
    except _SignChange:
        return 0.0, eval_term(spec, m).log - eval_term(spec, n).log
    except DomainError as exc:
        raise DomainError(exc.message, n) from None
    except (ZeroDivisionError, OverflowError, ValueError) as exc:
        raise DomainError(str(exc), n) from None
    if s <= 0:
        raise PositivityError("non-positive term", n)
    if not (math.isfinite(d[0]) and math.isfinite(d[1])):
        raise DomainError("non-finite log-ratio", n)
    return d


def log_ratio(spec: SeriesSpec, n: int, m: int) -> float:
    """``log a(m) - log a(n)``; see :func:`log_ratio_parts`."""
    return _flat(log_ratio_parts(spec, n, m))


def check_positivity(spec, schedule: Iterable[int], doubled: bool = True) -> int | None:
    """First index at which the term is not finite and positive, or ``None``.

    With ``doubled`` the successor ``n+1`` and the second-ratio partners
    ``2n``, ``2n+1`` of every scheduled index are checked as well.
    """
    indices = list(schedule)
    if not indices:
        raise ValueError("schedule must be nonempty")
    for n in indices:
        probe = (n, n + 1, 2 * n, 2 * n + 1) if doubled else (n,)
        for k in probe:
            try:
                spec.term(k)
            except DomainError:
                return k
    return None
