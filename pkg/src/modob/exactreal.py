"""Real numbers as rational vectors over a declared basis.

A :class:`RealBasis` names a finite family of reals assumed linearly
independent over Q, optionally with numeric anchors, and a product table
sending each pair of symbols to a rational vector over a second declared
basis (the products basis). Nothing here tries to prove independence; the
declaration is the user's.
"""
from __future__ import annotations

import ast
import math
import operator
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

import mpmath

from .errors import MissingAnchor, ModobError, ProductIncomplete

BASIS_FORMAT_HEADER = "modob-basis 1"
GUARD_BITS = 32


@dataclass(frozen=True)
class BigFloat:
    """An mpmath float together with the absolute accuracy it was computed to.

    ``precision_bits = p`` promises ``|value - true value| < 2**(4 - p)``.
    Arithmetic keeps the weaker of the two operand precisions.
    """

    value: mpmath.mpf
    precision_bits: int

    def _combine(self, other, op):
        if isinstance(other, BigFloat):
            prec = min(self.precision_bits, other.precision_bits)
            other = other.value
        else:
            prec = self.precision_bits
        with mpmath.workprec(_working_bits(prec, self.value, other)):
            return BigFloat(op(self.value, other), prec)

    def __add__(self, other):
        return self._combine(other, operator.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, operator.sub)

    def __mul__(self, other):
        return self._combine(other, operator.mul)

    __rmul__ = __mul__

    def __neg__(self):
        return BigFloat(-self.value, self.precision_bits)

    def __abs__(self):
        return BigFloat(abs(self.value), self.precision_bits)

    def __float__(self):
        return float(self.value)

    def is_zero(self) -> bool:
        """Zero within the accuracy guarantee."""
        return abs(self.value) < mpmath.mpf(2) ** (4 - self.precision_bits)

    def __str__(self) -> str:
        digits = max(1, int(self.precision_bits * math.log10(2)))
        return mpmath.nstr(self.value, digits)


def _working_bits(prec: int, *values) -> int:
    mag = 0
    for v in values:
        try:
            if v:
                mag = max(mag, int(mpmath.mag(v)))
        except (TypeError, ValueError):
            pass
    return prec + GUARD_BITS + max(mag, 0)


# -- closed-form numeric expressions ------------------------------------------------

_FUNCS = {
    "log": mpmath.log,
    "ln": mpmath.log,
    "exp": mpmath.exp,
    "sqrt": mpmath.sqrt,
    "cbrt": mpmath.cbrt,
}
_CONSTS = {"pi": lambda: mpmath.pi, "e": lambda: mpmath.e, "phi": lambda: mpmath.phi}
_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}


def _eval_node(node, env):
    if isinstance(node, ast.Expression):
        return _eval_node(node.body, env)
    if isinstance(node, ast.Constant) and isinstance(node.value, int):
        return mpmath.mpf(node.value)
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_node(node.left, env), _eval_node(node.right, env))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_node(node.operand, env)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.Name) and node.id in env:
        return mpmath.mpf(env[node.id])
    if isinstance(node, ast.Name) and node.id in _CONSTS:
        return +_CONSTS[node.id]()
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS:
        if len(node.args) != 1 or node.keywords:
            raise ValueError(f"{node.func.id} takes exactly one argument")
        return _FUNCS[node.func.id](_eval_node(node.args[0], env))
    raise ValueError(f"unsupported expression element: {ast.dump(node)}")


# decimal literals are read from source text, never through a binary float
_DECIMAL = re.compile(r"(?<![\w.])(\d+\.\d*|\.\d+|\d+(?:\.\d*)?[eE][-+]?\d+)")


@lru_cache(maxsize=4096)
def _eval_expression_cached(text: str, bits: int) -> mpmath.mpf:
    literals: dict[str, str] = {}

    def stash(m):
        key = f"_dec{len(literals)}"
        literals[key] = m.group(0)
        return key

    tree = ast.parse(_DECIMAL.sub(stash, text.replace("^", "**")), mode="eval")
    with mpmath.workprec(bits):
        return +_eval_node(tree, literals)


def eval_expression(text: str, prec: int) -> BigFloat:
    """Evaluate a closed-form real like ``"sqrt(2)*log(2)"`` or ``"0.6931"``.

    Supports ``+ - * / ** ^``, ``log exp sqrt cbrt`` and ``pi e phi``.
    """
    probe = _eval_expression_cached(text.strip(), 64)
    bits = _working_bits(prec, probe)
    return BigFloat(_eval_expression_cached(text.strip(), bits), prec)


# -- bases and exact reals -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RealBasis:
    """Declared basis. ``product_table`` keys are ``(i, j)`` with ``i <= j``."""

    names: tuple[str, ...]
    anchors: tuple[str | None, ...] = ()
    products: "RealBasis | None" = None
    product_table: Mapping[tuple[int, int], tuple[Fraction, ...]] = field(default_factory=dict)

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate basis symbols in {self.names}")
        if not self.anchors:
            object.__setattr__(self, "anchors", (None,) * len(self.names))
        if len(self.anchors) != len(self.names):
            raise ValueError("one anchor slot per symbol is required")

    @classmethod
    def build(
        cls,
        names: Sequence[str],
        anchors: Mapping[str, str] | None = None,
        products: "RealBasis | None" = None,
        table: Mapping[tuple, Sequence] | None = None,
    ) -> "RealBasis":
        """Construct from symbol names; table keys may be indices or names,
        in either order (both orders must then agree)."""
        names = tuple(names)
        anchors = anchors or {}
        unknown = set(anchors) - set(names)
        if unknown:
            raise ValueError(f"anchors for undeclared symbols: {sorted(unknown)}")
        index = {n: i for i, n in enumerate(names)}
        normalized: dict[tuple[int, int], tuple[Fraction, ...]] = {}
        for key, vec in (table or {}).items():
            if products is None:
                raise ValueError("a product table needs a products basis")
            i, j = (index[k] if isinstance(k, str) else int(k) for k in key)
            vec = tuple(Fraction(v) for v in vec)
            if len(vec) != len(products.names):
                raise ValueError(f"product ({names[i]},{names[j]}) has wrong length")
            a, b = min(i, j), max(i, j)
            if (a, b) in normalized and normalized[(a, b)] != vec:
                raise ValueError(f"product table is not symmetric at ({names[a]},{names[b]})")
            normalized[(a, b)] = vec
        return cls(names, tuple(anchors.get(n) for n in names), products, normalized)

    def __len__(self) -> int:
        return len(self.names)

    @property
    def product_complete(self) -> bool:
        n = len(self.names)
        return self.products is not None and all(
            (i, j) in self.product_table for i in range(n) for j in range(i, n)
        )

    def product(self, i: int, j: int) -> tuple[Fraction, ...]:
        key = (min(i, j), max(i, j))
        if key not in self.product_table:
            raise ProductIncomplete(f"no product entry for ({self.names[i]}, {self.names[j]})")
        return self.product_table[key]

    def anchor(self, i: int, prec: int) -> BigFloat:
        expr = self.anchors[i]
        if expr is None:
            raise MissingAnchor(f"symbol {self.names[i]!r} has no numeric anchor")
        return eval_expression(expr, prec)

    def element(self, coords: Sequence) -> "ExactReal":
        return ExactReal(self, tuple(Fraction(c) for c in coords))

    def symbol(self, name: str) -> "ExactReal":
        i = self.names.index(name)
        return self.element([int(k == i) for k in range(len(self))])

    def zero(self) -> "ExactReal":
        return self.element([0] * len(self))

    def validate_anchors(self, prec: int = 128) -> float:
        """Check anchor(i)*anchor(j) against the numeric value of each table
        entry; raise if any discrepancy reaches ``2**(-prec/2)``.

        Returns the largest discrepancy found (entries lacking anchors are skipped).
        """
        worst = mpmath.mpf(0)
        threshold = mpmath.mpf(2) ** (-prec / 2)
        for (i, j), vec in self.product_table.items():
            try:
                lhs = self.anchor(i, prec) * self.anchor(j, prec)
                rhs = eval_numeric(ExactReal(self.products, vec), prec)
            except MissingAnchor:
                continue
            diff = abs((lhs - rhs).value)
            worst = max(worst, diff)
            if diff >= threshold:
                raise ModobError(
                    f"anchor inconsistency at ({self.names[i]},{self.names[j]}): |diff| = {mpmath.nstr(diff, 5)}"
                )
        return float(worst)


@dataclass(frozen=True)
class ExactReal:
    basis: RealBasis
    coords: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.coords) != len(self.basis):
            raise ValueError("coordinate length must equal basis size")

    def _check(self, other: "ExactReal"):
        if other.basis is not self.basis:
            raise ValueError("exact reals over different bases")

    def __add__(self, other):
        if other == 0:
            return self
        self._check(other)
        return ExactReal(self.basis, tuple(a + b for a, b in zip(self.coords, other.coords)))

    __radd__ = __add__

    def __neg__(self):
        return ExactReal(self.basis, tuple(-a for a in self.coords))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, ExactReal):
            return multiply(self, other)
        c = Fraction(other)
        return ExactReal(self.basis, tuple(c * a for a in self.coords))

    def __rmul__(self, other):
        return self * other

    def __truediv__(self, other):
        return self * (1 / Fraction(other))

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)) and other == 0:
            return self.is_zero()
        if not isinstance(other, ExactReal):
            return NotImplemented
        return self.basis is other.basis and self.coords == other.coords

    def __hash__(self):
        return hash((id(self.basis), self.coords))

    def is_zero(self) -> bool:
        return not any(self.coords)

    def to_json(self) -> list[str]:
        return [str(c) for c in self.coords]

    @classmethod
    def from_json(cls, basis: RealBasis, data: Sequence[str]) -> "ExactReal":
        return cls(basis, tuple(Fraction(s) for s in data))

    def __str__(self) -> str:
        terms = [f"{c}*{n}" for c, n in zip(self.coords, self.basis.names) if c]
        return " + ".join(terms) if terms else "0"


def eval_numeric(x: ExactReal, prec: int) -> BigFloat:
    """Sum of ``coord_i * anchor_i`` with absolute error below ``2**(4 - prec)``."""
    used = [i for i, c in enumerate(x.coords) if c]
    if not used:
        return BigFloat(mpmath.mpf(0), prec)
    # first pass sizes the working precision so cancellation cannot eat the guard bits
    coarse = [x.basis.anchor(i, 64).value for i in used]
    scale = sum((abs(v) + 1) * abs(x.coords[i].numerator) / x.coords[i].denominator for i, v in zip(used, coarse))
    bits = _working_bits(prec, scale) + len(used).bit_length()
    with mpmath.workprec(bits):
        total = mpmath.mpf(0)
        for i in used:
            c = x.coords[i]
            total += x.basis.anchor(i, bits).value * c.numerator / c.denominator
    return BigFloat(total, prec)


def multiply(x: ExactReal, y: ExactReal) -> ExactReal:
    """Bilinear product landing in the products basis."""
    x._check(y)
    basis = x.basis
    if not basis.product_complete:
        raise ProductIncomplete("basis is product-incomplete; multiplication rejected")
    out = [Fraction(0)] * len(basis.products)
    for i, a in enumerate(x.coords):
        if not a:
            continue
        for j, b in enumerate(y.coords):
            if not b:
                continue
            ab = a * b
            for k, v in enumerate(basis.product(i, j)):
                if v:
                    out[k] += ab * v
    return ExactReal(basis.products, tuple(out))


# -- text formats -----------------------------------------------------------------------

_TERM = re.compile(
    r"\s*([+-])?\s*(?:(\d+(?:/\d+)?)\s*\*?\s*)?([A-Za-z_][A-Za-z0-9_]*)?\s*(?:/\s*(\d+))?\s*"
)


def parse_linear(text: str, basis: RealBasis) -> ExactReal:
    """Parse a rational linear combination such as ``"L/3"`` or ``"2*L - 1/2 M"``."""
    coords = [Fraction(0)] * len(basis)
    pos, first = 0, True
    text = text.strip()
    if not text:
        raise ValueError("empty linear expression")
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse {text!r} at position {pos}")
        sign, coef, name, den = m.groups()
        if not first and sign is None:
            raise ValueError(f"missing operator in {text!r} at position {pos}")
        if coef is None and name is None:
            raise ValueError(f"empty term in {text!r}")
        value = Fraction(coef) if coef else Fraction(1)
        if den:
            value /= int(den)
        if sign == "-":
            value = -value
        if name is None:
            raise ValueError(f"constant term {coef!r} is not a basis element")
        if name not in basis.names:
            raise ValueError(f"unknown symbol {name!r}; basis has {list(basis.names)}")
        coords[basis.names.index(name)] += value
        pos, first = m.end(), False
    return ExactReal(basis, tuple(coords))


def parse_basis(text: str) -> RealBasis:
    """Parse the versioned basis file format (see README)."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or lines[0] != BASIS_FORMAT_HEADER:
        raise ValueError(f"basis file must start with {BASIS_FORMAT_HEADER!r}")
    symbols: dict[str, str | None] = {}
    psymbols: dict[str, str | None] = {}
    rows: list[tuple[str, str, list[str]]] = []
    for ln in lines[1:]:
        kind, _, rest = ln.partition(" ")
        if kind in ("symbol", "product-symbol"):
            name, _, anchor = rest.partition("=")
            target = symbols if kind == "symbol" else psymbols
            target[name.strip()] = anchor.strip() or None
        elif kind == "product":
            lhs, _, rhs = rest.partition("=")
            a, b = lhs.split()
            rows.append((a, b, rhs.split()))
        else:
            raise ValueError(f"unknown basis directive {kind!r}")
    products = None
    if psymbols:
        products = RealBasis.build(list(psymbols), {k: v for k, v in psymbols.items() if v})
    table = {(a, b): [Fraction(t) for t in vec] for a, b, vec in rows}
    return RealBasis.build(list(symbols), {k: v for k, v in symbols.items() if v}, products, table)


def format_basis(basis: RealBasis) -> str:
    out = [BASIS_FORMAT_HEADER]
    for name, anchor in zip(basis.names, basis.anchors):
        out.append(f"symbol {name}" + (f" = {anchor}" if anchor else ""))
    if basis.products is not None:
        for name, anchor in zip(basis.products.names, basis.products.anchors):
            out.append(f"product-symbol {name}" + (f" = {anchor}" if anchor else ""))
    for (i, j), vec in sorted(basis.product_table.items()):
        out.append(f"product {basis.names[i]} {basis.names[j]} = " + " ".join(str(v) for v in vec))
    return "\n".join(out) + "\n"


def load_basis(path) -> RealBasis:
    with open(path) as fh:
        return parse_basis(fh.read())
