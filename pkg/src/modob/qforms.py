"""Integral bilinear and quadratic forms on Z^n.

A quadratic form is stored by its integer coefficients: ``diag[i]`` for
``v_i^2`` and ``cross[(i, j)]`` (``i < j``) for ``v_i v_j``. With this
storage integrality on the lattice is structural, and the symmetric Gram
matrix (which would need half-integers off the diagonal) never appears.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .abgroup import symmetric_pairs
from .errors import NotAntisymmetric


@dataclass(frozen=True)
class IntegralBilinearForm:
    matrix: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        m = tuple(tuple(int(v) for v in row) for row in self.matrix)
        if any(len(row) != len(m) for row in m):
            raise ValueError("bilinear form matrix must be square")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def zero(cls, n: int) -> "IntegralBilinearForm":
        return cls(tuple((0,) * n for _ in range(n)))

    @property
    def dim(self) -> int:
        return len(self.matrix)

    def __call__(self, x: Sequence, y: Sequence):
        """``B(x, y) = sum_ij x_i B_ij y_j``; works for ints, Fractions or exact reals."""
        total = 0
        for i, xi in enumerate(x):
            if not xi:
                continue
            for j, yj in enumerate(y):
                b = self.matrix[i][j]
                if b and yj:
                    total = total + b * xi * yj
        return total

    def transpose(self) -> "IntegralBilinearForm":
        return IntegralBilinearForm(tuple(zip(*self.matrix)))

    def __add__(self, other: "IntegralBilinearForm") -> "IntegralBilinearForm":
        return IntegralBilinearForm(
            tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.matrix, other.matrix))
        )

    def __neg__(self):
        return IntegralBilinearForm(tuple(tuple(-a for a in r) for r in self.matrix))

    def __sub__(self, other):
        return self + (-other)

    def is_antisymmetric(self) -> bool:
        n = self.dim
        return all(self.matrix[i][j] == -self.matrix[j][i] for i in range(n) for j in range(n))

    def to_json(self):
        return [list(r) for r in self.matrix]


@dataclass(frozen=True)
class IntegralQuadraticForm:
    """``q(v) = sum_i diag[i] v_i^2 + sum_{i<j} cross[i,j] v_i v_j``.

    ``cross`` is a tuple in lexicographic ``(i, j)``, ``i < j`` order.
    """

    diag: tuple[int, ...]
    cross: tuple[int, ...] = ()

    def __post_init__(self):
        n = len(self.diag)
        cross = tuple(int(c) for c in self.cross) or (0,) * (n * (n - 1) // 2)
        if len(cross) != n * (n - 1) // 2:
            raise ValueError(f"expected {n * (n - 1) // 2} cross coefficients, got {len(cross)}")
        object.__setattr__(self, "diag", tuple(int(d) for d in self.diag))
        object.__setattr__(self, "cross", cross)

    @classmethod
    def from_coefficients(cls, n: int, diag: Sequence[int] = (), cross: dict | None = None):
        """Build from a diagonal and a sparse ``{(i, j): c}`` cross map (0-based)."""
        diag = tuple(diag) or (0,) * n
        values = dict.fromkeys(_cross_pairs(n), 0)
        for (i, j), c in (cross or {}).items():
            i, j = min(i, j), max(i, j)
            if i == j:
                raise ValueError("cross terms need i != j; put squares in diag")
            values[(i, j)] += c
        return cls(diag, tuple(values.values()))

    @classmethod
    def zero(cls, n: int) -> "IntegralQuadraticForm":
        return cls((0,) * n)

    @property
    def dim(self) -> int:
        return len(self.diag)

    def cross_coefficient(self, i: int, j: int) -> int:
        if i == j:
            raise ValueError("use diag for square terms")
        i, j = min(i, j), max(i, j)
        n = self.dim
        return self.cross[i * n - i * (i + 1) // 2 + (j - i - 1)]

    def coefficients(self) -> list[int]:
        """Coefficients over ``v_i v_j`` (``i <= j``) in lexicographic order."""
        return [self.diag[i] if i == j else self.cross_coefficient(i, j) for i, j in symmetric_pairs(self.dim)]

    @classmethod
    def from_pair_coefficients(cls, n: int, coeffs: Sequence[int]) -> "IntegralQuadraticForm":
        pairs = symmetric_pairs(n)
        if len(coeffs) != len(pairs):
            raise ValueError(f"expected {len(pairs)} coefficients for n={n}")
        diag = [0] * n
        cross = {}
        for (i, j), c in zip(pairs, coeffs):
            if i == j:
                diag[i] = c
            else:
                cross[(i, j)] = c
        return cls.from_coefficients(n, diag, cross)

    def __call__(self, v: Sequence):
        return evaluate(self, v)

    def __add__(self, other):
        return IntegralQuadraticForm(
            tuple(a + b for a, b in zip(self.diag, other.diag)),
            tuple(a + b for a, b in zip(self.cross, other.cross)),
        )

    def __neg__(self):
        return IntegralQuadraticForm(tuple(-a for a in self.diag), tuple(-a for a in self.cross))

    def __sub__(self, other):
        return self + (-other)

    def is_zero(self) -> bool:
        return not any(self.diag) and not any(self.cross)

    def to_json(self) -> dict:
        return {
            "diag": list(self.diag),
            "cross": [[i + 1, j + 1, c] for (i, j), c in zip(_cross_pairs(self.dim), self.cross) if c],
        }

    def to_literal(self) -> str:
        cross = ",".join(f"({i},{j},{c})" for i, j, c in self.to_json()["cross"])
        return f"diag:[{','.join(map(str, self.diag))}];cross:[{cross}]"


def _cross_pairs(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def quad_of_bilinear(B: IntegralBilinearForm) -> IntegralQuadraticForm:
    """``q(v) = B(v, v)``: diagonal ``B_ii``, cross ``B_ij + B_ji``."""
    m = B.matrix
    n = B.dim
    return IntegralQuadraticForm(
        tuple(m[i][i] for i in range(n)),
        tuple(m[i][j] + m[j][i] for i, j in _cross_pairs(n)),
    )


def polarize(q: IntegralQuadraticForm) -> IntegralBilinearForm:
    """Upper-triangular integral ``B'`` with ``B'(v, v) = q(v)``.

    ``B'_ii = q(e_i)`` and ``B'_ij = q(e_i + e_j) - q(e_i) - q(e_j)`` for ``i < j``.
    """
    n = q.dim
    rows = [[0] * n for _ in range(n)]
    for i in range(n):
        rows[i][i] = q.diag[i]
    for i, j in _cross_pairs(n):
        rows[i][j] = q.cross_coefficient(i, j)
    return IntegralBilinearForm(tuple(map(tuple, rows)))


def antisym_decompose(B: IntegralBilinearForm) -> IntegralBilinearForm:
    """Strictly upper part ``D`` of an antisymmetric ``B``, so ``B = D - D^T``."""
    if not B.is_antisymmetric():
        raise NotAntisymmetric("bilinear form is not antisymmetric")
    n = B.dim
    return IntegralBilinearForm(tuple(tuple(B.matrix[i][j] if j > i else 0 for j in range(n)) for i in range(n)))


@dataclass(frozen=True)
class SymSquareElement:
    """Integer coordinates over ``e_i (.) e_j``, ``i <= j``, lexicographic."""

    dim: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if len(self.coeffs) != self.dim * (self.dim + 1) // 2:
            raise ValueError("SymSquareElement needs n(n+1)/2 coefficients")

    def __add__(self, other):
        return SymSquareElement(self.dim, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    @classmethod
    def generator(cls, n: int, i: int, j: int) -> "SymSquareElement":
        pairs = symmetric_pairs(n)
        k = pairs.index((min(i, j), max(i, j)))
        return cls(n, tuple(int(m == k) for m in range(len(pairs))))


def form_from_symsquare(x: SymSquareElement) -> IntegralQuadraticForm:
    """``e_i (.) e_j`` goes to ``v_i v_j`` (so ``e_i (.) e_i`` to ``v_i^2``)."""
    return IntegralQuadraticForm.from_pair_coefficients(x.dim, x.coeffs)


def symsquare_from_form(q: IntegralQuadraticForm) -> SymSquareElement:
    return SymSquareElement(q.dim, tuple(q.coefficients()))


def evaluate(q: IntegralQuadraticForm, v: Sequence):
    """Exact ``q(v)``.

    Entries of ``v`` may be ints, Fractions, :class:`~modob.exactreal.ExactReal`
    (result over the products basis) or mpmath / BigFloat numbers.
    """
    if len(v) != q.dim:
        raise ValueError(f"vector of length {len(v)} for a form of dimension {q.dim}")
    total = 0
    for (i, j), c in zip(symmetric_pairs(q.dim), q.coefficients()):
        if c and v[i] != 0 and v[j] != 0:
            total = total + (v[i] * v[j]) * c
    return total


# -- literal syntax -------------------------------------------------------------------

_TRIPLE = re.compile(r"\(\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*\)")


def parse_form(text: str) -> IntegralQuadraticForm:
    """Parse ``"diag:[a,b,...];cross:[(i,j,c),...]"`` (1-based indices) or the
    JSON equivalent ``{"diag": [...], "cross": [[i, j, c], ...]}``."""
    text = text.strip()
    if text.startswith("{"):
        data = json.loads(text)
        diag = [int(Fraction(x)) for x in data.get("diag", [])]
        triples = [tuple(map(int, t)) for t in data.get("cross", [])]
    else:
        parts = {}
        for chunk in filter(None, (c.strip() for c in text.split(";"))):
            key, _, body = chunk.partition(":")
            parts[key.strip()] = body.strip()
        unknown = set(parts) - {"diag", "cross"}
        if unknown or "diag" not in parts:
            raise ValueError(f"form literal needs diag:[...] and optional cross:[...], got {text!r}")
        body = parts["diag"].strip("[] ")
        diag = [int(x) for x in body.split(",")] if body else []
        cross_body = parts.get("cross", "[]").strip()
        if not (cross_body.startswith("[") and cross_body.endswith("]")):
            raise ValueError(f"cross terms must be a bracketed list, got {cross_body!r}")
        inner = cross_body[1:-1]
        triples = [tuple(map(int, m.groups())) for m in _TRIPLE.finditer(inner)]
        if _TRIPLE.sub("", inner).replace(",", "").strip():
            raise ValueError(f"cannot parse cross terms {cross_body!r}")
    n = len(diag)
    cross = {}
    for i, j, c in triples:
        if not (1 <= i <= n and 1 <= j <= n) or i == j:
            raise ValueError(f"bad cross index ({i},{j}) for dimension {n}")
        key = (min(i, j) - 1, max(i, j) - 1)
        cross[key] = cross.get(key, 0) + c
    return IntegralQuadraticForm.from_coefficients(n, diag, cross)
