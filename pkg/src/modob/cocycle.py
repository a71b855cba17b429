"""Explicit cochains on tori ``K = T^d`` evaluated at rational points.

The circle is modeled additively as Q/Z, so a point of ``T^d`` is a vector
of Fractions in ``[0, 1)`` and every value in the cocycle path is an exact
rational. The section ``s`` is the fractional part, ``ds(h, k) =
s(h) + s(k) - s(h + k)`` is the integer-valued carry, and for an integral
bilinear form ``B`` the obstruction cocycle is ``c(g, h, k) =
B(s(g), ds(h, k)) mod 1`` with real lift ``C`` and Bockstein representative
``dC = B(ds ^ ds)``.

Cochains whose values at ``(1/N)``-torsion points can be tabulated in bulk
carry a ``grid_table`` hook returning ``N * value`` as an integer numpy
array; :func:`verify_cocycle` uses it for exhaustive checks.
"""
from __future__ import annotations

import itertools
import os
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import PairingMismatch
from .qforms import IntegralBilinearForm

REAL, INT, QZ = "R", "Z", "Q/Z"
DEFAULT_LIMIT = 10**6


def table_limit() -> int:
    """Dense table size cap; the ``MODOB_LIMIT`` environment variable overrides it."""
    return int(os.environ.get("MODOB_LIMIT", DEFAULT_LIMIT))


@dataclass(frozen=True)
class TorusPoint:
    coords: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(Fraction(c) % 1 for c in self.coords))

    @classmethod
    def zero(cls, d: int) -> "TorusPoint":
        return cls((0,) * d)

    @classmethod
    def from_grid(cls, index: Sequence[int], N: int) -> "TorusPoint":
        return cls(tuple(Fraction(i, N) for i in index))

    @property
    def d(self) -> int:
        return len(self.coords)

    def __add__(self, other: "TorusPoint") -> "TorusPoint":
        return TorusPoint(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __neg__(self):
        return TorusPoint(tuple(-a for a in self.coords))

    def __str__(self):
        return "(" + ",".join(str(c) for c in self.coords) + ")"


def section(g: TorusPoint) -> tuple[Fraction, ...]:
    """Representative in ``[0, 1)^d`` (the stored coordinates)."""
    return g.coords


def section_coboundary(h: TorusPoint, k: TorusPoint) -> tuple[int, ...]:
    """``s(h) + s(k) - s(h + k)``, a vector in ``{0, 1}^d``."""
    if h.d != k.d:
        raise ValueError("points of different dimension")
    return tuple(int(a + b >= 1) for a, b in zip(h.coords, k.coords))


# -- value arithmetic ------------------------------------------------------------------


def _add(a, b):
    if isinstance(a, tuple):
        return tuple(x + y for x, y in zip(a, b))
    return a + b


def _scale(c: int, a):
    if isinstance(a, tuple):
        return tuple(c * x for x in a)
    return c * a


def _reduce(ring: str, v):
    if ring != QZ:
        return v
    return tuple(Fraction(x) % 1 for x in v) if isinstance(v, tuple) else Fraction(v) % 1


def _zero_like(v):
    return tuple(0 for _ in v) if isinstance(v, tuple) else 0


@dataclass(frozen=True)
class Cochain:
    """A function ``(T^d)^degree -> ring``.

    ``func`` takes ``degree`` :class:`TorusPoint` arguments and returns a
    scalar or a vector (tuple). ``grid_table(N)``, when present, returns the
    integer array of ``N * value`` over all ``degree``-tuples of
    ``(1/N)``-torsion points, indexed by row-major grid coordinates.
    """

    degree: int
    dim: int
    ring: str
    func: Callable
    grid_table: Callable[[int], np.ndarray] | None = None
    name: str = ""

    def __call__(self, *points: TorusPoint):
        if len(points) != self.degree:
            raise ValueError(f"{self.name or 'cochain'} takes {self.degree} points, got {len(points)}")
        return _reduce(self.ring, self.func(*points))

    def __add__(self, other: "Cochain") -> "Cochain":
        _same_shape(self, other)
        return Cochain(self.degree, self.dim, self.ring, lambda *g: _add(self.func(*g), other.func(*g)))

    def __neg__(self) -> "Cochain":
        return Cochain(self.degree, self.dim, self.ring, lambda *g: _scale(-1, self.func(*g)))

    def __sub__(self, other):
        return self + (-other)


def _same_shape(a: Cochain, b: Cochain):
    if (a.degree, a.dim, a.ring) != (b.degree, b.dim, b.ring):
        raise ValueError("cochains differ in degree, dimension or value ring")


def constant_cochain(dim: int, value, ring: str = INT) -> Cochain:
    return Cochain(0, dim, ring, lambda: value, name="constant")


def dense_cochain(dim: int, N: int, degree: int, values: dict, ring: str = INT) -> Cochain:
    """Cochain backed by a table ``{(grid index tuples...): value}`` on ``(1/N)``-points.

    Missing tuples read as 0. Points off the grid raise ``KeyError``.
    """

    def func(*pts):
        key = []
        for p in pts:
            idx = []
            for c in p.coords:
                if (c * N).denominator != 1:
                    raise KeyError(f"point {p} is not {N}-torsion")
                idx.append(int(c * N))
            key.append(tuple(idx))
        return values.get(tuple(key), 0)

    return Cochain(degree, dim, ring, func, name="dense")


def coboundary(phi: Cochain) -> Cochain:
    """Alternating-sum coboundary for the trivial action:

    ``(dphi)(g_1..g_{n+1}) = phi(g_2..g_{n+1})
    + sum_i (-1)^i phi(.., g_i + g_{i+1}, ..) + (-1)^{n+1} phi(g_1..g_n)``.
    """
    n = phi.degree

    def func(*g):
        total = phi.func(*g[1:])
        for i in range(n):
            merged = g[:i] + (g[i] + g[i + 1],) + g[i + 2 :]
            total = _add(total, _scale((-1) ** (i + 1), phi.func(*merged)))
        return _add(total, _scale((-1) ** (n + 1), phi.func(*g[:n])))

    table = None
    if phi.grid_table is not None:

        def table(N, _phi=phi):
            return grid_coboundary(_phi.grid_table(N), N, phi.dim)

    return Cochain(n + 1, phi.dim, phi.ring, func, table, f"d({phi.name})")


def _pairing_ring(a: str, b: str) -> str:
    if a == QZ and b == QZ:
        raise PairingMismatch("Q/Z (x) Q/Z is zero; pair Q/Z values only with Z")
    if QZ in (a, b):
        return QZ
    if REAL in (a, b):
        return REAL
    return INT


def cup(phi: Cochain, psi: Cochain, pairing=None) -> Cochain:
    """``(phi ^ psi)(g_1..g_{n+m}) = pairing(phi(g_1..g_n), psi(g_{n+1}..g_{n+m}))``.

    ``pairing`` may be ``None`` (product of scalars), an
    :class:`IntegralBilinearForm` (vector values) or any bilinear callable.
    """
    if phi.dim != psi.dim:
        raise PairingMismatch("cochains live on tori of different dimension")
    ring = _pairing_ring(phi.ring, psi.ring)
    n = phi.degree
    if pairing is None:

        def pair(x, y):
            if isinstance(x, tuple) or isinstance(y, tuple):
                raise PairingMismatch("vector-valued cochains need an explicit pairing")
            return x * y

    elif isinstance(pairing, IntegralBilinearForm):

        def pair(x, y):
            if not (isinstance(x, tuple) and isinstance(y, tuple)) or len(x) != pairing.dim or len(y) != pairing.dim:
                raise PairingMismatch(f"bilinear form of dimension {pairing.dim} needs vectors of that length")
            return pairing(x, y)

    else:
        pair = pairing

    def func(*g):
        return pair(phi.func(*g[:n]), psi.func(*g[n:]))

    return Cochain(n + psi.degree, phi.dim, ring, func, name=f"({phi.name})^({psi.name})")


# -- the section cochains --------------------------------------------------------------


def section_cochain(d: int) -> Cochain:
    """``s`` as a degree-1 cochain with vector values in ``R^d``."""
    return Cochain(1, d, REAL, section, name="s")


def carry_cochain(d: int) -> Cochain:
    """``ds`` as a degree-2 cochain with vector values in ``Z^d``."""
    return Cochain(2, d, INT, section_coboundary, name="ds")


def carry_component(d: int, i: int) -> Cochain:
    """The ``i``-th coordinate of ``ds``, a scalar integral 2-cocycle."""

    def func(h, k):
        return section_coboundary(h, k)[i]

    return Cochain(2, d, INT, func, lambda N: N * _carries(N, d)[:, :, i], f"ds_{i}")


def _check_form(B: IntegralBilinearForm, d: int | None = None):
    if d is not None and B.dim != d:
        raise PairingMismatch(f"form of dimension {B.dim} on a torus of dimension {d}")


def obstruction_cocycle(B: IntegralBilinearForm, g: TorusPoint, h: TorusPoint, k: TorusPoint) -> Fraction:
    """``B(s(g), ds(h, k)) mod 1``."""
    _check_form(B, g.d)
    return Fraction(B(section(g), section_coboundary(h, k))) % 1


def real_lift(B: IntegralBilinearForm) -> Cochain:
    """``C(g, h, k) = B(s(g), ds(h, k))`` with values in R (exact rationals)."""
    d = B.dim

    def func(g, h, k):
        return Fraction(B(section(g), section_coboundary(h, k)))

    return Cochain(3, d, REAL, func, lambda N: _lift_table(B, N), "C")


def obstruction_cochain(B: IntegralBilinearForm) -> Cochain:
    """The obstruction 3-cocycle ``C mod 1`` with values in Q/Z."""
    lift = real_lift(B)
    return Cochain(3, B.dim, QZ, lift.func, lift.grid_table, "c")


def bockstein_rep(B: IntegralBilinearForm) -> Cochain:
    """Integral 4-cocycle ``(g, h, k, l) -> B(ds(g, h), ds(k, l))``."""

    def func(g, h, k, l):
        return B(section_coboundary(g, h), section_coboundary(k, l))

    return Cochain(4, B.dim, INT, func, lambda N: N * _bockstein_table(B, N), "B(ds^ds)")


# -- vectorized grid tables -------------------------------------------------------------


def grid_points(N: int, d: int) -> np.ndarray:
    """Integer coordinates of all ``N^d`` grid points, row-major."""
    return np.indices((N,) * d).reshape(d, -1).T


def grid_add_table(N: int, d: int) -> np.ndarray:
    pts = grid_points(N, d)
    s = (pts[:, None, :] + pts[None, :, :]) % N
    return np.ravel_multi_index(tuple(np.moveaxis(s, -1, 0)), (N,) * d)


def _carries(N: int, d: int) -> np.ndarray:
    pts = grid_points(N, d)
    return (pts[:, None, :] + pts[None, :, :] >= N).astype(np.int64)


def _lift_table(B: IntegralBilinearForm, N: int) -> np.ndarray:
    """``N * C`` on the grid, shape ``(M, M, M)`` with ``M = N^d``."""
    d = B.dim
    pts = grid_points(N, d)
    Bm = np.array(B.matrix, dtype=np.int64).reshape(d, d)
    left = pts @ Bm  # N * s(g)^T B, shape (M, d)
    carry = _carries(N, d)  # (M, M, d)
    return np.einsum("ai,bci->abc", left, carry)


def _bockstein_table(B: IntegralBilinearForm, N: int) -> np.ndarray:
    d = B.dim
    Bm = np.array(B.matrix, dtype=np.int64).reshape(d, d)
    carry = _carries(N, d)
    left = carry @ Bm  # (M, M, d)
    return np.einsum("abi,cdi->abcd", left, carry)


def grid_coboundary(T: np.ndarray, N: int, d: int, first: slice | None = None) -> np.ndarray:
    """Coboundary of a dense table over ``(Z/N)^d``, optionally only for
    first arguments in ``first`` (to bound memory)."""
    n = T.ndim
    M = N**d
    add = grid_add_table(N, d)
    first = first or slice(0, M)
    idx = np.indices((len(range(M)[first]),) + (M,) * n, sparse=True)
    g = [idx[0] + first.start] + list(idx[1:])
    return np.broadcast_to(_coboundary_at(T, add, g), (len(range(M)[first]),) + (M,) * n)


def _coboundary_at(T: np.ndarray, add: np.ndarray, g: list) -> np.ndarray:
    n = T.ndim
    out = T[tuple(g[1:])].astype(np.int64)
    for i in range(n):
        merged = g[:i] + [add[g[i], g[i + 1]]] + g[i + 2 :]
        out = out + (-1) ** (i + 1) * T[tuple(merged)]
    return out + (-1) ** (n + 1) * T[tuple(g[:n])]


# -- verification ------------------------------------------------------------------------


def _defect(ring: str, v) -> Fraction:
    vals = v if isinstance(v, tuple) else (v,)
    worst = Fraction(0)
    for x in vals:
        x = Fraction(x)
        if ring == QZ:
            x %= 1
            x = min(x, 1 - x)
        worst = max(worst, abs(x))
    return worst


def verify_cocycle(
    c: Cochain,
    N: int,
    *,
    limit: int | None = None,
    samples: int = 20000,
    seed: int = 0,
) -> dict:
    """Check ``dc = 0`` on ``(n+1)``-tuples of ``(1/N)``-torsion points.

    Exhaustive when ``N^(d(n+1)) <= limit``, otherwise ``samples`` random
    tuples drawn with ``seed``. ``max_defect`` is the largest distance of a
    value of ``dc`` from 0 (in Q/Z for circle-valued cochains).
    """
    limit = table_limit() if limit is None else limit
    n, d = c.degree, c.dim
    total = N ** (d * (n + 1))
    report = {"grid": {"N": N, "d": d}, "degree": n, "ring": c.ring, "seed": seed}
    dc = coboundary(c)
    if total <= limit and c.grid_table is not None:
        worst, M = 0, N**d
        T = c.grid_table(N)
        step = max(1, limit // max(1, M**n) // 4) if M**n else 1
        for start in range(0, M, step):
            vals = grid_coboundary(T, N, d, slice(start, min(M, start + step)))
            if c.ring == QZ:
                vals = np.minimum(vals % N, (-vals) % N)
            worst = max(worst, int(np.abs(vals).max()))
        report.update(tuples_checked=total, exhaustive=True, max_defect=str(Fraction(worst, N)))
        return report
    if c.grid_table is not None and (N**d) ** n <= limit:
        # table fits even though the tuple space does not: sample against it
        M = N**d
        rng = np.random.default_rng(seed)
        g = list(rng.integers(0, M, size=(n + 1, samples)))
        vals = _coboundary_at(c.grid_table(N), grid_add_table(N, d), g)
        if c.ring == QZ:
            vals = np.minimum(vals % N, (-vals) % N)
        worst = int(np.abs(vals).max()) if samples else 0
        report.update(tuples_checked=samples, exhaustive=False, max_defect=str(Fraction(worst, N)))
        return report
    if total <= limit:
        tuples = itertools.product(itertools.product(range(N), repeat=d), repeat=n + 1)
        exhaustive, count = True, total
    else:
        rng = random.Random(seed)
        tuples = (tuple(tuple(rng.randrange(N) for _ in range(d)) for _ in range(n + 1)) for _ in range(samples))
        exhaustive, count = False, samples
    worst = Fraction(0)
    for tup in tuples:
        pts = [TorusPoint.from_grid(t, N) for t in tup]
        worst = max(worst, _defect(c.ring, dc.func(*pts)))
    report.update(tuples_checked=count, exhaustive=exhaustive, max_defect=str(worst))
    return report


def verify_bockstein(B: IntegralBilinearForm, N: int, *, limit: int | None = None) -> dict:
    """Exhaustive pointwise check of ``dC = B(ds ^ ds)`` on ``(Z/N)^d``."""
    limit = table_limit() if limit is None else limit
    d = B.dim
    M = N**d
    if M**4 > limit:
        raise ValueError(f"grid of {M**4} quadruples exceeds the limit {limit}")
    T = _lift_table(B, N)
    bock = _bockstein_table(B, N)
    mismatches = 0
    step = max(1, limit // max(1, M**3) // 4)
    for start in range(0, M, step):
        sl = slice(start, min(M, start + step))
        mismatches += int(np.count_nonzero(grid_coboundary(T, N, d, sl) != N * bock[sl]))
    return {"grid": {"N": N, "d": d}, "tuples_checked": M**4, "mismatches": mismatches, "holds": mismatches == 0}
