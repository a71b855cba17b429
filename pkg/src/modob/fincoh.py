"""Brute-force cohomology of finite abelian groups with Z/L coefficients.

Cochains are dense integer arrays indexed by tuples of group elements, with
elements numbered in row-major mixed radix order. ``H^n(G, Z/L)`` comes from
the integral cochain complex by the universal coefficient formula

    H^n(C (x) Z/L) = H^n(C) (x) Z/L  (+)  Tor(H^{n+1}(C), Z/L),

so only the integer invariant factors of two coboundary matrices are needed.
Membership ``c in im(d)`` is decided by diagonalizing over Z/L directly.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, prod

import numpy as np

from .abgroup import FgAbelianGroup, invariant_factors
from .cocycle import INT, Cochain, TorusPoint
from .errors import DenominatorMismatch, NotACocycle, SizeLimit

TABLE_FORMAT_HEADER = "modob-cochain 1"
DEFAULT_LIMIT = 10**6
# dense coboundary matrices may hold this many times the table limit in entries
MATRIX_FACTOR = 64


def _limit(limit: int | None) -> int:
    if limit is not None:
        return limit
    return int(os.environ.get("MODOB_LIMIT", DEFAULT_LIMIT))


@dataclass(frozen=True)
class FiniteAbelianGroup:
    factors: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(int(n) for n in self.factors))
        if any(n < 1 for n in self.factors):
            raise ValueError("cyclic factors must have order >= 1")

    @classmethod
    def torsion_grid(cls, N: int, d: int) -> "FiniteAbelianGroup":
        """``(Z/N)^d``, the ``N``-torsion points of ``T^d``."""
        return cls((N,) * d)

    @property
    def order(self) -> int:
        return prod(self.factors)

    def elements(self) -> np.ndarray:
        if not self.factors:
            return np.zeros((1, 0), dtype=np.int64)
        return np.indices(self.factors).reshape(len(self.factors), -1).T

    def index(self, element) -> int:
        if not self.factors:
            return 0
        return int(np.ravel_multi_index(tuple(int(e) % n for e, n in zip(element, self.factors)), self.factors))

    def add_table(self) -> np.ndarray:
        el = self.elements()
        if not self.factors:
            return np.zeros((1, 1), dtype=np.int64)
        s = (el[:, None, :] + el[None, :, :]) % np.array(self.factors)
        return np.ravel_multi_index(tuple(np.moveaxis(s, -1, 0)), self.factors)

    def __str__(self):
        return " + ".join(f"Z/{n}" for n in self.factors) or "0"


@dataclass(frozen=True, eq=False)
class CochainTable:
    """``values[i_1, ..., i_n]`` is the value at ``(g_{i_1}, ..., g_{i_n})`` in ``{0..L-1}``."""

    group: FiniteAbelianGroup
    degree: int
    modulus: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.int64) % self.modulus
        if v.shape != (self.group.order,) * self.degree:
            raise ValueError(f"table shape {v.shape} does not cover G^{self.degree}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def zero(cls, group, degree, modulus):
        return cls(group, degree, modulus, np.zeros((group.order,) * degree, dtype=np.int64))

    @classmethod
    def random(cls, group, degree, modulus, rng: np.random.Generator):
        return cls(group, degree, modulus, rng.integers(0, modulus, (group.order,) * degree))

    def _check(self, other):
        if (self.group, self.degree, self.modulus) != (other.group, other.degree, other.modulus):
            raise ValueError("tables differ in group, degree or modulus")

    def __add__(self, other):
        self._check(other)
        return CochainTable(self.group, self.degree, self.modulus, self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return CochainTable(self.group, self.degree, self.modulus, self.values - other.values)

    def __mul__(self, k: int):
        return CochainTable(self.group, self.degree, self.modulus, self.values * int(k))

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, CochainTable):
            return NotImplemented
        return (self.group, self.degree, self.modulus) == (other.group, other.degree, other.modulus) and bool(
            np.array_equal(self.values, other.values)
        )

    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def nonzero(self) -> dict:
        el = self.group.elements()
        out = {}
        for idx in zip(*np.nonzero(self.values)):
            out[tuple(tuple(int(x) for x in el[i]) for i in idx)] = int(self.values[idx])
        return out


def apply_coboundary(c: CochainTable) -> CochainTable:
    """``dc`` computed directly from the alternating-sum formula."""
    G, n = c.group, c.degree
    M = G.order
    add = G.add_table()
    g = list(np.indices((M,) * (n + 1), sparse=True))
    T = c.values
    out = T[tuple(g[1:])].astype(np.int64)
    for i in range(n):
        merged = g[:i] + [add[g[i], g[i + 1]]] + g[i + 2 :]
        out = out + (-1) ** (i + 1) * T[tuple(merged)]
    out = out + (-1) ** (n + 1) * T[tuple(g[:n])]
    return CochainTable(G, n + 1, c.modulus, np.broadcast_to(out, (M,) * (n + 1)))


def coboundary_matrix(G: FiniteAbelianGroup, n: int, L: int | None = None, *, limit: int | None = None) -> np.ndarray:
    """Integer matrix of ``d : C^n -> C^{n+1}`` in the tuple basis (reduced mod ``L`` if given).

    Rows are ``(n+1)``-tuples and columns ``n``-tuples, both row-major.
    """
    limit = _limit(limit)
    M = G.order
    rows, cols = M ** (n + 1), M**n
    if rows > limit:
        raise SizeLimit(f"|G|^{n + 1} = {rows} exceeds the table limit {limit}")
    if rows * cols > MATRIX_FACTOR * limit:
        raise SizeLimit(f"dense {rows}x{cols} coboundary matrix exceeds the size limit")
    add = G.add_table()
    tuples = np.indices((M,) * (n + 1)).reshape(n + 1, -1)
    row_ids = np.arange(rows)
    A = np.zeros((rows, cols), dtype=np.int64)

    def col(parts):
        if n == 0:
            return np.zeros(rows, dtype=np.int64)
        return np.ravel_multi_index(tuple(parts), (M,) * n)

    np.add.at(A, (row_ids, col(tuples[1:])), 1)
    for i in range(n):
        merged = list(tuples[:i]) + [add[tuples[i], tuples[i + 1]]] + list(tuples[i + 2 :])
        np.add.at(A, (row_ids, col(merged)), (-1) ** (i + 1))
    np.add.at(A, (row_ids, col(tuples[:n])), (-1) ** (n + 1))
    return A % L if L else A


# -- linear algebra over Z/L --------------------------------------------------------------


def _xgcd(a: int, b: int):
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def _unit_to_gcd(a: int, L: int) -> int:
    """A unit ``u`` mod ``L`` with ``u * a = gcd(a, L) mod L``."""
    g = gcd(a, L)
    m = L // g
    u0 = pow(a // g, -1, m) if m > 1 else 1
    u = u0 % m if m > 1 else 1
    while gcd(u, L) != 1:
        u += m
    return u


def diagonalize_mod(A: np.ndarray, L: int, rhs: np.ndarray | None = None):
    """Diagonalize ``A`` over Z/L by invertible row and column operations.

    Returns ``(pivots, rhs')`` where ``pivots`` are the nonzero diagonal
    entries, each a divisor of ``L``, and ``rhs'`` is ``rhs`` under the same
    row operations.
    """
    A = np.array(A, dtype=np.int64) % L
    b = None if rhs is None else np.array(rhs, dtype=np.int64) % L
    rows, cols = A.shape
    pivots: list[int] = []
    t = 0
    while t < min(rows, cols):
        sub = A[t:, t:]
        nz = np.nonzero(sub)
        if len(nz[0]) == 0:
            break
        gs = np.gcd(sub[nz], L)
        k = int(np.argmin(gs))
        i, j = int(nz[0][k]) + t, int(nz[1][k]) + t
        A[[t, i]] = A[[i, t]]
        A[:, [t, j]] = A[:, [j, t]]
        if b is not None:
            b[[t, i]] = b[[i, t]]
        while True:
            a = int(A[t, t])
            u = _unit_to_gcd(a, L)
            if u != 1:
                A[t] = (A[t] * u) % L
                if b is not None:
                    b[t] = (b[t] * u) % L
            p = int(A[t, t])
            dirty = False
            # clear column t below the pivot
            colv = A[t + 1 :, t]
            idx = np.nonzero(colv)[0] + t + 1
            if len(idx):
                div = A[idx, t] % p == 0
                easy = idx[div]
                if len(easy):
                    q = A[easy, t] // p
                    A[easy] = (A[easy] - np.outer(q, A[t])) % L
                    if b is not None:
                        b[easy] = (b[easy] - q * b[t]) % L
                for r in idx[~div]:
                    self_val, other = int(A[t, t]), int(A[r, t])
                    g, x, y = _xgcd(self_val, other)
                    rt, rr = A[t].copy(), A[r].copy()
                    A[t] = (x * rt + y * rr) % L
                    A[r] = (-(other // g) * rt + (self_val // g) * rr) % L
                    if b is not None:
                        bt, br = int(b[t]), int(b[r])
                        b[t] = (x * bt + y * br) % L
                        b[r] = (-(other // g) * bt + (self_val // g) * br) % L
                    dirty = True
                    break
            if dirty:
                continue
            # clear row t right of the pivot (column ops leave rhs alone)
            rowv = A[t, t + 1 :]
            idx = np.nonzero(rowv)[0] + t + 1
            if len(idx):
                div = A[t, idx] % p == 0
                easy = idx[div]
                if len(easy):
                    q = A[t, easy] // p
                    A[:, easy] = (A[:, easy] - np.outer(A[:, t], q)) % L
                for c in idx[~div]:
                    self_val, other = int(A[t, t]), int(A[t, c])
                    g, x, y = _xgcd(self_val, other)
                    ct, cc = A[:, t].copy(), A[:, c].copy()
                    A[:, t] = (x * ct + y * cc) % L
                    A[:, c] = (-(other // g) * ct + (self_val // g) * cc) % L
                    dirty = True
                    break
            if not dirty:
                break
        pivots.append(int(A[t, t]))
        t += 1
    return pivots, b


def kernel_order_mod(A: np.ndarray, L: int) -> int:
    """``|{x in (Z/L)^cols : A x = 0}|``."""
    pivots, _ = diagonalize_mod(A, L)
    cols = A.shape[1]
    return prod(gcd(p, L) for p in pivots) * L ** (cols - len(pivots))


def solvable_mod(A: np.ndarray, rhs: np.ndarray, L: int) -> bool:
    """Whether ``A x = rhs`` has a solution over Z/L."""
    pivots, b = diagonalize_mod(A, L, rhs)
    for i, p in enumerate(pivots):
        if b[i] % gcd(p, L):
            return False
    return not np.any(b[len(pivots) :] % L)


# -- cohomology -------------------------------------------------------------------------------


def _integral_factors(G: FiniteAbelianGroup, n: int, limit: int | None) -> list[int]:
    if n < 0:
        return []
    return invariant_factors(coboundary_matrix(G, n, limit=limit).tolist())


def cohomology(G: FiniteAbelianGroup, n: int, L: int, *, limit: int | None = None) -> FgAbelianGroup:
    """``H^n(G, Z/L)`` for trivial action, canonicalized."""
    if n < 0:
        raise ValueError("degree must be >= 0")
    if L < 1:
        raise ValueError("modulus must be >= 1")
    c_n = G.order**n
    into = _integral_factors(G, n - 1, limit)  # image of d_{n-1} inside C^n
    out = _integral_factors(G, n, limit)  # d_n : C^n -> C^{n+1}
    orders = [L] * (c_n - len(into) - len(out))
    orders += [gcd(f, L) for f in into]  # torsion of H^n(C) tensored with Z/L
    orders += [gcd(f, L) for f in out]  # Tor of H^{n+1}(C)
    return FgAbelianGroup.from_orders([o for o in orders if o != 1])


def cohomology_order_by_kernels(G: FiniteAbelianGroup, n: int, L: int, *, limit: int | None = None) -> int:
    """``|Z^n| / |B^n|`` from kernel sizes of ``d_n`` and ``d_{n-1}`` over Z/L."""
    z = kernel_order_mod(coboundary_matrix(G, n, L, limit=limit), L)
    if n == 0:
        return z
    c_prev = G.order ** (n - 1)
    k_prev = kernel_order_mod(coboundary_matrix(G, n - 1, L, limit=limit), L)
    image = L**c_prev // k_prev
    return z // image


def is_cocycle(c: CochainTable) -> bool:
    return not np.any(apply_coboundary(c).values)


def class_is_trivial(c: CochainTable, *, limit: int | None = None) -> bool:
    """Whether the cocycle ``c`` is a coboundary ``dx`` with ``x`` in ``C^{n-1}(G, Z/L)``."""
    if not is_cocycle(c):
        raise NotACocycle("table is not a cocycle")
    if not np.any(c.values):
        return True
    if c.degree == 0:
        return False
    A = coboundary_matrix(c.group, c.degree - 1, c.modulus, limit=limit)
    return solvable_mod(A, c.flat(), c.modulus)


def class_equal(c1: CochainTable, c2: CochainTable, *, limit: int | None = None) -> bool:
    return class_is_trivial(c1 - c2, limit=limit)


def cup_tables(a: CochainTable, b: CochainTable) -> CochainTable:
    """``(a ^ b)(g_1..g_{n+m}) = a(g_1..g_n) b(g_{n+1}..g_{n+m}) mod L``."""
    if a.group != b.group or a.modulus != b.modulus:
        raise ValueError("cup product needs the same group and modulus")
    return CochainTable(a.group, a.degree + b.degree, a.modulus, np.multiply.outer(a.values, b.values))


# -- restriction of torus cochains ----------------------------------------------------------


def restrict(c: Cochain, N: int, L: int | None = None) -> CochainTable:
    """Values of a scalar torus cochain at ``(1/N)``-torsion points in Z/L.

    Circle and real valued cochains map ``v`` to ``L * v mod L``; integer
    valued ones are reduced mod ``L``.
    """
    L = N if L is None else L
    integral = c.ring == INT
    G = FiniteAbelianGroup.torsion_grid(N, c.dim)
    if c.grid_table is not None:
        if L % N:
            raise DenominatorMismatch(f"modulus {L} is not a multiple of the grid order {N}")
        if G.order**c.degree > _limit(None):
            raise SizeLimit(f"table of {G.order ** c.degree} entries exceeds the limit")
        table = c.grid_table(N)
        return CochainTable(G, c.degree, L, table // N if integral else table * (L // N))
    if G.order**c.degree > _limit(None):
        raise SizeLimit(f"table of {G.order ** c.degree} entries exceeds the limit")
    pts = [TorusPoint.from_grid(e, N) for e in G.elements()]
    vals = np.zeros((G.order,) * c.degree, dtype=np.int64)
    for idx in np.ndindex(*vals.shape):
        v = Fraction(c.func(*(pts[i] for i in idx)))
        scaled = v if integral else v * L
        if scaled.denominator != 1:
            raise DenominatorMismatch(f"value {v} at {idx} does not lie in (1/{L})Z")
        vals[idx] = int(scaled) % L
    return CochainTable(G, c.degree, L, vals)


# -- text format --------------------------------------------------------------------------------


def format_table(c: CochainTable) -> str:
    """One line per nonzero tuple: grid coordinates of each point, then ``p/q`` value in Q/Z."""
    head = f"{TABLE_FORMAT_HEADER}\ngroup {' '.join(map(str, c.group.factors))}\ndegree {c.degree}\nmodulus {c.modulus}"
    lines = [head]
    for tup, v in sorted(c.nonzero().items()):
        pts = " ".join(",".join(map(str, p)) for p in tup)
        lines.append(f"{pts} -> {Fraction(v, c.modulus)}")
    return "\n".join(lines) + "\n"


def parse_table(text: str) -> CochainTable:
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or lines[0] != TABLE_FORMAT_HEADER:
        raise ValueError(f"cochain table must start with {TABLE_FORMAT_HEADER!r}")
    meta = {}
    body = []
    for ln in lines[1:]:
        if "->" in ln:
            body.append(ln)
        else:
            key, _, rest = ln.partition(" ")
            meta[key] = rest.split()
    try:
        G = FiniteAbelianGroup(tuple(int(x) for x in meta["group"]))
        n, L = int(meta["degree"][0]), int(meta["modulus"][0])
    except KeyError as exc:
        raise ValueError(f"cochain table is missing the {exc.args[0]!r} line") from None
    vals = np.zeros((G.order,) * n, dtype=np.int64)
    for ln in body:
        lhs, _, rhs = ln.partition("->")
        pts = lhs.split()
        if len(pts) != n:
            raise ValueError(f"expected {n} points in {ln!r}")
        idx = tuple(G.index([int(x) for x in p.split(",")]) for p in pts)
        v = Fraction(rhs.strip()) * L
        if v.denominator != 1:
            raise DenominatorMismatch(f"value {rhs.strip()} does not lie in (1/{L})Z")
        vals[idx] = int(v) % L
    return CochainTable(G, n, L, vals)
