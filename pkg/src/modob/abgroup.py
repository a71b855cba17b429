"""Integer linear algebra and finitely generated abelian groups.

Matrices are plain lists of rows of Python ints (arbitrary precision).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Sequence

import numpy as np

Matrix = list[list[int]]


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]]) -> Matrix:
    if not a:
        return []
    inner = len(b)
    cols = len(b[0]) if b else 0
    return [[sum(row[k] * b[k][j] for k in range(inner)) for j in range(cols)] for row in a]


def transpose(a: Sequence[Sequence[int]], ncols: int | None = None) -> Matrix:
    if not a:
        return [[] for _ in range(ncols or 0)]
    return [list(col) for col in zip(*a)]


def determinant(a: Sequence[Sequence[int]]) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    n = len(a)
    if n == 0:
        return 1
    m = [list(map(int, row)) for row in a]
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with a*x + b*y = g = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def smith_normal_form(M: Sequence[Sequence[int]]) -> tuple[Matrix, Matrix, Matrix]:
    """Smith normal form ``U @ M @ V == D``.

    ``U`` and ``V`` are unimodular, ``D`` is diagonal with non-negative
    entries and ``D[i][i]`` divides ``D[i+1][i+1]``. Pivots are chosen by
    minimal absolute value.
    """
    rows = len(M)
    cols = len(M[0]) if rows else 0
    D = [list(map(int, r)) for r in M]
    U = identity(rows)
    V = identity(cols)

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in D:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]

    def add_row(dst, src, q):  # row_dst -= q * row_src
        if q:
            D[dst] = [a - q * b for a, b in zip(D[dst], D[src])]
            U[dst] = [a - q * b for a, b in zip(U[dst], U[src])]

    def add_col(dst, src, q):  # col_dst -= q * col_src
        if q:
            for r in D:
                r[dst] -= q * r[src]
            for r in V:
                r[dst] -= q * r[src]

    t = 0
    while t < min(rows, cols):
        nz = [(abs(D[i][j]), i, j) for i in range(t, rows) for j in range(t, cols) if D[i][j]]
        if not nz:
            break
        _, pi, pj = min(nz)
        swap_rows(t, pi)
        swap_cols(t, pj)
        while True:
            p = D[t][t]
            done = True
            for i in range(t + 1, rows):
                if D[i][t]:
                    add_row(i, t, D[i][t] // p)
                    if D[i][t]:
                        done = False
            for j in range(t + 1, cols):
                if D[t][j]:
                    add_col(j, t, D[t][j] // p)
                    if D[t][j]:
                        done = False
            if done:
                # pivot must divide the whole remaining block
                bad = next(
                    ((i, j) for i in range(t + 1, rows) for j in range(t + 1, cols) if D[i][j] % p),
                    None,
                )
                if bad is None:
                    break
                add_row(t, bad[0], -1)
                continue
            # move the smallest remainder into the pivot slot
            cand = [(abs(D[i][t]), i, t) for i in range(t + 1, rows) if D[i][t]]
            cand += [(abs(D[t][j]), t, j) for j in range(t + 1, cols) if D[t][j]]
            _, ci, cj = min(cand)
            if ci != t:
                swap_rows(t, ci)
            else:
                swap_cols(t, cj)
        if D[t][t] < 0:
            D[t] = [-a for a in D[t]]
            U[t] = [-a for a in U[t]]
        t += 1
    return U, D, V


def hermite_normal_form(M: Sequence[Sequence[int]]) -> tuple[Matrix, Matrix]:
    """Row-style Hermite normal form ``U @ M == H``.

    Nonzero rows of ``H`` come first, pivots are positive and entries above a
    pivot are reduced into ``[0, pivot)``. ``U`` is unimodular.
    """
    rows = len(M)
    cols = len(M[0]) if rows else 0
    H = [list(map(int, r)) for r in M]
    U = identity(rows)
    r = 0
    for c in range(cols):
        if r == rows:
            break
        # gcd-combine all entries of column c (rows >= r) into row r
        for i in range(r + 1, rows):
            if H[i][c] == 0:
                continue
            a, b = H[r][c], H[i][c]
            g, x, y = _xgcd(a, b)
            ag, bg = a // g, b // g
            H[r], H[i] = (
                [x * u + y * v for u, v in zip(H[r], H[i])],
                [-bg * u + ag * v for u, v in zip(H[r], H[i])],
            )
            U[r], U[i] = (
                [x * u + y * v for u, v in zip(U[r], U[i])],
                [-bg * u + ag * v for u, v in zip(U[r], U[i])],
            )
        if H[r][c] == 0:
            continue
        if H[r][c] < 0:
            H[r] = [-v for v in H[r]]
            U[r] = [-v for v in U[r]]
        p = H[r][c]
        for i in range(r):
            q = H[i][c] // p
            if q:
                H[i] = [u - q * v for u, v in zip(H[i], H[r])]
                U[i] = [u - q * v for u, v in zip(U[i], U[r])]
        r += 1
    return H, U


def hnf_rows(M: Sequence[Sequence[int]]) -> Matrix:
    """Nonzero rows of the row HNF: a canonical basis of the row lattice."""
    H, _ = hermite_normal_form(M)
    return [row for row in H if any(row)]


def _integerize_rows(M: Sequence[Sequence[Fraction | int]]) -> Matrix:
    out = []
    for row in M:
        row = [Fraction(v) for v in row]
        den = 1
        for v in row:
            den = den * v.denominator // gcd(den, v.denominator)
        out.append([int(v * den) for v in row])
    return out


def integer_kernel(M: Sequence[Sequence[Fraction | int]], ncols: int | None = None) -> Matrix:
    """HNF basis of the saturated lattice ``{v in Z^n : M v = 0}``.

    ``M`` may hold rationals; each row is scaled to integers first, which
    does not change the kernel. ``ncols`` is needed only when ``M`` has no rows.
    """
    n = len(M[0]) if M else ncols
    if n is None:
        raise ValueError("ncols is required for a matrix without rows")
    if not M:
        return identity(n)
    A = _integerize_rows(M)
    # U @ A^T = H; rows of U opposite zero rows of H span the left kernel of A^T
    H, U = hermite_normal_form(transpose(A))
    basis = [U[i] for i in range(n) if not any(H[i])]
    return hnf_rows(basis) if basis else []


def invariant_factors(M, *, max_entry: int = 1 << 40) -> list[int]:
    """Nonzero invariant factors of an integer matrix (no transforms).

    Vectorized elimination on int64 arrays; falls back to exact Python
    integers when entries grow past ``max_entry``.
    """
    if isinstance(M, np.ndarray):
        M = M.tolist()
    if not len(M) or not len(M[0]):
        return []
    try:
        if max(abs(int(v)) for row in M for v in row) > max_entry:
            raise OverflowError
        diag = _diagonalize_int(np.array(M, dtype=np.int64), max_entry)
    except OverflowError:
        _, D, _ = smith_normal_form([[int(v) for v in row] for row in M])
        return [D[i][i] for i in range(min(len(D), len(D[0]))) if D[i][i]]
    return _chain_from_diagonal(diag)


def _diagonalize_int(A: np.ndarray, max_entry: int) -> list[int]:
    diag = []
    while A.size:
        nz = np.nonzero(A)
        if len(nz[0]) == 0:
            break
        absvals = np.abs(A[nz])
        k = int(np.argmin(absvals))
        pi, pj = int(nz[0][k]), int(nz[1][k])
        A[[0, pi]] = A[[pi, 0]]
        A[:, [0, pj]] = A[:, [pj, 0]]
        while True:
            p = A[0, 0]
            q = A[1:, 0] // p
            A[1:] -= np.outer(q, A[0])
            q = A[0, 1:] // p
            A[:, 1:] -= np.outer(A[:, 0], q)
            if np.abs(A).max() > max_entry:
                raise OverflowError
            col, row = A[1:, 0], A[0, 1:]
            if not col.any() and not row.any():
                block = A[1:, 1:]
                if block.size and (block % p).any():
                    i = int(np.nonzero((block % p).any(axis=1))[0][0]) + 1
                    A[0] += A[i]
                    continue
                break
            cand = np.concatenate([np.abs(col), np.abs(row)])
            cand[cand == 0] = np.iinfo(np.int64).max
            k = int(np.argmin(cand))
            if k < len(col):
                A[[0, k + 1]] = A[[k + 1, 0]]
            else:
                k -= len(col)
                A[:, [0, k + 1]] = A[:, [k + 1, 0]]
        diag.append(abs(int(A[0, 0])))
        A = A[1:, 1:]
    return diag


def _chain_from_diagonal(diag: list[int]) -> list[int]:
    """Turn any nonzero diagonal into a divisibility chain (prime-free)."""
    d = sorted(x for x in diag if x)
    changed = True
    while changed:
        changed = False
        for i in range(len(d)):
            for j in range(i + 1, len(d)):
                if d[j] % d[i]:
                    g = gcd(d[i], d[j])
                    d[i], d[j] = g, d[i] * d[j] // g
                    changed = True
        d.sort()
    return d


@dataclass(frozen=True)
class FgAbelianGroup:
    """``Z^free_rank + Z/d_1 + ... + Z/d_k`` with ``d_i | d_{i+1}``, ``d_i >= 2``.

    Canonical generator order: torsion generators first (in the order of
    ``invariant_factors``), then the free ones.
    """

    free_rank: int
    invariant_factors: tuple[int, ...] = ()
    generator_names: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.free_rank < 0:
            raise ValueError("free rank must be non-negative")
        d = self.invariant_factors
        if any(x < 2 for x in d):
            raise ValueError(f"invariant factors must be >= 2, got {d}")
        if any(d[i + 1] % d[i] for i in range(len(d) - 1)):
            raise ValueError(f"invariant factors must form a divisibility chain, got {d}")

    @property
    def ngens(self) -> int:
        return len(self.invariant_factors) + self.free_rank

    @property
    def orders(self) -> tuple[int, ...]:
        """Order of each canonical generator, 0 for infinite order."""
        return self.invariant_factors + (0,) * self.free_rank

    @property
    def order(self) -> int | None:
        if self.free_rank:
            return None
        out = 1
        for d in self.invariant_factors:
            out *= d
        return out

    def reduce(self, coords: Sequence[int]) -> tuple[int, ...]:
        return tuple(c % o if o else c for c, o in zip(coords, self.orders))

    @classmethod
    def from_orders(cls, orders: Sequence[int]) -> "FgAbelianGroup":
        """``Z/o_1 + ... + Z/o_k`` (``o_i = 0`` meaning ``Z``), canonicalized."""
        return cls.from_presentation(len(orders), [[o if i == j else 0 for j in range(len(orders))] for i, o in enumerate(orders)])

    @classmethod
    def from_presentation(cls, ngens: int, relations: Sequence[Sequence[int]]) -> "FgAbelianGroup":
        group, _ = presentation_to_group(ngens, relations)
        return group

    def __str__(self) -> str:
        parts = [f"Z/{d}" for d in self.invariant_factors] + ["Z"] * self.free_rank
        return " + ".join(parts) if parts else "0"


def presentation_to_group(ngens: int, relations: Sequence[Sequence[int]]) -> tuple[FgAbelianGroup, Matrix]:
    """Canonicalize ``Z^ngens / rowspan(relations)``.

    Returns the group and an ``ngens x group.ngens`` matrix whose row ``p``
    holds the canonical coordinates of the ``p``-th presentation generator.
    """
    rels = [list(r) for r in relations if any(r)]
    if not rels:
        return FgAbelianGroup(ngens), identity(ngens)
    _, D, V = smith_normal_form(rels)
    diag = [D[i][i] if i < len(D) else 0 for i in range(ngens)]
    # generator e_p has coordinates V[p] in the diagonal basis
    torsion = [i for i in range(ngens) if diag[i] > 1]
    free = [i for i in range(ngens) if diag[i] == 0]
    keep = torsion + free
    group = FgAbelianGroup(len(free), tuple(diag[i] for i in torsion))
    gmap = [group.reduce([V[p][i] for i in keep]) for p in range(ngens)]
    return group, [list(r) for r in gmap]


@dataclass(frozen=True)
class SymSquare:
    source: FgAbelianGroup
    result: FgAbelianGroup
    # (i, j) with i <= j -> canonical coordinates in ``result``
    generator_map: dict[tuple[int, int], tuple[int, ...]]


def symmetric_pairs(n: int) -> list[tuple[int, int]]:
    """Pairs ``(i, j)`` with ``i <= j`` in lexicographic order."""
    return [(i, j) for i in range(n) for j in range(i, n)]


def sym_tensor_square(A: FgAbelianGroup) -> SymSquare:
    """Symmetric tensor square ``A (.) A``: ``A (x) A`` modulo ``x - x^op``.

    On generators ``g_i`` of orders ``o_i`` the generator ``g_i (.) g_j`` is
    killed by ``gcd(o_i, o_j)``; the presentation is canonicalized by SNF.
    """
    pairs = symmetric_pairs(A.ngens)
    orders = A.orders
    rels = []
    for k, (i, j) in enumerate(pairs):
        o = gcd(orders[i], orders[j])
        if o:
            rels.append([o if m == k else 0 for m in range(len(pairs))])
    result, gmap = presentation_to_group(len(pairs), rels)
    return SymSquare(A, result, {p: tuple(gmap[k]) for k, p in enumerate(pairs)})


def parse_matrix(text: str) -> list[list[Fraction]]:
    """One row per line, entries as integers or ``p/q``; ``#`` starts a comment."""
    rows = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            rows.append([Fraction(tok) for tok in line.replace(",", " ").split()])
    if len({len(r) for r in rows}) > 1:
        raise ValueError("ragged matrix")
    return rows


def format_matrix(M: Sequence[Sequence[Fraction | int]]) -> str:
    return "\n".join(" ".join(str(v) for v in row) for row in M) + "\n"
