"""PSLQ integer-relation detection (Ferguson-Bailey) on mpmath floats."""
from __future__ import annotations

from typing import Sequence

import mpmath

from .errors import PrecisionExhausted


def _nint(x) -> int:
    return int(mpmath.nint(x))


def pslq(
    values: Sequence,
    coeff_bound: int = 10**6,
    prec: int = 256,
    *,
    max_steps: int | None = None,
) -> list[int] | None:
    """Search for a nonzero integer vector ``c`` with ``sum c_i x_i ~ 0``.

    Returns ``c`` (first nonzero entry positive) when
    ``|sum c_i x_i| < 2**(-prec/2)`` and ``max |c_i| <= coeff_bound``.
    Returns ``None`` once the algorithm proves that no relation of Euclidean
    norm below ``coeff_bound * sqrt(n)`` exists, which covers every vector
    with ``max |c_i| <= coeff_bound``. That proof is relative to the input
    values as given at ``prec`` bits, so it is evidence, not certainty.

    Raises :class:`PrecisionExhausted` if the reduction outgrows the
    precision (or ``max_steps``) before either outcome.
    """
    if prec < 64:
        raise ValueError("pslq needs at least 64 bits")
    n = len(values)
    if n == 0:
        raise ValueError("pslq needs at least one value")
    xs = [v.value if hasattr(v, "precision_bits") else v for v in values]
    with mpmath.workprec(prec):
        x = [mpmath.mpf(v) for v in xs]
        threshold = mpmath.mpf(2) ** (-prec // 2)
        for i, xi in enumerate(x):
            if abs(xi) < threshold:
                return _normalize([int(k == i) for k in range(n)])
        if n == 1:
            return None
        return _pslq_core(x, coeff_bound, prec, threshold, max_steps or 100 * prec * n)


def _normalize(c: list[int]) -> list[int]:
    for v in c:
        if v:
            return c if v > 0 else [-w for w in c]
    return c


def _pslq_core(x, coeff_bound, prec, threshold, max_steps):
    n = len(x)
    gamma = mpmath.sqrt(mpmath.mpf(4) / 3)
    # the largest integer matrix entry we trust at this precision
    entry_limit = mpmath.mpf(2) ** (prec // 2)
    norm_bound = coeff_bound * mpmath.sqrt(n)

    # normalize so |x| = 1
    scale = mpmath.sqrt(mpmath.fsum(v * v for v in x))
    y = [v / scale for v in x]
    s = [mpmath.sqrt(mpmath.fsum(y[j] ** 2 for j in range(k, n))) for k in range(n)]
    # lower trapezoidal H, n x (n-1)
    H = [[mpmath.mpf(0)] * (n - 1) for _ in range(n)]
    for i in range(n):
        for j in range(min(i + 1, n - 1)):
            if i == j:
                H[i][j] = s[j + 1] / s[j]
            else:
                H[i][j] = -y[i] * y[j] / (s[j] * s[j + 1])
    A = [[int(i == j) for j in range(n)] for i in range(n)]
    B = [[int(i == j) for j in range(n)] for i in range(n)]

    def reduce_rows(lo: int):
        for i in range(lo, n):
            for j in range(min(i - 1, n - 2), -1, -1):
                if H[j][j] == 0:
                    continue
                t = _nint(H[i][j] / H[j][j])
                if not t:
                    continue
                y[j] += t * y[i]
                for k in range(j + 1):
                    H[i][k] -= t * H[j][k]
                for k in range(n):
                    A[i][k] -= t * A[j][k]
                    B[k][j] += t * B[k][i]

    reduce_rows(1)
    for _ in range(max_steps):
        # exchange step
        m = max(range(n - 1), key=lambda i: gamma ** (i + 1) * abs(H[i][i]))
        y[m], y[m + 1] = y[m + 1], y[m]
        A[m], A[m + 1] = A[m + 1], A[m]
        H[m], H[m + 1] = H[m + 1], H[m]
        for row in B:
            row[m], row[m + 1] = row[m + 1], row[m]
        if m < n - 2:
            t0 = mpmath.sqrt(H[m][m] ** 2 + H[m][m + 1] ** 2)
            if t0 == 0:
                raise PrecisionExhausted("degenerate corner during PSLQ exchange")
            t1, t2 = H[m][m] / t0, H[m][m + 1] / t0
            for i in range(m, n):
                t3, t4 = H[i][m], H[i][m + 1]
                H[i][m] = t1 * t3 + t2 * t4
                H[i][m + 1] = -t2 * t3 + t1 * t4
        reduce_rows(m + 1)

        # relation check: a column of B with a tiny residual
        best = None
        for j in range(n):
            if abs(y[j]) * scale < threshold:
                col = [B[i][j] for i in range(n)]
                if any(col):
                    resid = abs(mpmath.fsum(c * v for c, v in zip(col, x)))
                    if resid < threshold and (best is None or max(map(abs, col)) < max(map(abs, best))):
                        best = col
        if best is not None:
            if max(map(abs, best)) > coeff_bound:
                return None
            return _normalize(best)

        # every relation has norm >= 1 / max |H_jj|
        hmax = max(abs(H[j][j]) for j in range(n - 1))
        if hmax == 0 or 1 / hmax > norm_bound:
            return None
        if max(abs(a) for row in A for a in row) > entry_limit:
            raise PrecisionExhausted(f"PSLQ outgrew {prec}-bit precision before reaching the bound")
    raise PrecisionExhausted(f"PSLQ did not terminate within {max_steps} iterations")
