"""Quadratic relations in a finitely generated subgroup of R.

For a Z-independent family ``t_1..t_n`` the relation lattice is the set of
integer vectors ``r`` over the formal products ``t_i (.) t_j`` (``i <= j``,
lexicographic) with ``sum r_ij t_i t_j = 0``. The group ``<t_1..t_n>`` is
quadratically free exactly when this lattice is zero, so a finitely
generated group is decided by first extracting one Z-basis of it.

Two modes:

* exact: ``t_i`` are :class:`ExactReal` over a declared basis with a closed
  product table; the lattice is an exact integer kernel.
* numeric: ``t_i`` are high-precision floats; relations come from PSLQ with
  a coefficient bound, and a "free" answer is never claimed, only
  "free-up-to-bound".
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Sequence

import mpmath

from .abgroup import hnf_rows, integer_kernel, symmetric_pairs
from .errors import ModobError, PrecisionExhausted
from .exactreal import BigFloat, ExactReal, RealBasis, eval_expression, eval_numeric, parse_linear
from .pslq import pslq
from .qforms import IntegralQuadraticForm, evaluate

EXACT, NUMERIC = "exact", "numeric"
FREE, NOT_FREE, FREE_UP_TO_BOUND = "free", "not-free", "free-up-to-bound"


@dataclass(frozen=True)
class SearchConfig:
    prec: int = 256
    coeff_bound: int = 10**6


@dataclass(frozen=True)
class LogGenerators:
    """Additive generators ``t_i = log(lambda_i)``."""

    mode: str
    values: tuple
    labels: tuple[str, ...]

    def __post_init__(self):
        if self.mode not in (EXACT, NUMERIC):
            raise ValueError(f"mode must be {EXACT!r} or {NUMERIC!r}")
        if not self.values:
            raise ValueError("at least one generator is required")
        if len(self.labels) != len(self.values):
            raise ValueError("one label per generator")
        if self.mode == EXACT:
            basis = self.values[0].basis
            if any(v.basis is not basis for v in self.values):
                raise ValueError("exact generators must share one basis")
        for v, lab in zip(self.values, self.labels):
            if (v.is_zero() if self.mode == EXACT else v.value == 0):
                raise ValueError(f"generator {lab!r} is zero; log of 1 is not a generator")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def basis(self) -> RealBasis | None:
        return self.values[0].basis if self.mode == EXACT else None

    @classmethod
    def exact(cls, basis: RealBasis, exprs: Sequence[str]) -> "LogGenerators":
        """Generators given as rational combinations of basis symbols."""
        return cls(EXACT, tuple(parse_linear(e, basis) for e in exprs), tuple(e.strip() for e in exprs))

    @classmethod
    def numeric(cls, lambdas: Sequence[str], prec: int = 256) -> "LogGenerators":
        """Generators ``log(lambda)`` for closed-form positive reals ``lambda``."""
        values = []
        for lam in lambdas:
            v = eval_expression(lam, prec + 16)
            if v.value <= 0:
                raise ValueError(f"multiplicative generator {lam!r} must be positive")
            with mpmath.workprec(prec + 64):
                values.append(BigFloat(mpmath.log(v.value), prec))
        return cls(NUMERIC, tuple(values), tuple(s.strip() for s in lambdas))

    def numeric_values(self, prec: int) -> list[BigFloat]:
        if self.mode == NUMERIC:
            return list(self.values)
        return [eval_numeric(v, prec) for v in self.values]


@dataclass(frozen=True)
class QuadraticRelation:
    """Integer vector over ``t_i (.) t_j``, ``i <= j`` lexicographic."""

    n: int
    coeffs: tuple[int, ...]
    residual: BigFloat | None = field(default=None, compare=False)

    def __post_init__(self):
        if len(self.coeffs) != self.n * (self.n + 1) // 2:
            raise ValueError("relation needs n(n+1)/2 coefficients")
        if not any(self.coeffs):
            raise ValueError("the zero vector is not a relation")

    def terms(self) -> str:
        parts = []
        for (i, j), c in zip(symmetric_pairs(self.n), self.coeffs):
            if c:
                parts.append(f"{c:+d}*t{i + 1}t{j + 1}")
        return " ".join(parts)

    def to_json(self) -> dict:
        out = {"n": self.n, "coeffs": list(self.coeffs), "terms": self.terms()}
        if self.residual is not None:
            out["residual"] = mpmath.nstr(self.residual.value, 5)
        return out


@dataclass(frozen=True)
class BasisReduction:
    basis: LogGenerators
    # expression[i] holds the integer coordinates of input t_i over the basis
    expression: tuple[tuple[int, ...], ...]
    metadata: dict = field(default_factory=dict, compare=False)

    def to_json(self) -> dict:
        return {
            "basis": list(self.basis.labels),
            "expression": [list(r) for r in self.expression],
            **self.metadata,
        }


@dataclass(frozen=True)
class FreenessCertificate:
    verdict: str
    witness: QuadraticRelation | None
    lattice: tuple[QuadraticRelation, ...]
    mode: str
    basis_reduction: BasisReduction
    precision_bits: int | None = None
    coeff_bound: int | None = None

    def __post_init__(self):
        if self.verdict == NOT_FREE and self.witness is None:
            raise ValueError("a not-free verdict needs a witness")
        if self.mode == NUMERIC and self.verdict == FREE:
            raise ValueError("numeric mode cannot certify freeness")

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "witness": self.witness.to_json() if self.witness else None,
            "lattice": [r.to_json() for r in self.lattice],
            "mode": self.mode,
            "precision_bits": self.precision_bits,
            "coeff_bound": self.coeff_bound,
            "basis_reduction": self.basis_reduction.to_json(),
        }


# -- Z-basis extraction ------------------------------------------------------------------


def _z_basis_of_rational_rows(C: Sequence[Sequence[Fraction]]) -> tuple[list[list[Fraction]], list[list[int]]]:
    """Z-basis of the Z-span of rational row vectors, plus integer expressions
    of every input row over that basis."""
    den = 1
    for row in C:
        for v in row:
            den = den * v.denominator // gcd(den, v.denominator)
    ints = [[int(v * den) for v in row] for row in C]
    H = hnf_rows(ints)
    pivots = [next(k for k, v in enumerate(h) if v) for h in H]
    expression = []
    for row in ints:
        r, coefs = list(row), []
        for h, p in zip(H, pivots):
            q, rem = divmod(r[p], h[p])
            if rem:
                raise AssertionError("HNF basis does not span its input")
            coefs.append(q)
            if q:
                r = [a - q * b for a, b in zip(r, h)]
        if any(r):
            raise AssertionError("HNF basis does not span its input")
        expression.append(coefs)
    return [[Fraction(v, den) for v in h] for h in H], expression


def _independent(C: Sequence[Sequence[Fraction]]) -> bool:
    k = len(C[0])
    return not integer_kernel([[C[i][j] for i in range(len(C))] for j in range(k)], ncols=len(C))


def _combination_label(vec: Sequence[Fraction], labels: Sequence[str]) -> str:
    terms = []
    for c, lab in zip(vec, labels):
        if not c:
            continue
        coef = "" if c == 1 else "-" if c == -1 else f"{c}*"
        terms.append(f"{coef}({lab})" if len(labels) > 1 or c != 1 else lab)
    return " + ".join(terms).replace("+ -", "- ")


def reduce_to_basis(T: LogGenerators, config: SearchConfig = SearchConfig()) -> BasisReduction:
    """Extract a Z-basis of ``<t_1..t_n>`` and express every input over it.

    Already independent inputs are returned unchanged with the identity
    expression.
    """
    if T.mode == EXACT:
        C = [list(v.coords) for v in T.values]
        meta = {"method": "hnf"}
        if _independent(C):
            return BasisReduction(T, _identity(len(T)), meta)
        rows, expression = _z_basis_of_rational_rows(C)
        basis = T.basis
        labels = tuple(str(ExactReal(basis, tuple(r))) for r in rows)
        values = tuple(ExactReal(basis, tuple(r)) for r in rows)
        return BasisReduction(LogGenerators(EXACT, values, labels), tuple(map(tuple, expression)), meta)

    # numeric: grow a Q-independent subset, expressing each input over it
    subset: list[int] = []
    rational: list[list[Fraction]] = []
    found = []
    for i, t in enumerate(T.values):
        if subset:
            rel = pslq([T.values[s] for s in subset] + [t], config.coeff_bound, config.prec)
        else:
            rel = None
        if rel is None:
            subset.append(i)
            for r in rational:
                r.append(Fraction(0))
            rational.append([Fraction(0)] * (len(subset) - 1) + [Fraction(1)])
            continue
        if rel[-1] == 0:
            raise PrecisionExhausted("PSLQ reported a relation among generators already judged independent")
        found.append({"inputs": subset + [i], "coeffs": rel})
        rational.append([Fraction(-c, rel[-1]) for c in rel[:-1]])
    meta = {"method": "pslq", "precision_bits": config.prec, "coeff_bound": config.coeff_bound, "relations": found}
    if len(subset) == len(T):
        return BasisReduction(T, _identity(len(T)), meta)
    rows, expression = _z_basis_of_rational_rows(rational)
    sub_labels = [T.labels[s] for s in subset]
    labels = tuple(_combination_label(r, [f"log {lab}" for lab in sub_labels]) for r in rows)
    values = []
    with mpmath.workprec(config.prec + 64):
        for r in rows:
            total = mpmath.mpf(0)
            for c, s in zip(r, subset):
                if c:
                    total += T.values[s].value * c.numerator / c.denominator
            values.append(BigFloat(total, config.prec))
    return BasisReduction(LogGenerators(NUMERIC, tuple(values), labels), tuple(map(tuple, expression)), meta)


def _identity(n: int) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


# -- relation lattice ---------------------------------------------------------------------


def product_values(T: LogGenerators) -> list:
    """``t_i t_j`` for ``i <= j`` in lexicographic order."""
    vals = T.values
    return [vals[i] * vals[j] for i, j in symmetric_pairs(len(T))]


def quadratic_relation_lattice(
    T: LogGenerators, config: SearchConfig = SearchConfig()
) -> list[QuadraticRelation]:
    """HNF basis of the relation lattice over the formal products of ``T``.

    ``T`` should be Z-independent (see :func:`reduce_to_basis`); for dependent
    families the lattice still makes sense but contains the trivial
    relations coming from the dependence.
    """
    n = len(T)
    if T.mode == EXACT:
        prods = product_values(T)
        M = [[p.coords[k] for p in prods] for k in range(len(T.basis.products))]
        rows = integer_kernel(M, ncols=len(prods))
        return [QuadraticRelation(n, tuple(r)) for r in rows]

    prods = product_values(T)
    active = list(range(len(prods)))
    found = []
    while len(active) > 1:
        rel = pslq([prods[k] for k in active], config.coeff_bound, config.prec)
        if rel is None:
            break
        full = [0] * len(prods)
        for k, c in zip(active, rel):
            full[k] = c
        found.append(full)
        # drop a coordinate the new relation involves, preferring unit coefficients
        drop = min((k for k, c in zip(active, rel) if c), key=lambda k: abs(full[k]))
        active.remove(drop)
    if not found:
        return []
    complement = integer_kernel(found)
    saturated = integer_kernel(complement, ncols=len(prods)) if complement else hnf_rows(
        [[int(i == j) for j in range(len(prods))] for i in range(len(prods))]
    )
    out = []
    with mpmath.workprec(config.prec + 32):
        for r in saturated:
            resid = abs(mpmath.fsum(c * p.value for c, p in zip(r, prods)))
            if resid >= mpmath.mpf(2) ** (-config.prec // 2):
                raise PrecisionExhausted("saturated relation fails the residual threshold")
            out.append(QuadraticRelation(n, tuple(r), BigFloat(resid, config.prec)))
    return out


def is_quadratically_free(T: LogGenerators, config: SearchConfig = SearchConfig()) -> FreenessCertificate:
    reduction = reduce_to_basis(T, config)
    lattice = quadratic_relation_lattice(reduction.basis, config)
    if lattice:
        verdict = NOT_FREE
    else:
        verdict = FREE if T.mode == EXACT else FREE_UP_TO_BOUND
    numeric = T.mode == NUMERIC
    return FreenessCertificate(
        verdict,
        lattice[0] if lattice else None,
        tuple(lattice),
        T.mode,
        reduction,
        config.prec if numeric else None,
        config.coeff_bound if numeric else None,
    )


# -- relations as quadratic forms ---------------------------------------------------------


def relation_to_form(r: QuadraticRelation, n: int | None = None) -> IntegralQuadraticForm:
    """Same coefficients read over ``v_i v_j``; zero-extended to dimension ``n``."""
    n = r.n if n is None else n
    if n < r.n:
        raise ValueError("cannot embed a relation into fewer generators")
    big = {p: k for k, p in enumerate(symmetric_pairs(n))}
    coeffs = [0] * len(big)
    for p, c in zip(symmetric_pairs(r.n), r.coeffs):
        coeffs[big[p]] = c
    return IntegralQuadraticForm.from_pair_coefficients(n, coeffs)


def form_to_relation(q: IntegralQuadraticForm) -> QuadraticRelation:
    return QuadraticRelation(q.dim, tuple(q.coefficients()))


def isotropy_defect(q: IntegralQuadraticForm, T: LogGenerators, prec: int | None = None):
    """``sum q_ii t_i^2 + sum q_ij t_i t_j``, i.e. ``4 pi^2 q(xi)``.

    Exact generators give an :class:`ExactReal` over the products basis
    (zero exactly when ``q(xi) = 0``); numeric generators, or any generators
    when ``prec`` is given, give a :class:`BigFloat`.
    """
    if q.dim != len(T):
        raise ModobError(f"form of dimension {q.dim} against {len(T)} generators")
    if T.mode == EXACT and prec is None:
        value = evaluate(q, list(T.values))
        return T.basis.products.zero() if isinstance(value, int) else value
    p = prec or (T.values[0].precision_bits if T.mode == NUMERIC else 256)
    value = evaluate(q, T.numeric_values(p))
    return BigFloat(mpmath.mpf(0), p) if isinstance(value, int) else value


def modular_generator(T: LogGenerators, prec: int = 256) -> list[BigFloat]:
    """Coordinates ``log(lambda_i) / 2 pi`` of the one-parameter generator."""
    out = []
    for t in T.numeric_values(prec):
        with mpmath.workprec(prec + 32):
            out.append(BigFloat(t.value / (2 * mpmath.pi), prec))
    return out


def form_at_generator(q: IntegralQuadraticForm, T: LogGenerators, prec: int = 256) -> BigFloat:
    """``q(xi)`` evaluated numerically at the one-parameter generator."""
    value = evaluate(q, modular_generator(T, prec))
    return BigFloat(mpmath.mpf(0), prec) if isinstance(value, int) else value
