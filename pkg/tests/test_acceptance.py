"""Acceptance criteria 1-8, one test each.

Every test records a ``PASS``/``FAIL`` line; ``conftest.py`` prints them in a
summary section at the end of the run. ``python tests/test_acceptance.py``
runs the criteria without pytest and prints the same lines.
"""
import itertools
import random
import subprocess
import sys
import time
from contextlib import contextmanager
from math import gcd, prod
from pathlib import Path

import mpmath

from modob.abgroup import FgAbelianGroup, hnf_rows
from modob.cocycle import obstruction_cochain, verify_bockstein, verify_cocycle
from modob.exactreal import load_basis
from modob.fincoh import FiniteAbelianGroup, class_is_trivial, cohomology, cohomology_order_by_kernels, restrict
from modob.qforms import IntegralBilinearForm, IntegralQuadraticForm
from modob.relations import (
    FREE,
    NOT_FREE,
    LogGenerators,
    QuadraticRelation,
    is_quadratically_free,
    isotropy_defect,
    quadratic_relation_lattice,
    relation_to_form,
)

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "src" / "modob" / "data"
RESULTS: dict[int, str] = {}


@contextmanager
def criterion(number: int, title: str):
    notes: list[str] = []
    t0 = time.perf_counter()
    try:
        yield notes.append
    except BaseException as exc:
        RESULTS[number] = f"criterion {number} FAIL  {title}: {type(exc).__name__}: {exc}"
        raise
    elapsed = time.perf_counter() - t0
    detail = "; ".join(notes)
    RESULTS[number] = f"criterion {number} PASS  {title} ({detail}; {elapsed:.2f} s)"


def basis(name):
    return load_basis(DATA / f"{name}.basis")


def up_to_sign(coeffs, pattern):
    return list(coeffs) in (list(pattern), [-c for c in pattern])


def test_criterion_1_sqrt2_not_free():
    with criterion(1, "sqrt2 example is not free") as note:
        t0 = time.perf_counter()
        cert = is_quadratically_free(LogGenerators.exact(basis("sqrt2"), ["L", "sqrt2L"]))
        elapsed = time.perf_counter() - t0
        assert cert.verdict == NOT_FREE
        assert len(cert.lattice) == 1
        assert up_to_sign(cert.lattice[0].coeffs, [2, 0, -1])
        assert elapsed < 1.0
        note(f"rank 1, generator {list(cert.lattice[0].coeffs)}, {elapsed * 1000:.1f} ms")


def test_criterion_2_rational_powers_free():
    with criterion(2, "rational powers of one generator are free") as note:
        t0 = time.perf_counter()
        cert = is_quadratically_free(LogGenerators.exact(basis("lambdaQ"), ["L", "L/3", "L/5"]))
        elapsed = time.perf_counter() - t0
        assert cert.verdict == FREE and not cert.lattice
        assert elapsed < 1.0
        note(f"exact certificate, basis {list(cert.basis_reduction.basis.labels)}, {elapsed * 1000:.1f} ms")


def test_criterion_3_golden_both_modes():
    with criterion(3, "golden ratio relation in exact and numeric modes") as note:
        exact = is_quadratically_free(LogGenerators.exact(basis("golden"), ["L", "phiL"]))
        numeric = is_quadratically_free(LogGenerators.numeric(["2", "2^phi"], 256))
        assert exact.verdict == numeric.verdict == NOT_FREE
        assert up_to_sign(exact.witness.coeffs, [1, 1, -1])
        assert up_to_sign(numeric.witness.coeffs, [1, 1, -1])
        residual = numeric.witness.residual.value
        assert residual < mpmath.mpf(2) ** -128
        q_exact, q_numeric = relation_to_form(exact.witness), relation_to_form(numeric.witness)
        assert q_exact in (q_numeric, -q_numeric)
        note(f"pattern {list(exact.witness.coeffs)}, numeric residual {mpmath.nstr(residual, 3)}")


def _fixture_families():
    sq, gold, lam = basis("sqrt2"), basis("golden"), basis("lambdaQ")
    return [
        LogGenerators.exact(sq, ["L", "sqrt2L"]),
        LogGenerators.exact(gold, ["L", "phiL"]),
        LogGenerators.exact(sq, ["L", "sqrt2L", "L + sqrt2L"]),
        LogGenerators.exact(gold, ["L", "phiL", "2*L - phiL"]),
        LogGenerators.exact(lam, ["L", "L/3", "L/5"]),
    ]


def _in_lattice(rows, v):
    return bool(rows) and hnf_rows(rows + [v]) == hnf_rows(rows)


def test_criterion_4_isotropy_identity():
    with criterion(4, "isotropy identity on relations and non-relations") as note:
        rng = random.Random(2024)
        families = [(T, [list(r.coeffs) for r in quadratic_relation_lattice(T)]) for T in _fixture_families()]
        with_relations = [(T, rows) for T, rows in families if rows]
        for _ in range(50):
            T, rows = rng.choice(with_relations)
            while True:
                mult = [rng.randint(-5, 5) for _ in rows]
                if any(mult):
                    break
            r = [sum(m * row[k] for m, row in zip(mult, rows)) for k in range(len(rows[0]))]
            q = relation_to_form(QuadraticRelation(len(T), tuple(r)))
            assert isotropy_defect(q, T).is_zero()
        smallest = mpmath.inf
        for _ in range(50):
            T, rows = rng.choice(families)
            npairs = len(T) * (len(T) + 1) // 2
            while True:
                v = [rng.randint(-9, 9) for _ in range(npairs)]
                if any(v) and not _in_lattice(rows, v):
                    break
            q = IntegralQuadraticForm.from_pair_coefficients(len(T), v)
            defect = abs(isotropy_defect(q, T, 256).value)
            assert defect > mpmath.mpf("1e-20")
            smallest = min(smallest, defect)
        note(f"50 relations exactly isotropic, smallest non-relation defect {mpmath.nstr(smallest, 3)}")


def test_criterion_5_cocycle_exactness():
    with criterion(5, "obstruction cocycle exactness and Bockstein identity") as note:
        rng = random.Random(5)
        t0 = time.perf_counter()
        checked = 0
        for k in range(10):
            d = 1 + k % 3
            B = IntegralBilinearForm(tuple(tuple(rng.randint(-6, 6) for _ in range(d)) for _ in range(d)))
            limit = 4 ** (4 * d)
            report = verify_cocycle(obstruction_cochain(B), 4, limit=limit)
            assert report["exhaustive"] and report["max_defect"] == "0"
            bock = verify_bockstein(B, 4, limit=limit)
            assert bock["holds"]
            checked += report["tuples_checked"]
        elapsed = time.perf_counter() - t0
        assert elapsed < 60
        note(f"10 forms, {checked} tuples exhaustive on (Z/4)^d, max_defect 0")


def _hom_count(factors, L):
    G = FiniteAbelianGroup(factors)
    el = [tuple(int(x) for x in e) for e in G.elements()]
    count = 0
    for f_vals in itertools.product(range(L), repeat=len(el)):
        f = dict(zip(el, f_vals))
        if all(f[tuple((a + b) % n for a, b, n in zip(x, y, factors))] == (f[x] + f[y]) % L for x in el for y in el):
            count += 1
    return count


def test_criterion_6_finite_oracle():
    with criterion(6, "finite oracle sanity") as note:
        t0 = time.perf_counter()
        orders = []
        for N in (2, 3, 4, 5):
            H3 = cohomology(FiniteAbelianGroup((N,)), 3, N)
            assert H3.order == N == cohomology_order_by_kernels(FiniteAbelianGroup((N,)), 3, N)
            orders.append(H3.order)
        small = [((2,), 2), ((3,), 3), ((4,), 2), ((2, 2), 2), ((2, 3), 6)]
        for factors, L in small:
            G = FiniteAbelianGroup(factors)
            assert cohomology(G, 0, L) == FgAbelianGroup.from_orders([L])
            H1 = cohomology(G, 1, L)
            assert H1.order == _hom_count(factors, L) == prod(gcd(n, L) for n in factors)
        elapsed = time.perf_counter() - t0
        assert elapsed < 30
        note(f"|H^3(Z/N, Z/N)| = {orders} for N = 2..5; H^0, H^1 on {len(small)} groups")


def test_criterion_7_nontriviality_witness():
    with criterion(7, "obstruction non-triviality witness") as note:
        x2 = restrict(obstruction_cochain(IntegralBilinearForm(((1,),))), 2, 2)
        assert not class_is_trivial(x2)
        assert class_is_trivial(restrict(obstruction_cochain(IntegralBilinearForm.zero(1)), 2, 2))
        cases = 0
        for N in (2, 3):
            for k in (1, 2, -3):
                B = IntegralBilinearForm(((0, k), (-k, 0)))
                # classes are compared in H^3(G, Q/Z), reached from Z/L with L = N^2
                assert class_is_trivial(restrict(obstruction_cochain(B), N, N * N))
                cases += 1
            assert class_is_trivial(restrict(obstruction_cochain(IntegralBilinearForm.zero(1)), N, N * N))
        note(f"x^2 nontrivial on Z/2 (L=2), B=0 trivial, {cases} antisymmetric forms trivial with L=N^2")


PROPERTY_SUITES = [
    "tests/test_cocycle.py::test_coboundary_squares_to_zero",
    "tests/test_cocycle.py::test_leibniz_pointwise_tables",
    "tests/test_cocycle.py::test_leibniz_pointwise_formulas",
    "tests/test_qforms.py::test_polarization_roundtrip",
    "tests/test_qforms.py::test_symsquare_roundtrip_random",
    "tests/test_qforms.py::test_symsquare_map_is_additive",
    "tests/test_abgroup.py::test_sym_square_matches_brute_force",
    "tests/test_abgroup.py::test_snf_postconditions_and_sympy_oracle",
    "tests/test_abgroup.py::test_hnf_postconditions",
    "tests/test_relations.py::test_scaling_invariance_exact",
    "tests/test_relations.py::test_scaling_invariance_numeric",
    "tests/test_relations.py::test_numeric_never_claims_free",
]


def test_criterion_8_property_suites():
    with criterion(8, "property suites") as note:
        t0 = time.perf_counter()
        proc = subprocess.run(
            [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *PROPERTY_SUITES],
            cwd=ROOT,
            capture_output=True,
            text=True,
        )
        elapsed = time.perf_counter() - t0
        assert proc.returncode == 0, proc.stdout[-2000:]
        assert elapsed < 300
        summary = proc.stdout.strip().splitlines()[-1]
        note(f"{len(PROPERTY_SUITES)} suites: {summary}")


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    failed = 0
    for t in tests:
        try:
            t()
        except Exception:
            failed += 1
    for n in sorted(RESULTS):
        print(RESULTS[n])
    sys.exit(1 if failed else 0)
