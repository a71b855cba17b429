from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modob.exactreal import ExactReal
from modob.relations import (
    EXACT,
    FREE,
    FREE_UP_TO_BOUND,
    NOT_FREE,
    NUMERIC,
    FreenessCertificate,
    LogGenerators,
    QuadraticRelation,
    SearchConfig,
    form_to_relation,
    is_quadratically_free,
    isotropy_defect,
    quadratic_relation_lattice,
    reduce_to_basis,
    relation_to_form,
)


def coeffs(lattice):
    return [list(r.coeffs) for r in lattice]


def test_sqrt2_lattice(sqrt2_basis):
    T = LogGenerators.exact(sqrt2_basis, ["L", "sqrt2L"])
    assert coeffs(quadratic_relation_lattice(T)) == [[2, 0, -1]]
    cert = is_quadratically_free(T)
    assert cert.verdict == NOT_FREE and list(cert.witness.coeffs) == [2, 0, -1]


def test_golden_lattice(golden_basis):
    T = LogGenerators.exact(golden_basis, ["L", "phiL"])
    assert coeffs(quadratic_relation_lattice(T)) == [[1, 1, -1]]


def test_single_generator_is_free(sqrt2_basis):
    T = LogGenerators.exact(sqrt2_basis, ["L"])
    assert quadratic_relation_lattice(T) == []
    assert is_quadratically_free(T).verdict == FREE


def test_rational_powers_are_free(lambdaq_basis):
    cert = is_quadratically_free(LogGenerators.exact(lambdaq_basis, ["L", "L/3"]))
    assert cert.verdict == FREE
    assert list(cert.basis_reduction.basis.labels) == ["1/3*L"]
    assert cert.basis_reduction.expression == ((3,), (1,))


def test_dependent_exact_inputs(sqrt2_basis):
    red = reduce_to_basis(LogGenerators.exact(sqrt2_basis, ["L", "2*L"]))
    assert len(red.basis) == 1
    assert red.expression == ((1,), (2,))


def test_independent_inputs_unchanged(sqrt2_basis):
    T = LogGenerators.exact(sqrt2_basis, ["L", "sqrt2L"])
    red = reduce_to_basis(T)
    assert red.basis is T and red.expression == ((1, 0), (0, 1))


def test_numeric_log2_log3():
    T = LogGenerators.numeric(["2", "3"])
    red = reduce_to_basis(T)
    assert red.expression == ((1, 0), (0, 1))
    cert = is_quadratically_free(T)
    assert cert.verdict == FREE_UP_TO_BOUND
    assert cert.precision_bits == 256 and cert.coeff_bound == 10**6


def test_numeric_dependent_inputs():
    T = LogGenerators.numeric(["2", "4", "3", "6"])
    red = reduce_to_basis(T)
    assert len(red.basis) == 2
    values = [v.value for v in red.basis.values]
    with mpmath.workprec(300):
        for t, row in zip(T.values, red.expression):
            assert abs(t.value - mpmath.fsum(c * v for c, v in zip(row, values))) < mpmath.mpf(2) ** -200


def test_numeric_sqrt2_and_golden():
    cert = is_quadratically_free(LogGenerators.numeric(["2", "2^sqrt(2)"]))
    assert cert.verdict == NOT_FREE and list(cert.witness.coeffs) == [2, 0, -1]
    cert = is_quadratically_free(LogGenerators.numeric(["2", "2^phi"]))
    assert list(cert.witness.coeffs) == [1, 1, -1]
    assert float(cert.witness.residual.value) < 2.0**-128


def test_zero_generator_rejected(sqrt2_basis):
    with pytest.raises(ValueError):
        LogGenerators.exact(sqrt2_basis, ["L - L"])
    with pytest.raises(ValueError):
        LogGenerators.numeric(["1"])
    with pytest.raises(ValueError):
        LogGenerators.numeric(["-2"])


def test_certificate_invariants(sqrt2_basis):
    T = LogGenerators.numeric(["2"])
    red = reduce_to_basis(T)
    with pytest.raises(ValueError):
        FreenessCertificate(FREE, None, (), NUMERIC, red)
    with pytest.raises(ValueError):
        FreenessCertificate(NOT_FREE, None, (), EXACT, red)
    with pytest.raises(ValueError):
        QuadraticRelation(2, (0, 0, 0))


def test_relation_to_form():
    q = relation_to_form(QuadraticRelation(2, (2, 0, -1)))
    assert q.diag == (2, -1) and q.cross == (0,)
    q = relation_to_form(QuadraticRelation(2, (0, 1, 0)))
    assert q.cross == (1,)
    q = relation_to_form(QuadraticRelation(2, (2, 0, -1)), 3)
    assert q.diag == (2, -1, 0) and q.cross == (0, 0, 0)
    assert form_to_relation(relation_to_form(QuadraticRelation(3, (1, 2, 3, 4, 5, 6)))).coeffs == (1, 2, 3, 4, 5, 6)


def test_isotropy_defect_values(sqrt2_basis):
    from modob.qforms import IntegralQuadraticForm

    T = LogGenerators.numeric(["2", "3"])
    d = isotropy_defect(IntegralQuadraticForm((1, 0)), T)
    assert abs(float(d) - 0.480453013918201) < 1e-12
    assert isotropy_defect(IntegralQuadraticForm.zero(2), T).is_zero()
    E = LogGenerators.exact(sqrt2_basis, ["L", "sqrt2L"])
    assert isotropy_defect(IntegralQuadraticForm((2, -1)), E).is_zero()
    assert not isotropy_defect(IntegralQuadraticForm((1, 0)), E).is_zero()


FIXTURE_GENS = {"sqrt2": ["L", "sqrt2L"], "golden": ["L", "phiL"], "lambdaQ": ["L", "L/3", "L/5"]}


@pytest.mark.parametrize("name", list(FIXTURE_GENS))
def test_exact_relations_are_isotropic(name, request):
    basis = request.getfixturevalue(f"{name.lower()}_basis")
    T = LogGenerators.exact(basis, FIXTURE_GENS[name])
    red = reduce_to_basis(T)
    for r in quadratic_relation_lattice(red.basis):
        assert isotropy_defect(relation_to_form(r), red.basis).is_zero()
        assert form_to_relation(relation_to_form(r)) == r


def test_monotonicity_under_duplicated_generator(sqrt2_basis):
    T = LogGenerators.exact(sqrt2_basis, ["L", "sqrt2L"])
    base = quadratic_relation_lattice(T)
    bigger = LogGenerators.exact(sqrt2_basis, ["L", "sqrt2L", "L"])
    lattice = quadratic_relation_lattice(bigger)
    assert len(lattice) > len(base)
    # every original relation, zero-extended, lies in the larger lattice
    rows = [list(r.coeffs) for r in lattice]
    for r in base:
        assert _in_span(rows, list(relation_to_form(r, 3).coefficients()))


def _in_span(rows, v):
    from modob.abgroup import hnf_rows

    return hnf_rows(rows + [v]) == hnf_rows(rows)


rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12).filter(lambda c: c != 0)


@given(rationals)
@settings(max_examples=25)
def test_scaling_invariance_exact(c):
    from modob.exactreal import load_basis
    from pathlib import Path

    data = Path(__file__).resolve().parents[1] / "src" / "modob" / "data"
    for name, gens in [("sqrt2", ["L", "sqrt2L"]), ("golden", ["L", "phiL"])]:
        basis = load_basis(data / f"{name}.basis")
        T = LogGenerators.exact(basis, gens)
        scaled = LogGenerators(EXACT, tuple(v * c for v in T.values), T.labels)
        assert quadratic_relation_lattice(scaled) == quadratic_relation_lattice(T)


@pytest.mark.parametrize("c", ["3", "1/7", "-5/2"])
def test_scaling_invariance_numeric(c):
    from modob.exactreal import BigFloat

    T = LogGenerators.numeric(["2", "2^phi"])
    k = Fraction(c)
    with mpmath.workprec(320):
        scaled = LogGenerators(
            NUMERIC, tuple(BigFloat(v.value * k.numerator / k.denominator, 256) for v in T.values), T.labels
        )
    assert coeffs(quadratic_relation_lattice(scaled)) == coeffs(quadratic_relation_lattice(T))


# (multiplicative generators, verdict forced by a known algebraic identity or
# by the absence of any known quadratic relation)
AUDIT = [
    (["2", "3"], FREE_UP_TO_BOUND),
    (["2", "3", "5"], FREE_UP_TO_BOUND),
    (["2", "2^sqrt(2)"], NOT_FREE),
    (["3", "3^phi"], NOT_FREE),
    (["2", "4"], FREE_UP_TO_BOUND),
    (["5", "5^(1/3)"], FREE_UP_TO_BOUND),
    (["2", "2^sqrt(3)", "3"], NOT_FREE),
    (["pi", "e"], FREE_UP_TO_BOUND),
    (["7", "7^cbrt(2)"], FREE_UP_TO_BOUND),
]


@pytest.mark.parametrize("lams,expected", AUDIT)
def test_numeric_never_claims_free(lams, expected):
    T = LogGenerators.numeric(lams)
    cert = is_quadratically_free(T, SearchConfig(256, 10**6))
    assert cert.verdict == expected
    threshold = mpmath.mpf(2) ** -128
    for r in cert.lattice:
        assert r.residual.value < threshold
        assert max(map(abs, r.coeffs)) <= 10**6


def test_numeric_cubic_is_free_up_to_bound():
    # 2^(cbrt 2) has no quadratic relation with 2: cbrt 2 is not quadratic
    cert = is_quadratically_free(LogGenerators.numeric(["2", "2^cbrt(2)"]))
    assert cert.verdict == FREE_UP_TO_BOUND


def test_exact_numeric_agreement_on_golden(golden_basis):
    exact = is_quadratically_free(LogGenerators.exact(golden_basis, ["L", "phiL"]))
    numeric = is_quadratically_free(LogGenerators.numeric(["2", "2^phi"]))
    assert relation_to_form(exact.witness) == relation_to_form(numeric.witness)


def test_exact_real_scalar_helpers(sqrt2_basis):
    x = sqrt2_basis.symbol("L")
    assert isinstance(x * Fraction(1, 2), ExactReal)
