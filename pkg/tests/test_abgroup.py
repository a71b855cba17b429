import itertools
from math import gcd

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy.matrices.normalforms import smith_normal_form as sympy_snf

from modob.abgroup import (
    FgAbelianGroup,
    determinant,
    format_matrix,
    hermite_normal_form,
    identity,
    integer_kernel,
    invariant_factors,
    matmul,
    parse_matrix,
    presentation_to_group,
    smith_normal_form,
    sym_tensor_square,
    symmetric_pairs,
    transpose,
)

small_ints = st.integers(-30, 30)


def matrices(max_rows=5, max_cols=5):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(small_ints, min_size=c, max_size=c), min_size=r, max_size=r)
        )
    )


def check_snf(M):
    U, D, V = smith_normal_form(M)
    assert matmul(matmul(U, M), V) == D
    assert abs(determinant(U)) == 1 and abs(determinant(V)) == 1
    diag = [D[i][i] for i in range(min(len(D), len(D[0])))]
    for i, row in enumerate(D):
        for j, v in enumerate(row):
            if i != j:
                assert v == 0
    assert all(d >= 0 for d in diag)
    for a, b in zip(diag, diag[1:]):
        assert (b == 0) if a == 0 else (b % a == 0)
    return diag


def test_snf_examples():
    assert check_snf([[1, 0], [0, 1]]) == [1, 1]
    assert check_snf([[2, 4], [6, 8]]) == [2, 4]
    assert check_snf([[0]]) == [0]


@given(matrices())
@settings(max_examples=150)
def test_snf_postconditions_and_sympy_oracle(M):
    diag = check_snf(M)
    ref = sympy_snf(sympy.Matrix(M), domain=sympy.ZZ)
    ref_diag = [abs(int(ref[i, i])) for i in range(min(ref.shape))]
    assert diag == ref_diag


@given(matrices(6, 6))
@settings(max_examples=100)
def test_numpy_invariant_factors_match_exact_snf(M):
    diag = [d for d in check_snf(M) if d]
    assert invariant_factors(M) == diag


def test_invariant_factors_overflow_fallback():
    big = 10**30
    M = [[big, 0], [0, 2 * big]]
    assert invariant_factors(M) == [big, 2 * big]


@given(matrices())
@settings(max_examples=100)
def test_hnf_postconditions(M):
    H, U = hermite_normal_form(M)
    assert matmul(U, M) == H
    assert abs(determinant(U)) == 1
    last = -1
    for row in H:
        nz = [k for k, v in enumerate(row) if v]
        if not nz:
            continue
        p = nz[0]
        assert p > last and row[p] > 0
        last = p
    # entries above each pivot reduced into [0, pivot)
    for i, row in enumerate(H):
        nz = [k for k, v in enumerate(row) if v]
        if nz:
            p = nz[0]
            assert all(0 <= H[r][p] < row[p] for r in range(i))


def test_integer_kernel_examples():
    assert integer_kernel([[1, 0], [0, 1]]) == []
    assert integer_kernel([[1, -1]]) == [[1, 1]]
    assert integer_kernel([[2, 0, -1]]) == [[1, 0, 2], [0, 1, 0]]


def test_integer_kernel_saturation_by_enumeration():
    # every small integer solution of 2x - z = 0 lies in the Z-span of the returned basis
    K = integer_kernel([[2, 0, -1]])
    span = {tuple(a * K[0][k] + b * K[1][k] for k in range(3)) for a in range(-6, 7) for b in range(-6, 7)}
    for v in itertools.product(range(-3, 4), repeat=3):
        if 2 * v[0] - v[2] == 0:
            assert v in span


@given(matrices(4, 6))
@settings(max_examples=100)
def test_integer_kernel_properties(M):
    n = len(M[0])
    K = integer_kernel(M)
    for v in K:
        assert all(sum(a * b for a, b in zip(row, v)) == 0 for row in M)
        assert gcd(*v) == 1
    rank = sympy.Matrix(M).rank()
    assert len(K) == n - rank
    if K:
        # saturation: the lattice spanned by K has all invariant factors 1
        assert invariant_factors(K) == [1] * len(K)
        # rerunning on the stacked matrix: the kernel of the kernel's kernel is K again
        assert integer_kernel(integer_kernel(K), ncols=n) == K


def test_rational_kernel():
    from fractions import Fraction

    M = [[Fraction(1, 2), Fraction(-1, 3)]]
    assert integer_kernel(M) == [[2, 3]]


def test_group_canonical_form():
    G = FgAbelianGroup.from_orders([6, 4, 0, 1])
    assert G.invariant_factors == (2, 12) and G.free_rank == 1
    assert str(G) == "Z/2 + Z/12 + Z"
    assert FgAbelianGroup.from_orders([]).order == 1
    with pytest.raises(ValueError):
        FgAbelianGroup(0, (4, 2))
    with pytest.raises(ValueError):
        FgAbelianGroup(0, (1,))


def test_presentation():
    G, gmap = presentation_to_group(2, [[2, 0], [0, 3]])
    assert G.invariant_factors == (6,) and G.free_rank == 0
    assert len(gmap) == 2


def test_sym_square_examples():
    Z2 = FgAbelianGroup(2, ())
    sq = sym_tensor_square(Z2)
    assert sq.result == FgAbelianGroup(3, ())
    assert list(sq.generator_map) == [(0, 0), (0, 1), (1, 1)]
    assert sym_tensor_square(FgAbelianGroup(1, ())).result == FgAbelianGroup(1, ())
    assert sym_tensor_square(FgAbelianGroup.from_orders([2])).result == FgAbelianGroup.from_orders([2])


@pytest.mark.parametrize("n", range(1, 9))
def test_sym_square_of_free_group(n):
    sq = sym_tensor_square(FgAbelianGroup(n, ()))
    assert sq.result.free_rank == n * (n + 1) // 2
    assert sq.result.invariant_factors == ()


def brute_force_sym_square_counts(orders, ms):
    """Enumerate A (x) A = sum Z/gcd(o_i, o_j) (e_i (x) e_j), close the subgroup of
    flip differences, and count m-torsion of the quotient for each m."""
    n = len(orders)
    idx = [(i, j) for i in range(n) for j in range(n)]
    mods = [gcd(orders[i], orders[j]) for i, j in idx]
    flip = [idx.index((j, i)) for i, j in idx]

    def add(x, y):
        return tuple((a + b) % m for a, b, m in zip(x, y, mods))

    elements = list(itertools.product(*[range(m) for m in mods]))
    gens = set()
    for x in elements:
        fx = tuple(x[flip[k]] for k in range(len(idx)))
        gens.add(tuple((a - b) % m for a, b, m in zip(x, fx, mods)))
    sub = {tuple(0 for _ in mods)}
    frontier = list(sub)
    while frontier:
        nxt = []
        for s in frontier:
            for g in gens:
                t = add(s, g)
                if t not in sub:
                    sub.add(t)
                    nxt.append(t)
        frontier = nxt
    counts = {}
    for m in ms:
        hits = sum(1 for x in elements if tuple((m * a) % mm for a, mm in zip(x, mods)) in sub)
        counts[m] = hits // len(sub)
    return len(elements) // len(sub), counts


TORSION_GROUPS = [(2,), (3,), (4,), (2, 2), (2, 4), (2, 6), (3, 3), (2, 2, 2), (4, 4), (2, 8), (6,), (2, 2, 4)]


@pytest.mark.parametrize("orders", TORSION_GROUPS)
def test_sym_square_matches_brute_force(orders):
    A = FgAbelianGroup.from_orders(orders)
    result = sym_tensor_square(A).result
    ms = range(1, 17)
    size, counts = brute_force_sym_square_counts(list(A.orders), ms)
    assert result.order == size
    for m in ms:
        expected = 1
        for d in result.invariant_factors:
            expected *= gcd(m, d)
        assert counts[m] == expected


def test_symmetric_pairs_order():
    assert symmetric_pairs(3) == [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]


def test_matrix_text_roundtrip():
    M = parse_matrix("1 2/3 # comment\n-4 5\n")
    assert parse_matrix(format_matrix(M)) == M
    with pytest.raises(ValueError):
        parse_matrix("1 2\n3")


def test_small_helpers():
    assert transpose([[1, 2, 3]]) == [[1], [2], [3]]
    assert identity(2) == [[1, 0], [0, 1]]
    assert determinant([[2, 1], [1, 1]]) == 1
