import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nilorbit.errors import NotLagrangianError, NotTangentError, StratumEmptyError
from nilorbit.numkernel import Mat, hstack, kernel_basis, random_rational_matrix, rank
from nilorbit.sympcore import (
    KKForm,
    NilpotentElement,
    SymplecticSpace,
    bracket,
    kk_form,
    lagrangian_resolve,
    orbit_dimension,
    orbit_dimension_formula,
    random_lagrangian,
    random_symmetric_of_rank,
    random_symplectic,
    random_tangent,
    sample_nilpotent,
    sp_to_sym,
    stratum_of,
    sym_to_sp,
    symplectic_transvection,
    is_symplectic,
)


def random_symmetric(n, seed):
    M = random_rational_matrix(n, n, seed, 6)
    return M + M.T


def test_space_basics():
    sp = SymplecticSpace(2)
    om = sp.omega
    assert om == Mat([[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]])
    assert om.T == -om and om.det() != 0
    assert sp.form(sp.basis_vector(0), sp.basis_vector(2)) == 1
    assert sp.sp_dim == 10 == len(sp.sp_basis)


def test_sym_to_sp_examples():
    sp = SymplecticSpace(2)
    assert sym_to_sp(sp, Mat.zeros(4, 4)).is_zero()
    S = Mat([[int(i == j == 0) for j in range(4)] for i in range(4)])
    B = sym_to_sp(sp, S)
    assert rank(B) == 1 and (B @ B).is_zero() and sp.is_sp(B)


def test_sym_to_sp_round_trip_and_bijection():
    for k in (1, 2, 3):
        sp = SymplecticSpace(k)
        for s in range(20):
            S = random_symmetric(2 * k, s)
            B = sym_to_sp(sp, S)
            assert sp.is_sp(B)
            assert sp_to_sym(sp, B) == S


def test_sym_to_sp_rejects_bad_input():
    sp = SymplecticSpace(2)
    with pytest.raises(ValueError):
        sym_to_sp(sp, Mat([[1, 2, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]))
    with pytest.raises(Exception):
        sym_to_sp(sp, Mat.identity(3))


def test_sym_to_sp_intertwines_group_actions():
    for k in (1, 2, 3):
        sp = SymplecticSpace(k)
        for s in range(5):
            g = random_symplectic(sp, s)
            assert is_symplectic(sp, g)
            S = random_symmetric(2 * k, 100 + s)
            assert sym_to_sp(sp, g @ S @ g.T) == g @ sym_to_sp(sp, S) @ g.inverse()


def test_stratum_of_examples():
    sp = SymplecticSpace(2)
    assert stratum_of(sp, Mat.zeros(4, 4)) == 0
    B = sample_nilpotent(sp, 1, 3)
    assert stratum_of(sp, B.B) == 1
    D = Mat([[1, 0, 0, 0], [0, 2, 0, 0], [0, 0, -1, 0], [0, 0, 0, -2]])
    assert sp.is_sp(D)
    assert stratum_of(sp, D) is None


def test_sample_nilpotent_examples():
    assert sample_nilpotent(SymplecticSpace(3), 0, 1).B.is_zero()
    B = sample_nilpotent(SymplecticSpace(3), 3, 1)
    assert rank(B.B) == 3 and SymplecticSpace(3).is_isotropic(hstack(B.B.columns()))
    with pytest.raises(StratumEmptyError):
        sample_nilpotent(SymplecticSpace(2), 3, 1)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_sampled_strata_invariants(k):
    sp = SymplecticSpace(k)
    for p in range(k + 1):
        for s in range(25):
            x = sample_nilpotent(sp, p, s, liftable=(s % 2 == 0))
            B = x.B
            assert stratum_of(sp, B) == p
            assert sp.is_sp(B)
            # Im B isotropic and inside ker B
            assert (B.T @ sp.omega @ B).is_zero()
            assert (B @ B).is_zero()


def test_sample_nilpotent_is_deterministic():
    sp = SymplecticSpace(3)
    assert sample_nilpotent(sp, 2, 9) == sample_nilpotent(sp, 2, 9)
    assert sample_nilpotent(sp, 2, 9) != sample_nilpotent(sp, 2, 10)


def test_orbit_dimension_examples():
    assert orbit_dimension(SymplecticSpace(2), Mat.zeros(4, 4)) == 0
    assert orbit_dimension(SymplecticSpace(2), sample_nilpotent(SymplecticSpace(2), 1, 0)) == 4
    assert orbit_dimension(SymplecticSpace(3), sample_nilpotent(SymplecticSpace(3), 3, 0)) == 12


def test_orbit_dimension_formula_values():
    assert [orbit_dimension_formula(2, p) for p in range(3)] == [0, 4, 6]
    assert orbit_dimension_formula(3, 3) == 12


def test_nilpotent_json_round_trip():
    x = sample_nilpotent(SymplecticSpace(2), 2, 4)
    obj = x.to_json()
    assert set(obj) == {"k", "p", "B"}
    assert NilpotentElement.from_json(obj) == x


def test_kk_form_examples():
    sp = SymplecticSpace(2)
    rng = random.Random(1)
    B = sample_nilpotent(sp, 2, 1)
    kk = KKForm(sp, B)
    for _ in range(20):
        u, _ = random_tangent(sp, B.B, rng, 5)
        v, _ = random_tangent(sp, B.B, rng, 5)
        assert kk(u, u) == 0
        assert kk(u, v) == -kk(v, u)


def test_kk_form_is_choice_independent():
    sp = SymplecticSpace(3)
    rng = random.Random(2)
    B = sample_nilpotent(sp, 2, 5).B
    cent = [sp.sp_from_coords(c) for c in kernel_basis(KKForm(sp, B)._solver.m)]
    assert cent
    for t in range(20):
        u, xi = random_tangent(sp, B, rng, 4)
        v, eta = random_tangent(sp, B, rng, 4)
        z = cent[t % len(cent)] * Fraction(rng.randint(-5, 5))
        assert bracket(z, B).is_zero()
        direct = (B @ bracket(xi, eta)).trace()
        perturbed = (B @ bracket(xi + z, eta)).trace()
        assert direct == perturbed == kk_form(sp, B, u, v)


def test_kk_form_is_bilinear():
    sp = SymplecticSpace(2)
    rng = random.Random(3)
    B = sample_nilpotent(sp, 1, 2).B
    kk = KKForm(sp, B)
    u, _ = random_tangent(sp, B, rng, 5)
    v, _ = random_tangent(sp, B, rng, 5)
    w, _ = random_tangent(sp, B, rng, 5)
    assert kk(u * 3 + w, v) == 3 * kk(u, v) + kk(w, v)


def test_kk_form_rejects_non_tangent():
    sp = SymplecticSpace(2)
    B = sample_nilpotent(sp, 1, 2).B
    with pytest.raises(NotTangentError):
        kk_form(sp, B, B + sym_to_sp(sp, Mat.identity(4)), B)
    with pytest.raises(NotTangentError):
        kk_form(sp, B, Mat.identity(4), B)


def test_lagrangian_resolve_examples():
    sp = SymplecticSpace(2)
    L = hstack([sp.basis_vector(0), sp.basis_vector(1)])
    assert lagrangian_resolve(sp, L, Mat.zeros(2, 2)).B.is_zero()
    x = lagrangian_resolve(sp, L, Mat([[1, 2], [2, 3]]))
    assert x.p == 2 and rank(hstack([x.B, L])) == 2
    sp3 = SymplecticSpace(3)
    L3 = random_lagrangian(sp3, 4)
    x3 = lagrangian_resolve(sp3, L3, random_symmetric_of_rank(3, 3, random.Random(0)))
    assert x3.p == 3


def test_lagrangian_resolve_rejects_non_lagrangian():
    sp = SymplecticSpace(2)
    L = hstack([sp.basis_vector(0), sp.basis_vector(2)])
    with pytest.raises(NotLagrangianError):
        lagrangian_resolve(sp, L, Mat.identity(2))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(0, 10**6))
def test_lagrangian_resolve_properties(k, seed):
    sp = SymplecticSpace(k)
    rng = random.Random(seed)
    L = random_lagrangian(sp, rng, 5)
    p = rng.randint(0, k)
    x = lagrangian_resolve(sp, L, random_symmetric_of_rank(k, p, rng, 5))
    B = x.B
    assert stratum_of(sp, B) == x.p == p <= k
    assert rank(hstack([L, B])) == k                    # Im B in L
    assert (B @ L).is_zero()                            # L in ker B


def test_transvections_are_symplectic():
    sp = SymplecticSpace(3)
    v = Mat.column([1, -2, 0, 3, 1, 1])
    for c in (1, Fraction(-1, 2), 7):
        assert is_symplectic(sp, symplectic_transvection(sp, v, c))
