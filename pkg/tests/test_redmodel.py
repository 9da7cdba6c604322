import random
from fractions import Fraction

import pytest

from nilorbit.errors import (
    DimensionError,
    NoRationalLiftError,
    PreconditionError,
    TransversalityError,
)
from nilorbit.momentgeo import MomentPoint, moment_mu, moment_Q, sample_zero_Q
from nilorbit.numkernel import Mat, hstack, rank, random_rational_matrix
from nilorbit.redmodel import (
    PPrimePoint,
    ReductionPoint,
    absorbing_isometry,
    chi_p,
    enumerate_fiber,
    gl_factorization_check,
    iota_action,
    kk_pullback_check,
    kk_scalar,
    lift,
    normalize,
    pprime_iota,
    pprime_reduce,
    random_pprime,
    random_transversal,
    rho_map,
    rho_preimages,
    same_pprime_class,
    stabilizer_dim,
    v_prime_space,
)
from nilorbit.so3w import so_element_from_adjoint, tau_reflection
from nilorbit.sympcore import NilpotentElement, SymplecticSpace, sample_nilpotent, sym_to_sp

SP3 = SymplecticSpace(3)


def rotation(rng):
    while True:
        m = random_rational_matrix(2, 2, rng, 7)
        if m.det() != 0:
            return so_element_from_adjoint(m)


def test_normalize_zero():
    x = normalize(MomentPoint(SP3, Mat.zeros(6, 3)))
    assert x.p == 0 and x.orientation is None and x.B.B.is_zero()


def test_normalize_invariant_under_rotations():
    rng = random.Random(0)
    a = sample_zero_Q(SP3, 3, 1)
    x = normalize(a)
    assert x.orientation in (1, -1)
    for _ in range(20):
        assert normalize(a.act_orthogonal(rotation(rng))) == x


def test_normalize_flips_under_reflection():
    a = sample_zero_Q(SP3, 3, 2)
    x, y = normalize(a), normalize(a.act_orthogonal(tau_reflection()))
    assert x.B == y.B and x.orientation == -y.orientation


def test_normalize_preconditions():
    with pytest.raises(PreconditionError):
        normalize(sample_zero_Q(SP3, 2, 0, closed=False))
    bad = MomentPoint(SP3, hstack([SP3.basis_vector(0), SP3.basis_vector(3), SP3.basis_vector(1)]))
    with pytest.raises(PreconditionError):
        normalize(bad)


def test_reflections_absorbed_in_low_rank():
    rng = random.Random(1)
    for s in range(20):
        p = s % 3
        a = sample_zero_Q(SP3, p, s, closed=True if p else None)
        r = rotation(rng) @ tau_reflection()
        g = absorbing_isometry(a, r)
        assert g.det_sign == 1
        assert a.act_orthogonal(g).A == a.act_orthogonal(r).A
        assert normalize(a.act_orthogonal(r)) == normalize(a)


def test_fiber_examples():
    assert len(enumerate_fiber(NilpotentElement(SP3, Mat.zeros(6, 6), 0))) == 1
    assert len(enumerate_fiber(sample_nilpotent(SP3, 3, 0))) == 2
    assert len(enumerate_fiber(sample_nilpotent(SP3, 2, 0))) == 1


@pytest.mark.parametrize("k", [3, 4])
def test_fiber_points_lie_over_B(k):
    sp = SymplecticSpace(k)
    for s in range(15):
        for p in range(4):
            B = sample_nilpotent(sp, p, s)
            fib = enumerate_fiber(B)
            assert len(fib) == (2 if p == 3 else 1)
            for x in fib:
                a = x.representative
                assert moment_Q(a).is_zero() and moment_mu(a) == B.B and a.rank() == p
            if p == 3:
                assert {x.orientation for x in fib} == {1, -1}


def test_fiber_rejects_high_rank():
    B = sample_nilpotent(SymplecticSpace(4), 4, 0, liftable=False)
    with pytest.raises(DimensionError):
        enumerate_fiber(B)


def test_lift_fails_for_anisotropic_forms():
    # B from the positive definite form on a coordinate Lagrangian has no rational lift
    P = hstack([SP3.basis_vector(i) for i in range(3)])
    B = sym_to_sp(SP3, P @ Mat.identity(3) @ P.T)
    with pytest.raises(NoRationalLiftError):
        lift(NilpotentElement(SP3, B, 3))


def test_lift_of_rank_two_without_lifting_sampler():
    # a rank-2 form can still fail the local conditions, so either outcome is allowed
    lifted = 0
    for s in range(30):
        B = sample_nilpotent(SP3, 2, s, liftable=False)
        try:
            a = lift(B)
        except NoRationalLiftError:
            continue
        lifted += 1
        assert moment_mu(a) == B.B and moment_Q(a).is_zero()
    assert lifted > 0


def test_rank_two_positive_definite_form_has_no_lift():
    # the only completion with the right discriminant is x^2 + 3y^2 - 6z^2, which is anisotropic
    P = hstack([SP3.basis_vector(i) for i in range(2)])
    B = sym_to_sp(SP3, P @ Mat([[1, 0], [0, 3]]) @ P.T)
    with pytest.raises(NoRationalLiftError):
        lift(NilpotentElement(SP3, B, 2))


def test_stabilizer_examples():
    assert stabilizer_dim(MomentPoint(SP3, Mat.zeros(6, 3))) == 3
    for s in range(10):
        assert stabilizer_dim(sample_zero_Q(SP3, 1, s, closed=True)) == 1
        assert stabilizer_dim(sample_zero_Q(SP3, 2, s, closed=True)) == 0
        assert stabilizer_dim(sample_zero_Q(SP3, 3, s)) == 0
    with pytest.raises(PreconditionError):
        stabilizer_dim(sample_zero_Q(SP3, 1, 0, closed=False))


def test_iota_examples():
    for p in (0, 2):
        x = enumerate_fiber(sample_nilpotent(SP3, p, 3))[0]
        assert iota_action(x) == x
    x = next(y for y in enumerate_fiber(sample_nilpotent(SP3, 3, 3)) if y.orientation == 1)
    y = iota_action(x)
    assert y.B == x.B and y.orientation == -1
    assert iota_action(y) == x
    assert normalize(-x.representative) == y


def test_reduction_point_invariants_and_json():
    B = sample_nilpotent(SP3, 3, 1)
    with pytest.raises(ValueError):
        ReductionPoint(B, None)
    with pytest.raises(ValueError):
        ReductionPoint(sample_nilpotent(SP3, 2, 1), 1)
    x = enumerate_fiber(B)[0]
    obj = x.to_json()
    assert set(obj) == {"k", "p", "B", "orientation"}
    assert ReductionPoint.from_json(obj) == x
    y = enumerate_fiber(sample_nilpotent(SP3, 1, 1))[0]
    assert y.to_json()["orientation"] is None


# --- chart ------------------------------------------------------------------

def test_chi_p_is_a_symplectic_embedding_into_vp_perp():
    rng = random.Random(2)
    k = 3
    sp, spp = SymplecticSpace(k), v_prime_space(k)
    for _ in range(10):
        vp = random_transversal(k, rng)
        x = random_rational_matrix(4, 1, rng)
        y = random_rational_matrix(4, 1, rng)
        cx, cy = chi_p(k, vp, x), chi_p(k, vp, y)
        assert sp.form(vp, cx) == 0 and cx[2 * k - 1, 0] == 0
        assert sp.form(cx, cy) == spp.form(x, y)


def test_rho_examples():
    rng = random.Random(4)
    vp = random_transversal(3, rng)
    zero = PPrimePoint(v_prime_space(3), Mat.zeros(4, 1), Mat.zeros(4, 1))
    x = rho_map(vp, zero)
    assert x.p == 1
    assert x.B.B == moment_mu(MomentPoint(SP3, hstack([Mat.zeros(6, 2), vp])))
    pp = random_pprime(v_prime_space(3), rng)
    y = rho_map(vp, pp)
    assert y.p == 3
    assert rho_map(vp, pprime_iota(pp)) == iota_action(y)


def test_rho_rejects_vectors_in_V1():
    vp = Mat.column([1, 0, 0, 0, 0, 0])
    with pytest.raises(TransversalityError):
        rho_map(vp, random_pprime(v_prime_space(3), random.Random(0)))
    with pytest.raises(PreconditionError):
        PPrimePoint(v_prime_space(3), Mat.column([1, 0, 0, 0]), Mat.column([0, 0, 1, 0]))


def test_rho_degenerate_chart_points():
    rng = random.Random(6)
    vp = random_transversal(3, rng)
    v = random_rational_matrix(4, 1, rng)
    spp = v_prime_space(3)
    # w' = 0 gives a non-closed orbit whose limit is H (x) vp
    x = rho_map(vp, PPrimePoint(spp, v, Mat.zeros(4, 1)))
    assert x == rho_map(vp, PPrimePoint(spp, Mat.zeros(4, 1), Mat.zeros(4, 1)))
    # proportional pairs give closed rank-2 orbits
    assert rho_map(vp, PPrimePoint(spp, v, v * 3)).p == 2


def test_rho_preimages_round_trip():
    rng = random.Random(8)
    for _ in range(15):
        vp = random_transversal(3, rng)
        pp = random_pprime(v_prime_space(3), rng)
        x = rho_map(vp, pp)
        pre = rho_preimages(x)
        assert len(pre) == 2
        (v1, q1), (v2, q2) = sorted(pre, key=lambda t: t[0] != vp)
        assert v1 == vp and same_pprime_class(q1, pp)
        assert v2 == -vp and same_pprime_class(q2, pprime_iota(pp))
        assert all(rho_map(v, q) == x for v, q in pre)


def test_rho_preimages_without_representative():
    rng = random.Random(9)
    vp = random_transversal(3, rng)
    x = rho_map(vp, random_pprime(v_prime_space(3), rng))
    bare = ReductionPoint(x.B, x.orientation)
    assert all(rho_map(v, q) == x for v, q in rho_preimages(bare))


def test_rho_preimages_transversality():
    a = sample_zero_Q(SP3, 2, 0, closed=True)
    with pytest.raises(TransversalityError):
        rho_preimages(normalize(a))


# --- P' -----------------------------------------------------------------------

def test_pprime_examples():
    spp = v_prime_space(3)
    rng = random.Random(1)
    v = random_rational_matrix(4, 1, rng)
    assert pprime_reduce(PPrimePoint(spp, v, Mat.zeros(4, 1))).is_zero()
    pp = random_pprime(spp, rng)
    M = pprime_reduce(pp)
    for lam in (2, 3, -1):
        assert pprime_reduce(PPrimePoint(spp, pp.vprime * lam, pp.wprime / lam)) == M
    assert rank(M) == 1 and M.trace() == 0 and (M @ M).is_zero()


def test_pprime_iota_examples():
    spp = v_prime_space(3)
    rng = random.Random(2)
    v = random_rational_matrix(4, 1, rng)
    assert pprime_iota(PPrimePoint(spp, v, v)) == PPrimePoint(spp, v, v)
    pp = random_pprime(spp, rng)
    assert pprime_reduce(pprime_iota(pp)) != pprime_reduce(pp)
    assert pprime_iota(pprime_iota(pp)) == pp
    assert pprime_reduce(pprime_iota(pp)) == pp.wprime @ (pp.vprime.T @ spp.omega)


def test_pprime_separates_closed_orbits():
    spp = v_prime_space(3)
    rng = random.Random(5)
    pts = [random_pprime(spp, rng, 6) for _ in range(50)]
    mats = [pprime_reduce(p) for p in pts]
    for i in range(50):
        for j in range(i + 1, 50):
            same_orbit = any(
                pts[j].vprime == pts[i].vprime * lam for lam in _ratios(pts[i].vprime, pts[j].vprime)
            ) and pts[j].wprime * _ratio(pts[i].vprime, pts[j].vprime) == pts[i].wprime
            assert (mats[i] == mats[j]) == same_orbit


def _ratio(u, v):
    i = next(t for t in range(u.rows) if u[t, 0] != 0)
    return v[i, 0] / u[i, 0]


def _ratios(u, v):
    return [_ratio(u, v)]


# --- GL(2) --------------------------------------------------------------------

def test_gl_factorization_check():
    for k in (1, 2, 3):
        rep = gl_factorization_check(k, 7, 10)
        assert rep["failures"] == []
    assert gl_factorization_check(2, 3, 5) == gl_factorization_check(2, 3, 5)


def test_gl_split_of_scalar_point():
    from nilorbit.redmodel import gl_split

    v = Mat.column([1, 2, 3, 4, 5, 6])
    x, w = gl_split(SP3, hstack([Mat.zeros(6, 3), v]))
    assert x.p == 0 and w == v


# --- symplectic form --------------------------------------------------------

def test_kk_scalar_is_constant():
    assert kk_scalar() == Fraction(1, 2)


def test_kk_pullback_check():
    for s in range(3):
        rep = kk_pullback_check(sample_zero_Q(SP3, 3, s), pairs=10, seed=s)
        assert rep["failures"] == []
    with pytest.raises(PreconditionError):
        kk_pullback_check(sample_zero_Q(SP3, 2, 0))
