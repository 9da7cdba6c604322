import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nilorbit.errors import PreconditionError, StratumEmptyError
from nilorbit.momentgeo import (
    MomentPoint,
    closed_limit,
    degeneration_witness,
    equivariance_check,
    is_closed_orbit,
    jacobian_Q,
    moment_mu,
    moment_Q,
    random_moment_point,
    reduction_dimension,
    sample_zero_Q,
    stabilizer_dimension,
)
from nilorbit.numkernel import Mat, hstack, rank
from nilorbit.so3w import OrthogonalElement, chi, so_element_from_adjoint, tau_reflection, basis_vector
from nilorbit.sympcore import (
    SymplecticSpace,
    random_symplectic,
    stratum_of,
    sym_to_sp,
    symplectic_transvection,
)

SP2 = SymplecticSpace(2)
SP3 = SymplecticSpace(3)


def point(space, columns):
    """Moment point from the images of E*, F*, H* (None means zero)."""
    n = space.dim
    cols = [space.basis_vector(c) if c is not None else Mat.zeros(n, 1) for c in columns]
    return MomentPoint(space, hstack(cols))


def test_moment_Q_examples():
    assert moment_Q(point(SP2, [None, None, None])).is_zero()
    # span(e_0, e_1) is isotropic
    assert moment_Q(point(SP2, [0, 1, None])).is_zero()
    # Omega(e_0, e_2) = 1, so K = E_12 - E_21 and Q = chi(E ^ F) = H
    q = moment_Q(point(SP2, [0, 2, None]))
    assert q == basis_vector(2)
    assert q == chi(basis_vector(0), basis_vector(1))


def test_Q_vanishes_iff_image_isotropic():
    for s in range(40):
        a = random_moment_point(SP3, s, 4)
        assert moment_Q(a).is_zero() == SP3.is_isotropic(a.A)
    for s in range(20):
        a = sample_zero_Q(SP3, 3, s)
        assert moment_Q(a).is_zero()


def test_moment_mu_examples():
    assert moment_mu(point(SP2, [None, None, None])).is_zero()
    a = point(SP2, [0, None, None])
    assert moment_mu(a).is_zero() and rank(a.A) == 1
    a = point(SP2, [0, 1, None])
    mu = moment_mu(a)
    e0, e1 = SP2.basis_vector(0), SP2.basis_vector(1)
    assert mu == sym_to_sp(SP2, e0 @ e1.T + e1 @ e0.T)
    assert rank(mu) == 2 and (mu @ mu).is_zero()


def test_mu_image_inside_image_of_a():
    for s in range(30):
        a = random_moment_point(SP3, s, 5)
        assert rank(hstack([a.A, moment_mu(a)])) == rank(a.A)


def test_sample_zero_Q_examples():
    assert sample_zero_Q(SP3, 0, 1).A.is_zero()
    a = sample_zero_Q(SP3, 3, 1)
    assert a.rank() == 3 and moment_Q(a).is_zero()
    with pytest.raises(StratumEmptyError):
        sample_zero_Q(SP2, 3, 1)
    assert sample_zero_Q(SP3, 2, 5) == sample_zero_Q(SP3, 2, 5)


def test_sample_zero_Q_closedness_control():
    for s in range(15):
        for p in (1, 2):
            assert is_closed_orbit(sample_zero_Q(SP3, p, s, closed=True))
            assert not is_closed_orbit(sample_zero_Q(SP3, p, s, closed=False))
    with pytest.raises(ValueError):
        sample_zero_Q(SP3, 3, 0, closed=False)


def test_is_closed_orbit_examples():
    assert is_closed_orbit(point(SP2, [None, None, None]))
    assert not is_closed_orbit(point(SP2, [0, None, None]))
    assert is_closed_orbit(point(SP2, [None, None, 0]))
    with pytest.raises(PreconditionError):
        is_closed_orbit(point(SP2, [0, 2, None]))


def test_closed_points_land_in_the_matching_stratum():
    for s in range(20):
        p = s % 4
        a = sample_zero_Q(SP3, p, s, closed=True if p else None)
        mu = moment_mu(a)
        assert (mu @ mu).is_zero()
        assert stratum_of(SP3, mu) == p


def test_witness_examples():
    assert degeneration_witness(sample_zero_Q(SP3, 3, 0)) is None
    a = point(SP2, [0, None, None])
    w = degeneration_witness(a)
    lam = Fraction(3, 5)
    # the family is a scaled by lam^2, with limit 0
    assert w.at(lam).A == a.A * lam ** 2
    assert w.g(lam).g == so_element_from_adjoint(Mat([[lam, 0], [0, 1 / lam]])).g
    assert w.limit.A.is_zero() and moment_mu(w.limit) == moment_mu(a)


def test_witness_on_rank_two_with_radical():
    for s in range(15):
        a = sample_zero_Q(SP3, 2, s, closed=False)
        w = degeneration_witness(a)
        assert w.limit.rank() == 1
        assert moment_mu(w.limit) == moment_mu(a)
        assert is_closed_orbit(w.limit)
        for lam in (2, Fraction(1, 3), -1):
            moved = w.at(lam)
            assert moment_mu(moved) == moment_mu(a) and moment_Q(moved).is_zero()
            assert w.g(lam).g.det() == 1


def test_witness_chain_terminates_closed():
    for s in range(20):
        a = sample_zero_Q(SP3, 1 + s % 2, s, closed=False)
        lim, steps = closed_limit(a)
        assert is_closed_orbit(lim) and 1 <= steps <= 2
        assert moment_mu(lim) == moment_mu(a)


def test_equivariance_examples():
    a = random_moment_point(SP3, 0, 5)
    rep = equivariance_check(a, OrthogonalElement(Mat.identity(3), 1), Mat.identity(6))
    assert rep["passed"]
    rng = random.Random(1)
    for _ in range(10):
        m = Mat([[rng.randint(1, 5), rng.randint(-3, 3)], [rng.randint(-3, 3), rng.randint(6, 9)]])
        g = so_element_from_adjoint(m)
        s = symplectic_transvection(SP3, Mat.column([rng.randint(-2, 2) for _ in range(6)]), Fraction(1, 2))
        assert equivariance_check(a, g, s)["passed"]
        assert equivariance_check(a, g, random_symplectic(SP3, rng.random()))["passed"]


def test_equivariance_rejects_bad_group_elements():
    a = random_moment_point(SP2, 0, 5)
    with pytest.raises(PreconditionError):
        equivariance_check(a, tau_reflection(), Mat.identity(4))
    with pytest.raises(PreconditionError):
        equivariance_check(a, OrthogonalElement(Mat.identity(3), 1), Mat.identity(4) * 2)


def test_Q_transforms_by_det_times_g():
    a = random_moment_point(SP2, 3, 5)
    t = tau_reflection()
    assert moment_Q(a.act_orthogonal(t)) == -(t.g @ moment_Q(a))
    assert moment_mu(a.act_orthogonal(t)) == moment_mu(a)


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_generic_rank_three_is_free_and_regular(k):
    p = min(3, k)
    a = sample_zero_Q(SymplecticSpace(k), p, k)
    assert rank(jacobian_Q(a)) == 3
    assert stabilizer_dimension(a) == 0


def test_reduction_dimension_values():
    assert reduction_dimension(SymplecticSpace(1), 0)["dim"] == 2
    for k in (2, 3, 4):
        assert reduction_dimension(SymplecticSpace(k), 0)["dim"] == 6 * k - 6


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 3), st.integers(0, 10**6))
def test_mu_invariant_under_orthogonal_action(p, seed):
    rng = random.Random(seed)
    a = sample_zero_Q(SP3, p, rng)
    m = Mat([[rng.randint(1, 9), rng.randint(-5, 5)], [0, rng.randint(1, 9)]])
    g = so_element_from_adjoint(m)
    assert moment_mu(a.act_orthogonal(g)) == moment_mu(a)
    assert moment_Q(a.act_orthogonal(g)).is_zero()


def test_moment_point_json_round_trip():
    a = sample_zero_Q(SP3, 2, 4)
    obj = a.to_json()
    assert set(obj) == {"k", "A"}
    assert MomentPoint.from_json(obj) == a


def test_moment_point_shape_checked():
    with pytest.raises(Exception):
        MomentPoint(SP2, Mat.zeros(4, 2))
