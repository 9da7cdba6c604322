"""Points of the reduction P(PGL(2), V) = Q^{-1}(0) // SO(W) as canonical data.

A closed orbit is named by ``B = mu(a)`` together with, in rank 3, the sign
of ``det`` of ``a`` written in the reduced column-echelon frame of ``Im B``.
Over rank <= 2 the sign carries no information because a det -1 isometry
can be corrected by a reflection fixing the coimage.

The second half of the module is the local chart near the rank-3 stratum.
The hyperplane ``V1`` is where the last coordinate vanishes, so
``V1^perp = span(e_{k-1})`` and ``V' = V1 / V1^perp`` is identified with the
standard symplectic space of dimension ``2k-2`` (indices are 0-based).
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    DimensionError,
    NoRationalLiftError,
    PreconditionError,
    TransversalityError,
)
from .momentgeo import (
    MomentPoint,
    ambient_form,
    closed_limit,
    dmu,
    dQ,
    is_closed_orbit,
    moment_mu,
    moment_Q,
    orbit_directions,
    sample_zero_Q,
    stabilizer_dimension,
    tangent_kernel,
)
from .numkernel import EXACT, Mat, column_echelon, mat_to_json, rank
from .quadform import hyperbolic_frame, isotropic_vector, rational_sqrt
from .so3w import (
    OrthogonalElement,
    basis_vector,
    h_form,
    orthogonal_complement,
    reflection,
    tau_reflection,
)
from .sympcore import KKForm, NilpotentElement, SymplecticSpace, sp_to_sym


@dataclass(frozen=True)
class ReductionPoint:
    """``B`` in N^{<=3} plus an orientation sign exactly when ``p == 3``.

    ``representative`` optionally carries a moment point in the orbit; it is
    ignored by equality and hashing.
    """

    B: NilpotentElement
    orientation: int | None = None
    representative: MomentPoint | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.B.p > 3:
            raise DimensionError("reduction points live over N^{<=3}")
        if (self.B.p == 3) != (self.orientation is not None):
            raise ValueError("orientation is present exactly on the rank-3 stratum")
        if self.orientation not in (None, 1, -1):
            raise ValueError("orientation must be +1 or -1")

    @property
    def k(self) -> int:
        return self.B.k

    @property
    def p(self) -> int:
        return self.B.p

    def to_json(self) -> dict:
        return {"k": self.k, "p": self.p, "B": mat_to_json(self.B.B), "orientation": self.orientation}

    @classmethod
    def from_json(cls, obj: dict) -> "ReductionPoint":
        B = NilpotentElement.from_json({"k": obj["k"], "p": obj["p"], "B": obj["B"]})
        return cls(B, obj.get("orientation"))


def _require_exact(space: SymplecticSpace, what: str) -> None:
    if space.backend != EXACT:
        raise PreconditionError(f"{what} needs the exact backend")


def _orientation(a: MomentPoint, B: Mat) -> int:
    R, piv = column_echelon(B)
    d = a.A[piv, :].det()
    return 1 if d > 0 else -1


def normalize(a: MomentPoint) -> ReductionPoint:
    """Canonical name of the closed orbit through ``a``."""
    if not moment_Q(a).is_zero():
        raise PreconditionError("point is not in the zero set of Q")
    if not is_closed_orbit(a):
        raise PreconditionError("orbit is not closed")
    B = moment_mu(a)
    p = rank(B)
    orient = _orientation(a, B) if p == 3 else None
    return ReductionPoint(NilpotentElement(a.space, B, p), orient, a)


def stabilizer_dim(a: MomentPoint) -> int:
    """Dimension of the Lie stabilizer of a closed-orbit point in so(W)."""
    if not is_closed_orbit(a):
        raise PreconditionError("stabilizers are only reported on closed orbits")
    return stabilizer_dimension(a)


# --- fibers of mu over N^{<=3} --------------------------------------------

def _lift_form(G: Mat) -> Mat:
    """Rational ``p x 3`` matrix ``C`` of rank ``p`` with ``C h C^T == G``."""
    p = G.rows
    if p == 1:
        return Mat([[G[0, 0] / 2, 1, 0]])
    if p == 2:
        d = G.det()
        G3 = Mat([[G[0, 0], G[0, 1], 0], [G[1, 0], G[1, 1], 0], [0, 0, Fraction(-2) / d]])
        return _lift_form(G3)[[0, 1], :]
    x = isotropic_vector(G)
    if x is None:
        raise NoRationalLiftError("the form on Im B is anisotropic over Q")
    T, gamma = hyperbolic_frame(G, x)
    sigma = rational_sqrt(gamma / 2)
    if sigma is None:
        raise NoRationalLiftError("the form on Im B is not rationally equivalent to h")
    D = Mat([[1, 0, 0], [0, 1, 0], [0, 0, sigma]])
    return T.inverse().T @ D


def lift(B: NilpotentElement) -> MomentPoint:
    """One rational ``a`` with ``Q(a) = 0`` and ``mu(a) = B``.

    ``B = sym_to_sp(R G R^T)`` with ``R`` the reduced column-echelon frame of
    ``Im B``; a factorization ``G = C h C^T`` gives ``a = R C``.
    """
    space = B.space
    _require_exact(space, "fiber lifting")
    if B.p > 3:
        raise DimensionError("mu only reaches N^{<=3}")
    if B.p == 0:
        return MomentPoint(space, Mat.zeros(space.dim, 3))
    R, piv = column_echelon(B.B)
    S = sp_to_sym(space, B.B)
    G = S[piv, :][:, piv]
    return MomentPoint(space, R @ _lift_form(G))


def enumerate_fiber(B: NilpotentElement) -> tuple[ReductionPoint, ...]:
    """All points of the reduction over ``B``: two in rank 3, one otherwise."""
    if B.p > 3:
        raise DimensionError("enumerate_fiber handles p <= 3 only")
    a = lift(B)
    x = normalize(a)
    if B.p < 3:
        return (x,)
    twin = normalize(a.act_orthogonal(tau_reflection()))
    return tuple(sorted((x, twin), key=lambda y: -y.orientation))


def absorbing_isometry(a: MomentPoint, r: OrthogonalElement) -> OrthogonalElement:
    """A det +1 isometry ``g`` with ``a o g* == a o r*``, for closed ``a`` of rank <= 2.

    ``g = r s_n`` where ``s_n`` reflects in an anisotropic ``n`` orthogonal to
    the coimage, so ``g`` agrees with ``r`` on the coimage.
    """
    if r.det_sign != -1:
        return r
    if rank(a.A) > 2 or not is_closed_orbit(a):
        raise PreconditionError("only closed points of rank <= 2 absorb reflections")
    rows = [a.A[i, :].T for i in range(a.A.rows) if not a.A[i, :].is_zero()]
    perp = orthogonal_complement(rows) if rows else [basis_vector(i) for i in range(3)]
    n = next((v for v in perp if h_form(v, v) != 0), None)
    if n is None:
        n = perp[0] + perp[1]
    return r @ reflection(n)


def iota_action(x: ReductionPoint) -> ReductionPoint:
    """The involution induced by ``-id`` on V."""
    rep = -x.representative if x.representative is not None else None
    orient = -x.orientation if x.orientation is not None else None
    return ReductionPoint(x.B, orient, rep)


# --- the chart rho: U1 x P' -> P(PGL(2), V) ---------------------------------

@dataclass(frozen=True)
class PPrimePoint:
    """A map ``W^perp -> V'`` with isotropic image: ``E* -> vprime``, ``F* -> wprime``."""

    space: SymplecticSpace
    vprime: Mat
    wprime: Mat

    def __post_init__(self):
        n = self.space.dim
        if self.vprime.shape != (n, 1) or self.wprime.shape != (n, 1):
            raise DimensionError(f"expected vectors of length {n}")
        if self.space.form(self.vprime, self.wprime) != 0:
            raise PreconditionError("vprime and wprime must be Omega'-orthogonal")


def v_prime_space(k: int) -> SymplecticSpace:
    if k < 2:
        raise DimensionError("the chart needs k >= 2")
    return SymplecticSpace(k - 1)


def embed_v_prime(k: int, x: Mat) -> Mat:
    """Standard lift ``V' -> V1``: ``i -> e_i`` and ``k-1+i -> e_{k+i}``."""
    m = k - 1
    vals = x.flat()
    out = [Fraction(0)] * (2 * k)
    for i in range(m):
        out[i] = vals[i]
        out[k + i] = vals[m + i]
    return Mat.column(out)


def project_v_prime(k: int, v: Mat) -> Mat:
    """Inverse of :func:`embed_v_prime` on V1, dropping the ``e_{k-1}`` coordinate."""
    vals = v.flat()
    if vals[2 * k - 1] != 0:
        raise TransversalityError("vector is not in V1")
    m = k - 1
    return Mat.column([vals[i] for i in range(m)] + [vals[k + i] for i in range(m)])


def chi_p(k: int, vp: Mat, x: Mat) -> Mat:
    """Symplectic embedding ``V' -> V1 cap vp^perp``."""
    space = SymplecticSpace(k)
    e = space.basis_vector(k - 1)
    y = embed_v_prime(k, x)
    return y - e * (space.form(vp, y) / space.form(vp, e))


def _check_transversal(k: int, vp: Mat) -> None:
    if vp.shape != (2 * k, 1):
        raise DimensionError(f"vp must have length {2 * k}")
    if vp[2 * k - 1, 0] == 0:
        raise TransversalityError("vp lies in V1")


def rho_moment_point(vp: Mat, pp: PPrimePoint) -> MomentPoint:
    """``a = E (x) chi_p(v') + F (x) chi_p(w') + H (x) vp``."""
    k = pp.space.k + 1
    _check_transversal(k, vp)
    space = SymplecticSpace(k)
    from .numkernel import hstack

    A = hstack([chi_p(k, vp, pp.vprime), chi_p(k, vp, pp.wprime), vp])
    a = MomentPoint(space, A)
    if not moment_Q(a).is_zero():
        raise AssertionError("chart point is not in the zero set of Q")
    return a


def rho_map(vp: Mat, pp: PPrimePoint) -> ReductionPoint:
    """The chart map; non-closed chart points are sent to their closed limit."""
    a, _ = closed_limit(rho_moment_point(vp, pp))
    return normalize(a)


def _move_to_H(phi: Mat) -> OrthogonalElement:
    """A det +1 isometry sending the anisotropic ``phi`` to a multiple of H."""
    q = h_form(phi, phi)
    c = rational_sqrt(q / 2)
    if c is None:
        raise TransversalityError("h(phi, phi)/2 is not a rational square")
    H = basis_vector(2)
    fix = reflection(Mat.column([1, -1, 0]))  # fixes H, det -1
    for target in (H * c, -H * c):
        u = phi - target
        if u.is_zero():
            return OrthogonalElement(Mat.identity(3), 1)
        if h_form(u, u) != 0:
            return fix @ reflection(u)
    raise AssertionError("both reflection vectors are null")


def rho_preimages(x: ReductionPoint) -> tuple[tuple[Mat, PPrimePoint], ...]:
    """The chart preimages of ``x``, one per way of putting ``a`` in chart form.

    They are ``(vp, pp)`` and ``(-vp, tau pp)``; the involution ``H -> -H``,
    ``E <-> F`` of SO(W) relates the two.
    """
    if x.p != 3:
        raise TransversalityError("rho_preimages works on the rank-3 stratum")
    a = x.representative
    if a is None:
        a = next(y.representative for y in enumerate_fiber(x.B) if y.orientation == x.orientation)
    k = a.k
    phi = a.A[2 * k - 1, :].T
    if h_form(phi, phi) == 0:
        raise TransversalityError("point is outside the transversality locus")
    g = _move_to_H(phi)
    A1 = a.act_orthogonal(g).A
    vp = A1.col(2)
    sp_prime = v_prime_space(k)
    pp = PPrimePoint(sp_prime, project_v_prime(k, A1.col(0)), project_v_prime(k, A1.col(1)))
    return ((vp, pp), (-vp, pprime_iota(pp)))


def pprime_reduce(pp: PPrimePoint) -> Mat:
    """``vprime (x) Omega'(wprime, -)``: a square-zero rank <= 1 endomorphism of V'."""
    flat = pp.wprime.T @ pp.space.omega
    return pp.vprime @ flat


def pprime_iota(pp: PPrimePoint) -> PPrimePoint:
    return PPrimePoint(pp.space, pp.wprime, pp.vprime)


def same_pprime_class(p1: PPrimePoint, p2: PPrimePoint) -> bool:
    return pprime_reduce(p1) == pprime_reduce(p2)


def random_pprime(space: SymplecticSpace, rng: random.Random, height: int = 10) -> PPrimePoint:
    """Random isotropic pair in V' with independent components."""
    from .sympcore import random_isotropic_basis

    P = random_isotropic_basis(space, 2, rng, height) if space.k >= 2 else None
    if P is None:
        v = Mat.column([rng.randint(1, height), rng.randint(-height, height)])
        return PPrimePoint(space, v, v * Fraction(rng.randint(1, height)))
    return PPrimePoint(space, P.col(0), P.col(1))


def random_transversal(k: int, rng: random.Random, height: int = 10) -> Mat:
    vals = [Fraction(rng.randint(-height, height)) for _ in range(2 * k - 1)]
    vals.append(Fraction(rng.choice([-1, 1]) * rng.randint(1, height)))
    return Mat.column(vals)


# --- GL(2) versus PGL(2) ---------------------------------------------------

def gl_split(space: SymplecticSpace, A4: Mat) -> tuple[ReductionPoint, Mat]:
    """Split a zero-moment point of gl_2 (x) V into ``(traceless datum, scalar vector)``."""
    from .gradedlie import gl_moment

    if not gl_moment(space, A4).is_zero():
        raise PreconditionError("point is not in the zero set of the gl_2 moment map")
    a = MomentPoint(space, A4[:, 0:3])
    a, _ = closed_limit(a)
    return normalize(a), A4.col(3)


def gl_factorization_check(k: int, seed: int, trials: int, height: int = 10) -> dict:
    """Check that the gl_2 reduction is the PGL(2) reduction times a free vector in V."""
    from .gradedlie import gl_moment
    from .numkernel import hstack, random_rational_matrix
    from .so3w import so_element_from_adjoint

    space = SymplecticSpace(k)
    failures = []
    for t in range(trials):
        s = seed ^ t
        rng = random.Random(s)
        v = random_rational_matrix(space.dim, 1, rng, height)
        # any point: the scalar column never enters the moment map
        A_any = random_rational_matrix(space.dim, 3, rng, height)
        Qgl = gl_moment(space, hstack([A_any, v]))
        Qsl = moment_Q(MomentPoint(space, A_any))
        if Qgl[3, 0] != 0 or not Qgl[0:3, :] == Qsl:
            failures.append({"trial": t, "seed": str(s), "detail": "gl moment differs from sl moment"})
            continue
        p = rng.randint(0, min(3, k))
        a = sample_zero_Q(space, p, rng, height)
        A4 = hstack([a.A, v])
        x, w = gl_split(space, A4)
        m = random_rational_matrix(2, 2, rng, height)
        if m.det() == 0:
            m = Mat.identity(2)
        g = so_element_from_adjoint(m)
        moved = hstack([a.act_orthogonal(g).A, v])
        y, w2 = gl_split(space, moved)
        if x != y or w != w2:
            failures.append({"trial": t, "seed": str(s), "detail": "split datum not GL(2)-invariant"})
        elif x != normalize(a) or w != v:
            failures.append({"trial": t, "seed": str(s), "detail": "split datum does not reassemble"})
    return {"suite": "factorization", "k": k, "trials": trials, "failures": failures}


# --- symplectic form pull-back --------------------------------------------

_KK_SCALAR: Fraction | None = None


def _reference_point() -> MomentPoint:
    space = SymplecticSpace(3)
    A = Mat([[1, 0, 0], [0, 1, 0], [0, 0, 1], [0, 0, 0], [0, 0, 0], [0, 0, 0]])
    return MomentPoint(space, A)


def kk_scalar() -> Fraction:
    """Ratio ambient form / KK form, measured once at a fixed rank-3 point."""
    global _KK_SCALAR
    if _KK_SCALAR is None:
        a = _reference_point()
        ker = tangent_kernel(a)
        kk = KKForm(a.space, moment_mu(a))
        mu_tan = [dmu(a, X) for X in ker]
        for i, X in enumerate(ker):
            for j, Y in enumerate(ker):
                rhs = kk(mu_tan[i], mu_tan[j])
                if rhs != 0:
                    _KK_SCALAR = Fraction(ambient_form(X, Y, a.space)) / rhs
                    return _KK_SCALAR
        raise AssertionError("KK form vanishes at the reference point")
    return _KK_SCALAR


def kk_pullback_check(a: MomentPoint, pairs: int = 50, seed: int = 0, height: int = 5) -> dict:
    """Check that ``mu`` pulls the KK form back to the ambient form on ``ker dQ``."""
    _require_exact(a.space, "the pull-back check")
    if not moment_Q(a).is_zero():
        raise PreconditionError("point is not in the zero set of Q")
    if rank(a.A) != 3:
        raise PreconditionError("the pull-back check needs a rank-3 point")
    c = kk_scalar()
    failures = []
    ker = tangent_kernel(a)
    orbit = orbit_directions(a)
    for i, X in enumerate(orbit):
        if not dQ(a, X).is_zero():
            failures.append({"pair": -1, "detail": f"orbit direction {i} not in ker dQ"})
        for j, Y in enumerate(ker):
            if ambient_form(X, Y, a.space) != 0:
                failures.append({"pair": -1, "detail": f"orbit direction {i} pairs with kernel vector {j}"})
    kk = KKForm(a.space, moment_mu(a))
    rng = random.Random(seed)

    def combo():
        out = Mat.zeros(a.space.dim, 3)
        for Z in ker:
            out = out + Z * Fraction(rng.randint(-height, height))
        return out

    for t in range(pairs):
        X, Y = combo(), combo()
        lhs = ambient_form(X, Y, a.space)
        try:
            rhs = kk(dmu(a, X), dmu(a, Y))
        except Exception as exc:  # noqa: BLE001
            failures.append({"pair": t, "detail": f"dmu not tangent: {exc}"})
            continue
        if lhs != c * rhs:
            failures.append({"pair": t, "detail": f"ambient {lhs} != {c} * kk {rhs}"})
    return {"suite": "kk-pullback", "k": a.k, "pairs": pairs, "scalar": str(c), "failures": failures}
