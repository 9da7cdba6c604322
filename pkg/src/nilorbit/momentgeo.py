"""Hom(W*, V) = W (x) V with its two commuting Hamiltonian actions.

A point ``a`` is stored as the ``2k x 3`` matrix ``A`` whose columns are
``a(E*), a(F*), a(H*)``; equivalently ``a = E (x) A[:,0] + F (x) A[:,1] + H (x) A[:,2]``.
The ambient symplectic form is ``sum_ij h_ij Omega(X_i, Y_j)``.

* SO(W) acts by ``A -> A @ g.T`` (this is ``a o g*``), Sp(V) by ``A -> s @ A``.
* ``moment_Q(a) = chi(a^* Omega)``: the bivector ``A.T omega A`` pushed to W.
* ``moment_mu(a) = sym_to_sp(A h A.T)``, the pushforward of ``h``.

With these conventions ``Q(a o g*) = g Q(a)`` for det +1 isometries and
``mu`` is SO(W)-invariant.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .errors import DimensionError, PreconditionError, SamplingError, StratumEmptyError
from .numkernel import (
    EXACT,
    Mat,
    hstack,
    kernel_basis,
    mat_from_json,
    mat_to_json,
    random_rational_matrix,
    rank,
)
from .quadform import hyperbolic_frame
from .so3w import H_GRAM, OrthogonalElement, ad, basis_vector, chi_of_bivector, null_vector
from .sympcore import (
    RETRY_CAP,
    SymplecticSpace,
    is_symplectic,
    random_isotropic_basis,
    sym_to_sp,
)


@dataclass(frozen=True)
class MomentPoint:
    space: SymplecticSpace
    A: Mat

    def __post_init__(self):
        if self.A.shape != (self.space.dim, 3):
            raise DimensionError(f"expected a {self.space.dim}x3 matrix, got {self.A.shape}")
        if self.A.backend != self.space.backend:
            raise DimensionError("point and space use different backends")

    @property
    def k(self) -> int:
        return self.space.k

    def rank(self) -> int:
        return rank(self.A)

    def act_orthogonal(self, g) -> "MomentPoint":
        """``a o g*`` for an isometry ``g`` of W."""
        g = g.g if isinstance(g, OrthogonalElement) else g
        return MomentPoint(self.space, self.A @ g.to_backend(self.A.backend).T)

    def act_symplectic(self, s: Mat) -> "MomentPoint":
        return MomentPoint(self.space, s @ self.A)

    def __neg__(self) -> "MomentPoint":
        return MomentPoint(self.space, -self.A)

    def to_json(self) -> dict:
        return {"k": self.k, "A": mat_to_json(self.A)}

    @classmethod
    def from_json(cls, obj: dict) -> "MomentPoint":
        A = mat_from_json(obj["A"])
        return cls(SymplecticSpace(obj["k"], A.backend), A)


def _h(backend: str) -> Mat:
    return H_GRAM.to_backend(backend)


def moment_Q(a: MomentPoint) -> Mat:
    """SO(W)-moment map, a column in W coordinates (E, F, H)."""
    A = a.A
    return chi_of_bivector(A.T @ a.space.omega @ A)


def moment_mu(a: MomentPoint) -> Mat:
    """Sp(V)-moment map in sp(V)."""
    A = a.A
    return sym_to_sp(a.space, A @ _h(A.backend) @ A.T)


def _require_zero_Q(a: MomentPoint) -> None:
    if not moment_Q(a).is_zero():
        raise PreconditionError("point is not in the zero set of Q")


def is_closed_orbit(a: MomentPoint) -> bool:
    """Closed SO(W)-orbit in Q^{-1}(0) iff ``rank mu(a) == rank a``."""
    _require_zero_Q(a)
    return rank(moment_mu(a)) == rank(a.A)


def _rng(seed) -> random.Random:
    return seed if isinstance(seed, random.Random) else random.Random(seed)


def _coimage_coeffs(p: int, rng: random.Random, height: int, closed) -> Mat:
    """A rank-p ``p x 3`` matrix ``C``; ``closed`` controls whether ``C h C^T`` is nondegenerate."""
    h = H_GRAM
    for _ in range(RETRY_CAP):
        if closed is False:
            s = rng.choice([-1, 1]) * rng.randint(1, height)
            t = rng.choice([-1, 1]) * rng.randint(1, height)
            n = null_vector(s, t)
            if p == 1:
                C = n.T * Fraction(rng.randint(1, height), rng.randint(1, height))
            else:
                perp = [v for v in kernel_basis(n.T @ h)]
                m = sum((v * Fraction(rng.randint(-height, height)) for v in perp), Mat.zeros(3, 1))
                M = random_rational_matrix(2, 2, rng, height)
                C = M @ hstack([n, m]).T
        else:
            C = random_rational_matrix(p, 3, rng, height)
        if rank(C) != p:
            continue
        nondeg = (C @ h @ C.T).det() != 0
        if closed is None or nondeg == closed:
            return C
    raise SamplingError("could not draw coimage coefficients")


def sample_zero_Q(space: SymplecticSpace, p: int, seed, height: int = 10,
                  closed: bool | None = None) -> MomentPoint:
    """Random ``a`` of rank ``p`` whose image is a random isotropic p-plane.

    ``closed=None`` draws generic coefficients (closed with probability one),
    ``True`` insists on a closed orbit and ``False`` on a non-closed one.
    """
    if p > space.k:
        raise StratumEmptyError(f"isotropic images in dimension {space.dim} have rank <= {space.k}")
    if not 0 <= p <= 3:
        raise ValueError("rank of a map out of W* is between 0 and 3")
    if closed is False and p not in (1, 2):
        raise ValueError("only ranks 1 and 2 have non-closed orbits")
    rng = _rng(seed)
    if p == 0:
        return MomentPoint(space, Mat.zeros(space.dim, 3, space.backend))
    P = random_isotropic_basis(space, p, rng, height)
    C = _coimage_coeffs(p, rng, height, closed)
    return MomentPoint(space, (P @ C).to_backend(space.backend))


def random_moment_point(space: SymplecticSpace, seed, height: int = 10) -> MomentPoint:
    """Unconstrained random point of Hom(W*, V)."""
    return MomentPoint(space, random_rational_matrix(space.dim, 3, seed, height).to_backend(space.backend))


# --- infinitesimal structure ---------------------------------------------

def flatten(X: Mat) -> Mat:
    """Column-major vector of a ``2k x 3`` tangent matrix."""
    return Mat.column([X[r, i] for i in range(X.cols) for r in range(X.rows)], X.backend)


def unflatten(v: Mat, rows: int) -> Mat:
    vals = v.flat()
    return Mat([[vals[i * rows + r] for i in range(3)] for r in range(rows)], v.backend)


def dQ(a: MomentPoint, X: Mat) -> Mat:
    om = a.space.omega
    return chi_of_bivector(X.T @ om @ a.A + a.A.T @ om @ X)


def dmu(a: MomentPoint, X: Mat) -> Mat:
    h = _h(a.A.backend)
    return sym_to_sp(a.space, X @ h @ a.A.T + a.A @ h @ X.T)


def _tangent_units(a: MomentPoint) -> list[Mat]:
    n = a.space.dim
    units = []
    for i in range(3):
        for r in range(n):
            units.append(Mat([[int(rr == r and ii == i) for ii in range(3)] for rr in range(n)], EXACT)
                         .to_backend(a.A.backend))
    return units


def jacobian_Q(a: MomentPoint) -> Mat:
    """``3 x 6k`` matrix of ``dQ`` at ``a`` in the column-major coordinates."""
    return hstack([dQ(a, X) for X in _tangent_units(a)])


def tangent_kernel(a: MomentPoint) -> list[Mat]:
    """Basis of ``ker dQ`` at ``a`` as ``2k x 3`` matrices."""
    return [unflatten(v, a.space.dim) for v in kernel_basis(jacobian_Q(a))]


def orbit_directions(a: MomentPoint) -> list[Mat]:
    """Infinitesimal SO(W)-action ``xi . a`` for ``xi`` in the basis of so(W) = W."""
    return [a.A @ ad(basis_vector(i, a.A.backend)).T for i in range(3)]


def stabilizer_dimension(a: MomentPoint) -> int:
    """``dim`` of the kernel of ``xi -> xi . a`` on so(W)."""
    return 3 - rank(hstack([flatten(X) for X in orbit_directions(a)]))


def ambient_form(X: Mat, Y: Mat, space: SymplecticSpace):
    """Product symplectic form ``sum_ij h_ij Omega(X_i, Y_j)`` on Hom(W*, V)."""
    K = X.T @ space.omega @ Y
    h = _h(X.backend)
    return sum((h[i, j] * K[i, j] for i in range(3) for j in range(3) if h[i, j]), K[0, 0] * 0)


# --- degenerations --------------------------------------------------------

@dataclass(frozen=True)
class DegenerationWitness:
    """One-parameter subgroup ``g(lam) = T diag(lam^2, lam^-2, 1) T^{-1}`` of SO(W).

    ``T = [n | n' | m]`` is a hyperbolic frame of W in which the null radical
    direction ``n`` of the coimage plays the role of E. Along the family
    ``a o g(lam)*`` the point tends to ``limit`` as ``lam -> 0``.
    """

    point: MomentPoint
    frame: Mat
    limit: MomentPoint

    weights = (2, -2, 0)

    def g(self, lam) -> OrthogonalElement:
        lam = Fraction(lam)
        D = Mat([[lam ** 2, 0, 0], [0, lam ** -2, 0], [0, 0, 1]])
        return OrthogonalElement(self.frame @ D @ self.frame.inverse(), 1)

    def at(self, lam) -> MomentPoint:
        return self.point.act_orthogonal(self.g(lam))

    def frame_coefficients(self) -> Mat:
        """Columns are the V-coefficients of ``a`` along ``n, n', m``."""
        return self.point.A @ self.frame.inverse().T


def degeneration_witness(a: MomentPoint) -> DegenerationWitness | None:
    """Explicit one-parameter degeneration of a non-closed orbit, or ``None`` if closed."""
    if a.A.backend != EXACT:
        raise PreconditionError("degeneration witnesses are built over the exact backend")
    if is_closed_orbit(a):
        return None
    A = a.A
    h = H_GRAM
    S = A @ h @ A.T
    n = None
    for y in kernel_basis(S):
        cand = A.T @ y
        if not cand.is_zero():
            n = cand
            break
    if n is None:
        raise AssertionError("non-closed orbit without a radical vector")
    T, _ = hyperbolic_frame(h, n)
    coeffs = A @ T.inverse().T
    if not coeffs.col(1).is_zero():
        raise AssertionError("coimage is not contained in the orthogonal of its radical")
    D0 = Mat([[0, 0, 0], [0, 0, 0], [0, 0, 1]])
    limit = MomentPoint(a.space, coeffs @ D0 @ T.T)
    return DegenerationWitness(a, T, limit)


def closed_limit(a: MomentPoint) -> tuple[MomentPoint, int]:
    """Follow witnesses until the orbit is closed; returns the limit and the step count."""
    steps = 0
    while True:
        w = degeneration_witness(a)
        if w is None:
            return a, steps
        a = w.limit
        steps += 1
        if steps > 3:
            raise AssertionError("witness chain failed to terminate")


# --- equivariance ---------------------------------------------------------

def equivariance_check(a: MomentPoint, g: OrthogonalElement, s: Mat) -> dict:
    """Check that the SO(W) and Sp(V) actions commute with the two moment maps."""
    if g.det_sign != 1:
        raise PreconditionError("g must have determinant +1")
    if not is_symplectic(a.space, s):
        raise PreconditionError("s does not preserve Omega")
    failures = []
    ga = a.act_orthogonal(g)
    sa = a.act_symplectic(s)
    gm = g.g.to_backend(a.A.backend)
    if not moment_mu(ga) == moment_mu(a):
        failures.append("mu(a o g*) != mu(a)")
    if not moment_Q(ga) == gm @ moment_Q(a):
        failures.append("Q(a o g*) != g Q(a)")
    if not moment_mu(sa) == s @ moment_mu(a) @ s.inverse():
        failures.append("mu(s a) != s mu(a) s^-1")
    if not moment_Q(sa) == moment_Q(a):
        failures.append("Q(s a) != Q(a)")
    return {"suite": "equivariance", "passed": not failures, "failures": failures}


# --- dimension of the reduction --------------------------------------------

def reduction_dimension(space: SymplecticSpace, seed, height: int = 10) -> dict:
    """Dimension of P(PGL(2), V) at a generic closed point of maximal rank.

    ``dim ker dQ - dim(orbit)``; at free points this is ``dim ker dQ - 3``.
    """
    p = min(3, space.k)
    rng = _rng(seed)
    a = sample_zero_Q(space, p, rng, height, closed=True)
    kernel = len(kernel_basis(jacobian_Q(a)))
    stab = stabilizer_dimension(a)
    return {
        "k": space.k,
        "rank": p,
        "ker_dQ": kernel,
        "stabilizer": stab,
        "dim": kernel - (3 - stab),
    }
