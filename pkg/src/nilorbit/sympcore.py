"""The symplectic space V = C^{2k}, the Lie algebra sp(V) and its square-zero strata.

Conventions used throughout the package:

* ``omega = [[0, I_k], [-I_k, 0]]`` and ``Omega(x, y) = x.T @ omega @ y``.
* ``B`` is in sp(V) iff ``B.T @ omega + omega @ B == 0``.
* A symmetric tensor ``S`` in S^2 V corresponds to ``sym_to_sp(S) = S @ omega^{-1}``.
  Every other module goes through this map, so identities between modules
  hold on the nose rather than up to sign.
* The coadjoint pairing is the trace form ``tr(X @ Y)``.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .errors import (
    DimensionError,
    NotLagrangianError,
    NotTangentError,
    SamplingError,
    StratumEmptyError,
)
from .numkernel import (
    EXACT,
    LinearSolver,
    Mat,
    hstack,
    kernel_basis,
    mat_from_json,
    mat_to_json,
    rank,
    random_integer_vector,
    random_rational_matrix,
)

RETRY_CAP = 100


@dataclass(frozen=True)
class SymplecticSpace:
    """Standard symplectic space of dimension ``2k``."""

    k: int
    backend: str = EXACT

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("k must be nonnegative")

    @property
    def dim(self) -> int:
        return 2 * self.k

    @cached_property
    def omega(self) -> Mat:
        k = self.k
        data = [[0] * (2 * k) for _ in range(2 * k)]
        for i in range(k):
            data[i][k + i] = 1
            data[k + i][i] = -1
        return Mat(data, EXACT).to_backend(self.backend)

    @cached_property
    def omega_inv(self) -> Mat:
        return -self.omega

    def form(self, x: Mat, y: Mat):
        return (x.T @ self.omega @ y)[0, 0]

    def basis_vector(self, i: int) -> Mat:
        return Mat.column([int(j == i) for j in range(self.dim)], self.backend)

    def is_isotropic(self, vectors) -> bool:
        P = vectors if isinstance(vectors, Mat) else hstack(list(vectors))
        return (P.T @ self.omega @ P).is_zero()

    def is_sp(self, B: Mat) -> bool:
        return B.shape == (self.dim, self.dim) and B.T @ self.omega == -(self.omega @ B)

    # coordinates on sp(V) via the upper triangle of the symmetric tensor
    @cached_property
    def sym_index(self) -> list[tuple[int, int]]:
        n = self.dim
        return [(i, j) for i in range(n) for j in range(i, n)]

    @property
    def sp_dim(self) -> int:
        return self.k * (2 * self.k + 1)

    def sp_coords(self, B: Mat) -> Mat:
        S = sp_to_sym(self, B)
        return Mat.column([S[i, j] for i, j in self.sym_index], self.backend)

    def sp_from_coords(self, c) -> Mat:
        vals = c.flat() if isinstance(c, Mat) else list(c)
        n = self.dim
        zero = Mat.zeros(1, 1, self.backend)[0, 0]
        S = [[zero] * n for _ in range(n)]
        for (i, j), v in zip(self.sym_index, vals):
            S[i][j] = v
            S[j][i] = v
        return sym_to_sp(self, Mat(S, self.backend))

    @cached_property
    def sp_basis(self) -> list[Mat]:
        """``sym_to_sp`` of the symmetric unit tensors ``E_ij + E_ji`` (``E_ii``)."""
        n = self.dim
        out = []
        for i, j in self.sym_index:
            S = [[0] * n for _ in range(n)]
            S[i][j] = 1
            S[j][i] = 1
            out.append(sym_to_sp(self, Mat(S, EXACT).to_backend(self.backend)))
        return out


@dataclass(frozen=True)
class NilpotentElement:
    """``B`` in sp(V) with ``B @ B == 0`` and rank ``p``."""

    space: SymplecticSpace
    B: Mat
    p: int

    @property
    def k(self) -> int:
        return self.space.k

    def to_json(self) -> dict:
        return {"k": self.k, "p": self.p, "B": mat_to_json(self.B)}

    @classmethod
    def from_json(cls, obj: dict) -> "NilpotentElement":
        B = mat_from_json(obj["B"])
        space = SymplecticSpace(obj["k"], B.backend)
        p = stratum_of(space, B)
        if p is None or p != obj["p"]:
            raise ValueError("JSON does not describe a square-zero element of the stated rank")
        return cls(space, B, p)


def _check_square(space: SymplecticSpace, M: Mat) -> None:
    if M.shape != (space.dim, space.dim):
        raise DimensionError(f"expected a {space.dim}x{space.dim} matrix, got {M.shape}")


def sym_to_sp(space: SymplecticSpace, S: Mat) -> Mat:
    """Lower an index with the symplectic form: ``S @ omega^{-1}``."""
    _check_square(space, S)
    if not S.is_symmetric():
        raise ValueError("sym_to_sp expects a symmetric tensor")
    return S @ space.omega_inv


def sp_to_sym(space: SymplecticSpace, B: Mat) -> Mat:
    _check_square(space, B)
    return B @ space.omega


def bracket(X: Mat, Y: Mat) -> Mat:
    return X @ Y - Y @ X


def stratum_of(space: SymplecticSpace, B: Mat) -> int | None:
    """Rank of ``B`` when ``B^2 = 0``, else ``None``."""
    _check_square(space, B)
    if not (B @ B).is_zero():
        return None
    return rank(B)


def _rng(seed) -> random.Random:
    return seed if isinstance(seed, random.Random) else random.Random(seed)


def random_isotropic_basis(space: SymplecticSpace, p: int, rng: random.Random,
                           height: int = 10) -> Mat:
    """Integer ``2k x p`` matrix whose columns span a random isotropic p-plane.

    Vectors are added greedily inside the symplectic orthogonal of the ones
    already chosen; degenerate draws are rejected up to ``RETRY_CAP`` times.
    """
    if p > space.k:
        raise StratumEmptyError(f"no isotropic {p}-plane in dimension {space.dim}")
    n = space.dim
    omega = SymplecticSpace(space.k).omega
    vecs: list[Mat] = []
    for _ in range(p):
        for _attempt in range(RETRY_CAP):
            if vecs:
                constraints = hstack(vecs).T @ omega
                ker = kernel_basis(constraints)
                coeffs = random_integer_vector(rng, len(ker), height)
                v = sum((K * c for K, c in zip(ker, coeffs)), Mat.zeros(n, 1))
            else:
                v = Mat.column(random_integer_vector(rng, n, height))
            v = _primitive(v)
            if v is not None and rank(hstack(vecs + [v])) == len(vecs) + 1:
                vecs.append(v)
                break
        else:
            raise SamplingError("could not extend the isotropic frame")
    if not vecs:
        raise ValueError("an isotropic 0-plane has no basis matrix")
    return hstack(vecs)


def _primitive(v: Mat) -> Mat | None:
    """Clear denominators and common factors; ``None`` for the zero vector."""
    vals = v.flat()
    if all(x == 0 for x in vals):
        return None
    den = 1
    for x in vals:
        den = den * x.denominator // math.gcd(den, x.denominator)
    ints = [int(x * den) for x in vals]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    return Mat.column([x // g for x in ints])


def sample_nilpotent(space: SymplecticSpace, p: int, seed, height: int = 10,
                     liftable: bool = True) -> NilpotentElement:
    """Random element of the stratum N^p_k.

    Picks a random isotropic p-plane ``W'`` with basis ``P`` and a nondegenerate
    symmetric tensor ``G`` on its dual, and returns ``sym_to_sp(P G P^T)``.

    With ``liftable=True`` and ``p <= 3``, ``G`` is drawn as ``M h M^T`` for a
    random rank-p ``M`` and the trace form ``h`` of W, so the point lies in the
    image of the rational moment map and its fiber has rational points.
    """
    if p < 0:
        raise ValueError("p must be nonnegative")
    if p > space.k:
        raise StratumEmptyError(f"N^{p}_{space.k} is empty: isotropic images have rank <= k")
    rng = _rng(seed)
    n = space.dim
    if p == 0:
        return NilpotentElement(space, Mat.zeros(n, n, space.backend), 0)
    P = random_isotropic_basis(space, p, rng, height)
    G = _random_form(p, rng, height, liftable)
    B = sym_to_sp(SymplecticSpace(space.k), P @ G @ P.T).to_backend(space.backend)
    return NilpotentElement(space, B, p)


def _random_form(p: int, rng: random.Random, height: int, liftable: bool) -> Mat:
    from .so3w import H_GRAM

    for _ in range(RETRY_CAP):
        if liftable and p <= 3:
            M = random_rational_matrix(p, 3, rng, height)
            G = M @ H_GRAM @ M.T
        else:
            M = random_rational_matrix(p, p, rng, height)
            G = M + M.T
        if G.det() != 0:
            return G
    raise SamplingError("could not draw a nondegenerate symmetric form")


def is_nilpotent_square_zero(space: SymplecticSpace, B: Mat) -> bool:
    return space.is_sp(B) and (B @ B).is_zero()


def ad_matrix(space: SymplecticSpace, B: Mat) -> Mat:
    """Matrix of ``xi -> [xi, B]`` on sp(V) in symmetric-tensor coordinates.

    With ``M = omega^-1 sp_to_sym(B)`` the bracket of the unit tensor at
    ``(i, j)`` with ``B`` has symmetric tensor ``P + P^T``, where ``P`` is
    zero outside rows i and j. Building columns from that avoids two dense
    products per basis element.
    """
    M = (space.omega_inv @ sp_to_sym(space, B)).tolist()
    zero = Mat.zeros(1, 1, space.backend)[0, 0]
    index = space.sym_index
    cols = []
    for i, j in index:
        P = {i: M[j], j: M[i]}
        col = []
        for a, b in index:
            v = zero
            if a in P:
                v = v + P[a][b]
            if b in P:
                v = v + P[b][a]
            col.append(v)
        cols.append(col)
    return Mat([[cols[c][r] for c in range(len(cols))] for r in range(len(index))], space.backend)


def orbit_dimension(space: SymplecticSpace, B) -> int:
    """Dimension of the adjoint orbit through ``B``: rank of ``xi -> [xi, B]``."""
    B = B.B if isinstance(B, NilpotentElement) else B
    return rank(ad_matrix(space, B))


def orbit_dimension_formula(k: int, p: int) -> int:
    return p * (2 * k - p) + p


class KKForm:
    """Kostant-Kirillov form at a fixed base point, with a cached ad-solver."""

    def __init__(self, space: SymplecticSpace, B):
        self.space = space
        self.B = B.B if isinstance(B, NilpotentElement) else B
        self._solver = LinearSolver(ad_matrix(space, self.B))

    def preimage(self, u: Mat) -> Mat:
        """Some ``xi`` in sp(V) with ``[xi, B] == u``."""
        if not self.space.is_sp(u):
            raise NotTangentError("tangent vectors must lie in sp(V)")
        c = self._solver.solve(self.space.sp_coords(u))
        if c is None:
            raise NotTangentError("vector is not tangent to the orbit")
        return self.space.sp_from_coords(c)

    def __call__(self, u: Mat, v: Mat):
        xi = self.preimage(u)
        eta = self.preimage(v)
        return pairing(self.B, bracket(xi, eta))

    def is_tangent(self, u: Mat) -> bool:
        try:
            self.preimage(u)
        except NotTangentError:
            return False
        return True


def pairing(X: Mat, Y: Mat):
    """Trace form ``tr(X @ Y)``."""
    return (X @ Y).trace()


def kk_form(space: SymplecticSpace, B, u: Mat, v: Mat):
    """``omega_B(u, v) = tr(B [xi, eta])`` where ``u = [xi, B]``, ``v = [eta, B]``."""
    return KKForm(space, B)(u, v)


def random_tangent(space: SymplecticSpace, B: Mat, rng: random.Random, height: int = 10) -> tuple[Mat, Mat]:
    """A random tangent vector ``[xi, B]`` together with the ``xi`` producing it."""
    coeffs = random_rational_matrix(space.sp_dim, 1, rng, height)
    xi = space.sp_from_coords(coeffs.to_backend(space.backend))
    return bracket(xi, B), xi


def centralizer_basis(space: SymplecticSpace, B: Mat) -> list[Mat]:
    return [space.sp_from_coords(c) for c in kernel_basis(ad_matrix(space, B))]


def random_lagrangian(space: SymplecticSpace, seed, height: int = 10) -> Mat:
    return random_isotropic_basis(space, space.k, _rng(seed), height)


def lagrangian_resolve(space: SymplecticSpace, L: Mat, beta: Mat) -> NilpotentElement:
    """Point of T^*G(V) -> N_k: a symmetric tensor ``beta`` on a Lagrangian ``L``.

    ``L`` is a ``2k x k`` basis matrix and ``beta`` a symmetric ``k x k``
    coefficient matrix in that basis; the result is ``sym_to_sp(L beta L^T)``,
    whose image lies in ``L`` and whose kernel contains ``L``.
    """
    k = space.k
    if L.shape != (space.dim, k) or rank(L) != k:
        raise NotLagrangianError("L must be a basis of a k-dimensional subspace")
    if not space.is_isotropic(L):
        raise NotLagrangianError("L is not isotropic")
    if beta.shape != (k, k) or not beta.is_symmetric():
        raise ValueError("beta must be a symmetric k x k matrix")
    B = sym_to_sp(space, L @ beta @ L.T)
    p = stratum_of(space, B)
    return NilpotentElement(space, B, p)


def random_symmetric_of_rank(k: int, p: int, rng: random.Random, height: int = 10) -> Mat:
    """Random symmetric ``k x k`` rational matrix of rank exactly ``p``."""
    for _ in range(RETRY_CAP):
        M = random_rational_matrix(k, p, rng, height) if p else None
        D = random_rational_matrix(p, p, rng, height) if p else None
        if p == 0:
            return Mat.zeros(k, k)
        D = D + D.T
        beta = M @ D @ M.T
        if rank(beta) == p:
            return beta
    raise SamplingError("could not draw a symmetric matrix of the requested rank")


def symplectic_transvection(space: SymplecticSpace, v: Mat, c) -> Mat:
    """``x -> x + c Omega(v, x) v``, an element of Sp(V)."""
    n = space.dim
    row = v.T @ space.omega
    return Mat.identity(n, space.backend) + (v @ row) * c


def random_symplectic(space: SymplecticSpace, seed, steps: int = 4, height: int = 3) -> Mat:
    """Product of random transvections with small integer data."""
    rng = _rng(seed)
    g = Mat.identity(space.dim, space.backend)
    for _ in range(steps):
        v = Mat.column(random_integer_vector(rng, space.dim, height), space.backend)
        c = Fraction(rng.choice([-2, -1, 1, 2]), rng.randint(1, 2))
        if space.backend != EXACT:
            c = float(c)
        g = symplectic_transvection(space, v, c) @ g
    return g


def is_symplectic(space: SymplecticSpace, g: Mat) -> bool:
    return g.shape == (space.dim, space.dim) and g.T @ space.omega @ g == space.omega
