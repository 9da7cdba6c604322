"""W = traceless 2x2 matrices with the trace form, as a model of (C^3, SO(3)).

Basis order ``(E, F, H)`` is normative everywhere in the package:
``E = [[0,1],[0,0]]``, ``F = [[0,0],[1,0]]``, ``H = [[1,0],[0,-1]]``.
The trace form ``h(x, y) = tr(xy)`` has Gram matrix ``[[0,1,0],[1,0,0],[0,0,2]]``
and the commutator is the isomorphism ``chi: Lambda^2 W -> W``. Conjugation
by GL(2) realizes PGL(2) = SO(W), and E, F are rational null vectors.

``H`` plays the role of the fixed anisotropic vector ``w`` and
``span(E, F)`` of its orthogonal complement.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .errors import PreconditionError
from .numkernel import EXACT, Mat, hstack

BASIS_NAMES = ("E", "F", "H")

E2 = Mat([[0, 1], [0, 0]])
F2 = Mat([[0, 0], [1, 0]])
H2 = Mat([[1, 0], [0, -1]])
BASIS_2x2 = (E2, F2, H2)

H_GRAM = Mat([[0, 1, 0], [1, 0, 0], [0, 0, 2]])
H_GRAM_INV = H_GRAM.inverse()


def coords(x: Mat) -> Mat:
    """Coordinates of a traceless 2x2 matrix in the basis (E, F, H)."""
    if x.shape != (2, 2) or x.trace() != 0:
        raise ValueError("expected a traceless 2x2 matrix")
    return Mat.column([x[0, 1], x[1, 0], x[0, 0]], x.backend)


def from_coords(c: Mat) -> Mat:
    e, f, hh = c.flat()
    return Mat([[hh, e], [f, -hh]], c.backend)


def _commutator(x: Mat, y: Mat) -> Mat:
    return x @ y - y @ x


# chi[i][j] = coordinates of [b_i, b_j]
CHI = [[coords(_commutator(a, b)) for b in BASIS_2x2] for a in BASIS_2x2]


def chi(x: Mat, y: Mat) -> Mat:
    """``chi(x ^ y)`` for coordinate columns ``x, y``."""
    xs, ys = x.flat(), y.flat()
    out = Mat.zeros(3, 1, x.backend)
    for i, j in product(range(3), repeat=2):
        if xs[i] and ys[j]:
            out = out + CHI[i][j].to_backend(x.backend) * (xs[i] * ys[j])
    return out


def chi_of_bivector(K: Mat) -> Mat:
    """Apply ``chi`` to the bivector ``sum_{i<j} K_ij w_i ^ w_j`` (``K`` skew 3x3)."""
    out = Mat.zeros(3, 1, K.backend)
    for i in range(3):
        for j in range(i + 1, 3):
            if K[i, j]:
                out = out + CHI[i][j].to_backend(K.backend) * K[i, j]
    return out


def h_form(x: Mat, y: Mat):
    return (x.T @ H_GRAM.to_backend(x.backend) @ y)[0, 0]


def ad(x: Mat) -> Mat:
    """Matrix of ``y -> [x, y]`` on W (``x`` given in coordinates)."""
    unit = [Mat.column([int(i == j) for i in range(3)], x.backend) for j in range(3)]
    return hstack([chi(x, u) for u in unit])


def basis_vector(i: int, backend: str = EXACT) -> Mat:
    return Mat.column([int(j == i) for j in range(3)], backend)


@dataclass(frozen=True)
class OrthogonalElement:
    """An isometry ``g`` of ``(W, h)``; ``det_sign`` is its determinant."""

    g: Mat
    det_sign: int

    def __post_init__(self):
        g = self.g
        if g.shape != (3, 3) or not (g.T @ H_GRAM.to_backend(g.backend) @ g) == H_GRAM.to_backend(g.backend):
            raise PreconditionError("matrix does not preserve the trace form")
        d = g.det()
        if not (abs(d - self.det_sign) <= 1e-9 if g.backend != EXACT else d == self.det_sign):
            raise PreconditionError(f"determinant {d} does not match sign {self.det_sign}")

    @classmethod
    def from_matrix(cls, g: Mat) -> "OrthogonalElement":
        d = g.det()
        return cls(g, 1 if d > 0 else -1)

    def __matmul__(self, other: "OrthogonalElement") -> "OrthogonalElement":
        return OrthogonalElement(self.g @ other.g, self.det_sign * other.det_sign)

    def inverse(self) -> "OrthogonalElement":
        return OrthogonalElement(self.g.inverse(), self.det_sign)


def is_isometry(g: Mat) -> bool:
    Hg = H_GRAM.to_backend(g.backend)
    return g.shape == (3, 3) and g.T @ Hg @ g == Hg


def so_element_from_adjoint(m: Mat) -> OrthogonalElement:
    """Matrix of ``x -> m x m^{-1}`` on W; always a det +1 isometry."""
    if m.shape != (2, 2):
        raise ValueError("expected a 2x2 matrix")
    if m.det() == 0:
        raise ZeroDivisionError("conjugator is singular")
    minv = m.inverse()
    g = hstack([coords(m @ b.to_backend(m.backend) @ minv) for b in BASIS_2x2])
    return OrthogonalElement(g, 1)


def tau_reflection() -> OrthogonalElement:
    """``E <-> F``, ``H -> H``: det -1, fixes H and preserves span(E, F)."""
    return OrthogonalElement(Mat([[0, 1, 0], [1, 0, 0], [0, 0, 1]]), -1)


def torus_element(lam) -> OrthogonalElement:
    """``E -> lam E``, ``F -> lam^{-1} F``, ``H -> H``: the group SO(span(E, F))."""
    lam = Fraction(lam)
    return OrthogonalElement(Mat([[lam, 0, 0], [0, 1 / lam, 0], [0, 0, 1]]), 1)


def reflection(u: Mat) -> OrthogonalElement:
    """Orthogonal reflection in the anisotropic vector ``u``."""
    q = h_form(u, u)
    if q == 0:
        raise PreconditionError("cannot reflect in a null vector")
    g = Mat.identity(3, u.backend) - (u @ u.T @ H_GRAM.to_backend(u.backend)) * (2 / q)
    return OrthogonalElement(g, -1)


def pgl2_iso_check() -> dict:
    """Verify on the basis that ad preserves h, chi is the commutator and h(chi(.^.), .) is alternating."""
    failures = []
    units = [basis_vector(i) for i in range(3)]
    for i, j in product(range(3), repeat=2):
        # chi agrees with the matrix commutator
        lhs = from_coords(chi(units[i], units[j]))
        rhs = _commutator(BASIS_2x2[i], BASIS_2x2[j])
        if lhs != rhs:
            failures.append({"check": "chi", "triple": [BASIS_NAMES[i], BASIS_NAMES[j]]})
    for a, x, y in product(range(3), repeat=3):
        ua, ux, uy = units[a], units[x], units[y]
        val = h_form(chi(ua, ux), uy) + h_form(ux, chi(ua, uy))
        if val != 0:
            failures.append({"check": "ad-invariance", "triple": [BASIS_NAMES[t] for t in (a, x, y)]})
        t = h_form(chi(ua, ux), uy)
        if t != -h_form(chi(ux, ua), uy) or t != -h_form(chi(ua, uy), ux):
            failures.append({"check": "alternating", "triple": [BASIS_NAMES[s] for s in (a, x, y)]})
    return {"suite": "pgl2-iso", "passed": not failures, "failures": failures}


def null_vector(s, t) -> Mat:
    """Rational parametrization ``(s^2, -t^2, st)`` of the null cone of h."""
    s, t = Fraction(s), Fraction(t)
    return Mat.column([s * s, -t * t, s * t])


def orthogonal_complement(vectors) -> list[Mat]:
    from .numkernel import kernel_basis

    M = hstack(list(vectors))
    return kernel_basis(M.T @ H_GRAM.to_backend(M.backend))
