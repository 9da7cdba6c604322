"""The graded algebra A(V) = C + V + C and the graded Lie algebra g (x) A(V).

Products in A(V) are the unit law in degree 0 and ``v . w = Omega(v, w)``
for two degree-1 elements; anything landing above degree 2 is zero. The
bracket on ``g (x) A(V)`` is ``[x (x) a, y (x) b] = [x, y] (x) ab`` with no
extra sign, since g sits in degree 0. Odd-odd brackets are therefore
symmetric.

A degree-1 element of ``sl_2 (x) V`` has one V-vector per basis element
``E, F, H``, the same data as the ``2k x 3`` matrix of a moment point.
Under that identification half the self-bracket is the SO(W)-moment map Q.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .errors import DimensionError, PreconditionError
from .numkernel import EXACT, Mat
from .sympcore import SymplecticSpace

SL2, GL2 = "sl2", "gl2"
TAGS = (SL2, GL2)
BASIS_NAMES = {SL2: ("E", "F", "H"), GL2: ("E", "F", "H", "I")}

_GL2_BASIS = (
    ((0, 1), (0, 0)),
    ((0, 0), (1, 0)),
    ((1, 0), (0, -1)),
    ((1, 0), (0, 1)),
)


def _gl_coords(m) -> list[Fraction]:
    (a, b), (c, d) = m
    return [Fraction(b), Fraction(c), Fraction(a - d, 2), Fraction(a + d, 2)]


def _mul(x, y):
    return tuple(tuple(sum(x[i][t] * y[t][j] for t in range(2)) for j in range(2)) for i in range(2))


def _structure_constants(n: int) -> list[list[list[Fraction]]]:
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            xy = _mul(_GL2_BASIS[i], _GL2_BASIS[j])
            yx = _mul(_GL2_BASIS[j], _GL2_BASIS[i])
            comm = tuple(tuple(xy[r][c] - yx[r][c] for c in range(2)) for r in range(2))
            row.append(_gl_coords(comm)[:n])
        out.append(row)
    return out


STRUCTURE = {SL2: _structure_constants(3), GL2: _structure_constants(4)}


def lie_dim(tag: str) -> int:
    if tag not in TAGS:
        raise ValueError(f"unknown Lie algebra tag {tag!r}")
    return len(BASIS_NAMES[tag])


# --- A(V) -----------------------------------------------------------------

@dataclass(frozen=True)
class AVElement:
    """Homogeneous element of A(V). ``value`` is a scalar in degrees 0, 2 and a column in degree 1.

    Degrees 3 and 4 only hold zero; they appear as results of overflowing products.
    """

    space: SymplecticSpace
    degree: int
    value: object

    def __post_init__(self):
        if self.degree == 1:
            if not isinstance(self.value, Mat) or self.value.shape != (self.space.dim, 1):
                raise DimensionError("degree-1 elements are vectors in V")
        elif self.degree in (0, 2):
            if isinstance(self.value, Mat):
                raise DimensionError("degrees 0 and 2 hold scalars")
        elif self.degree in (3, 4):
            if self.value != 0:
                raise ValueError("A(V) vanishes above degree 2")
        else:
            raise ValueError("degree out of range")

    def is_zero(self) -> bool:
        return self.value.is_zero() if isinstance(self.value, Mat) else self.value == 0

    def __add__(self, other: "AVElement") -> "AVElement":
        if other.degree != self.degree:
            raise ValueError("only homogeneous elements of equal degree can be added")
        return AVElement(self.space, self.degree, self.value + other.value)

    def scale(self, c) -> "AVElement":
        return AVElement(self.space, self.degree, self.value * c)


def av_scalar(space: SymplecticSpace, c, degree: int = 0) -> AVElement:
    return AVElement(space, degree, Fraction(c))


def av_vector(space: SymplecticSpace, v: Mat) -> AVElement:
    return AVElement(space, 1, v)


def _scalar_times(c, val):
    return val * c


def av_product(x: AVElement, y: AVElement) -> AVElement:
    """Graded product; overflow past degree 2 gives zero in the overflow degree."""
    d = x.degree + y.degree
    if d > 2:
        return AVElement(x.space, d, 0)
    if x.degree == 1 and y.degree == 1:
        return AVElement(x.space, 2, x.space.form(x.value, y.value))
    if x.degree == 0:
        return AVElement(x.space, d, _scalar_times(x.value, y.value))
    return AVElement(x.space, d, _scalar_times(y.value, x.value))


def av_basis(space: SymplecticSpace, degree: int) -> list[AVElement]:
    if degree == 1:
        return [av_vector(space, space.basis_vector(i)) for i in range(space.dim)]
    return [av_scalar(space, 1, degree)]


# --- g (x) A(V) -----------------------------------------------------------

@dataclass(frozen=True)
class GradedLieElement:
    """Homogeneous element of ``g (x) A(V)``.

    ``coeffs`` has one column per basis element of g holding its A(V)
    coefficient: a ``1 x n`` row of scalars in degrees 0 and 2, and a
    ``2k x n`` matrix in degree 1.
    """

    space: SymplecticSpace
    tag: str
    degree: int
    coeffs: Mat

    def __post_init__(self):
        n = lie_dim(self.tag)
        if self.degree not in (0, 1, 2):
            raise ValueError("degree must be 0, 1 or 2")
        rows = self.space.dim if self.degree == 1 else 1
        if self.coeffs.shape != (rows, n):
            raise DimensionError(f"expected a {rows}x{n} coefficient matrix")

    def component(self, i: int) -> AVElement:
        if self.degree == 1:
            return AVElement(self.space, 1, self.coeffs.col(i))
        return AVElement(self.space, self.degree, self.coeffs[0, i])

    def __add__(self, other: "GradedLieElement") -> "GradedLieElement":
        if (other.tag, other.degree) != (self.tag, self.degree):
            raise ValueError("can only add elements of the same tag and degree")
        return GradedLieElement(self.space, self.tag, self.degree, self.coeffs + other.coeffs)

    def __mul__(self, c) -> "GradedLieElement":
        return GradedLieElement(self.space, self.tag, self.degree, self.coeffs * c)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, GradedLieElement):
            return NotImplemented
        return (self.tag, self.degree) == (other.tag, other.degree) and self.coeffs == other.coeffs

    def is_zero(self) -> bool:
        return self.coeffs.is_zero()


def zero_element(space: SymplecticSpace, tag: str, degree: int) -> GradedLieElement:
    rows = space.dim if degree == 1 else 1
    return GradedLieElement(space, tag, degree, Mat.zeros(rows, lie_dim(tag), space.backend))


def pure_tensor(space: SymplecticSpace, tag: str, i: int, a: AVElement) -> GradedLieElement:
    """``b_i (x) a`` for the i-th basis element of g."""
    n = lie_dim(tag)
    if a.degree == 1:
        cols = [a.value if j == i else Mat.zeros(space.dim, 1, space.backend) for j in range(n)]
        from .numkernel import hstack

        return GradedLieElement(space, tag, 1, hstack(cols))
    row = [a.value if j == i else 0 for j in range(n)]
    return GradedLieElement(space, tag, a.degree, Mat.row(row, space.backend if space.backend != EXACT else None))


def l_bracket(x: GradedLieElement, y: GradedLieElement) -> GradedLieElement:
    """``[b_i (x) a, b_j (x) b] = [b_i, b_j] (x) ab`` extended bilinearly."""
    if x.tag != y.tag:
        raise PreconditionError("cannot bracket elements of different Lie algebras")
    d = x.degree + y.degree
    if d > 2:
        raise PreconditionError("bracket lands above degree 2")
    space, tag = x.space, x.tag
    n = lie_dim(tag)
    C = STRUCTURE[tag]
    out = zero_element(space, tag, d)
    comps_x = [x.component(i) for i in range(n)]
    comps_y = [y.component(j) for j in range(n)]
    for i, j in product(range(n), repeat=2):
        coeff = C[i][j]
        if not any(coeff) or comps_x[i].is_zero() or comps_y[j].is_zero():
            continue
        ab = av_product(comps_x[i], comps_y[j])
        for l in range(n):
            if coeff[l]:
                out = out + pure_tensor(space, tag, l, ab.scale(coeff[l]))
    return out


def yoneda_square(gamma: GradedLieElement) -> GradedLieElement:
    """``1/2 [gamma, gamma]`` for a degree-1 element."""
    if gamma.degree != 1:
        raise PreconditionError("the Yoneda square is defined on degree 1")
    return l_bracket(gamma, gamma) * Fraction(1, 2)


# --- identification with Hom(W*, V) ----------------------------------------

def from_moment_point(a, tag: str = SL2) -> GradedLieElement:
    """The degree-1 element ``E (x) A_E + F (x) A_F + H (x) A_H``."""
    A = a.A
    if tag == GL2:
        from .numkernel import hstack

        A = hstack([A, Mat.zeros(A.rows, 1, A.backend)])
    return GradedLieElement(a.space, tag, 1, A)


def to_moment_point(gamma: GradedLieElement):
    from .momentgeo import MomentPoint

    if gamma.tag != SL2 or gamma.degree != 1:
        raise PreconditionError("only degree-1 sl_2 elements are moment points")
    return MomentPoint(gamma.space, gamma.coeffs)


def square_as_vector(gamma: GradedLieElement) -> Mat:
    """The Yoneda square of ``gamma`` as a column in the basis of g."""
    return yoneda_square(gamma).coeffs.T


def gl_moment(space: SymplecticSpace, A4: Mat) -> Mat:
    """Moment map of gl_2 on ``gl_2 (x) V``, a column in the basis (E, F, H, I)."""
    return square_as_vector(GradedLieElement(space, GL2, 1, A4))


def yoneda_scalar() -> Fraction:
    """Ratio ``Q / Yoneda square`` at ``E (x) e_0 + F (x) e_1`` in k = 1 (it is 1)."""
    from .momentgeo import MomentPoint, moment_Q

    space = SymplecticSpace(1)
    a = MomentPoint(space, Mat([[1, 0, 0], [0, 1, 0]]))
    q = moment_Q(a)[2, 0]
    y = square_as_vector(from_moment_point(a))[2, 0]
    return Fraction(q) / y


# --- exhaustive Jacobi check -----------------------------------------------

def lie_basis(space: SymplecticSpace, tag: str) -> list[GradedLieElement]:
    out = []
    for d in (0, 1, 2):
        for a in av_basis(space, d):
            for i in range(lie_dim(tag)):
                out.append(pure_tensor(space, tag, i, a))
    return out


def jacobi_check(space: SymplecticSpace, tag: str) -> dict:
    """Graded Jacobi ``[x,[y,z]] = [[x,y],z] + (-1)^{|x||y|} [y,[x,z]]`` and graded
    antisymmetry on every basis triple with total degree at most 2."""
    basis = lie_basis(space, tag)
    failures = []
    for x, y in product(basis, repeat=2):
        if x.degree + y.degree > 2:
            continue
        sign = -1 if x.degree * y.degree % 2 else 1
        if not l_bracket(x, y) == l_bracket(y, x) * (-sign):
            failures.append({"check": "antisymmetry", "degrees": [x.degree, y.degree]})
    cache = {}

    def br(i, j):
        key = (i, j)
        if key not in cache:
            cache[key] = l_bracket(basis[i], basis[j])
        return cache[key]

    for i, j, l in product(range(len(basis)), repeat=3):
        x, y, z = basis[i], basis[j], basis[l]
        if x.degree + y.degree + z.degree > 2:
            continue
        sign = -1 if x.degree * y.degree % 2 else 1
        lhs = l_bracket(x, br(j, l))
        rhs = l_bracket(br(i, j), z) + l_bracket(y, br(i, l)) * sign
        if not lhs == rhs:
            failures.append({"check": "jacobi", "triple": [i, j, l]})
    return {"suite": "jacobi", "tag": tag, "k": space.k, "passed": not failures, "failures": failures}
