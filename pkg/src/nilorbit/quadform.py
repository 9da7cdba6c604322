"""Rational quadratic forms: diagonalization, isotropic vectors, hyperbolic frames.

Lifting a rational nilpotent back to a rational moment point requires an
isotropic vector of a ternary rational form, i.e. a solution of Legendre's
equation ``a x^2 + b y^2 + c z^2 = 0``. The solver here reduces to squarefree,
pairwise coprime coefficients, checks Legendre's residue conditions, and
finds a solution as a short vector of the lattice cut out by those residues.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

from sympy import factorint
from sympy.ntheory import sqrt_mod
from sympy.ntheory.modular import crt

from .errors import DimensionError
from .numkernel import EXACT, Mat, hstack, kernel_basis

# Coefficient box searched in the LLL-reduced lattice basis.
_SEARCH_RADIUS = 12


def rational_sqrt(q: Fraction) -> Fraction | None:
    """Exact square root of a nonnegative rational, or ``None``."""
    q = Fraction(q)
    if q < 0:
        return None
    n, d = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if n * n == q.numerator and d * d == q.denominator:
        return Fraction(n, d)
    return None


def diagonalize(G: Mat) -> tuple[Mat, list[Fraction]]:
    """Return ``(T, d)`` with ``T.T @ G @ T == diag(d)`` and ``T`` invertible."""
    if G.backend != EXACT or not G.is_symmetric():
        raise ValueError("diagonalize expects an exact symmetric matrix")
    n = G.rows
    g = [list(r) for r in G.tolist()]
    T = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]

    def add_col(dst, src, f):
        # e_dst <- e_dst + f e_src, applied as a congruence
        for r in range(n):
            T[r][dst] += f * T[r][src]
        for r in range(n):
            g[r][dst] += f * g[r][src]
        for c in range(n):
            g[dst][c] += f * g[src][c]

    def swap(i, j):
        for r in range(n):
            T[r][i], T[r][j] = T[r][j], T[r][i]
        g[i], g[j] = g[j], g[i]
        for r in range(n):
            g[r][i], g[r][j] = g[r][j], g[r][i]

    for i in range(n):
        if g[i][i] == 0:
            j = next((j for j in range(i + 1, n) if g[j][j] != 0), None)
            if j is not None:
                swap(i, j)
            else:
                j = next((j for j in range(i + 1, n) if g[i][j] != 0), None)
                if j is None:
                    continue
                add_col(i, j, Fraction(1))
        for j in range(i + 1, n):
            if g[i][j] != 0:
                add_col(j, i, -g[i][j] / g[i][i])
    return Mat(T, EXACT), [g[i][i] for i in range(n)]


def _squarefree(n: int) -> tuple[int, int]:
    """Write ``n = s**2 * q`` with ``q`` squarefree (sign kept in ``q``)."""
    if n == 0:
        raise ValueError("zero has no squarefree part")
    s, q = 1, (1 if n > 0 else -1)
    for p, e in factorint(abs(n)).items():
        # sympy may hand back gmpy2 integers; keep everything as int
        p, e = int(p), int(e)
        s *= p ** (e // 2)
        if e % 2:
            q *= p
    return s, q


def _root_mod(target: int, modulus: int) -> int | None:
    """A square root of ``target`` modulo a squarefree ``modulus``, or ``None``."""
    m = abs(modulus)
    if m == 1:
        return 0
    residues, moduli = [], []
    for p in sorted(int(q) for q in factorint(m)):
        r = sqrt_mod(target % p, p)
        if r is None:
            return None
        residues.append(int(r))
        moduli.append(p)
    return int(crt(moduli, residues)[0])


def _row_kernel(row: list[int]) -> list[list[int]]:
    """Integer basis of ``{x in Z^n : row . x = 0}`` via unimodular column ops."""
    n = len(row)
    r = list(row)
    U = [[int(i == j) for j in range(n)] for i in range(n)]
    for j in range(1, n):
        if r[j] == 0:
            continue
        g, s, t = _egcd(r[0], r[j])
        a0, aj = r[0] // g, r[j] // g
        for i in range(n):
            c0, cj = U[i][0], U[i][j]
            U[i][0] = s * c0 + t * cj
            U[i][j] = -aj * c0 + a0 * cj
        r[0], r[j] = g, 0
    return [[U[i][j] for i in range(n)] for j in range(1, n)]


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def _lll(basis: list[list[int]], weights: list[int]) -> list[list[int]]:
    """LLL reduction (delta = 3/4) for the diagonal positive form ``weights``."""
    def dot(u, v):
        return sum(w * x * y for w, x, y in zip(weights, u, v))

    b = [list(v) for v in basis]
    n = len(b)

    def gso():
        bstar, mu = [], [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            v = [Fraction(x) for x in b[i]]
            for j in range(i):
                mu[i][j] = Fraction(dot(b[i], bstar[j])) / dot(bstar[j], bstar[j])
                v = [x - mu[i][j] * y for x, y in zip(v, bstar[j])]
            bstar.append(v)
        return bstar, mu

    k = 1
    bstar, mu = gso()
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                b[k] = [x - q * y for x, y in zip(b[k], b[j])]
                bstar, mu = gso()
        lhs = dot(bstar[k], bstar[k])
        rhs = (Fraction(3, 4) - mu[k][k - 1] ** 2) * dot(bstar[k - 1], bstar[k - 1])
        if lhs >= rhs:
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            bstar, mu = gso()
            k = max(k - 1, 1)
    return b


def _legendre(a: int, b: int, c: int) -> list[int] | None:
    """Nonzero integer solution of ``a x^2 + b y^2 + c z^2 = 0``.

    ``a, b, c`` must be squarefree and pairwise coprime.
    """
    if (a > 0) == (b > 0) == (c > 0):
        return None
    # y = r_a z (mod a), z = r_b x (mod b), x = r_c y (mod c)
    ra = _root_mod(-c * pow(b, -1, abs(a)) if abs(a) > 1 else 0, a)
    rb = _root_mod(-a * pow(c, -1, abs(b)) if abs(b) > 1 else 0, b)
    rc = _root_mod(-b * pow(a, -1, abs(c)) if abs(c) > 1 else 0, c)
    if ra is None or rb is None or rc is None:
        return None
    moduli, rows = [], []
    for m, coeffs in ((a, (0, 1, -ra)), (b, (-rb, 0, 1)), (c, (1, -rc, 0))):
        if abs(m) > 1:
            moduli.append(abs(m))
            rows.append(coeffs)
    N = abs(a * b * c)
    if N == 1:
        congruence = (0, 0, 0)
    else:
        congruence = tuple(
            int(crt(moduli, [coeffs[i] % m for coeffs, m in zip(rows, moduli)])[0])
            for i in range(3)
        )
    lat = [v[:3] for v in _row_kernel(list(congruence) + [N])]
    lat = _lll(lat, [abs(a), abs(b), abs(c)])
    best = None
    for radius in range(1, _SEARCH_RADIUS + 1):
        for coeffs in itertools.product(range(-radius, radius + 1), repeat=3):
            if max(map(abs, coeffs)) != radius:
                continue
            v = [sum(ci * bi[j] for ci, bi in zip(coeffs, lat)) for j in range(3)]
            if any(v) and a * v[0] ** 2 + b * v[1] ** 2 + c * v[2] ** 2 == 0:
                norm = abs(a) * v[0] ** 2 + abs(b) * v[1] ** 2 + abs(c) * v[2] ** 2
                if best is None or (norm, v) < best:
                    best = (norm, v)
        if best is not None:
            return best[1]
    raise RuntimeError(f"lattice search failed for {a}, {b}, {c}")


def isotropic_vector(G: Mat) -> Mat | None:
    """A nonzero rational column ``x`` with ``x.T @ G @ x == 0``, or ``None``.

    ``G`` is a nondegenerate exact symmetric 3x3 matrix. ``None`` means the
    form is anisotropic over Q.
    """
    if G.shape != (3, 3):
        raise DimensionError("isotropic_vector handles ternary forms only")
    T, d = diagonalize(G)
    if any(x == 0 for x in d):
        # a degenerate form has a rational radical vector
        i = d.index(Fraction(0))
        return T.col(i)
    scale = [Fraction(1)] * 3
    coef = []
    for i, di in enumerate(d):
        # d_i t^2 = (n m) (t/m)^2, then pull the square part into the variable
        n_i = di.numerator * di.denominator
        scale[i] *= di.denominator
        s, q = _squarefree(n_i)
        scale[i] /= s
        coef.append(q)
    while True:
        g = math.gcd(math.gcd(coef[0], coef[1]), coef[2])
        if g > 1:
            coef = [x // g for x in coef]
            continue
        for i, j in ((0, 1), (0, 2), (1, 2)):
            g = math.gcd(coef[i], coef[j])
            if g > 1:
                k = 3 - i - j
                coef[i] //= g
                coef[j] //= g
                coef[k] *= g
                scale[i] /= g
                scale[j] /= g
                break
        else:
            break
    sol = _legendre(*coef)
    if sol is None:
        return None
    t = [scale[i] * sol[i] for i in range(3)]
    return T @ Mat.column(t, EXACT)


def hyperbolic_frame(G: Mat, x: Mat) -> tuple[Mat, Fraction]:
    """Frame ``T = [x | y | m]`` with ``T.T @ G @ T == [[0,1,0],[1,0,0],[0,0,gamma]]``.

    ``G`` is a nondegenerate symmetric 3x3 matrix and ``x`` an isotropic vector.
    """
    Gx = G @ x
    j = next(i for i in range(3) if Gx[i, 0] != 0)
    z = Mat.column([Fraction(int(i == j)) for i in range(3)], EXACT)
    z = z / Gx[j, 0]
    y = z - x * ((z.T @ G @ z)[0, 0] / 2)
    constraints = hstack([G @ x, G @ y]).T
    m = kernel_basis(constraints)[0]
    T = hstack([x, y, m])
    gamma = (m.T @ G @ m)[0, 0]
    return T, gamma
