"""Dense matrices over two scalar backends with the linear algebra this package needs.

The ``exact`` backend stores :class:`fractions.Fraction` entries (always in
lowest terms) and answers rank, kernel and solve questions literally. The
``float`` backend stores 64-bit floats and compares with the module tolerance
``|x - y| <= tol * max(1, |x|, |y|)``.

Exact rank and determinant use fraction-free (Bareiss) elimination on rows
scaled to integers. Kernels, solutions and echelon bases use Gauss-Jordan
reduction.
"""
from __future__ import annotations

import contextlib
import math
import random
from fractions import Fraction
from numbers import Integral, Rational

import numpy as np

from .errors import BackendMismatchError, DimensionError

EXACT = "exact"
FLOAT = "float"
BACKENDS = (EXACT, FLOAT)

_tolerance = 1e-9


def get_tolerance() -> float:
    return _tolerance


def set_tolerance(tol: float) -> None:
    global _tolerance
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    _tolerance = float(tol)


@contextlib.contextmanager
def tolerance(tol: float):
    """Temporarily override the float tolerance."""
    old = _tolerance
    set_tolerance(tol)
    try:
        yield
    finally:
        set_tolerance(old)


# --- scalars --------------------------------------------------------------

def to_exact(x) -> Fraction:
    if isinstance(x, Fraction):
        if type(x.numerator) is int and type(x.denominator) is int:
            return x
        return Fraction(int(x.numerator), int(x.denominator))
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, (Integral, np.integer)):
        return Fraction(int(x))
    if isinstance(x, Rational):
        return Fraction(int(x.numerator), int(x.denominator))
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot use {type(x).__name__} {x!r} as an exact scalar")


def to_float(x) -> float:
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, str):
        return float(Fraction(x.strip()))
    return float(x)


def scalar_backend(x) -> str | None:
    """Backend implied by a scalar; ``None`` for ints, which fit either."""
    if isinstance(x, (float, np.floating)):
        return FLOAT
    if isinstance(x, (Fraction, str)):
        return EXACT
    return None


def is_zero_scalar(x, backend: str = EXACT) -> bool:
    if backend == EXACT:
        return x == 0
    return abs(x) <= _tolerance


def scalar_eq(x, y, backend: str = EXACT) -> bool:
    if backend == EXACT:
        return x == y
    return abs(x - y) <= _tolerance * max(1.0, abs(x), abs(y))


# --- matrices -------------------------------------------------------------

class Mat:
    """Immutable dense matrix tagged with its scalar backend."""

    __slots__ = ("_a", "backend")

    def __init__(self, data, backend: str | None = None):
        if isinstance(data, Mat):
            if backend is None or backend == data.backend:
                self._a, self.backend = data._a, data.backend
                return
            data = data._a.tolist()
        rows = [list(r) for r in (data.tolist() if isinstance(data, np.ndarray) else data)]
        if not rows or not rows[0]:
            raise DimensionError("matrices must have at least one row and one column")
        ncols = len(rows[0])
        if any(len(r) != ncols for r in rows):
            raise DimensionError("ragged rows")
        flat = [x for r in rows for x in r]
        tags = {scalar_backend(x) for x in flat} - {None}
        if len(tags) > 1:
            raise BackendMismatchError("matrix mixes exact and float entries")
        if backend is None:
            backend = tags.pop() if tags else EXACT
        elif tags and tags != {backend}:
            raise BackendMismatchError(f"entries do not match backend {backend!r}")
        if backend == EXACT:
            arr = np.empty((len(rows), ncols), dtype=object)
            arr[:] = [[to_exact(x) for x in r] for r in rows]
        elif backend == FLOAT:
            arr = np.array([[to_float(x) for x in r] for r in rows], dtype=float)
        else:
            raise ValueError(f"unknown backend {backend!r}")
        arr.flags.writeable = False
        self._a = arr
        self.backend = backend

    @classmethod
    def _wrap(cls, arr: np.ndarray, backend: str) -> "Mat":
        m = object.__new__(cls)
        if arr.ndim != 2:
            arr = arr.reshape(-1, 1)
        arr.flags.writeable = False
        m._a = arr
        m.backend = backend
        return m

    # constructors
    @classmethod
    def zeros(cls, rows: int, cols: int, backend: str = EXACT) -> "Mat":
        if backend == EXACT:
            arr = np.empty((rows, cols), dtype=object)
            arr.fill(Fraction(0))
        else:
            arr = np.zeros((rows, cols))
        return cls._wrap(arr, backend)

    @classmethod
    def identity(cls, n: int, backend: str = EXACT) -> "Mat":
        arr = cls.zeros(n, n, backend)._a.copy()
        for i in range(n):
            arr[i, i] = Fraction(1) if backend == EXACT else 1.0
        return cls._wrap(arr, backend)

    @classmethod
    def column(cls, entries, backend: str | None = None) -> "Mat":
        return cls([[x] for x in entries], backend)

    @classmethod
    def row(cls, entries, backend: str | None = None) -> "Mat":
        return cls([list(entries)], backend)

    # shape and access
    @property
    def rows(self) -> int:
        return self._a.shape[0]

    @property
    def cols(self) -> int:
        return self._a.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self._a.shape

    @property
    def array(self) -> np.ndarray:
        """Read-only view of the underlying numpy array."""
        return self._a

    def __getitem__(self, key):
        out = self._a[key]
        if isinstance(out, np.ndarray):
            if out.ndim == 1:
                # a single row or column index keeps its orientation
                if isinstance(key, tuple) and len(key) == 2 and not isinstance(key[1], slice):
                    out = out.reshape(-1, 1)
                else:
                    out = out.reshape(1, -1)
            return Mat._wrap(out.copy(), self.backend)
        return out

    def col(self, j: int) -> "Mat":
        return Mat._wrap(self._a[:, j:j + 1].copy(), self.backend)

    def columns(self) -> list["Mat"]:
        return [self.col(j) for j in range(self.cols)]

    def tolist(self) -> list[list]:
        return self._a.tolist()

    def flat(self) -> list:
        """Entries in row-major order."""
        return self._a.ravel().tolist()

    @property
    def T(self) -> "Mat":
        return Mat._wrap(self._a.T.copy(), self.backend)

    def to_float(self) -> "Mat":
        if self.backend == FLOAT:
            return self
        return Mat._wrap(np.array(self._a, dtype=float), FLOAT)

    def to_backend(self, backend: str) -> "Mat":
        if backend == self.backend:
            return self
        if backend == FLOAT:
            return self.to_float()
        raise BackendMismatchError("float matrices cannot be promoted to exact")

    # arithmetic
    def _check(self, other: "Mat") -> None:
        if not isinstance(other, Mat):
            raise TypeError("expected a Mat")
        if other.backend != self.backend:
            raise BackendMismatchError(f"{self.backend} vs {other.backend}")

    def _scalar(self, c):
        if self.backend == EXACT:
            if scalar_backend(c) == FLOAT:
                raise BackendMismatchError("float scalar applied to an exact matrix")
            return to_exact(c)
        return to_float(c)

    def __matmul__(self, other: "Mat") -> "Mat":
        self._check(other)
        if self.cols != other.rows:
            raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
        out = self._a.dot(other._a)
        if self.backend == EXACT and out.dtype != object:
            out = out.astype(object)
        return Mat._wrap(out, self.backend)

    def __add__(self, other: "Mat") -> "Mat":
        self._check(other)
        if self.shape != other.shape:
            raise DimensionError(f"shape mismatch {self.shape} vs {other.shape}")
        return Mat._wrap(self._a + other._a, self.backend)

    def __sub__(self, other: "Mat") -> "Mat":
        self._check(other)
        if self.shape != other.shape:
            raise DimensionError(f"shape mismatch {self.shape} vs {other.shape}")
        return Mat._wrap(self._a - other._a, self.backend)

    def __neg__(self) -> "Mat":
        return Mat._wrap(-self._a, self.backend)

    def __mul__(self, c) -> "Mat":
        if isinstance(c, Mat):
            raise TypeError("use @ for matrix products")
        return Mat._wrap(self._a * self._scalar(c), self.backend)

    __rmul__ = __mul__

    def __truediv__(self, c) -> "Mat":
        c = self._scalar(c)
        if c == 0:
            raise ZeroDivisionError("division of a matrix by zero")
        if self.backend == EXACT:
            return Mat._wrap(self._a * (1 / c), self.backend)
        return Mat._wrap(self._a / c, self.backend)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Mat):
            return NotImplemented
        if self.shape != other.shape or self.backend != other.backend:
            return False
        if self.backend == EXACT:
            return bool(np.all(self._a == other._a))
        # one scale per matrix: entries that cancel to zero are judged
        # against the size of the data, not against their own size
        a, b = self._a, other._a
        scale = max(1.0, float(np.max(abs(a))), float(np.max(abs(b))))
        return bool(np.all(abs(a - b) <= _tolerance * scale))

    def __hash__(self):
        if self.backend != EXACT:
            raise TypeError("float matrices are unhashable")
        return hash((self.shape, tuple(self.flat())))

    def __repr__(self) -> str:
        body = "; ".join(", ".join(str(x) for x in r) for r in self.tolist())
        return f"Mat[{self.backend}]({self.rows}x{self.cols}: {body})"

    # predicates and reductions
    def is_zero(self) -> bool:
        if self.backend == EXACT:
            return all(x == 0 for x in self._a.flat)
        return bool(np.all(abs(self._a) <= _tolerance))

    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_symmetric(self) -> bool:
        return self.is_square() and self == self.T

    def trace(self):
        if not self.is_square():
            raise DimensionError("trace of a non-square matrix")
        return sum((self._a[i, i] for i in range(self.rows)), self._zero())

    def _zero(self):
        return Fraction(0) if self.backend == EXACT else 0.0

    def rank(self) -> int:
        return rank(self)

    def kernel_basis(self) -> list["Mat"]:
        return kernel_basis(self)

    def det(self):
        return det(self)

    def inverse(self) -> "Mat":
        return inverse(self)


def hstack(mats) -> Mat:
    mats = list(mats)
    backend = _common_backend(mats)
    return Mat._wrap(np.hstack([m._a for m in mats]), backend)


def vstack(mats) -> Mat:
    mats = list(mats)
    backend = _common_backend(mats)
    return Mat._wrap(np.vstack([m._a for m in mats]), backend)


def _common_backend(mats) -> str:
    if not mats:
        raise DimensionError("nothing to stack")
    backends = {m.backend for m in mats}
    if len(backends) != 1:
        raise BackendMismatchError("cannot stack matrices from different backends")
    return backends.pop()


def from_columns(cols) -> Mat:
    return hstack(cols)


# --- elimination ----------------------------------------------------------

def _integer_rows(m: Mat) -> list[list[int]]:
    """Scale each row by the lcm of its denominators (rank is unchanged)."""
    out = []
    for r in m.tolist():
        den = 1
        for x in r:
            den = den * x.denominator // math.gcd(den, x.denominator)
        out.append([int(x * den) for x in r])
    return out


def _bareiss(rows: list[list[int]]):
    """Fraction-free forward elimination in place.

    Returns ``(rank, pivots, swaps)``. Every intermediate entry is a minor of
    the input, so the integer divisions below are exact.
    """
    nr = len(rows)
    nc = len(rows[0]) if rows else 0
    r, prev, swaps = 0, 1, 0
    pivots = []
    for c in range(nc):
        if r == nr:
            break
        piv = next((i for i in range(r, nr) if rows[i][c]), None)
        if piv is None:
            continue
        if piv != r:
            rows[r], rows[piv] = rows[piv], rows[r]
            swaps += 1
        pr = rows[r]
        p = pr[c]
        for i in range(r + 1, nr):
            ri = rows[i]
            f = ri[c]
            for j in range(c + 1, nc):
                ri[j] = (p * ri[j] - f * pr[j]) // prev
            ri[c] = 0
        pivots.append(c)
        prev = p
        r += 1
    return r, pivots, swaps


def _float_echelon(a: np.ndarray):
    """Partial-pivot reduced row echelon form; returns (R, pivots)."""
    a = np.array(a, dtype=float)
    nr, nc = a.shape
    thresh = _tolerance * max(1.0, float(np.max(abs(a))) if a.size else 1.0)
    pivots = []
    r = 0
    for c in range(nc):
        if r == nr:
            break
        i = r + int(np.argmax(abs(a[r:, c])))
        if abs(a[i, c]) <= thresh:
            a[r:, c] = 0.0
            continue
        a[[r, i]] = a[[i, r]]
        a[r] /= a[r, c]
        for j in range(nr):
            if j != r and a[j, c] != 0.0:
                a[j] -= a[j, c] * a[r]
        pivots.append(c)
        r += 1
    return a, pivots


def _exact_rref(rows: list[list[Fraction]]):
    """Gauss-Jordan over Q in place; returns pivot columns."""
    nr = len(rows)
    nc = len(rows[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(nc):
        if r == nr:
            break
        piv = next((i for i in range(r, nr) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        pr = rows[r]
        inv = 1 / pr[c]
        if inv != 1:
            for j in range(c, nc):
                if pr[j]:
                    pr[j] *= inv
        for i in range(nr):
            if i == r:
                continue
            ri = rows[i]
            f = ri[c]
            if f:
                for j in range(c, nc):
                    if pr[j]:
                        ri[j] -= f * pr[j]
        pivots.append(c)
        r += 1
    return pivots


def rref(m: Mat) -> tuple[Mat, list[int]]:
    """Reduced row echelon form and pivot columns."""
    if m.backend == EXACT:
        rows = m.tolist()
        pivots = _exact_rref(rows)
        return Mat._wrap(_obj(rows), EXACT), pivots
    a, pivots = _float_echelon(m.array)
    return Mat._wrap(a, FLOAT), pivots


def _obj(rows) -> np.ndarray:
    arr = np.empty((len(rows), len(rows[0])), dtype=object)
    arr[:] = rows
    return arr


def rank(m: Mat) -> int:
    """Exact rank by Bareiss elimination, or numerical rank with pivot threshold."""
    if m.backend == EXACT:
        return _bareiss(_integer_rows(m))[0]
    return len(_float_echelon(m.array)[1])


def det(m: Mat):
    if not m.is_square():
        raise DimensionError("determinant of a non-square matrix")
    if m.backend == FLOAT:
        return float(np.linalg.det(m.array))
    rows = m.tolist()
    scale = Fraction(1)
    int_rows = []
    for r in rows:
        den = 1
        for x in r:
            den = den * x.denominator // math.gcd(den, x.denominator)
        scale *= den
        int_rows.append([int(x * den) for x in r])
    n = len(int_rows)
    rk, _, swaps = _bareiss(int_rows)
    if rk < n:
        return Fraction(0)
    d = Fraction(int_rows[n - 1][n - 1]) if n else Fraction(1)
    if swaps % 2:
        d = -d
    return d / scale


def kernel_basis(m: Mat) -> list[Mat]:
    """Column vectors spanning the null space; ``cols - rank`` of them."""
    R, pivots = rref(m)
    rows = R.tolist()
    free = [c for c in range(m.cols) if c not in set(pivots)]
    one = Fraction(1) if m.backend == EXACT else 1.0
    zero = one - one
    basis = []
    for f in free:
        x = [zero] * m.cols
        x[f] = one
        for i, pc in enumerate(pivots):
            x[pc] = -rows[i][f]
        basis.append(Mat.column(x, m.backend))
    return basis


def _as_column(b, backend: str) -> Mat:
    if isinstance(b, Mat):
        if b.backend != backend:
            raise BackendMismatchError(f"rhs is {b.backend}, matrix is {backend}")
        if b.cols != 1:
            b = Mat._wrap(b.array.reshape(-1, 1).copy(), backend)
        return b
    vals = list(b)
    tags = {scalar_backend(x) for x in vals} - {None}
    if tags and tags != {backend}:
        raise BackendMismatchError(f"rhs entries do not match backend {backend!r}")
    return Mat.column(vals, backend)


def solve(m: Mat, b) -> Mat | None:
    """Some ``x`` with ``m @ x == b``, or ``None`` when the system is inconsistent."""
    return LinearSolver(m).solve(b)


class LinearSolver:
    """Reusable solver for ``m @ x = b`` with many right-hand sides.

    Precomputes ``T`` with ``T @ m`` in reduced echelon form, so each solve is
    one matrix-vector product plus a consistency check.
    """

    def __init__(self, m: Mat):
        self.m = m
        n = m.rows
        aug = hstack([m, Mat.identity(n, m.backend)])
        R, pivots = rref(aug)
        self.pivots = [p for p in pivots if p < m.cols]
        self.rank = len(self.pivots)
        self._T = R[:, m.cols:]

    def solve(self, b) -> Mat | None:
        b = _as_column(b, self.m.backend)
        if b.rows != self.m.rows:
            raise DimensionError(f"rhs has {b.rows} rows, matrix has {self.m.rows}")
        y = (self._T @ b).flat()
        backend = self.m.backend
        if backend == EXACT and any(y[i] != 0 for i in range(self.rank, len(y))):
            return None
        zero = Fraction(0) if backend == EXACT else 0.0
        x = [zero] * self.m.cols
        for i, pc in enumerate(self.pivots):
            x[pc] = y[i]
        sol = Mat.column(x, backend)
        if backend == FLOAT:
            resid = float(np.max(abs((self.m @ sol - b).array)))
            scale = max(1.0, float(np.max(abs(b.array))),
                        float(np.max(abs(self.m.array))) * float(np.max(abs(sol.array))))
            if resid > _tolerance * scale:
                return None
        return sol


def inverse(m: Mat) -> Mat:
    if not m.is_square():
        raise DimensionError("inverse of a non-square matrix")
    s = LinearSolver(m)
    if s.rank < m.rows:
        raise ZeroDivisionError("matrix is singular")
    return s._T


def column_echelon(m: Mat) -> tuple[Mat, list[int]]:
    """Reduced column echelon basis of the column space, with its pivot rows.

    The returned ``R`` has ``R[pivots, :]`` equal to the identity, which makes
    it a canonical frame of the image independent of how ``m`` was produced.
    ``R`` is ``None`` for the zero matrix.
    """
    R, pivots = rref(m.T)
    r = len(pivots)
    if r == 0:
        return None, []
    return R[:r, :].T, pivots


def image_basis(m: Mat) -> list[Mat]:
    R, pivots = column_echelon(m)
    return [] if R is None else R.columns()


def is_independent(vectors) -> bool:
    vectors = list(vectors)
    if not vectors:
        return True
    return rank(hstack(vectors)) == len(vectors)


# --- sampling -------------------------------------------------------------

def random_fraction(rng: random.Random, height: int) -> Fraction:
    return Fraction(rng.randint(-height, height), rng.randint(1, height))


def random_rational_matrix(rows: int, cols: int, seed, height: int = 10, *,
                           nonzero: bool = False, backend: str = EXACT) -> Mat:
    """Deterministic random matrix with entries ``p/q``, ``|p| <= height``, ``1 <= q <= height``.

    With ``nonzero=True`` the zero matrix is rejected and redrawn.
    """
    if height < 1:
        raise ValueError("height must be at least 1")
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    while True:
        data = [[random_fraction(rng, height) for _ in range(cols)] for _ in range(rows)]
        m = Mat(data, EXACT)
        if not (nonzero and m.is_zero()):
            return m.to_backend(backend)


def random_integer_vector(rng: random.Random, n: int, height: int) -> list[int]:
    return [rng.randint(-height, height) for _ in range(n)]


# --- serialization --------------------------------------------------------

def _enc(x, backend: str):
    if backend == EXACT:
        return f"{x.numerator}/{x.denominator}"
    return float(x)


def mat_to_json(m: Mat) -> dict:
    return {
        "backend": m.backend,
        "rows": m.rows,
        "cols": m.cols,
        "data": [[_enc(x, m.backend) for x in r] for r in m.tolist()],
    }


def mat_from_json(obj: dict) -> Mat:
    backend = obj["backend"]
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}")
    data = obj["data"]
    if len(data) != obj["rows"] or any(len(r) != obj["cols"] for r in data):
        raise DimensionError("matrix JSON shape does not match rows/cols")
    if backend == EXACT:
        if any(isinstance(x, float) for r in data for x in r):
            raise BackendMismatchError("exact matrix JSON must encode entries as strings")
        data = [[to_exact(x) for x in r] for r in data]
    return Mat(data, backend)


Mat.to_json = mat_to_json
Mat.from_json = staticmethod(mat_from_json)
