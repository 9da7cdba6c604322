"""Seeded property suites driven by ``nilorbit verify``.

Each suite checks one trial at a time: it takes ``(k, seed, height, backend)``
and returns the list of violated properties, so an empty list is a pass.
Trial ``t`` of a run with seed ``s`` uses the seed ``s ^ t``, which means any
failure can be replayed on its own.
"""
from __future__ import annotations

import random
from fractions import Fraction
from typing import Callable

from .errors import NilorbitError
from .momentgeo import (
    MomentPoint,
    degeneration_witness,
    equivariance_check,
    is_closed_orbit,
    moment_mu,
    moment_Q,
    random_moment_point,
    sample_zero_Q,
)
from .numkernel import EXACT, FLOAT, Mat, hstack, random_rational_matrix, rank
from .redmodel import (
    absorbing_isometry,
    enumerate_fiber,
    gl_factorization_check,
    iota_action,
    kk_pullback_check,
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
    PPrimePoint,
)
from .gradedlie import GL2, from_moment_point, square_as_vector
from .so3w import OrthogonalElement, so_element_from_adjoint, tau_reflection
from .sympcore import SymplecticSpace, random_symplectic, sample_nilpotent, stratum_of

EXPECTED_STABILIZER = {0: 3, 1: 1, 2: 0, 3: 0}


def _random_rotation(rng: random.Random, height: int) -> OrthogonalElement:
    while True:
        m = random_rational_matrix(2, 2, rng, height)
        if m.det() != 0:
            return so_element_from_adjoint(m)


def _stratum(k: int, rng: random.Random) -> int:
    return rng.randint(0, min(3, k))


def fibers(k, seed, height, backend):
    rng = random.Random(seed)
    space = SymplecticSpace(k)
    p = _stratum(k, rng)
    B = sample_nilpotent(space, p, rng, height)
    fib = enumerate_fiber(B)
    out = []
    if len(fib) != (2 if p == 3 else 1):
        out.append(f"rank {p}: fiber has {len(fib)} points")
    if len(set(fib)) != len(fib):
        out.append(f"rank {p}: fiber points coincide")
    for x in fib:
        a = x.representative
        if x.B != B or not moment_Q(a).is_zero() or not moment_mu(a) == B.B:
            out.append(f"rank {p}: fiber point does not lie over B")
    return out


def iota(k, seed, height, backend):
    rng = random.Random(seed)
    space = SymplecticSpace(k)
    p = _stratum(k, rng)
    fib = enumerate_fiber(sample_nilpotent(space, p, rng, height))
    out = []
    for x in fib:
        y = iota_action(x)
        if iota_action(y) != x:
            out.append(f"rank {p}: iota is not an involution")
        if y.B != x.B:
            out.append(f"rank {p}: iota moved B")
        if (y == x) != (p <= 2):
            out.append(f"rank {p}: iota fixed-point behaviour is wrong")
        if normalize(y.representative) != y:
            out.append(f"rank {p}: iota disagrees with -id on representatives")
    if p == 3 and {iota_action(x) for x in fib} != set(fib):
        out.append("iota does not swap the two rank-3 sheets")
    return out


def closed_orbits(k, seed, height, backend):
    rng = random.Random(seed)
    space = SymplecticSpace(k)
    p = _stratum(k, rng)
    closed = None if p in (0, 3) else rng.choice([True, False])
    a = sample_zero_Q(space, p, rng, height, closed=closed)
    out = []
    mu = moment_mu(a)
    if rank(hstack([a.A, mu])) != rank(a.A):
        out.append("Im mu(a) is not inside Im a")
    is_closed = is_closed_orbit(a)
    w = degeneration_witness(a)
    if (w is None) != is_closed:
        out.append(f"rank {p}: witness disagrees with the rank criterion")
    if is_closed:
        if stratum_of(space, mu) != p:
            out.append(f"rank {p}: closed point with mu outside N^{p}")
        if stabilizer_dim(a) != EXPECTED_STABILIZER[p]:
            out.append(f"rank {p}: stabilizer dimension {stabilizer_dim(a)}")
    if w is not None:
        lim = w.limit
        if not moment_mu(lim) == mu:
            out.append("witness limit changes mu")
        if lim.rank() >= a.rank():
            out.append("witness limit does not drop rank")
        if not moment_Q(lim).is_zero():
            out.append("witness limit leaves Q^{-1}(0)")
        lam = Fraction(rng.randint(1, height), rng.randint(1, height))
        if not moment_mu(w.at(lam)) == mu:
            out.append("witness family changes mu")
    return out


def equivariance(k, seed, height, backend):
    rng = random.Random(seed)
    space = SymplecticSpace(k, backend)
    g = _random_rotation(rng, height)
    # small transvections keep the float check well conditioned
    steps, h = (4, 3) if backend == EXACT else (2, 1)
    s = random_symplectic(space, rng.getrandbits(32), steps, h)
    a = random_moment_point(space, rng, height)
    rep = equivariance_check(a, g, s)
    out = list(rep["failures"])
    if backend == EXACT:
        p = _stratum(k, rng)
        b = sample_zero_Q(space, p, rng, height, closed=True if p else None)
        x = normalize(b)
        if normalize(b.act_orthogonal(g)) != x:
            out.append(f"rank {p}: normalize not SO(W)-invariant")
        flipped = normalize(b.act_orthogonal(g @ tau_reflection()))
        if p == 3 and (flipped.B != x.B or flipped.orientation != -x.orientation):
            out.append("det -1 isometry does not flip the rank-3 orientation")
        if p <= 2:
            r = g @ tau_reflection()
            fixer = absorbing_isometry(b, r)
            if fixer.det_sign != 1 or not b.act_orthogonal(fixer).A == b.act_orthogonal(r).A:
                out.append(f"rank {p}: det -1 isometry not absorbed")
            if flipped != x:
                out.append(f"rank {p}: det -1 isometry changes the point")
    return out


def kk_pullback(k, seed, height, backend):
    if k < 3:
        return []
    rng = random.Random(seed)
    if backend == FLOAT:
        # a bounded symplectic image of the coordinate 3-frame stays well conditioned
        space = SymplecticSpace(k)
        frame = Mat([[int(r == c) for c in range(3)] for r in range(space.dim)])
        s = random_symplectic(space, rng.getrandbits(32), 2, 1)
        a = MomentPoint(space, s @ frame).act_orthogonal(_random_rotation(rng, 2))
        return _kk_float(MomentPoint(SymplecticSpace(k, FLOAT), a.A.to_float()), rng)
    a = sample_zero_Q(SymplecticSpace(k), 3, rng, height)
    rep = kk_pullback_check(a, pairs=5, seed=rng.getrandbits(32), height=3)
    return [f["detail"] for f in rep["failures"]]


def _kk_float(a, rng):
    from .momentgeo import ambient_form, dmu, tangent_kernel
    from .redmodel import kk_scalar
    from .sympcore import KKForm

    c = float(kk_scalar())
    ker = tangent_kernel(a)
    kk = KKForm(a.space, moment_mu(a))
    out = []
    for _ in range(5):
        X = sum((Z * float(rng.randint(-3, 3)) for Z in ker), Mat.zeros(a.space.dim, 3, FLOAT))
        Y = sum((Z * float(rng.randint(-3, 3)) for Z in ker), Mat.zeros(a.space.dim, 3, FLOAT))
        lhs = ambient_form(X, Y, a.space)
        rhs = c * kk(dmu(a, X), dmu(a, Y))
        if abs(lhs - rhs) > 1e-6 * max(1.0, abs(lhs), abs(rhs)):
            out.append(f"ambient {lhs} != {rhs}")
    return out


def rho_cover(k, seed, height, backend):
    if k < 2:
        return []
    rng = random.Random(seed)
    vp = random_transversal(k, rng, height)
    pp = random_pprime(v_prime_space(k), rng, height)
    x = rho_map(vp, pp)
    out = []
    if rho_map(vp, pprime_iota(pp)) != iota_action(x):
        out.append("rho(vp, tau pp) != iota rho(vp, pp)")
    if x.p != 3:
        return out
    pre = rho_preimages(x)
    if len(pre) != 2:
        out.append(f"{len(pre)} preimages")
    (v1, q1), (v2, q2) = pre
    if v1 == v2 and same_pprime_class(q1, q2):
        out.append("the two preimages coincide")
    for v, q in pre:
        if rho_map(v, q) != x:
            out.append("preimage does not map back to x")
    if not any(v == vp and same_pprime_class(q, pp) for v, q in pre):
        out.append("input pair missing from the preimages")
    return out


def pprime(k, seed, height, backend):
    if k < 2:
        return []
    rng = random.Random(seed)
    sp = v_prime_space(k)
    pp = random_pprime(sp, rng, height)
    M = pprime_reduce(pp)
    out = []
    if rank(M) > 1 or M.trace() != 0 or not (M @ M).is_zero():
        out.append("reduced matrix is not a rank <= 1 square-zero traceless map")
    for lam in (2, 3, -5):
        scaled = PPrimePoint(sp, pp.vprime * lam, pp.wprime / lam)
        if pprime_reduce(scaled) != M:
            out.append(f"not invariant under scaling by {lam}")
    if pprime_iota(pprime_iota(pp)) != pp:
        out.append("pprime_iota is not an involution")
    if sp.k >= 2 and same_pprime_class(pprime_iota(pp), pp):
        out.append("iota fixes a generic class")
    c = Fraction(rng.randint(1, height), rng.randint(1, height))
    prop = PPrimePoint(sp, pp.vprime, pp.vprime * c)
    if not same_pprime_class(pprime_iota(prop), prop):
        out.append("iota moves a proportional pair")
    if not pprime_reduce(PPrimePoint(sp, pp.vprime, pp.vprime * 0)).is_zero():
        out.append("degenerate pair does not reduce to the vertex")
    return out


def yoneda(k, seed, height, backend):
    rng = random.Random(seed)
    space = SymplecticSpace(k, backend)
    a = random_moment_point(space, rng, height)
    gamma = from_moment_point(a)
    out = []
    if not square_as_vector(gamma) == moment_Q(a):
        out.append("Yoneda square differs from Q")
    lam = Fraction(rng.randint(-height, height) or 1, rng.randint(1, height))
    if backend == FLOAT:
        lam = float(lam)
    if not square_as_vector(gamma * lam) == square_as_vector(gamma) * (lam * lam):
        out.append("Yoneda square is not quadratic")
    v = random_rational_matrix(space.dim, 1, rng, height, backend=backend)
    sq = square_as_vector(from_moment_point(a, GL2) + _central(space, v))
    if sq[3, 0] != 0 or not sq[0:3, :] == moment_Q(a):
        out.append("gl_2 square does not land in the traceless part")
    return out


def _central(space, v):
    from .gradedlie import GradedLieElement

    cols = [Mat.zeros(space.dim, 1, space.backend)] * 3 + [v]
    return GradedLieElement(space, GL2, 1, hstack(cols))


def factorization(k, seed, height, backend):
    rep = gl_factorization_check(k, seed, 1, height)
    return [f["detail"] for f in rep["failures"]]


SUITES: dict[str, Callable] = {
    "fibers": fibers,
    "iota": iota,
    "closed-orbits": closed_orbits,
    "equivariance": equivariance,
    "kk-pullback": kk_pullback,
    "rho-cover": rho_cover,
    "pprime": pprime,
    "yoneda": yoneda,
    "factorization": factorization,
}

FLOAT_SUITES = frozenset({"equivariance", "kk-pullback", "yoneda"})


def run_suite(name: str, k: int, trials: int, seed: int, height: int = 10,
              backend: str = EXACT) -> dict:
    """Run ``trials`` trials of one suite and assemble the report."""
    fn = SUITES[name]
    failures = []
    for t in range(trials):
        s = seed ^ t
        try:
            details = fn(k, s, height, backend)
        except NilorbitError as exc:
            details = [f"{type(exc).__name__}: {exc}"]
        for d in details:
            failures.append({"trial": t, "seed": str(s), "detail": f"{name}: {d}"})
    return {"suite": name, "k": k, "trials": trials, "failures": failures}


def run_all(k: int, trials: int, seed: int, height: int = 10, backend: str = EXACT) -> dict:
    parts = [run_suite(n, k, trials, seed, height, backend) for n in SUITES]
    failures = sorted((f for p in parts for f in p["failures"]), key=lambda f: (f["trial"], f["detail"]))
    return {
        "suite": "all",
        "k": k,
        "trials": trials,
        "failures": failures,
        "suites": {p["suite"]: len(p["failures"]) for p in parts},
    }
