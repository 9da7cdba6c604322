"""Fibers of the moment map over rank-3 points, the flop involution and the explicit chart."""
import random

from nilorbit.redmodel import (
    enumerate_fiber,
    iota_action,
    kk_pullback_check,
    kk_scalar,
    pprime_iota,
    random_pprime,
    random_transversal,
    rho_map,
    rho_preimages,
    v_prime_space,
)
from nilorbit.sympcore import SymplecticSpace, sample_nilpotent

space = SymplecticSpace(3)
for p in range(4):
    fib = enumerate_fiber(sample_nilpotent(space, p, seed=11))
    print(f"rank {p}: {len(fib)} fiber point(s), orientations {[x.orientation for x in fib]}")

fib = enumerate_fiber(sample_nilpotent(space, 3, seed=11))
print("-id swaps the two rank-3 sheets:", iota_action(fib[0]) == fib[1])

report = kk_pullback_check(fib[0].representative, pairs=10, seed=0)
print(f"ambient form = {kk_scalar()} x KK form on 10 tangent pairs:", not report["failures"])

rng = random.Random(3)
vp = random_transversal(3, rng, 4)
pp = random_pprime(v_prime_space(3), rng, 4)
x = rho_map(vp, pp)
print("chart image rank", x.p, "| preimages:", len(rho_preimages(x)),
      "| swapping the pair equals -id downstairs:", rho_map(vp, pprime_iota(pp)) == iota_action(x))
