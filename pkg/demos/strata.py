"""Square-zero strata of sp(2k): sampling, orbit dimensions and the Lagrangian resolution."""
import random

from nilorbit.errors import StratumEmptyError
from nilorbit.numkernel import hstack, rank
from nilorbit.sympcore import (
    SymplecticSpace,
    lagrangian_resolve,
    orbit_dimension,
    orbit_dimension_formula,
    random_lagrangian,
    random_symmetric_of_rank,
    sample_nilpotent,
)

k = 3
space = SymplecticSpace(k)
print(f"dim V = {space.dim}, dim sp(V) = {space.sp_dim}")
for p in range(k + 2):
    try:
        B = sample_nilpotent(space, p, seed=p)
    except StratumEmptyError as exc:
        print(f"p={p}: {exc}")
        continue
    print(f"p={p}: orbit dim {orbit_dimension(space, B)} (formula {orbit_dimension_formula(k, p)})")

# Every square-zero B with image in a Lagrangian L and L in its kernel comes from a quadratic form on V/L.
rng = random.Random(1)
L = random_lagrangian(space, rng, 4)
x = lagrangian_resolve(space, L, random_symmetric_of_rank(k, 2, rng, 4))
print("resolved point lies in stratum", x.p,
      "| Im B in L:", rank(hstack([L, x.B])) == k, "| L in ker B:", (x.B @ L).is_zero())
