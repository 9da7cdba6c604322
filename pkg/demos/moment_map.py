"""The PGL(2) moment map on W (x) V, its closed orbits and the size of the reduction."""
from nilorbit.gradedlie import from_moment_point, square_as_vector
from nilorbit.momentgeo import (
    closed_limit,
    degeneration_witness,
    is_closed_orbit,
    moment_mu,
    moment_Q,
    random_moment_point,
    reduction_dimension,
    sample_zero_Q,
)
from nilorbit.sympcore import SymplecticSpace

space = SymplecticSpace(3)
a = random_moment_point(space, seed=4, height=5)
print("Q(a)                 =", [str(v) for v in moment_Q(a).flat()])
print("half bracket square  =", [str(v) for v in square_as_vector(from_moment_point(a)).flat()])

# A rank-2 point whose image carries a radical: not closed, and a torus drives it down one rank.
b = sample_zero_Q(space, 2, seed=7, closed=False)
w = degeneration_witness(b)
print("closed orbit:", is_closed_orbit(b), "| limit rank:", w.limit.rank(),
      "| mu preserved:", moment_mu(w.limit) == moment_mu(b))
lim, steps = closed_limit(b)
print(f"closed limit reached after {steps} step(s), rank {lim.rank()}")

for k in range(1, 5):
    info = reduction_dimension(SymplecticSpace(k), seed=k)
    print(f"k={k}: dim ker dQ = {info['ker_dQ']}, reduction dim = {info['dim']}, 6k-6 = {6 * k - 6}")
