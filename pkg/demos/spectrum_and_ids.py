"""Smallest eigenvalues: the oscillator check and the Lifshitz tail.

Two views of the same operator -Delta/2 + V.  First the deterministic one:
for the limiting quadratic well V = C x^2 the ground energy is a2 = sqrt(C/2)
and the gap to the next level is sqrt(2C), both reproduced by the grid
eigensolver to a few parts in 1e4.  Then the random one: over Poisson
configurations lambda_1 concentrates near its Lifshitz edge, and the counting
function N(lambda) collapses like exp(-l1 lambda^{-d/(alpha-d)}).
"""

import numpy as np

from fklab import (
    GridField,
    ModelParams,
    assemble,
    constants,
    ids_estimate,
    make_grid,
    sample_homogeneous,
    smallest_eigs,
    spectral_gap,
    Box,
    config_potential_field,
)


def oscillator():
    p = ModelParams(d=1, alpha=2.0, t=1.0)
    c = constants(p)
    sigma = (8.0 * c.C) ** -0.25
    grid = make_grid(p, 10.0 * sigma, 0.01)
    x = grid.axis_nodes(0)
    res = smallest_eigs(assemble(GridField(grid, c.C * x ** 2)), k=2)
    print("harmonic control:")
    print(f"  lambda1 {res.lambda1:.8f}  vs  a2       {c.a2:.8f}")
    print(f"  gap     {res.lambda2 - res.lambda1:.8f}  vs  sqrt(2C) "
          f"{spectral_gap(p):.8f}")
    print()


def random_configs(n=6, seed=0):
    p = ModelParams(d=1, alpha=2.0, t=1.0)
    grid = make_grid(p, 20.0, 0.05)
    print("Poisson configurations on a box of size 40:")
    for rep in range(n):
        cfg = sample_homogeneous(Box.cube(1, 50.0), 1.0, seed, path=(rep,))
        V = config_potential_field(cfg.points, grid, p)
        # rough random wells: the second level can stall below 1e-10
        res = smallest_eigs(assemble(V), k=2, tol=1e-8)
        print(f"  replica {rep}: lambda1 {res.lambda1:8.4f}   lambda2 "
              f"{res.lambda2:8.4f}   residual {res.residual1:.1e}")
    print()


def lifshitz_curve(seed=0):
    p = ModelParams(d=1, alpha=1.5, t=1.0)
    target = p.d / (p.alpha - p.d)
    print(f"counting function at alpha = 1.5 (tail exponent d/(alpha-d) = "
          f"{target:.0f}):")
    grid = (1.3, 1.6, 2.0, 2.5, 3.0)
    curve = ids_estimate(grid, p, box_size=30.0, n_samples=400, seed=seed)
    for lam, nh, lo, hi in curve.rows():
        bar = "#" * int(60 * nh) if nh > 0 else "(none seen)"
        print(f"  lambda {lam:4.2f}   N_hat {nh:10.6f}   {bar}")
    print()
    print("the asymptotic window sits at far smaller lambda than a desk-size")
    print("Monte Carlo can reach: N(0.5) is already ~ exp(-l1 * 2^2) with")
    print(f"l1 = {constants(p).l1:.1f}, i.e. ~ 1e-40.  The run records store")
    print("this honestly instead of fitting noise.")


def main():
    np.set_printoptions(precision=5)
    oscillator()
    random_configs()
    lifshitz_curve()


if __name__ == "__main__":
    main()
