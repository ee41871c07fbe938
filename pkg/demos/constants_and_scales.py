"""Print the closed-form constants and the natural scales of the model.

The shape of the story: a single heavy-tailed bump min(|x|^-alpha, 1) summed
over unit-rate Poisson points produces an annealed partition function whose
log expands as

    -a1 t^{d/alpha} + a2 t^{(d - 2 + alpha) / (2 alpha)} (1 + o(1)),

valid throughout d < alpha < d + 2.  Everything downstream (localization
radius, well curvature, spectral gap) is a function of the same two Gamma
integrals, so this script is the one-stop sanity table.
"""

import numpy as np

from fklab import (
    ModelParams,
    constants,
    h_t,
    nu_coordinate_variance,
    scale_r,
    spectral_gap,
)


def table(d, alphas):
    print(f"d = {d}  (regime requires {d} < alpha < {d + 2})")
    head = f"{'alpha':>6} {'a1':>12} {'a2':>12} {'C':>12} {'l1':>12} {'l2':>12}"
    print(head)
    for a in alphas:
        c = constants(ModelParams(d=d, alpha=a, t=1.0))
        print(f"{a:6.2f} {c.a1:12.6f} {c.a2:12.6f} {c.C:12.6f} "
              f"{c.l1:12.4f} {c.l2:12.4f}")
    print()


def scales(d, alpha):
    print(f"time scales at d = {d}, alpha = {alpha}")
    print(f"{'t':>10} {'h_t':>12} {'r(t)':>10} {'gap*t^(..)':>12} {'nu var':>10}")
    for t in (1e2, 1e4, 1e6):
        p = ModelParams(d=d, alpha=alpha, t=t)
        # the gap of the rescaled well is t-free: theta = sqrt(2C)
        print(f"{t:10.0e} {h_t(p):12.4e} {scale_r(p):10.3f} "
              f"{spectral_gap(p):12.6f} {nu_coordinate_variance(p):10.6f}")
    print()
    p = ModelParams(d=d, alpha=alpha, t=1e4)
    r = scale_r(p)
    print(f"at t = 1e4 the walk lives in a window of radius ~ {r:.1f}")
    print(f"while the tilted point cloud clears a hole of radius ~ {1e2:.0f}"
          f" (= sqrt(t)); the separation of those scales is the whole game")
    print()


def main():
    np.set_printoptions(precision=6)
    table(1, (1.25, 1.5, 2.0, 2.5, 2.9))
    table(2, (2.25, 2.5, 3.0, 3.5, 3.9))
    scales(1, 2.0)


if __name__ == "__main__":
    main()
