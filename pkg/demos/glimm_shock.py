"""Random-choice evolution of a Burgers shock, checked against the exact
self-similar solution on a refinement ladder.

Run as: python3 demos/glimm_shock.py
"""

import numpy as np

from balancelaws import SchemeConfig, run, scalar_system
from balancelaws.systems import PhaseBox


def main():
    print("Burgers shock u_L = 1, u_R = 0 on [-1, 1], evolved to t = 0.4")
    print(f"{'r':>10} {'cells':>6} {'steps':>6} {'mean L1 error':>14}")
    for r in (1 / 25, 1 / 50, 1 / 100, 1 / 200):
        box = PhaseBox(np.array([0.5]), np.array([1.0]))
        system = scalar_system("burgers", None, phase_box=box)
        config = SchemeConfig.create(system, (-1.0, 1.0), r, 0.4,
                                     jump_factor=1.0, cfl_safety=0.75)
        u0 = lambda x: np.array([1.0 if x < 0.0 else 0.0])
        result = run(system, config, u0, keep_levels=True,
                     collect_diagnostics=False)
        errors = []
        for level in result.levels:
            t = level.k * config.s
            x_shock = 0.5 * t
            err = 0.0
            for h in sorted(level.states):
                xc = config.x_of(h)
                lo, hi = xc - config.r, xc + config.r
                left = min(max(x_shock - lo, 0.0), hi - lo)
                u = level.states[h][0]
                err += abs(u - 1.0) * left + abs(u) * (hi - lo - left)
            errors.append(err)
        cells = len(result.final_level.states)
        print(f"{r:>10.4f} {cells:>6d} {result.final_level.k:>6d} "
              f"{np.mean(errors):>14.6f}")
    print("\nThe sampled shock stays within one cell of the exact position;")
    print("averaging over the run shows the first-order decay.")


if __name__ == "__main__":
    main()
