"""Tour of the Riemann solvers: fans, sampling, and source corrections.

Run as: python3 demos/riemann_fans.py
"""

import numpy as np

from balancelaws import (
    euler_system, evaluate_generalized, make_time_source, sample_fan,
    scalar_system, solve_classical, solve_generalized,
)


def show_fan(label, fan):
    print(f"\n{label}")
    for w in fan.waves:
        speeds = (f"speed {w.lower_speed:+.4f}"
                  if w.lower_speed == w.upper_speed
                  else f"speeds [{w.lower_speed:+.4f}, {w.upper_speed:+.4f}]")
        print(f"  family {w.family}: {w.kind.value:<11} "
              f"strength {w.strength:+.4f}  {speeds}")


def main():
    burgers = scalar_system("burgers")
    show_fan("Burgers 1 -> 0 (classical shock, speed = mean of the states):",
             solve_classical(burgers, 0.0, 0.0, [1.0], [0.0], jump_factor=1.0))
    fan = solve_classical(burgers, 0.0, 0.0, [0.0], [1.0], jump_factor=1.0)
    show_fan("Burgers 0 -> 1 (rarefaction):", fan)
    print("  interior profile u(xi) = xi:",
          [float(sample_fan(fan, xi)[0]) for xi in (0.25, 0.5, 0.75)])

    euler = euler_system(1.4)
    sod = solve_classical(euler, 0.0, 0.0,
                          euler.from_primitive(1.0, 0.0, 1.0),
                          euler.from_primitive(0.125, 0.0, 0.1),
                          jump_factor=1.0)
    show_fan("Sod shock tube (rarefaction / contact / shock):", sod)
    _, v_star, p_star = euler.primitive(sod.states[1])
    print(f"  star region: p* = {p_star:.5f}, v* = {v_star:.5f}")
    print("  density profile along rays:")
    for xi in (-1.2, -0.5, 0.3, 1.0, 1.6, 2.0):
        rho = sample_fan(sod, xi)[0]
        print(f"    xi = {xi:+.1f}: rho = {rho:.4f}")

    # with a source, the first-order generalized solution drifts in time
    sourced = scalar_system("burgers", make_time_source("exp_decay"))
    gfan = solve_generalized(sourced, 0.0, 0.0, [1.0], [0.0], jump_factor=1.0)
    print("\nGeneralized solution of the same shock with g(t) = e^-t:")
    for t in (0.05, 0.1, 0.2):
        left = evaluate_generalized(gfan, t, -0.2)[0]
        right = evaluate_generalized(gfan, t, 0.2)[0]
        print(f"  t = {t:.2f}: left state {left:.4f}, right state {right:.4f}"
              f"  (both lifted by t * q)")


if __name__ == "__main__":
    main()
