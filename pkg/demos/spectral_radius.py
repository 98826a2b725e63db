"""Spectral radius of weighted endomorphisms over the renewal shift.

Run: python3 demos/spectral_radius.py
"""

import numpy as np

from gcms.matrix import renewal
from gcms.spectral import GAElement, brute_force_radius, normal_form, spectral_radius


def random_weight(rng):
    terms = []
    for _ in range(int(rng.integers(1, 4))):
        first = int(rng.integers(1, 5))
        gamma = (first,) if rng.random() < 0.5 else (first, first - 1 or 1)
        terms.append((int(rng.integers(-3, 4)), gamma, ()))
    return int(rng.integers(-3, 4)), terms


def main():
    A = renewal()
    weights = {
        "2 e_1 + 3 e_2": GAElement.build(0, [(2, (1,), ()), (3, (2,), ())]),
        "-3 + e_1": GAElement.build(-3, [(1, (1,), ())]),
    }
    rng = np.random.default_rng(0)
    for k in range(3):
        weights[f"random #{k}"] = GAElement.build(*random_weight(rng))
    for name, a in weights.items():
        res = spectral_radius(a, A)
        bf = brute_force_radius(a, A, 2 * normal_form(a, A).depth + 4)
        print(f"{name:16s} radius={res.radius:.15g}  branch={res.branch:6s} periodic-orbit check={bf:.15g}")


if __name__ == "__main__":
    main()
