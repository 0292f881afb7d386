"""Walk through the zero-field level structure, the clock point and the
minimum-gradient direction of the default model.

    python3 demos/clock_transition_tour.py
"""

import numpy as np

from clockspin import RunConfig
from clockspin.spin import PAIRS, transition_table, zero_field_eigensystem
from clockspin.zeeman import effective_moment, min_gradient_angle, s1_transition_gradient, zefoz_search

UT = 1e-6

cfg = RunConfig.default()
system = cfg.spin_system()
zero = zero_field_eigensystem(system, "ground")

print("Zero-field transitions (ground state)")
for (k, l), t in zip(PAIRS, transition_table(zero, system, "ground")):
    print(f"  {k} -> {l}: {t.frequency / 1e6:9.2f} MHz   |<l|mu|k>| = "
          + ", ".join(f"{m / 1e9:.2f}" for m in t.moments) + " GHz/T")

# Every transition is first-order insensitive at zero field; away from it the
# gradient grows linearly, so the frequency shift is quadratic.
print("\n|S1| for the 2 -> 4 transition along D1")
for b in (0, 10, 50, 200):
    s1 = s1_transition_gradient(system, "ground", (2, 4), (b * UT, 0, 0)).norm
    print(f"  B_D1 = {b:4d} uT: |S1| = {s1 / 1e6:9.4f} Hz/uT")

phi = min_gradient_angle(system, "ground", (2, 4), 200 * UT)
print(f"\nSmallest gradient in the D1-D2 plane at 200 uT: phi = {phi:.2f} deg from D1")
u = np.array([np.cos(np.radians(phi)), np.sin(np.radians(phi)), 0.0])
for direction, label in ((u, "along that line"), (np.array([1.0, 0, 0]), "along D1")):
    mu = effective_moment(system, "ground", (2, 4), 200 * UT * direction)
    print(f"  differential moment {label}: {np.linalg.norm(mu) * 1e3:.3f} mBohr")

# A lab with a stray field needs a compensating applied field to sit on the clock point.
bias = cfg.bias()
res = zefoz_search(system, "ground", (2, 4), (50 * UT, -100 * UT, 20 * UT), 500 * UT, bias)
print(f"\nStray field {np.round(bias / UT, 1)} uT is cancelled by applying "
      f"{np.round(res.field / UT, 4)} uT (|S1| = {res.s1_norm:.1e} Hz/T)")
