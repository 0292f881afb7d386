"""Echo decays near the clock point: nuclear-spin revivals away from the
minimum-gradient line, none on it, and the Larmor-period ridge of a field sweep.

    python3 demos/echo_envelopes.py
"""

import math
from dataclasses import replace

import numpy as np

from clockspin import RunConfig
from clockspin.dynamics import EchoModel, echo_amplitude, echo_map, first_revival_ridge
from clockspin.eseem import larmor_period, two_pulse_envelope
from clockspin.zeeman import effective_moment

UT = 1e-6

cfg = RunConfig.default()
model = EchoModel(cfg.spin_system(), cfg.nuclei(), **cfg.model())
bare = replace(model, nuclei=())  # decay without nuclear modulation

off_line = np.array([-248, -65, 0.0]) * UT
on_line = np.array([-65 / math.tan(math.radians(55.9)), -65, 0.0]) * UT
for b, label in ((off_line, "off the line"), (on_line, "on the line ")):
    bmag = np.linalg.norm(b)
    t_y = larmor_period(bmag)
    tau = np.array([0.5, 1.0, 1.5, 2.0]) * t_y
    mu = effective_moment(model.system, "ground", (2, 4), b)
    env = two_pulse_envelope(model.nuclei, b, mu, np.linspace(0, 3 * t_y, 3001))
    v = two_pulse_envelope(model.nuclei, b, mu, tau).values
    decay = echo_amplitude(tau, b, bare)
    print(f"{label}: |B| = {bmag / UT:6.1f} uT, T_Y = {t_y * 1e3:.3f} ms, depth {env.modulation_depth:.4f}")
    print("    envelope at T_Y/2, T_Y, 3T_Y/2, 2T_Y: " + ", ".join(f"{x:.3f}" for x in v))
    print("    decay factor at the same delays:    " + ", ".join(f"{x:.3f}" for x in decay))

# Sweep D1 with the stray D2 field compensated; revivals follow 1/(B gamma).
sweep = EchoModel(model.system, model.nuclei, bias=cfg.bias(), **cfg.model())
swept = np.linspace(-300, 300, 13) * UT
emap = echo_map(sweep, swept, np.linspace(0, 8e-3, 1601), "D1", fixed=(0, -155 * UT, 0), threads=2)
ridge = first_revival_ridge(emap)
print("\n B_D1 (uT)   T_Y (ms)   first revival (ms)   area (ms)")
for b, ty, r, a in zip(swept, emap.larmor_periods, ridge, emap.column_areas()):
    print(f"  {b / UT:7.0f}   {ty * 1e3:8.3f}   {r * 1e3:18.3f}   {a * 1e3:8.3f}")
