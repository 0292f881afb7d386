"""Fit synthetic echo decays and the coherence-time field law, then run the
same fit through the command line from a CSV file.

    python3 demos/coherence_fits.py
"""

import tempfile
from pathlib import Path

import numpy as np

from clockspin.cli import csv_text, main
from clockspin.fitting import DecayCurve, fit_stretched_exponential, fit_t2_vs_field, t2_law, stretched_exponential

rng = np.random.default_rng(1)
law = (10.3e-3, 1.48e6, 14.1e-6)

# Decays at a few fields, each fitted to a stretched exponential.
tau = np.linspace(0, 20e-3, 100)
fields = np.unique(np.r_[np.linspace(-300e-6, -30e-6, 10), np.arange(-20e-6, 50.1e-6, 2e-6),
                         np.linspace(60e-6, 400e-6, 12)])
t2_fit, t2_err = [], []
for b in fields:
    y = stretched_exponential(tau, 1.0, t2_law(b, *law), 1.2) + 0.02 * rng.standard_normal(tau.size)
    fit = fit_stretched_exponential(DecayCurve(tau, y))
    t2_fit.append(fit.T2)
    t2_err.append(fit.stderr[1])
t2_fit, t2_err = np.array(t2_fit), np.array(t2_err)
best = int(np.argmax(t2_fit))
print(f"longest T2 = {t2_fit[best] * 1e3:.2f} +/- {t2_err[best] * 1e3:.2f} ms at {fields[best] * 1e6:.0f} uT")

res = fit_t2_vs_field(fields, t2_fit, t2_err)
print(f"field law: T2(0) = {res.t2_zero * 1e3:.2f} ms, kappa = {res.kappa / 1e6:.3f} MHz/T, "
      f"B0 = {res.b0 * 1e6:.2f} uT")

with tempfile.TemporaryDirectory() as tmp:
    src = Path(tmp) / "t2.csv"
    src.write_text(csv_text(["B_T", "T2_s", "sigma_s"], zip(fields, t2_fit, t2_err)), encoding="utf-8")
    code = main(["fit", "t2field", "--input", str(src), "--sigma-col", "sigma_s", "--out", tmp])
    print(f"command line exit code {code}; report files:", sorted(p.name for p in Path(tmp).glob("fit_*")))
