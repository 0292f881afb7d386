"""Two-pulse ESEEM from host nuclei coupled to the dopant's field-induced moment.

Each nucleus sees the point-dipole field of the differential moment of the
two electronic states of the driven transition. Its secular (a) and
pseudo-secular (b) couplings enter the standard S=1/2, I=1/2 two-pulse
envelope, and the total envelope is the product over nuclei.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import constants

from .spin import GAMMA_Y89, as_field
from .zeeman import effective_moment, zero_field_eigensystem

MIN_DISTANCE = 0.15e-9  # m
_MU0_OVER_4PI = constants.mu_0 / (4 * math.pi)
_BOHR_MAGNETON_J_PER_T = constants.physical_constants["Bohr magneton"][0]


@dataclass(frozen=True)
class HostNucleus:
    """A host nucleus given by its position (m, crystal frame) or fixed couplings (Hz)."""

    position: np.ndarray | None = None
    couplings: tuple | None = None
    gamma: float = GAMMA_Y89

    def __post_init__(self):
        if (self.position is None) == (self.couplings is None):
            raise ValueError("give exactly one of position or couplings")
        if self.position is not None:
            r = np.asarray(self.position, float)
            if r.shape != (3,) or not np.all(np.isfinite(r)):
                raise ValueError("position must be a finite 3-vector")
            if np.linalg.norm(r) <= MIN_DISTANCE:
                raise ValueError(f"nucleus closer than {MIN_DISTANCE * 1e9:.2f} nm")
            object.__setattr__(self, "position", r)
        else:
            a, b = (float(x) for x in self.couplings)
            if not (math.isfinite(a) and math.isfinite(b)):
                raise ValueError("couplings must be finite")
            object.__setattr__(self, "couplings", (a, b))
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")

    @classmethod
    def spherical(cls, distance, theta_deg, phi_deg, gamma=GAMMA_Y89):
        th, ph = math.radians(theta_deg), math.radians(phi_deg)
        r = distance * np.array([math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), math.cos(th)])
        return cls(position=r, gamma=gamma)


@dataclass(frozen=True)
class EseemEnvelope:
    tau: np.ndarray  # s
    values: np.ndarray  # V(2 tau)
    depths: np.ndarray  # per-nucleus k_j
    frequencies: np.ndarray  # per-nucleus (omega_alpha, omega_beta), rad/s

    @property
    def modulation_depth(self):
        """Largest drop of the envelope below 1 over the sampled delays."""
        return float(1.0 - np.min(self.values)) if self.values.size else 0.0


def larmor_period(field_magnitude, gamma=GAMMA_Y89):
    """Nuclear Larmor period 1/(B gamma) in seconds; infinite at zero field."""
    b = float(field_magnitude)
    if b < 0 or not math.isfinite(b):
        raise ValueError("field magnitude must be a finite non-negative number")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if b == 0.0:
        return math.inf
    return 1.0 / (b * gamma)


def dipolar_field(moment_muB, position):
    """Point-dipole field (T) at ``position`` (m) from a moment given in Bohr magnetons."""
    r = np.asarray(position, float)
    dist = np.linalg.norm(r)
    if dist == 0:
        raise ValueError("nucleus at zero distance")
    n = r / dist
    mu = np.asarray(moment_muB, float) * _BOHR_MAGNETON_J_PER_T
    return _MU0_OVER_4PI * (3 * n * (n @ mu) - mu) / dist**3


def dipolar_couplings(moment_muB, nucleus, field_direction):
    """Secular and pseudo-secular couplings (Hz) of a nucleus to the dopant moment.

    ``a`` is the dipolar field component along the static field times the
    nuclear gyromagnetic ratio, ``b`` the magnitude of the perpendicular part.
    """
    if nucleus.couplings is not None:
        return nucleus.couplings
    u = np.asarray(field_direction, float)
    norm = np.linalg.norm(u)
    if norm == 0:
        raise ValueError("field direction undefined at zero field")
    u = u / norm
    bd = dipolar_field(moment_muB, nucleus.position)
    par = bd @ u
    perp = np.linalg.norm(bd - par * u)
    return nucleus.gamma * par, nucleus.gamma * perp


def nuclear_frequencies(a, b, larmor):
    """Angular nuclear frequencies in the two electron manifolds and the depth k.

    ``a``, ``b`` and ``larmor`` are ordinary frequencies (Hz).
    """
    wi = 2 * math.pi * larmor
    wa_, wb_ = 2 * math.pi * a, 2 * math.pi * b
    w_alpha = math.hypot(wi + wa_ / 2, wb_ / 2)
    w_beta = math.hypot(wi - wa_ / 2, wb_ / 2)
    if w_alpha == 0 or w_beta == 0:
        return w_alpha, w_beta, 0.0
    k = (wb_ * wi / (w_alpha * w_beta)) ** 2
    return w_alpha, w_beta, min(k, 1.0)


def single_nucleus_envelope(tau, w_alpha, w_beta, k):
    tau = np.asarray(tau, float)
    return 1 - 0.5 * k * (1 - np.cos(w_alpha * tau)) * (1 - np.cos(w_beta * tau))


def two_pulse_envelope(nuclei, field, effective_moment_muB, tau):
    """Product-rule two-pulse envelope V(2 tau) for a set of host nuclei.

    Parameters
    ----------
    nuclei : sequence of HostNucleus
    field : 3-vector, T
        Total static field at the dopant.
    effective_moment_muB : 3-vector
        Differential moment of the transition, Bohr magnetons.
    tau : array
        Pulse separations in seconds.
    """
    b = as_field(field)
    tau = np.asarray(tau, float)
    bmag = float(np.linalg.norm(b))
    values = np.ones_like(tau)
    depths, freqs = [], []
    for nuc in nuclei:
        larmor = nuc.gamma * bmag
        if nuc.couplings is None and bmag == 0:
            a = bb = 0.0
        else:
            a, bb = dipolar_couplings(effective_moment_muB, nuc, b)
        wa, wb, k = nuclear_frequencies(a, bb, larmor)
        values = values * single_nucleus_envelope(tau, wa, wb, k)
        depths.append(k)
        freqs.append((wa, wb))
    values = np.clip(values, 0.0, 1.0)
    return EseemEnvelope(tau, values, np.array(depths), np.array(freqs).reshape(-1, 2))


@dataclass(frozen=True)
class MomentScan:
    fields: np.ndarray  # (n, 3) total field, T
    moments: np.ndarray  # (n, 3) Bohr magnetons
    depths: np.ndarray  # envelope modulation depth per point
    larmor_periods: np.ndarray  # s
    envelopes: tuple


def moment_vs_field_scan(system, level, pair, fields, nuclei, tau, bias=(0.0, 0.0, 0.0)):
    """Effective moment and ESEEM envelope along a path of applied fields."""
    fields = np.atleast_2d(np.asarray(fields, float)) + as_field(bias)
    tau = np.asarray(tau, float)
    zero = zero_field_eigensystem(system, level)
    gamma = nuclei[0].gamma if nuclei else system.gamma_nuclear_host
    moments, depths, periods, envs = [], [], [], []
    for b in fields:
        mom = effective_moment(system, level, pair, b, _zero=zero)
        env = two_pulse_envelope(nuclei, b, mom, tau)
        moments.append(mom)
        depths.append(env.modulation_depth)
        periods.append(larmor_period(np.linalg.norm(b), gamma))
        envs.append(env)
    return MomentScan(fields, np.array(moments), np.array(depths), np.array(periods), tuple(envs))
