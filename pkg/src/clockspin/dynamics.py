"""Observable signals: inhomogeneously damped Rabi nutation and Hahn-echo decay maps."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import roots_hermite

from .eseem import larmor_period, two_pulse_envelope
from .fitting import t2_law
from .spin import AXES, as_field
from .zeeman import effective_moment, zero_field_eigensystem

FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))


@dataclass(frozen=True)
class RabiTrace:
    times: np.ndarray  # s
    transfer: np.ndarray  # ensemble-averaged transfer probability, in [0, 1]
    population_difference: np.ndarray  # w0 (1 - 2 P)
    rabi_frequency: float  # rad/s
    sigma: float  # Hz, Gaussian detuning standard deviation


MIN_NODES = 64
MAX_NODES = 16384
_CHUNK = 1 << 22


def nodes_for(sigma, t_max):
    """Node count resolving cos(2 sqrt(2) pi sigma t x) on the Hermite grid.

    The largest node sits near sqrt(2 n) with spacing about pi / sqrt(2 n), so
    a phase rate w in x needs n well above w^2 / 2. Capped at MAX_NODES,
    beyond which (sigma t_max above roughly 10) the late-time tail is only
    approximately averaged.
    """
    rate = 2 * math.pi * math.sqrt(2.0) * sigma * t_max
    if rate > MAX_NODES:
        return MAX_NODES
    return int(min(MAX_NODES, max(MIN_NODES, math.ceil(2 * rate**2) + 32)))


def fwhm_to_sigma(fwhm):
    return fwhm * FWHM_TO_SIGMA


def rabi_trace(rabi_frequency, times, sigma=0.0, *, fwhm=None, nodes=None, initial_difference=1.0):
    """Two-level Rabi nutation averaged over a Gaussian detuning distribution.

    Parameters
    ----------
    rabi_frequency : float
        Drive strength Omega in rad/s.
    times : array
        Non-negative evaluation times in seconds.
    sigma : float
        Standard deviation of the detuning in Hz. Ignored if ``fwhm`` is given.
    fwhm : float, optional
        Full width at half maximum of the inhomogeneous line in Hz.
    nodes : int, optional
        Gauss-Hermite nodes for the detuning average (at least 64). By default
        enough nodes are used to resolve the detuning oscillation at the
        latest time, ``nodes_for``.
    """
    omega = float(rabi_frequency)
    if not omega > 0:
        raise ValueError("Rabi frequency must be positive")
    t = np.asarray(times, float)
    if t.ndim != 1 or t.size == 0 or np.any(t < 0) or not np.all(np.isfinite(t)):
        raise ValueError("time grid must be a non-empty array of non-negative finite values")
    if fwhm is not None:
        sigma = fwhm_to_sigma(fwhm)
    sigma = float(sigma)
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if nodes is None:
        nodes = nodes_for(sigma, float(t.max()))
    if nodes < MIN_NODES:
        raise ValueError(f"use at least {MIN_NODES} quadrature nodes")

    if sigma == 0:
        transfer = np.sin(omega * t / 2) ** 2
    else:
        x, w = roots_hermite(nodes)
        delta = 2 * math.pi * math.sqrt(2.0) * sigma * x  # rad/s
        weights = w / math.sqrt(math.pi)
        gen = np.sqrt(omega**2 + delta**2)
        amp = weights * omega**2 / gen**2
        chunk = max(1, _CHUNK // nodes)
        transfer = np.concatenate([amp @ np.sin(np.outer(gen, t[i:i + chunk]) / 2) ** 2
                                   for i in range(0, t.size, chunk)])
    transfer = np.clip(transfer, 0.0, 1.0)
    return RabiTrace(t, transfer, initial_difference * (1 - 2 * transfer), omega, sigma)


def oscillation_contrast(trace, periods=None):
    """Peak-to-peak transfer within each nominal Rabi period 2 pi / Omega."""
    period = 2 * math.pi / trace.rabi_frequency
    n = int(trace.times[-1] // period) if periods is None else int(periods)
    out = []
    for i in range(n):
        w = (trace.times >= i * period) & (trace.times < (i + 1) * period)
        out.append(np.ptp(trace.transfer[w]) if np.any(w) else np.nan)
    return np.array(out)


@dataclass(frozen=True)
class EchoModel:
    """Parameters of the echo amplitude model.

    The field dependence of T2 uses the magnitude of the total field at the
    dopant; ``bias`` is the laboratory offset added to every applied field.
    """

    system: object
    nuclei: tuple = ()
    pair: tuple = (2, 4)
    level: str = "ground"
    E0: float = 1.0
    mims: float = 1.0
    t2_zero: float = 10.3e-3
    kappa: float = 1.48e6
    b0: float = 0.0
    bias: np.ndarray = field(default_factory=lambda: np.zeros(3))


def _echo_column(model, applied, tau, zero):
    """Echo amplitude and the ESEEM envelope alone for one applied field."""
    b = as_field(applied) + as_field(model.bias)
    bmag = float(np.linalg.norm(b))
    t2 = float(t2_law(bmag, model.t2_zero, model.kappa, model.b0))
    decay = model.E0 * np.exp(-np.power(2 * tau / t2, model.mims))
    if bmag == 0 or not model.nuclei:
        return decay, np.ones_like(tau)
    mom = effective_moment(model.system, model.level, model.pair, b, _zero=zero)
    env = two_pulse_envelope(model.nuclei, b, mom, tau).values
    return decay * env, env


def echo_amplitude(tau, field, model):
    """Echo amplitude E0 exp(-(2 tau/T2(B))^m) V(2 tau; B) at applied ``field``."""
    tau = np.asarray(tau, float)
    if np.any(tau < 0):
        raise ValueError("tau must be non-negative")
    zero = zero_field_eigensystem(model.system, model.level)
    return _echo_column(model, field, np.atleast_1d(tau), zero)[0].reshape(tau.shape)


def model_field_magnitude(swept, offset):
    """Field magnitude sqrt(offset^2 + swept^2) used for the Larmor-period overlay."""
    return np.hypot(np.asarray(swept, float), offset)


@dataclass(frozen=True)
class EchoMap:
    axis: str
    swept: np.ndarray  # applied field along ``axis``, T
    tau: np.ndarray  # s
    amplitude: np.ndarray  # shape (len(tau), len(swept))
    envelope: np.ndarray  # ESEEM factor V alone, same shape
    field_magnitude: np.ndarray  # T, total field per column
    larmor_periods: np.ndarray  # s

    def column_areas(self):
        return trapezoid(self.amplitude, self.tau, axis=0)


def echo_map(model, swept, tau, axis="D1", fixed=(0.0, 0.0, 0.0), threads=None):
    """Echo amplitude over a sweep of the applied field along one crystal axis.

    ``fixed`` gives the applied field on all axes (its ``axis`` entry is
    replaced by each sweep value). Columns are independent and may be
    evaluated concurrently.
    """
    ia = AXES.index(axis)
    swept = np.asarray(swept, float)
    tau = np.asarray(tau, float)
    if swept.size == 0 or tau.size == 0:
        raise ValueError("empty sweep or delay grid")
    base = as_field(fixed)
    zero = zero_field_eigensystem(model.system, model.level)

    def column(v):
        b = base.copy()
        b[ia] = v
        return _echo_column(model, b, tau, zero)

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cols = list(pool.map(column, swept))
    else:
        cols = [column(v) for v in swept]
    amp = np.column_stack([c[0] for c in cols])
    env = np.column_stack([c[1] for c in cols])

    total = base + as_field(model.bias)
    offset = float(np.linalg.norm(np.delete(total, ia)))
    mags = model_field_magnitude(swept + total[ia] - base[ia], offset)
    gamma = model.nuclei[0].gamma if model.nuclei else model.system.gamma_nuclear_host
    periods = np.array([larmor_period(m, gamma) for m in mags])
    return EchoMap(axis, swept, tau, amp, env, mags, periods)


def first_revival_ridge(emap, search=(0.5, 1.5)):
    """Delay of the first ESEEM revival in each column.

    Within ``search`` (in units of the column's Larmor period) the ridge is
    the highest local maximum of the ESEEM envelope. The envelope is used
    rather than the echo amplitude because the monotone decay factor pulls
    the flat-topped revival maxima to shorter delays. Columns without a
    finite Larmor period or without a local maximum give NaN.
    """
    out = np.full(emap.swept.size, np.nan)
    t = emap.tau
    for j, period in enumerate(emap.larmor_periods):
        if not math.isfinite(period):
            continue
        col = emap.envelope[:, j]
        inner = np.flatnonzero((col[1:-1] >= col[:-2]) & (col[1:-1] > col[2:])) + 1
        inner = inner[(t[inner] > search[0] * period) & (t[inner] < search[1] * period)]
        if inner.size:
            out[j] = t[inner[np.argmax(col[inner])]]
    return out
