"""Least-squares fits of echo decays and of the coherence-time field law.

Both fits work on internally rescaled data (times, amplitudes and fields
divided by their largest magnitude) so the results do not depend on the
units the caller uses.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import optimize

MIN_POINTS = 5
MAX_ITER = 500


class FitError(ValueError):
    """Input data cannot be fitted."""


class FitConvergenceWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class DecayCurve:
    tau: np.ndarray  # s
    amplitude: np.ndarray
    sigma: np.ndarray | None = None

    def __post_init__(self):
        tau = np.asarray(self.tau, float)
        amp = np.asarray(self.amplitude, float)
        if tau.ndim != 1 or tau.shape != amp.shape:
            raise FitError("tau and amplitude must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(tau)) and np.all(np.isfinite(amp))):
            raise FitError("decay curve has non-finite samples")
        if tau.size > 1 and np.any(np.diff(tau) <= 0):
            raise FitError("tau must be strictly increasing")
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "amplitude", amp)
        if self.sigma is not None:
            sig = np.asarray(self.sigma, float)
            if sig.shape != amp.shape or np.any(~np.isfinite(sig)) or np.any(sig <= 0):
                raise FitError("sigma must be positive and match the amplitudes")
            object.__setattr__(self, "sigma", sig)


@dataclass(frozen=True)
class StretchedExpFit:
    E0: float
    T2: float
    m: float
    covariance: np.ndarray
    residual_norm: float
    success: bool
    nfev: int
    message: str

    @property
    def stderr(self):
        return np.sqrt(np.clip(np.diag(self.covariance), 0, None))

    def params(self):
        return {"E0": self.E0, "T2": self.T2, "m": self.m}


@dataclass(frozen=True)
class T2FieldFit:
    t2_zero: float  # s
    kappa: float  # Hz/T
    b0: float  # T
    covariance: np.ndarray
    residual_norm: float
    success: bool
    b0_fixed: bool
    nfev: int
    message: str

    @property
    def stderr(self):
        return np.sqrt(np.clip(np.diag(self.covariance), 0, None))

    def params(self):
        return {"t2_zero": self.t2_zero, "kappa": self.kappa, "b0": self.b0}


def stretched_exponential(tau, E0, T2, m):
    """Hahn-echo decay E0 exp(-(2 tau / T2)^m)."""
    x = 2 * np.asarray(tau, float) / T2
    return E0 * np.exp(-np.power(np.abs(x), m))


def stretched_exponential_jacobian(tau, E0, T2, m):
    """Partial derivatives with respect to (E0, T2, m), shape (n, 3)."""
    x = np.abs(2 * np.asarray(tau, float) / T2)
    xm = np.power(x, m)
    decay = np.exp(-xm)
    with np.errstate(divide="ignore", invalid="ignore"):
        logx = np.where(x > 0, np.log(np.where(x > 0, x, 1.0)), 0.0)
    return np.column_stack([decay, E0 * decay * m * xm / T2, -E0 * decay * xm * logx])


def t2_law(field, t2_zero, kappa, b0=0.0):
    """Coherence time 1 / (1/T2(0) + pi kappa |B - B0|)."""
    return 1.0 / (1.0 / t2_zero + math.pi * kappa * np.abs(np.asarray(field, float) - b0))


def t2_law_jacobian(field, t2_zero, kappa, b0=0.0):
    """Partial derivatives with respect to (T2(0), kappa, B0); sign(0) = 0 at the kink."""
    d = np.asarray(field, float) - b0
    t2 = t2_law(field, t2_zero, kappa, b0)
    t2sq = t2 * t2
    return np.column_stack([
        t2sq / t2_zero**2,
        -t2sq * math.pi * np.abs(d),
        t2sq * math.pi * kappa * np.sign(d),
    ])


def _covariance(jac, resid, n_params):
    dof = max(resid.size - n_params, 1)
    chi2_red = float(resid @ resid) / dof
    try:
        cov = np.linalg.inv(jac.T @ jac)
    except np.linalg.LinAlgError:
        cov = np.linalg.pinv(jac.T @ jac)
    return cov * chi2_red


def _initial_decay_guess(tau, amp):
    e0 = amp[0] if amp[0] != 0 else np.max(np.abs(amp))
    below = np.flatnonzero(amp <= e0 / math.e)
    if below.size:
        t2 = 2 * tau[below[0]]
    else:
        ratio = np.clip(amp[-1] / e0, 1e-12, 1 - 1e-12)
        t2 = 2 * tau[-1] / max(-math.log(ratio), 1e-12)
    if t2 <= 0:
        t2 = 2 * tau[-1]
    return np.array([e0, t2, 1.0])


def fit_stretched_exponential(curve, initial=None, m_bounds=(0.5, 4.0)):
    """Weighted least-squares fit of (E0, T2, m) to a decay curve.

    Uncertainties come from the linearised covariance at the optimum scaled
    by the reduced chi-square; they are approximate.
    """
    if not isinstance(curve, DecayCurve):
        curve = DecayCurve(*curve)
    tau, amp = curve.tau, curve.amplitude
    if tau.size < MIN_POINTS:
        raise FitError(f"need at least {MIN_POINTS} points, got {tau.size}")
    if np.ptp(amp) == 0:
        raise FitError("decay curve is constant")
    if np.any(tau < 0):
        raise FitError("tau must be non-negative")

    st = float(np.max(np.abs(tau))) or 1.0
    sa = float(np.max(np.abs(amp)))
    t, y = tau / st, amp / sa
    w = np.ones_like(y) if curve.sigma is None else sa / curve.sigma

    p0 = _initial_decay_guess(tau, amp) if initial is None else np.asarray(initial, float).copy()
    p0 = np.array([p0[0] / sa, p0[1] / st, float(np.clip(p0[2], *m_bounds))])

    def resid(p):
        return w * (stretched_exponential(t, *p) - y)

    def jac(p):
        return w[:, None] * stretched_exponential_jacobian(t, *p)

    lower = [-np.inf, 1e-9, m_bounds[0]]
    upper = [np.inf, np.inf, m_bounds[1]]
    res = optimize.least_squares(resid, p0, jac=jac, bounds=(lower, upper), method="trf",
                                 x_scale="jac", ftol=None, xtol=1e-15, gtol=1e-15,
                                 max_nfev=MAX_ITER)
    success = res.status > 0
    if not success:
        warnings.warn(f"stretched-exponential fit did not converge: {res.message}",
                      FitConvergenceWarning, stacklevel=2)
    e0, t2, m = res.x
    scale = np.diag([sa, st, 1.0])
    r = res.fun * sa if curve.sigma is None else res.fun
    cov = scale @ _covariance(res.jac, res.fun, 3) @ scale
    return StretchedExpFit(float(e0 * sa), float(t2 * st), float(m), cov,
                           float(np.linalg.norm(r)), success, int(res.nfev), str(res.message))


def _t2_initial(b, t2):
    i0 = int(np.argmax(t2))
    b0 = b[i0]
    t20 = t2[i0]
    far = int(np.argmax(np.abs(b - b0)))
    span = abs(b[far] - b0)
    kappa = (1 / t2[far] - 1 / t20) / (math.pi * span) if span > 0 else 0.0
    return np.array([t20, max(kappa, 0.0), b0])


def _gauss_newton_refine(resid, jac, x, lower, upper, steps=4):
    # the cost is flat to rounding near the optimum, so a cost-based stop
    # leaves x loose at the 1e-8 level; undamped steps pin the zero gradient
    best, cost = x, float(resid(x) @ resid(x))
    for _ in range(steps):
        step = np.linalg.lstsq(jac(best), -resid(best), rcond=None)[0]
        trial = best + step
        if np.any(trial < lower) or np.any(trial > upper):
            break
        c = float(resid(trial) @ resid(trial))
        if not c <= cost * (1 + 1e-12):
            break
        best, cost = trial, c
    return best


def fit_t2_vs_field(field, t2, sigma=None, initial=None, fix_b0=None):
    """Fit T2(B) = 1/(1/T2(0) + pi kappa |B - B0|) to coherence times.

    A damped Gauss-Newton (trust-region) solve with the analytic Jacobian is
    followed by a Nelder-Mead polish, since the model has a kink at B0.
    When every point lies on one side of the apparent kink, or ``fix_b0`` is
    given, B0 is held fixed (at 0 by default) and a warning is issued.
    """
    b = np.asarray(field, float)
    y = np.asarray(t2, float)
    if b.ndim != 1 or b.shape != y.shape:
        raise FitError("field and T2 must be 1-D arrays of equal length")
    if b.size < 4:
        raise FitError(f"need at least 4 points, got {b.size}")
    if not (np.all(np.isfinite(b)) and np.all(np.isfinite(y))) or np.any(y <= 0):
        raise FitError("coherence times must be finite and positive")
    if sigma is not None:
        sigma = np.asarray(sigma, float)
        if sigma.shape != y.shape or np.any(sigma <= 0):
            raise FitError("sigma must be positive and match T2")

    sb = float(np.max(np.abs(b))) or 1.0
    sy = float(np.max(y))
    bs, ys = b / sb, y / sy
    w = np.ones_like(ys) if sigma is None else sy / sigma

    p0 = _t2_initial(b, y) if initial is None else np.asarray(initial, float).copy()
    i0 = int(np.argmax(y))
    b0_fixed = fix_b0 is not None
    if not b0_fixed and (i0 == 0 or i0 == b.size - 1 or np.ptp(y) == 0):
        warnings.warn("data do not span both sides of the kink; B0 fixed to 0", UserWarning, stacklevel=2)
        b0_fixed, fix_b0 = True, 0.0
    if b0_fixed:
        p0[2] = fix_b0
    # scaled parameters: T2(0)/sy, kappa*sb*sy, B0/sb
    q0 = np.array([p0[0] / sy, p0[1] * sb * sy, p0[2] / sb])
    free = [0, 1] if b0_fixed else [0, 1, 2]

    def full(q):
        out = q0.copy()
        out[free] = q
        return out

    def resid(q):
        p = full(q)
        return w * (t2_law(bs, *p) - ys)

    def jac(q):
        return w[:, None] * t2_law_jacobian(bs, *full(q))[:, free]

    lower = np.array([1e-9, 0.0, -np.inf])[free]
    upper = np.full(len(free), np.inf)
    start = np.clip(q0[free], lower, upper)
    lsq = dict(jac=jac, bounds=(lower, upper), method="trf", x_scale="jac",
               ftol=None, xtol=1e-15, gtol=1e-15, max_nfev=MAX_ITER)
    res = optimize.least_squares(resid, start, **lsq)
    best, nfev = res.x, res.nfev

    def ssr(q):
        q = np.asarray(q, float)
        if np.any(q < lower) or np.any(q > upper):
            return np.inf
        r = resid(q)
        return float(r @ r)

    if not b0_fixed:
        nm = optimize.minimize(ssr, best, method="Nelder-Mead",
                               options={"xatol": 1e-10, "fatol": 1e-14 * max(ssr(best), 1e-300),
                                        "maxiter": 20 * MAX_ITER,
                                        "adaptive": True})
        nfev += nm.nfev
        if nm.fun < ssr(best):
            best = nm.x
        again = optimize.least_squares(resid, best, **lsq)
        nfev += again.nfev
        if ssr(again.x) <= ssr(best):
            best = again.x
        res = again
        best = _gauss_newton_refine(resid, jac, best, lower, upper)

    success = res.status > 0
    if not success:
        warnings.warn(f"T2(B) fit did not converge: {res.message}", FitConvergenceWarning, stacklevel=2)
    q = full(best)
    params = np.array([q[0] * sy, q[1] / (sb * sy), q[2] * sb])
    r = resid(best)
    cov_free = _covariance(jac(best), r, len(free))
    scale = np.array([sy, 1 / (sb * sy), sb])[free]
    cov = np.zeros((3, 3))
    cov[np.ix_(free, free)] = scale[:, None] * cov_free * scale[None, :]
    rnorm = float(np.linalg.norm(r * sy if sigma is None else r))
    return T2FieldFit(float(params[0]), float(params[1]), float(params[2]), cov, rnorm,
                      success, b0_fixed, int(nfev), str(res.message))


def resonator_q(f0, fwhm):
    """Loaded quality factor f0 / FWHM."""
    if not fwhm > 0:
        raise ValueError("linewidth must be positive")
    return f0 / fwhm
