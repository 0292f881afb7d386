"""First-order Zeeman analysis near the zero-field clock point.

Gradients are reported in Hz/T along the crystal axes (D1, D2, b). Levels
are labelled 1..4 by their zero-field energy order and followed
adiabatically into finite field, so a label always refers to the same
hyperfine state even if levels approach each other.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .spin import (
    AXES,
    PAIRS,
    S_OPS,
    EigenSystem,
    as_field,
    build_hamiltonian,
    diagonalize,
    zero_field_eigensystem,
)

DEGENERACY_GUARD_HZ = 1e3
PERTURBATIVE_RATIO_WARN = 0.1
MAX_CONTINUATION_STEPS = 4000


class DegenerateLevelsError(ArithmeticError):
    """Closed-form first-order result undefined because zero-field levels coincide."""


class PerturbationWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SpinExpectation:
    level: int
    exact: np.ndarray  # <k(B)|S_m|k(B)>, crystal axes
    first_order: np.ndarray | None  # closed form from zero-field energies
    partners: tuple | None  # partner label per principal axis of A


@dataclass(frozen=True)
class LevelGradient:
    level: int
    gradient: np.ndarray  # Hz/T, muB g.<S> with exact states
    finite_difference: np.ndarray  # Hz/T, central differences of eigenvalues
    first_order: np.ndarray | None  # Hz/T, closed form
    spin: np.ndarray  # exact <k|S_m|k>


@dataclass(frozen=True)
class S1Result:
    pair: tuple
    gradient: np.ndarray  # Hz/T
    norm: float
    directional: float | None = None

    def along(self, direction):
        u = np.asarray(direction, float)
        return float(self.gradient @ (u / np.linalg.norm(u)))


@dataclass(frozen=True)
class GradientMap:
    plane: tuple
    axis1: np.ndarray  # T, columns
    axis2: np.ndarray  # T, rows
    values: np.ndarray  # Hz/T, shape (len(axis2), len(axis1))
    pair: tuple
    offset: float  # T along the remaining axis


@dataclass(frozen=True)
class AngleScan:
    plane: tuple
    magnitude: float
    angles_deg: np.ndarray
    values: np.ndarray
    pair: tuple

    @property
    def argmin_deg(self):
        return float(self.angles_deg[int(np.argmin(self.values))])


@dataclass(frozen=True)
class ZefozResult:
    field: np.ndarray  # applied field at the optimum, T
    s1_norm: float
    converged: bool
    iterations: int
    evaluations: int
    message: str = ""


def _axis_index(name):
    try:
        return AXES.index(name)
    except ValueError:
        raise ValueError(f"unknown crystal axis {name!r}; expected one of {AXES}") from None


def _zeeman_ratio(system, level, field, gaps):
    _, g = system.tensors(level)
    scale = system.bohr_magneton_over_h * np.max(np.abs(g.principal_values))
    return scale * np.linalg.norm(field) / max(np.min(gaps), 1e-300)


def _match(prev_vectors, eigs):
    """Reorder ``eigs`` so column k has maximal overlap with ``prev_vectors[:, k]``."""
    overlap = np.abs(prev_vectors.conj().T @ eigs.vectors) ** 2
    rows, cols = optimize.linear_sum_assignment(-overlap)
    order = cols[np.argsort(rows)]
    return EigenSystem(eigs.energies[order], eigs.vectors[:, order])


def labelled_eigensystem(system, level, field, _zero=None):
    """Eigensystem at ``field`` with column k holding the state labelled k+1.

    When the Zeeman scale is below the smallest zero-field gap no crossing
    can occur and energy order equals label order. Otherwise the states are
    continued from zero field along the straight path, matching each step by
    maximal eigenvector overlap. Degenerate zero-field levels have no
    unique labels, so energy order is used for them.
    """
    b = as_field(field)
    zero = _zero or zero_field_eigensystem(system, level)
    eigs = diagonalize(build_hamiltonian(system, level, b))
    gaps = np.diff(zero.energies)
    if np.min(gaps) < DEGENERACY_GUARD_HZ:
        return eigs
    ratio = _zeeman_ratio(system, level, b, gaps)
    if ratio < 0.5:
        return eigs
    steps = min(int(math.ceil(ratio / 0.05)), MAX_CONTINUATION_STEPS)
    current = zero
    for s in range(1, steps + 1):
        e = diagonalize(build_hamiltonian(system, level, b * s / steps))
        current = _match(current.vectors, e)
    return current


def _check_label(k):
    if k not in (1, 2, 3, 4):
        raise ValueError(f"level label must be 1..4, got {k}")
    return k - 1


def _check_pair(pair):
    k, l = (int(x) for x in pair)
    if (min(k, l), max(k, l)) not in PAIRS:
        raise ValueError(f"invalid transition pair {pair}")
    return k, l


def _warn_if_not_perturbative(system, level, field, zero):
    gaps = np.diff(zero.energies)
    if np.min(gaps) < DEGENERACY_GUARD_HZ:
        return
    ratio = _zeeman_ratio(system, level, field, gaps)
    if ratio > PERTURBATIVE_RATIO_WARN:
        warnings.warn(
            f"Zeeman energy is {ratio:.3g} of the smallest zero-field gap; "
            "first-order results are unreliable",
            PerturbationWarning,
            stacklevel=3,
        )


def first_order_spin(system, level, k, field, zero=None):
    """Closed-form first-order <k|S|k> (crystal axes) and partner labels.

    In the common principal frame of A and g each spin component S_m couples
    state k to a single partner k' at zero field, giving
    ``<k|S_m|k> = 2 muB g_m B_m |<k'|S_m|k>|^2 / (E_k - E_k')``.
    """
    idx = _check_label(k)
    b = as_field(field)
    zero = zero or zero_field_eigensystem(system, level)
    energies, vecs = zero.energies, zero.vectors
    if np.min(np.diff(energies)) < DEGENERACY_GUARD_HZ:
        raise DegenerateLevelsError("zero-field levels closer than 1 kHz; closed form undefined")
    A, g = system.tensors(level)
    rot = A.orientation
    g_principal = rot.T @ g.matrix @ rot
    if np.max(np.abs(g_principal - np.diag(np.diag(g_principal)))) > 1e-6 * np.max(np.abs(g.principal_values)):
        warnings.warn("A and g principal frames are not aligned; closed form is approximate",
                      PerturbationWarning, stacklevel=2)
    b_principal = rot.T @ b
    s_principal = np.einsum("aj,aik->jik", rot, S_OPS)
    mu_b = system.bohr_magneton_over_h
    spin = np.zeros(3)
    partners = []
    for j in range(3):
        elems = np.abs(vecs.conj().T @ s_principal[j] @ vecs[:, idx]) ** 2
        elems[idx] = 0.0
        partner = int(np.argmax(elems))
        partners.append(partner + 1)
        for p in np.flatnonzero(elems > 1e-12):
            spin[j] += 2 * mu_b * g_principal[j, j] * b_principal[j] * elems[p] / (energies[idx] - energies[p])
    return rot @ spin, tuple(partners)


def effective_spin_expectation(system, level, k, field):
    """Exact and first-order electron-spin expectation of state ``k``."""
    idx = _check_label(k)
    b = as_field(field)
    zero = zero_field_eigensystem(system, level)
    _warn_if_not_perturbative(system, level, b, zero)
    eigs = labelled_eigensystem(system, level, b, zero)
    v = eigs.vectors[:, idx]
    exact = np.einsum("i,mij,j->m", v.conj(), S_OPS, v).real
    try:
        first, partners = first_order_spin(system, level, k, b, zero)
    except DegenerateLevelsError:
        first, partners = None, None
    return SpinExpectation(k, exact, first, partners)


def _spins(eigs):
    return np.einsum("ik,mij,jk->km", eigs.vectors.conj(), S_OPS, eigs.vectors).real


def fd_step(field):
    return max(1e-8, 1e-4 * float(np.linalg.norm(field)))


def _refined_energies(system, level, field, eigs):
    """Rayleigh quotients of ``eigs`` in extended precision.

    Eigenvalues of a GHz-scale matrix carry absolute errors near 1e-7 Hz in
    double precision, which swamps central differences at sub-microtesla
    steps. The quotient's error is quadratic in the eigenvector error; the
    norm must be divided out too, since 2e-16 of a GHz is already 3e-7 Hz.
    """
    h = build_hamiltonian(system, level, field, dtype=np.clongdouble)
    v = eigs.vectors.astype(np.clongdouble)
    num = np.real(np.einsum("ik,ij,jk->k", v.conj(), h, v))
    return num / np.real(np.einsum("ik,ik->k", v.conj(), v))


def finite_difference_gradients(system, level, field, eigs=None, step=None):
    """Central-difference gradients of all four labelled energies (Hz/T), shape (4, 3)."""
    b = as_field(field)
    eigs = eigs or labelled_eigensystem(system, level, b)
    h = fd_step(b) if step is None else step
    out = np.zeros((4, 3))
    for m in range(3):
        e = np.zeros(3)
        e[m] = h
        up = _match(eigs.vectors, diagonalize(build_hamiltonian(system, level, b + e)))
        dn = _match(eigs.vectors, diagonalize(build_hamiltonian(system, level, b - e)))
        diff = _refined_energies(system, level, b + e, up) - _refined_energies(system, level, b - e, dn)
        out[:, m] = (diff / np.longdouble(2 * h)).astype(float)
    return out


def level_gradients(system, level, field):
    """Gradients of all four levels as :class:`LevelGradient` records."""
    b = as_field(field)
    zero = zero_field_eigensystem(system, level)
    _warn_if_not_perturbative(system, level, b, zero)
    eigs = labelled_eigensystem(system, level, b, zero)
    _, g = system.tensors(level)
    mu_b = system.bohr_magneton_over_h
    spins = _spins(eigs)
    analytic = mu_b * spins @ g.matrix.T
    fd = finite_difference_gradients(system, level, b, eigs)
    out = []
    for k in range(1, 5):
        try:
            first, _ = first_order_spin(system, level, k, b, zero)
            first = mu_b * g.matrix @ first
        except DegenerateLevelsError:
            first = None
        out.append(LevelGradient(k, analytic[k - 1], fd[k - 1], first, spins[k - 1]))
    return out


def level_gradient(system, level, k, field):
    """dE_k/dB (Hz/T) by the Hellmann-Feynman route, finite differences and closed form."""
    _check_label(k)
    return level_gradients(system, level, field)[k - 1]


def _analytic_level_gradients(system, level, field, zero=None):
    eigs = labelled_eigensystem(system, level, field, zero)
    _, g = system.tensors(level)
    return system.bohr_magneton_over_h * _spins(eigs) @ g.matrix.T


def s1_transition_gradient(system, level, pair, field, direction=None, _zero=None):
    """Gradient of the transition frequency f_kl = E_l - E_k with respect to B."""
    k, l = _check_pair(pair)
    b = as_field(field)
    grads = _analytic_level_gradients(system, level, b, _zero)
    vec = grads[l - 1] - grads[k - 1]
    directional = None
    if direction is not None:
        u = np.asarray(direction, float)
        directional = float(vec @ (u / np.linalg.norm(u)))
    return S1Result((k, l), vec, float(np.linalg.norm(vec)), directional)


def effective_moment(system, level, pair, field, _zero=None):
    """Differential magnetic moment of the two transition states, in Bohr magnetons.

    ``-(dE_l/dB - dE_k/dB) / muB``; it vanishes wherever the transition has
    zero first-order Zeeman shift.
    """
    s1 = s1_transition_gradient(system, level, pair, field, _zero=_zero)
    return -s1.gradient / system.bohr_magneton_over_h


def _map_rows(fn, rows, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, rows))
    return [fn(r) for r in rows]


def s1_map(system, level, pair, plane=("D1", "D2"), axis1=(), axis2=(), offset=0.0, threads=None):
    """S1 norm on a rectangular grid in a plane spanned by two crystal axes.

    ``values[i, j]`` is evaluated at ``axis1[j]`` along ``plane[0]`` and
    ``axis2[i]`` along ``plane[1]``, with ``offset`` along the third axis.
    """
    ia, ib = (_axis_index(p) for p in plane)
    if ia == ib:
        raise ValueError("plane needs two distinct axes")
    ic = 3 - ia - ib
    x = np.asarray(axis1, float)
    y = np.asarray(axis2, float)
    if x.size < 2 or y.size < 2:
        raise ValueError("grid must be at least 2x2")
    zero = zero_field_eigensystem(system, level)

    def row(yv):
        out = np.empty(x.size)
        for j, xv in enumerate(x):
            b = np.zeros(3)
            b[ia], b[ib], b[ic] = xv, yv, offset
            out[j] = s1_transition_gradient(system, level, pair, b, _zero=zero).norm
        return out

    values = np.array(_map_rows(row, y, threads))
    return GradientMap(tuple(plane), x, y, values, _check_pair(pair), float(offset))


def _plane_field(plane, magnitude, phi_deg, offset=0.0):
    ia, ib = (_axis_index(p) for p in plane)
    b = np.zeros(3)
    b[3 - ia - ib] = offset
    phi = math.radians(phi_deg)
    b[ia] += magnitude * math.cos(phi)
    b[ib] += magnitude * math.sin(phi)
    return b


def s1_angle_scan(system, level, pair, magnitude, angles_deg=None, plane=("D1", "D2"), offset=0.0):
    """S1 norm on a circle of radius ``magnitude`` (T), angle measured from ``plane[0]``."""
    if angles_deg is None:
        angles_deg = np.arange(0.0, 180.0, 0.1)
    angles = np.asarray(angles_deg, float)
    zero = zero_field_eigensystem(system, level)
    vals = np.array([
        s1_transition_gradient(system, level, pair, _plane_field(plane, magnitude, a, offset), _zero=zero).norm
        for a in angles
    ])
    return AngleScan(tuple(plane), float(magnitude), angles, vals, _check_pair(pair))


def min_gradient_angle(system, level, pair, magnitude, plane=("D1", "D2"), step_deg=0.5):
    """Angle in [0, 180) deg of minimal S1 norm, refined by bounded scalar minimisation."""
    scan = s1_angle_scan(system, level, pair, magnitude, np.arange(0.0, 180.0, step_deg), plane)
    a0 = scan.argmin_deg
    zero = zero_field_eigensystem(system, level)

    def f(a):
        return s1_transition_gradient(system, level, pair, _plane_field(plane, magnitude, a), _zero=zero).norm

    res = optimize.minimize_scalar(f, bounds=(a0 - step_deg, a0 + step_deg), method="bounded",
                                   options={"xatol": 1e-6})
    return float(res.x % 180.0)


def zefoz_search(system, level, pair, initial, bounds=500e-6, bias=(0.0, 0.0, 0.0),
                 xatol=1e-12, max_iter=5000, s1_tol=None, restarts=3):
    """Locate the applied field that zeroes the transition's first-order Zeeman shift.

    The model field is ``applied + bias``; ``bounds`` is a half-width (T) or a
    ``(lower, upper)`` pair of 3-vectors for the applied field. Minimisation
    is a bounded Nelder-Mead simplex on the S1 norm, carried out in microtesla.
    The result counts as converged only if the simplex terminated normally
    and the final S1 norm is below ``s1_tol`` (Hz/T, default 1e-6 of the
    largest electronic moment mu_B g_max); a minimum pinned to the box edge
    therefore reports failure. Up to ``restarts`` fresh simplices are tried
    from the last point when the tolerance is missed.
    """
    x0 = as_field(initial) * 1e6
    bias = as_field(bias)
    if np.isscalar(bounds):
        lo, hi = -np.full(3, float(bounds)), np.full(3, float(bounds))
    else:
        lo, hi = (as_field(v) for v in bounds)
    lo, hi = lo * 1e6, hi * 1e6
    if np.any(x0 < lo) or np.any(x0 > hi):
        raise ValueError("initial field lies outside the bounds")
    zero = zero_field_eigensystem(system, level)

    def objective(x_ut):
        return s1_transition_gradient(system, level, pair, x_ut * 1e-6 + bias, _zero=zero).norm

    if s1_tol is None:
        _, g = system.tensors(level)
        s1_tol = 1e-6 * system.bohr_magneton_over_h * float(np.max(np.abs(g.principal_values)))
    span = np.maximum(0.05 * (hi - lo), 1.0)

    def simplex_at(x):
        step = np.where(x + span <= hi, span, -span)
        return np.array([x] + [np.clip(x + np.eye(3)[i] * step[i], lo, hi) for i in range(3)])

    # the S1 norm has a narrow valley along the minimum-gradient direction; a
    # simplex flattened against a box face can stall there, so rebuild it
    x, iters, evals = x0, 0, 0
    for _ in range(1 + restarts):
        res = optimize.minimize(
            objective, x, method="Nelder-Mead", bounds=list(zip(lo, hi)),
            options={"xatol": xatol * 1e6, "fatol": 0.0, "maxiter": max_iter, "maxfev": 4 * max_iter,
                     "initial_simplex": simplex_at(x), "adaptive": True},
        )
        x, iters, evals = res.x, iters + int(res.nit), evals + int(res.nfev)
        if res.success and float(res.fun) <= s1_tol:
            break
    ok = bool(res.success) and float(res.fun) <= s1_tol
    message = str(res.message) if ok or not res.success else (
        f"S1 norm {float(res.fun):.3e} Hz/T exceeds {s1_tol:.3e} Hz/T")
    result = ZefozResult(res.x * 1e-6, float(res.fun), ok, iters, evals, message)
    if not result.converged:
        warnings.warn(f"ZEFOZ search did not converge: {message}", RuntimeWarning, stacklevel=2)
    return result
