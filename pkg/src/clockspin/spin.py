"""Effective spin Hamiltonian of an S=1/2, I=1/2 Kramers ion with anisotropic hyperfine.

The Hamiltonian is ``H = S.A.I + muB B.g.S`` in the product basis
``|mS, mI>`` ordered (up-up, up-down, down-up, down-down). All energies
are in Hz and fields in tesla; the nuclear Zeeman term is dropped.

Levels are labelled 1..4 in order of increasing zero-field energy, which
is how pairs such as ``(2, 4)`` are passed around the package.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import constants
from scipy.spatial.transform import Rotation

from .linalg import check_hermitian, jacobi_eigh

BOHR_MAGNETON_HZ_PER_T = constants.physical_constants["Bohr magneton in Hz/T"][0]
GAMMA_Y89 = 2.095e6  # Hz/T
AXES = ("D1", "D2", "b")

_PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
_EYE2 = np.eye(2, dtype=complex)
# electron operators act on the first tensor factor, nuclear on the second
S_OPS = np.array([np.kron(p / 2, _EYE2) for p in _PAULI])
I_OPS = np.array([np.kron(_EYE2, p / 2) for p in _PAULI])
PAIRS = tuple(itertools.combinations(range(1, 5), 2))


class SpinModelError(ValueError):
    """Invalid spin-system configuration or input."""


@dataclass(frozen=True)
class InteractionTensor:
    """Symmetric rank-2 tensor given by principal values and orientation.

    ``orientation`` maps the principal frame to the crystal frame (D1, D2, b);
    its columns are the principal axes expressed in crystal coordinates.
    """

    principal_values: np.ndarray
    orientation: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        pv = np.asarray(self.principal_values, dtype=float)
        rot = np.asarray(self.orientation, dtype=float)
        if pv.shape != (3,) or rot.shape != (3, 3):
            raise SpinModelError("tensor needs 3 principal values and a 3x3 orientation")
        if not (np.all(np.isfinite(pv)) and np.all(np.isfinite(rot))):
            raise SpinModelError("tensor entries must be finite")
        if np.max(np.abs(rot.T @ rot - np.eye(3))) > 1e-12 or abs(np.linalg.det(rot) - 1) > 1e-12:
            raise SpinModelError("orientation must be a proper rotation (orthogonal, det +1)")
        object.__setattr__(self, "principal_values", pv)
        object.__setattr__(self, "orientation", rot)

    @classmethod
    def from_euler(cls, principal_values, angles_deg, seq="ZYZ"):
        """Build from intrinsic Euler angles (degrees)."""
        rot = Rotation.from_euler(seq, angles_deg, degrees=True).as_matrix()
        # re-orthonormalise so the 1e-12 orientation check is met exactly
        u, _, vt = np.linalg.svd(rot)
        return cls(principal_values, u @ vt)

    @property
    def matrix(self):
        r = self.orientation
        m = r @ np.diag(self.principal_values) @ r.T
        return 0.5 * (m + m.T)

    def rotated(self, rot):
        return InteractionTensor(self.principal_values, np.asarray(rot) @ self.orientation)


@dataclass(frozen=True)
class SpinSystem:
    """Ground/excited hyperfine and Zeeman tensors plus host-nucleus data."""

    A_ground: InteractionTensor
    g_ground: InteractionTensor
    A_excited: InteractionTensor | None = None
    g_excited: InteractionTensor | None = None
    gamma_nuclear_host: float = GAMMA_Y89
    bohr_magneton_over_h: float = BOHR_MAGNETON_HZ_PER_T

    def __post_init__(self):
        if not self.gamma_nuclear_host > 0:
            raise SpinModelError("gamma_nuclear_host must be positive")
        if not (np.isfinite(self.gamma_nuclear_host) and np.isfinite(self.bohr_magneton_over_h)):
            raise SpinModelError("constants must be finite")

    def tensors(self, level="ground"):
        if level == "ground":
            return self.A_ground, self.g_ground
        if level == "excited":
            if self.A_excited is None or self.g_excited is None:
                raise SpinModelError("excited-state tensors are not configured")
            return self.A_excited, self.g_excited
        raise SpinModelError(f"unknown electronic level {level!r}")

    def rotated(self, rot):
        """Same system with every tensor rotated by ``rot`` (crystal frame)."""
        rot = np.asarray(rot)
        kw = {}
        for name in ("A_ground", "g_ground", "A_excited", "g_excited"):
            t = getattr(self, name)
            kw[name] = None if t is None else t.rotated(rot)
        return SpinSystem(**kw, gamma_nuclear_host=self.gamma_nuclear_host,
                          bohr_magneton_over_h=self.bohr_magneton_over_h)


@dataclass(frozen=True)
class EigenSystem:
    energies: np.ndarray  # Hz, ascending
    vectors: np.ndarray  # columns paired with energies

    def residual(self, h):
        return np.linalg.norm(h @ self.vectors - self.vectors * self.energies, axis=0)


@dataclass(frozen=True)
class Transition:
    pair: tuple
    frequency: float  # Hz
    moments: np.ndarray  # |<l|mu_m|k>| along D1, D2, b in Hz/T


@dataclass(frozen=True)
class TransitionTable:
    transitions: tuple

    def __iter__(self):
        return iter(self.transitions)

    def __len__(self):
        return len(self.transitions)

    def __getitem__(self, pair):
        for t in self.transitions:
            if t.pair == tuple(pair):
                return t
        raise KeyError(pair)

    def frequency(self, k, l):
        return self[(k, l)].frequency

    def frequencies(self):
        return np.array([t.frequency for t in self.transitions])


def as_field(field):
    b = np.asarray(field, dtype=float).reshape(-1)
    if b.shape != (3,):
        raise SpinModelError("field must have three components (B_D1, B_D2, B_b)")
    if not np.all(np.isfinite(b)):
        raise SpinModelError("field components must be finite")
    return b


def build_hamiltonian(system, level="ground", field=(0.0, 0.0, 0.0), dtype=complex):
    """Return the 4x4 Hamiltonian (Hz) for ``level`` at crystal-frame ``field`` (T).

    ``dtype=np.clongdouble`` assembles it in extended precision.
    """
    b = as_field(field)
    A, g = system.tensors(level)
    real = np.real(np.zeros(1, dtype)).dtype
    a = A.matrix.astype(real)
    s_ops, i_ops = S_OPS.astype(dtype), I_OPS.astype(dtype)
    h = np.einsum("ab,aij,bjk->ik", a, s_ops, i_ops)
    zeeman = real.type(system.bohr_magneton_over_h) * (b.astype(real) @ g.matrix.astype(real))
    h = h + np.einsum("b,bij->ij", zeeman, s_ops)
    return (h + h.conj().T) / 2


def magnetic_moment_operators(system, level="ground"):
    """Operators mu_m = muB sum_b g_mb S_b along the crystal axes, in Hz/T."""
    _, g = system.tensors(level)
    return system.bohr_magneton_over_h * np.einsum("mb,bij->mij", g.matrix, S_OPS)


def diagonalize(h):
    """Sorted eigenvalues and phase-fixed orthonormal eigenvectors of ``h``."""
    h = check_hermitian(h)
    w, v = jacobi_eigh(h)
    return EigenSystem(w, v)


def transition_table(eigs, system, level="ground", field=None):
    """All six pairwise transitions with frequencies and magnetic matrix elements.

    ``field`` is accepted for symmetry with the other entry points; the
    eigensystem already encodes it.
    """
    mu = magnetic_moment_operators(system, level)
    v = eigs.vectors
    out = []
    for k, l in PAIRS:
        f = eigs.energies[l - 1] - eigs.energies[k - 1]
        elems = np.abs(np.einsum("i,mij,j->m", v[:, l - 1].conj(), mu, v[:, k - 1]))
        out.append(Transition((k, l), float(max(f, 0.0)), elems))
    return TransitionTable(tuple(out))


def zero_field_levels(A):
    """Closed-form zero-field energies (Hz, ascending) of ``S.A.I``.

    Accepts an :class:`InteractionTensor` or three principal values.
    """
    pv = A.principal_values if isinstance(A, InteractionTensor) else np.asarray(A, float)
    ax, ay, az = pv
    levels = np.array([
        (az + ax - ay) / 4,
        (az - ax + ay) / 4,
        (-az + ax + ay) / 4,
        -(ax + ay + az) / 4,
    ])
    return np.sort(levels)


def principal_values_from_ladder(gaps):
    """Every hyperfine principal-value triple reproducing a zero-field gap ladder.

    ``gaps`` are the three consecutive level spacings (Hz, bottom to top).
    The closed form is linear, so each assignment of the sorted levels to the
    four product states gives one candidate; candidates are deduplicated up to
    relabelling of the principal axes and returned sorted.
    """
    g1, g2, g3 = (float(x) for x in gaps)
    if min(g1, g2, g3) < 0:
        raise SpinModelError("gaps must be non-negative")
    e1 = -(3 * g1 + 2 * g2 + g3) / 4
    levels = np.array([e1, e1 + g1, e1 + g1 + g2, e1 + g1 + g2 + g3])
    found = []
    for perm in itertools.permutations(range(4)):
        ea, eb, ec, _ = levels[list(perm)]
        cand = np.array([2 * (ea + ec), 2 * (eb + ec), 2 * (ea + eb)])
        if not np.allclose(zero_field_levels(cand), levels, rtol=0, atol=1e-9 * np.abs(levels).max()):
            continue
        key = np.sort(cand)
        if not any(np.allclose(key, f, rtol=1e-12, atol=0) for f in found):
            found.append(key)
    return [np.array(f) for f in sorted(found, key=tuple)]


def zero_field_eigensystem(system, level="ground"):
    return diagonalize(build_hamiltonian(system, level, (0.0, 0.0, 0.0)))


def level_ladder(system, level="ground"):
    """Consecutive zero-field gaps (Hz)."""
    return np.diff(zero_field_eigensystem(system, level).energies)
