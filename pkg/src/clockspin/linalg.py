"""Cyclic Jacobi eigensolver for small dense Hermitian matrices."""

from __future__ import annotations

import math

import numpy as np

HERMITIAN_RTOL = 1e-12
OFFDIAG_RTOL = 1e-13
MAX_SWEEPS = 50


class NotHermitianError(ValueError):
    pass


def check_hermitian(a, rtol=HERMITIAN_RTOL):
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotHermitianError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NotHermitianError("matrix has non-finite entries")
    scale = np.max(np.abs(a))
    if np.max(np.abs(a - a.conj().T)) > rtol * max(scale, np.finfo(float).tiny):
        raise NotHermitianError("matrix is not Hermitian within tolerance")
    return a


def _off_norm(a):
    off = a[~np.eye(a.shape[0], dtype=bool)]
    return float(np.sqrt(np.sum(off.real**2 + off.imag**2)))


def fix_phases(vectors):
    """Rotate each column so its largest-magnitude component is real and positive."""
    v = np.array(vectors, dtype=complex)
    for k in range(v.shape[1]):
        i = int(np.argmax(np.abs(v[:, k])))
        z = v[i, k]
        if z != 0:
            v[:, k] *= abs(z) / z
            v[i, k] = abs(v[i, k])
    return v


def jacobi_eigh(a, tol=OFFDIAG_RTOL, max_sweeps=MAX_SWEEPS):
    """Eigen-decompose a Hermitian matrix by cyclic complex Jacobi rotations.

    Sweeps run over every (p, q) pair until the off-diagonal Frobenius norm
    falls below ``tol`` times the Frobenius norm of the input.

    Returns
    -------
    w : ndarray, shape (n,)
        Eigenvalues in ascending order.
    v : ndarray, shape (n, n)
        Orthonormal eigenvectors as columns, phase-fixed by :func:`fix_phases`.
    """
    a = check_hermitian(a)
    n = a.shape[0]
    scale = float(np.linalg.norm(a))
    if scale == 0.0:
        return np.zeros(n), np.eye(n, dtype=complex)
    threshold = tol * scale
    # exact Hermitian symmetrisation: rounding in the input must not bias rotations
    h = 0.5 * (a + a.conj().T)
    # plain nested lists: numpy indexing overhead dominates at this size
    m = h.tolist()
    v = np.eye(n, dtype=complex).tolist()

    def off():
        return math.sqrt(sum(abs(m[i][j]) ** 2 for i in range(n) for j in range(n) if i != j))

    for _ in range(max_sweeps):
        if off() <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = m[p][q]
                mag = abs(apq)
                if mag <= 1e-300 or mag < 1e-18 * scale:
                    continue
                phase = apq / mag
                app = m[p][p].real
                aqq = m[q][q].real
                zeta = (aqq - app) / (2.0 * mag)
                t = 1.0 / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                if zeta < 0:
                    t = -t
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # columns p, q of the unitary: [c, s*phase; -s*conj(phase), c]
                sp, spc = s * phase, s * phase.conjugate()
                for row in m:
                    x, y = row[p], row[q]
                    row[p] = c * x - spc * y
                    row[q] = sp * x + c * y
                rp, rq = m[p], m[q]
                for j in range(n):
                    x, y = rp[j], rq[j]
                    rp[j] = c * x - sp * y
                    rq[j] = spc * x + c * y
                rp[q] = rq[p] = 0j
                rp[p] = complex(rp[p].real)
                rq[q] = complex(rq[q].real)
                for row in v:
                    x, y = row[p], row[q]
                    row[p] = c * x - spc * y
                    row[q] = sp * x + c * y
    else:
        if off() > threshold:
            raise np.linalg.LinAlgError("Jacobi iteration did not converge")

    w = np.array([m[i][i].real for i in range(n)])
    order = np.argsort(w, kind="stable")
    return w[order], fix_phases(np.array(v, dtype=complex)[:, order])
