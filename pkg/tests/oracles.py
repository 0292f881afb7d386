"""Reference implementations that share no code path with the package."""

import math

import numpy as np
from scipy import constants

MU_B = 9.2740100783e-24  # J/T


def charpoly_eigvals(h):
    """Eigenvalues of a Hermitian matrix from its characteristic polynomial.

    Coefficients via Faddeev-LeVerrier, roots polished by Newton iteration.
    """
    n = h.shape[0]
    c = [1.0 + 0j]
    m = np.zeros_like(h)
    for k in range(1, n + 1):
        m = h @ m + c[-1] * np.eye(n)
        c.append(-np.trace(h @ m) / k)
    coeffs = np.real(np.array(c))
    roots = np.sort(np.real(np.roots(coeffs)))
    p = np.poly1d(coeffs)
    dp = p.deriv()
    for _ in range(20):
        d = dp(roots)
        step = np.where(np.abs(d) > 0, p(roots) / np.where(d == 0, 1, d), 0)
        roots = roots - step
    return np.sort(roots)


def nullvector(h, e):
    """Unit vector spanning the kernel of h - e (via the smallest singular vector)."""
    _, _, vh = np.linalg.svd(h - e * np.eye(h.shape[0]))
    return vh[-1].conj()


def dipole_tensor_couplings(moment_muB, position, field_dir, gamma):
    """Couplings from the explicit 3x3 dipolar tensor D with B_dip = D . mu."""
    r = np.asarray(position, float)
    d = float(np.sqrt(r @ r))
    n = r / d
    tensor = np.zeros((3, 3))
    for i in range(3):
        for j in range(3):
            tensor[i, j] = (3 * n[i] * n[j] - (1.0 if i == j else 0.0))
    tensor *= constants.mu_0 / (4 * math.pi) / d**3
    bdip = tensor @ (np.asarray(moment_muB, float) * MU_B)
    u = np.asarray(field_dir, float) / np.linalg.norm(field_dir)
    par = sum(bdip[i] * u[i] for i in range(3))
    perp_vec = bdip - par * u
    return gamma * par, gamma * math.sqrt(sum(x * x for x in perp_vec))


def rabi_dense(omega, t, sigma, n=20001, width=9.0):
    """Gaussian detuning average by Simpson's rule on a dense uniform grid."""
    from scipy.integrate import simpson

    det = np.linspace(-width * sigma, width * sigma, n)  # Hz
    gauss = np.exp(-det**2 / (2 * sigma**2)) / (sigma * math.sqrt(2 * math.pi))
    d = 2 * math.pi * det
    gen = np.sqrt(omega**2 + d**2)
    integrand = gauss[:, None] * (omega**2 / gen**2)[:, None] * np.sin(np.outer(gen, t) / 2) ** 2
    return simpson(integrand, x=det, axis=0)


def central_jacobian(f, p, rel=1e-6, scale=None):
    """Central differences; ``scale`` sets a per-parameter step floor."""
    p = np.asarray(p, float)
    floor = np.full(p.size, 1e-12) if scale is None else np.asarray(scale, float)
    cols = []
    for i in range(p.size):
        h = rel * max(abs(p[i]), floor[i])
        up, dn = p.copy(), p.copy()
        up[i] += h
        dn[i] -= h
        cols.append((f(up) - f(dn)) / (2 * h))
    return np.column_stack(cols)
