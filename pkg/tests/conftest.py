import numpy as np


def random_density_matrix(rng, dim=4):
    """Ginibre-sampled density matrix: PSD, unit trace."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    return rho / rho.trace().real


def random_unitary(rng, dim=2):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_mode_grid(rng, n_modes):
    """Random momenta strictly inside the unit ball."""
    points = rng.standard_normal((n_modes, 3))
    points /= np.linalg.norm(points, axis=1, keepdims=True)
    return points * rng.uniform(0.15, 0.98, size=(n_modes, 1))


def bisect(f, lo, hi, tol=1e-12):
    """Plain bisection; the sign of f must differ at the endpoints."""
    f_lo, f_hi = f(lo), f(hi)
    assert f_lo * f_hi < 0, "root not bracketed"
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) * f_lo <= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
