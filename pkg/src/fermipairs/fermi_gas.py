"""Conditional spin state of a fermion pair extracted from a filled Fermi sphere.

All lengths are dimensionless, measured in units of the inverse Fermi
wavenumber 1/k_f, and all momenta in units of k_f.  Detection is modeled by
wavepacket-mode (coherent) detectors: a point-like detector annihilates a
plane-wave superposition over the Fermi sphere, a Gaussian detector of width
``sigma`` weights each momentum amplitude by exp(-sigma^2 p^2 / 2), so
expectation values carry the squared weight exp(-sigma^2 p^2).
"""

import math
from dataclasses import dataclass

import numpy as np

from .spin_algebra import SWAP

__all__ = [
    "DetectorProfile",
    "POINT_LIKE",
    "PairQuery",
    "FiniteModeGas",
    "kernel",
    "pair_state",
    "pair_state_on_grid",
    "wick_oracle",
]


@dataclass(frozen=True)
class DetectorProfile:
    """Gaussian smearing profile of the detector; ``sigma = 0`` is point-like."""

    sigma: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.sigma) or self.sigma < 0:
            raise ValueError(f"detector width must be finite and >= 0, got {self.sigma!r}")

    @property
    def is_point_like(self) -> bool:
        return self.sigma == 0.0

    @property
    def kind(self) -> str:
        return "point-like" if self.is_point_like else "gaussian"

    def mode_amplitude(self, p_squared):
        """Momentum-space detector amplitude exp(-sigma^2 p^2 / 2)."""
        return np.exp(-0.5 * self.sigma**2 * np.asarray(p_squared, dtype=float))


POINT_LIKE = DetectorProfile(0.0)


@dataclass(frozen=True)
class PairQuery:
    """Dimensionless detector separation ``x = k_f |r - r'|`` plus the shared profile."""

    x: float
    profile: DetectorProfile = POINT_LIKE

    def __post_init__(self):
        if not math.isfinite(self.x) or self.x < 0:
            raise ValueError(f"separation must be finite and >= 0, got {self.x!r}")


_LEGENDRE_CACHE: dict = {}


def _gauss_legendre_unit(n: int):
    """Gauss-Legendre nodes and weights mapped onto [0, 1]."""
    if n not in _LEGENDRE_CACHE:
        nodes, weights = np.polynomial.legendre.leggauss(n)
        _LEGENDRE_CACHE[n] = (0.5 * (nodes + 1.0), 0.5 * weights)
    return _LEGENDRE_CACHE[n]


def _radial_integral(x: float, sigma: float, rtol: float = 1e-10) -> float:
    """integral_0^1 p^2 exp(-sigma^2 p^2) sinc(p x) dp by order-doubling Gauss-Legendre."""
    previous = None
    n = 16
    while True:
        p, w = _gauss_legendre_unit(n)
        f = p * p * np.exp(-((sigma * p) ** 2)) * np.sinc(p * x / np.pi)
        value = float(w @ f)
        if previous is not None and abs(value - previous) <= rtol * abs(value):
            return value
        if n >= 4096:
            return value
        previous = value
        n *= 2


def _kernel_point_like(x: float) -> float:
    # Series below x = 0.02 avoids the cancellation in sin x - x cos x.
    if x < 0.02:
        x2 = x * x
        return 1.0 - x2 / 10.0 + x2 * x2 / 280.0
    return 3.0 * (math.sin(x) - x * math.cos(x)) / x**3


def kernel(x: float, profile: DetectorProfile = POINT_LIKE) -> float:
    """Normalized one-body correlation g(x) of the smeared Fermi sphere.

    g(x) is the equal-spin amplitude <Psi^+(0) Psi(x)> divided by its x = 0
    value, with momentum weight exp(-sigma^2 p^2) over the unit Fermi sphere.
    For a point-like detector this is the closed form
    3 (sin x - x cos x) / x^3, which first vanishes at x = 4.4934
    (the root of tan x = x).  g(0) = 1 exactly and |g| <= 1.
    """
    if not math.isfinite(x) or x < 0:
        raise ValueError(f"separation must be finite and >= 0, got {x!r}")
    if profile.is_point_like:
        return _kernel_point_like(x)
    if x == 0.0:
        return 1.0
    return _radial_integral(x, profile.sigma) / _radial_integral(0.0, profile.sigma)


def pair_state(query: PairQuery) -> np.ndarray:
    """Two-qubit spin state of a pair detected at separation ``query.x``.

    Wick factorization of the conditional two-body density operator in the
    filled Fermi sea gives, in units where g(0) = 1,

        rho = (I - g^2 SWAP) / (4 - 2 g^2),

    a Werner state with singlet visibility v = g^2 / (2 - g^2).  At x = 0
    the pair is the pure singlet; as g -> 0 it tends to I/4.
    """
    if query.x < 1e-8:
        g2 = 1.0  # same-point pair is exactly the singlet
    else:
        g = kernel(query.x, query.profile)
        g2 = g * g
    return (np.eye(4, dtype=complex) - g2 * SWAP) / (4.0 - 2.0 * g2)


@dataclass(frozen=True)
class FiniteModeGas:
    """Discretized Fermi sphere: M <= 8 momentum modes inside the unit ball."""

    momenta: np.ndarray

    def __post_init__(self):
        momenta = np.atleast_2d(np.asarray(self.momenta, dtype=float))
        if momenta.ndim != 2 or momenta.shape[1] != 3:
            raise ValueError(f"momenta must have shape (M, 3), got {momenta.shape}")
        m = momenta.shape[0]
        if m == 0:
            raise ValueError("momentum grid is empty")
        if m > 8:
            raise ValueError(f"at most 8 modes supported, got {m}")
        norms = np.linalg.norm(momenta, axis=1)
        if np.any(norms > 1.0 + 1e-12):
            raise ValueError("all grid momenta must lie inside the unit Fermi sphere")
        momenta.setflags(write=False)
        object.__setattr__(self, "momenta", momenta)

    @property
    def n_modes(self) -> int:
        return self.momenta.shape[0]

    def amplitudes(self, profile: DetectorProfile) -> np.ndarray:
        """Per-mode detector amplitudes at the grid momenta."""
        p_squared = np.sum(self.momenta**2, axis=1)
        return profile.mode_amplitude(p_squared)


def pair_state_on_grid(gas: FiniteModeGas, query: PairQuery) -> np.ndarray:
    """Wick-factorized pair state evaluated on a discrete momentum grid.

    Same construction as :func:`pair_state` but with the radial integral
    replaced by the grid sum K = sum_k w_k^2 exp(i p_k . d); only |K|
    enters the state.
    """
    weights = gas.amplitudes(query.profile) ** 2
    phases = np.exp(1j * gas.momenta[:, 2] * query.x)
    k_sum = complex(np.sum(weights * phases))
    g0 = float(np.sum(weights))
    g2 = abs(k_sum) ** 2 / g0**2
    return (np.eye(4, dtype=complex) - g2 * SWAP) / (4.0 - 2.0 * g2)


def _annihilate(state: dict, amplitudes: np.ndarray, spin: int) -> dict:
    """Apply sum_k c_k b_{spin,k} to a sparse Fock vector.

    Basis states are occupation bitmasks with orbital 2k + spin at bit
    2k + spin; the Jordan-Wigner sign counts occupied orbitals below the
    one annihilated.
    """
    out: dict = {}
    n_modes = len(amplitudes)
    for basis, amp in state.items():
        for k in range(n_modes):
            bit = 1 << (2 * k + spin)
            if basis & bit:
                sign = -1.0 if (basis & (bit - 1)).bit_count() & 1 else 1.0
                new_basis = basis ^ bit
                out[new_basis] = out.get(new_basis, 0.0j) + sign * amplitudes[k] * amp
    return out


def _overlap(bra: dict, ket: dict) -> complex:
    if len(bra) <= len(ket):
        return complex(sum(np.conj(a) * ket.get(b, 0.0j) for b, a in bra.items()))
    return complex(sum(np.conj(bra.get(b, 0.0j)) * a for b, a in ket.items()))


def wick_oracle(gas: FiniteModeGas, query: PairQuery) -> np.ndarray:
    """Brute-force pair state on a discrete grid, bypassing Wick's theorem.

    Fills every mode of the gas with both spins, applies the smeared
    annihilation operators for the two detection points directly in the
    4^M-dimensional occupation space, and assembles the conditional
    two-spin operator

        rho[(s,s'), (t,t')] = <Phi0| Psi^+_{t'}(r') Psi^+_t(r)
                                     Psi_{s'}(r') Psi_s(r) |Phi0>

    normalized to unit trace.  The printed operator ordering makes the raw
    matrix negative semidefinite; dividing by its (negative) trace yields
    the physical state, so the result is directly comparable to
    :func:`pair_state_on_grid`.
    """
    amps = gas.amplitudes(query.profile).astype(complex)
    # r = 0 and r' = x * z_hat; only the separation vector matters.
    coeff_r = amps.copy()
    coeff_rp = amps * np.exp(1j * gas.momenta[:, 2] * query.x)

    filled = (1 << (2 * gas.n_modes)) - 1
    ground = {filled: 1.0 + 0.0j}

    # phi[s, s'] = Psi_{s'}(r') Psi_s(r) |Phi0>
    phi = [[None, None], [None, None]]
    chi = [[None, None], [None, None]]
    for first in (0, 1):
        after_r = _annihilate(ground, coeff_r, first)
        after_rp = _annihilate(ground, coeff_rp, first)
        for second in (0, 1):
            phi[first][second] = _annihilate(after_r, coeff_rp, second)
            chi[second][first] = _annihilate(after_rp, coeff_r, second)

    rho = np.empty((4, 4), dtype=complex)
    for s in (0, 1):
        for sp in (0, 1):
            for t in (0, 1):
                for tp in (0, 1):
                    rho[2 * s + sp, 2 * t + tp] = _overlap(chi[t][tp], phi[s][sp])
    trace = rho.trace()
    if abs(trace) < 1e-300:
        raise ValueError("degenerate grid: conditional state has zero norm")
    return rho / trace
