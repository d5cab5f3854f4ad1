"""Exact algebra for one- and two-qubit Hermitian operators in the Pauli basis."""

import numpy as np

__all__ = [
    "pauli",
    "tensor_basis",
    "decompose",
    "compose",
    "is_physical",
    "bloch_vector",
    "singlet_state",
    "maximally_mixed",
    "fidelity",
    "trace_distance",
    "SWAP",
]

_SIGMA = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

# S[mu, nu] = sigma_mu (x) sigma_nu; qubit 1 is the left tensor factor.
_S = np.empty((4, 4, 4, 4), dtype=complex)
for _m in range(4):
    for _n in range(4):
        _S[_m, _n] = np.kron(_SIGMA[_m], _SIGMA[_n])
_S.setflags(write=False)

SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)
SWAP.setflags(write=False)

_SINGLET_KET = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
_SINGLET = np.outer(_SINGLET_KET, _SINGLET_KET.conj())
_SINGLET.setflags(write=False)


def pauli(mu: int) -> np.ndarray:
    """Pauli matrix sigma_mu: identity for mu=0, x/y/z for mu=1,2,3."""
    if mu not in (0, 1, 2, 3):
        raise ValueError(f"Pauli index must be in 0..3, got {mu!r}")
    return _SIGMA[mu].copy()


def tensor_basis(mu: int, nu: int) -> np.ndarray:
    """Two-qubit basis element S_{mu,nu} = sigma_mu (x) sigma_nu."""
    if mu not in (0, 1, 2, 3) or nu not in (0, 1, 2, 3):
        raise ValueError(f"basis indices must be in 0..3, got ({mu!r}, {nu!r})")
    return _S[mu, nu].copy()


def _check_hermitian(m: np.ndarray, tol: float, what: str) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.shape != (4, 4):
        raise ValueError(f"{what} must be a 4x4 matrix, got shape {m.shape}")
    if np.max(np.abs(m - m.conj().T)) > tol:
        raise ValueError(f"{what} is not Hermitian within {tol:g}")
    return m


def decompose(rho: np.ndarray) -> np.ndarray:
    """Pauli coefficients a[mu, nu] = Tr(S_{mu,nu} rho) of a two-qubit operator.

    The result is real for Hermitian input; a[0, 0] is the trace.
    """
    rho = np.asarray(rho, dtype=complex)
    a = np.einsum("mnij,ji->mn", _S, rho)
    if np.max(np.abs(a.imag)) > 1e-9:
        raise ValueError("coefficients have non-negligible imaginary part; "
                         "input is not Hermitian")
    return a.real.copy()


def compose(a: np.ndarray) -> np.ndarray:
    """Rebuild the 4x4 operator (1/4) sum_{mu,nu} a[mu,nu] S_{mu,nu}.

    Requires a[0, 0] = 1 so the result has unit trace; Hermiticity is
    automatic, positivity is not (use :func:`is_physical` to check).
    """
    a = np.asarray(a, dtype=float)
    if a.shape != (4, 4):
        raise ValueError(f"coefficient array must be 4x4, got shape {a.shape}")
    if abs(a[0, 0] - 1.0) > 1e-9:
        raise ValueError(f"a[0][0] must equal 1, got {a[0, 0]!r}")
    return 0.25 * np.einsum("mn,mnij->ij", a, _S)


def is_physical(m: np.ndarray, tol: float = 1e-10):
    """Whether a Hermitian 4x4 matrix is a density operator.

    Returns (ok, min_eigenvalue) with ok true iff the trace is within
    ``tol`` of 1 and the smallest eigenvalue is >= -tol.  Raises for
    non-Hermitian input.
    """
    m = _check_hermitian(m, max(tol, 1e-12), "matrix")
    eigs = np.linalg.eigvalsh(m)
    min_eig = float(eigs[0])
    ok = abs(m.trace().real - 1.0) <= tol and min_eig >= -tol
    return ok, min_eig


def bloch_vector(rho: np.ndarray) -> np.ndarray:
    """Bloch vector b_j = Tr(sigma_j rho) of a one-qubit state."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {rho.shape}")
    return np.array([np.trace(_SIGMA[j] @ rho).real for j in (1, 2, 3)])


def singlet_state() -> np.ndarray:
    """Projector onto the two-qubit singlet (|01> - |10>)/sqrt(2)."""
    return _SINGLET.copy()


def maximally_mixed() -> np.ndarray:
    """The two-qubit maximally mixed state I/4."""
    return np.eye(4, dtype=complex) / 4.0


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    eigs, vecs = np.linalg.eigh(m)
    root = np.sqrt(np.clip(eigs, 0.0, None))
    return (vecs * root) @ vecs.conj().T


def fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Uhlmann fidelity F(rho, sigma) = (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2."""
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    root = _psd_sqrt(rho)
    inner = root @ sigma @ root
    eigs = np.clip(np.linalg.eigvalsh(inner), 0.0, None)
    return float(np.sum(np.sqrt(eigs)) ** 2)


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Trace distance (1/2) ||rho - sigma||_1 between Hermitian matrices."""
    diff = np.asarray(rho, dtype=complex) - np.asarray(sigma, dtype=complex)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(diff))))
