"""Two-qubit state reconstruction from coincidence counts.

The nine analyzer settings pair the three Pauli axes on each arm.  Every
setting yields the correlation coefficient a_ij plus one estimate each of
the single-arm coefficients a_i0 and a_0j, so the single-arm coefficients
come in triplicate and are reconciled by inverse-variance weighting.
Linear inversion of the reconciled coefficients can be pushed outside the
physical set by noise; a final projection returns the nearest density
operator in Frobenius norm.
"""

from dataclasses import dataclass

import numpy as np

from .experiment import AnalyzerSetting, CountsRecord, SettingsPlanEntry
from .spin_algebra import compose

__all__ = [
    "PAULI_AXES",
    "tomography_settings",
    "tomography_plan",
    "TomographyInput",
    "CoefficientEstimates",
    "TomographyResult",
    "bloch_from_counts",
    "bloch_from_counts_unbalanced",
    "coefficients_from_coincidences",
    "reconcile",
    "reconstruct",
    "project_to_physical",
    "end_to_end",
]

PAULI_AXES = {
    1: np.array([1.0, 0.0, 0.0]),
    2: np.array([0.0, 1.0, 0.0]),
    3: np.array([0.0, 0.0, 1.0]),
}
_AXIS_NAMES = {1: "x", 2: "y", 3: "z"}


def tomography_settings(eta_plus: float = 1.0, eta_minus: float = 1.0):
    """The nine axis-pair analyzer settings, ordered (1,1), (1,2), ... (3,3)."""
    return tuple(
        AnalyzerSetting(
            axis1=PAULI_AXES[i],
            axis2=PAULI_AXES[j],
            eta_plus=eta_plus,
            eta_minus=eta_minus,
            label=_AXIS_NAMES[i] + _AXIS_NAMES[j],
        )
        for i in (1, 2, 3)
        for j in (1, 2, 3)
    )


def tomography_plan(target_per_setting: int, eta_plus: float = 1.0, eta_minus: float = 1.0):
    """Settings plan visiting the nine tomography settings in order."""
    return tuple(
        SettingsPlanEntry(setting=s, target=target_per_setting)
        for s in tomography_settings(eta_plus, eta_minus)
    )


def _match_pauli_axis(axis: np.ndarray):
    for i, unit in PAULI_AXES.items():
        if float(axis @ unit) > 1.0 - 1e-9:
            return i
    return None


@dataclass(frozen=True)
class TomographyInput:
    """Coincidence counts and efficiencies for the nine axis-pair settings.

    ``joint[i-1, j-1, a, b]`` holds the coincidence count at setting
    (i, j) with arm ports a, b (0 = "+", 1 = "-"); ``etas[i-1, j-1]`` the
    (eta_plus, eta_minus) pair shared by both arms at that setting.
    """

    joint: np.ndarray
    etas: np.ndarray

    def __post_init__(self):
        joint = np.asarray(self.joint, dtype=np.int64)
        etas = np.asarray(self.etas, dtype=float)
        if joint.shape != (3, 3, 2, 2):
            raise ValueError(f"joint counts must have shape (3, 3, 2, 2), got {joint.shape}")
        if etas.shape != (3, 3, 2):
            raise ValueError(f"etas must have shape (3, 3, 2), got {etas.shape}")
        totals = joint.sum(axis=(2, 3))
        if np.any(totals < 1):
            i, j = np.argwhere(totals < 1)[0]
            raise ValueError(
                f"setting ({_AXIS_NAMES[i + 1]}, {_AXIS_NAMES[j + 1]}) has zero coincidences"
            )
        if np.any(etas <= 0.0) or np.any(etas > 1.0):
            raise ValueError("port efficiencies must be in (0, 1]")
        object.__setattr__(self, "joint", joint)
        object.__setattr__(self, "etas", etas)

    @classmethod
    def from_record(cls, record: CountsRecord) -> "TomographyInput":
        """Extract the nine axis-pair settings from a counts record."""
        joint = np.zeros((3, 3, 2, 2), dtype=np.int64)
        etas = np.ones((3, 3, 2))
        seen = np.zeros((3, 3), dtype=bool)
        for k, setting in enumerate(record.settings):
            i = _match_pauli_axis(setting.axis1)
            j = _match_pauli_axis(setting.axis2)
            if i is None or j is None:
                continue
            if seen[i - 1, j - 1]:
                raise ValueError(f"duplicate tomography setting ({i}, {j}) in record")
            seen[i - 1, j - 1] = True
            joint[i - 1, j - 1] = record.joint[k]
            etas[i - 1, j - 1] = (setting.eta_plus, setting.eta_minus)
        if not seen.all():
            i, j = np.argwhere(~seen)[0]
            raise ValueError(
                f"record is missing tomography setting "
                f"({_AXIS_NAMES[i + 1]}, {_AXIS_NAMES[j + 1]})"
            )
        return cls(joint=joint, etas=etas)


@dataclass(frozen=True)
class CoefficientEstimates:
    """Per-setting estimates: a_ij once, a_i0 and a_0j three times each.

    ``arm1[i-1, j-1]`` is the a_i0 estimate obtained at setting (i, j);
    ``arm2[i-1, j-1]`` the a_0j estimate from the same setting.
    """

    corr: np.ndarray
    corr_err: np.ndarray
    arm1: np.ndarray
    arm1_err: np.ndarray
    arm2: np.ndarray
    arm2_err: np.ndarray

    def raw_coefficients(self) -> np.ndarray:
        """Unweighted summary: plain mean of the triplicate single-arm estimates."""
        a = np.zeros((4, 4))
        a[0, 0] = 1.0
        a[1:, 1:] = self.corr
        a[1:, 0] = self.arm1.mean(axis=1)
        a[0, 1:] = self.arm2.mean(axis=0)
        return a

    def raw_errors(self) -> np.ndarray:
        err = np.zeros((4, 4))
        err[1:, 1:] = self.corr_err
        err[1:, 0] = np.sqrt((self.arm1_err**2).sum(axis=1)) / 3.0
        err[0, 1:] = np.sqrt((self.arm2_err**2).sum(axis=0)) / 3.0
        return err


@dataclass(frozen=True)
class TomographyResult:
    """Everything the reconstruction pipeline produces, intermediates included."""

    raw: np.ndarray
    raw_errors: np.ndarray
    reconciled: np.ndarray
    errors: np.ndarray
    linear_state: np.ndarray
    min_eigenvalue: float
    physical_state: np.ndarray
    estimates: CoefficientEstimates


def bloch_from_counts(n_plus, n_minus) -> float:
    """Bloch component from two port rates: (n+ - n-) / (n+ + n-)."""
    if n_plus < 0 or n_minus < 0:
        raise ValueError("counts must be non-negative")
    total = n_plus + n_minus
    if total <= 0:
        raise ValueError("zero total counts")
    return (n_plus - n_minus) / total


def bloch_from_counts_unbalanced(n_plus, n_minus, eta_plus, eta_minus) -> float:
    """Bloch component with per-port efficiencies dividing each rate.

    Reduces to :func:`bloch_from_counts` for eta_plus = eta_minus.
    """
    if not (0.0 < eta_plus <= 1.0 and 0.0 < eta_minus <= 1.0):
        raise ValueError("port efficiencies must be in (0, 1]")
    return bloch_from_counts(n_plus / eta_plus, n_minus / eta_minus)


# Sign patterns over the four joint outcomes (++, +-, -+, --): the parity
# alpha*beta estimates a_ij, alpha alone a_i0, beta alone a_0j.
_ALPHA = np.array([[1.0, 1.0], [-1.0, -1.0]])
_BETA = np.array([[1.0, -1.0], [1.0, -1.0]])
_PARITY = _ALPHA * _BETA


def _weighted_estimate(counts: np.ndarray, weights: np.ndarray, signs: np.ndarray):
    """Efficiency-corrected count ratio and its delta-method standard error.

    The variance uses multinomial cell probabilities smoothed by half a
    count per cell, which keeps the error finite when all counts land in
    one cell (tiny data sets).
    """
    n = counts.sum()
    weighted_total = float((weights * counts).sum())
    estimate = float((signs * weights * counts).sum() / weighted_total)
    p_smooth = (counts + 0.5) / (n + 2.0)
    deriv = weights * (signs - estimate) / weighted_total
    var = n * float((p_smooth * deriv**2).sum() - (p_smooth * deriv).sum() ** 2)
    return estimate, float(np.sqrt(max(var, 0.0)))


def coefficients_from_coincidences(inp: TomographyInput) -> CoefficientEstimates:
    """Estimate the 15 Pauli coefficients from the nine-setting counts.

    At setting (i, j) with joint counts N(a, b),

        a_ij = [N(++) - N(+-) - N(-+) + N(--)] / total
        a_i0 = [N(++) + N(+-) - N(-+) - N(--)] / total
        a_0j = [N(++) - N(+-) + N(-+) - N(--)] / total

    giving three estimates of each single-arm coefficient (one per
    partner axis).  Unbalanced ports are handled by dividing each count
    by its port-efficiency product before forming the ratios.
    """
    est = {name: np.zeros((3, 3)) for name in
           ("corr", "corr_err", "arm1", "arm1_err", "arm2", "arm2_err")}
    for i in range(3):
        for j in range(3):
            counts = inp.joint[i, j].astype(float)
            eta = inp.etas[i, j]
            weights = 1.0 / np.outer(eta, eta)
            est["corr"][i, j], est["corr_err"][i, j] = _weighted_estimate(
                counts, weights, _PARITY
            )
            est["arm1"][i, j], est["arm1_err"][i, j] = _weighted_estimate(
                counts, weights, _ALPHA
            )
            est["arm2"][i, j], est["arm2_err"][i, j] = _weighted_estimate(
                counts, weights, _BETA
            )
    return CoefficientEstimates(
        corr=est["corr"], corr_err=est["corr_err"],
        arm1=est["arm1"], arm1_err=est["arm1_err"],
        arm2=est["arm2"], arm2_err=est["arm2_err"],
    )


def _inverse_variance_mean(values: np.ndarray, errors: np.ndarray):
    weights = 1.0 / np.maximum(errors, 1e-150) ** 2
    total = weights.sum()
    return float((weights * values).sum() / total), float(1.0 / np.sqrt(total))


def reconcile(estimates: CoefficientEstimates):
    """Merge the triplicate single-arm estimates by inverse-variance weighting.

    Returns (coefficients, errors) as 4x4 arrays; the correlation block
    passes through unchanged and the combined error never exceeds the
    smallest input error.
    """
    for name in ("corr", "corr_err", "arm1", "arm1_err", "arm2", "arm2_err"):
        if np.asarray(getattr(estimates, name)).shape != (3, 3):
            raise ValueError(f"{name} must be 3x3 (three estimates per coefficient)")
    coeffs = np.zeros((4, 4))
    errors = np.zeros((4, 4))
    coeffs[0, 0] = 1.0
    coeffs[1:, 1:] = estimates.corr
    errors[1:, 1:] = estimates.corr_err
    for i in range(3):
        coeffs[i + 1, 0], errors[i + 1, 0] = _inverse_variance_mean(
            estimates.arm1[i, :], estimates.arm1_err[i, :]
        )
        coeffs[0, i + 1], errors[0, i + 1] = _inverse_variance_mean(
            estimates.arm2[:, i], estimates.arm2_err[:, i]
        )
    return coeffs, errors


def reconstruct(coeffs: np.ndarray) -> np.ndarray:
    """Linear inversion of the coefficient array; may be non-positive under noise."""
    return compose(coeffs)


def project_to_physical(m: np.ndarray) -> np.ndarray:
    """Nearest density operator in Frobenius norm.

    Eigenvalues are clipped at zero from below, redistributing the
    clipped (negative) weight uniformly over the surviving eigenvalues so
    the trace stays 1; already-physical input is returned unchanged.
    """
    m = np.asarray(m, dtype=complex)
    if np.max(np.abs(m - m.conj().T)) > 1e-8:
        raise ValueError("matrix is not Hermitian")
    trace = m.trace().real
    if abs(trace - 1.0) > 1e-6:
        raise ValueError(f"matrix must have unit trace, got {trace!r}")
    m = m / trace
    eigvals, eigvecs = np.linalg.eigh(m)
    if eigvals[0] >= 0.0:
        return m
    vals = eigvals[::-1].copy()  # descending
    vecs = eigvecs[:, ::-1]
    shortfall = 0.0
    keep = len(vals)
    while keep > 0 and vals[keep - 1] + shortfall / keep < 0.0:
        shortfall += vals[keep - 1]
        vals[keep - 1] = 0.0
        keep -= 1
    vals[:keep] += shortfall / keep
    return (vecs * vals) @ vecs.conj().T


def end_to_end(counts) -> TomographyResult:
    """Full pipeline: estimate, reconcile, invert, project.

    ``counts`` may be a CountsRecord (containing the nine axis-pair
    settings) or a prepared TomographyInput.
    """
    inp = counts if isinstance(counts, TomographyInput) else TomographyInput.from_record(counts)
    estimates = coefficients_from_coincidences(inp)
    reconciled, errors = reconcile(estimates)
    linear_state = reconstruct(reconciled)
    min_eigenvalue = float(np.linalg.eigvalsh(linear_state)[0])
    physical_state = project_to_physical(linear_state)
    return TomographyResult(
        raw=estimates.raw_coefficients(),
        raw_errors=estimates.raw_errors(),
        reconciled=reconciled,
        errors=errors,
        linear_state=linear_state,
        min_eigenvalue=min_eigenvalue,
        physical_state=physical_state,
        estimates=estimates,
    )
