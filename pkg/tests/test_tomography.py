import math

import numpy as np
import pytest

from conftest import random_density_matrix, random_unitary
from fermipairs import (
    CoefficientEstimates,
    CountsRecord,
    PairQuery,
    TomographyInput,
    bloch_from_counts,
    bloch_from_counts_unbalanced,
    coefficients_from_coincidences,
    decompose,
    end_to_end,
    fidelity,
    forced_pairs_record,
    is_physical,
    kernel,
    maximally_mixed,
    pair_state,
    project_to_physical,
    reconcile,
    reconstruct,
    singlet_state,
    tomography_settings,
    trace_distance,
)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
AXES_MATRICES = {1: SX, 2: SY, 3: SZ}


def exact_counts_input(rho, total=1_000_000):
    """Counts proportional to the literal Born probabilities at each setting."""
    joint = np.zeros((3, 3, 2, 2), dtype=np.int64)
    eye = np.eye(2, dtype=complex)
    for i in (1, 2, 3):
        for j in (1, 2, 3):
            for a, sa in enumerate((1.0, -1.0)):
                for b, sb in enumerate((1.0, -1.0)):
                    proj = np.kron(
                        0.5 * (eye + sa * AXES_MATRICES[i]),
                        0.5 * (eye + sb * AXES_MATRICES[j]),
                    )
                    prob = np.trace(np.asarray(rho) @ proj).real
                    joint[i - 1, j - 1, a, b] = round(total * prob)
    return TomographyInput(joint=joint, etas=np.ones((3, 3, 2)))


# ------------------------------------------------------------ bloch ratio


def test_bloch_from_counts():
    assert bloch_from_counts(75, 25) == pytest.approx(0.5)
    assert bloch_from_counts(1234, 1234) == 0.0
    assert bloch_from_counts(50, 0) == 1.0
    with pytest.raises(ValueError):
        bloch_from_counts(0, 0)
    with pytest.raises(ValueError):
        bloch_from_counts(-1, 5)


def test_bloch_from_counts_unbalanced():
    assert bloch_from_counts_unbalanced(75, 25, 1.0, 1.0) == pytest.approx(0.5)
    # the port asymmetry is fully explained by the efficiencies
    assert bloch_from_counts_unbalanced(75, 25, 0.75, 0.25) == pytest.approx(0.0)
    assert bloch_from_counts_unbalanced(400, 400, 0.6, 0.6) == 0.0
    with pytest.raises(ValueError):
        bloch_from_counts_unbalanced(10, 10, 0.0, 1.0)
    with pytest.raises(ValueError):
        bloch_from_counts_unbalanced(10, 10, 1.0, 1.2)


# -------------------------------------------------------------- estimator


def test_coefficients_from_exact_singlet_counts():
    estimates = coefficients_from_coincidences(exact_counts_input(singlet_state()))
    np.testing.assert_allclose(np.diag(estimates.corr), [-1.0, -1.0, -1.0], atol=1e-12)
    off_diag = estimates.corr - np.diag(np.diag(estimates.corr))
    np.testing.assert_allclose(off_diag, 0.0, atol=1e-12)
    np.testing.assert_allclose(estimates.arm1, 0.0, atol=1e-12)
    np.testing.assert_allclose(estimates.arm2, 0.0, atol=1e-12)


def test_coefficients_from_uniform_counts():
    joint = np.full((3, 3, 2, 2), 250, dtype=np.int64)
    estimates = coefficients_from_coincidences(
        TomographyInput(joint=joint, etas=np.ones((3, 3, 2)))
    )
    raw = estimates.raw_coefficients()
    expected = np.zeros((4, 4))
    expected[0, 0] = 1.0
    np.testing.assert_allclose(raw, expected, atol=1e-12)


def test_coefficients_from_exact_pair_state_counts():
    rho = pair_state(PairQuery(1.0))
    estimates = coefficients_from_coincidences(exact_counts_input(rho))
    g2 = kernel(1.0) ** 2
    a_diag = -g2 / (2.0 - g2)
    np.testing.assert_allclose(np.diag(estimates.corr), a_diag, atol=1e-5)
    off_diag = estimates.corr - np.diag(np.diag(estimates.corr))
    np.testing.assert_allclose(off_diag, 0.0, atol=1e-5)


def test_estimator_corrects_unbalanced_ports():
    settings = tomography_settings(eta_plus=0.9, eta_minus=0.5)
    record = forced_pairs_record(settings, 200000, pair_separation=0.0, seed=1)
    result = end_to_end(record)
    assert trace_distance(result.physical_state, singlet_state()) < 0.03


def test_errors_shrink_with_counts():
    small = coefficients_from_coincidences(
        exact_counts_input(maximally_mixed(), total=400)
    )
    large = coefficients_from_coincidences(
        exact_counts_input(maximally_mixed(), total=40000)
    )
    assert np.all(large.corr_err < small.corr_err)
    # n^(-1/2) law, here exactly computable: sqrt(400/40000) = 1/10
    np.testing.assert_allclose(large.corr_err / small.corr_err, 0.1, rtol=0.05)


# -------------------------------------------------------------- reconcile


def _estimates_with_arm1(values, errors):
    zeros = np.zeros((3, 3))
    ones = np.full((3, 3), 0.1)
    arm1 = np.zeros((3, 3))
    arm1_err = np.full((3, 3), 0.1)
    arm1[0] = values
    arm1_err[0] = errors
    return CoefficientEstimates(
        corr=zeros, corr_err=ones,
        arm1=arm1, arm1_err=arm1_err,
        arm2=zeros.copy(), arm2_err=ones.copy(),
    )


def test_reconcile_consensus():
    coeffs, errors = reconcile(_estimates_with_arm1([0.3, 0.3, 0.3], [0.1, 0.1, 0.1]))
    assert coeffs[1, 0] == pytest.approx(0.3)
    assert coeffs[0, 0] == 1.0


def test_reconcile_equal_weights_mean():
    coeffs, _ = reconcile(_estimates_with_arm1([0.1, 0.1, 0.4], [0.2, 0.2, 0.2]))
    assert coeffs[1, 0] == pytest.approx(0.2)


def test_reconcile_ignores_huge_variance():
    coeffs, errors = reconcile(_estimates_with_arm1([0.1, 0.2, 50.0], [0.1, 0.1, 1e9]))
    assert coeffs[1, 0] == pytest.approx(0.15, abs=1e-6)
    assert errors[1, 0] == pytest.approx(0.1 / math.sqrt(2.0), rel=1e-6)


def test_reconcile_never_increases_error():
    rng = np.random.default_rng(12)
    for _ in range(20):
        values = rng.uniform(-1, 1, 3)
        errors = rng.uniform(0.01, 0.5, 3)
        _, err = reconcile(_estimates_with_arm1(values, errors))
        assert err[1, 0] <= errors.min() + 1e-12


def test_reconcile_requires_three_estimates():
    incomplete = CoefficientEstimates(
        corr=np.zeros((3, 3)), corr_err=np.ones((3, 3)),
        arm1=np.zeros((3, 2)), arm1_err=np.ones((3, 2)),
        arm2=np.zeros((3, 3)), arm2_err=np.ones((3, 3)),
    )
    with pytest.raises(ValueError, match="three estimates"):
        reconcile(incomplete)


def test_reconcile_passes_correlation_block_through():
    record = forced_pairs_record(tomography_settings(), 5000, pair_separation=0.8, seed=3)
    estimates = coefficients_from_coincidences(TomographyInput.from_record(record))
    coeffs, _ = reconcile(estimates)
    np.testing.assert_array_equal(coeffs[1:, 1:], estimates.corr)


# ------------------------------------------------------------ reconstruct


def test_reconstruct_roundtrip_singlet():
    np.testing.assert_allclose(
        reconstruct(decompose(singlet_state())), singlet_state(), atol=1e-12
    )


def test_reconstruct_trivial():
    a = np.zeros((4, 4))
    a[0, 0] = 1.0
    np.testing.assert_allclose(reconstruct(a), np.eye(4) / 4.0, atol=1e-14)


def test_reconstruct_flags_unphysical_coefficients():
    a = np.zeros((4, 4))
    a[0, 0] = 1.0
    a[3, 3] = -1.2
    m = reconstruct(a)
    min_eig = np.linalg.eigvalsh(m)[0]
    assert min_eig < -1e-6
    assert min_eig == pytest.approx((1.0 - 1.2) / 4.0, abs=1e-12)


# -------------------------------------------------------------- projection


def test_projection_idempotent_on_physical_states():
    rng = np.random.default_rng(13)
    for _ in range(10):
        rho = random_density_matrix(rng)
        np.testing.assert_allclose(project_to_physical(rho), rho, atol=1e-12)


def test_projection_clips_and_renormalizes():
    rng = np.random.default_rng(14)
    u = np.kron(random_unitary(rng), random_unitary(rng))
    m = u @ np.diag([1.1, 0.2, -0.2, -0.1]).astype(complex) @ u.conj().T
    projected = project_to_physical(m)
    assert abs(np.trace(projected).real - 1.0) < 1e-12
    assert np.linalg.eigvalsh(projected)[0] >= -1e-12
    np.testing.assert_allclose(project_to_physical(projected), projected, atol=1e-12)

    # no eigenvalue vector on a fine simplex grid beats the projection
    dist = np.linalg.norm(m - projected)
    input_eigs = np.linalg.eigvalsh(m)
    step = 0.05
    n_steps = int(round(1.0 / step))
    best = np.inf
    for i in range(n_steps + 1):
        for j in range(n_steps + 1 - i):
            for k in range(n_steps + 1 - i - j):
                candidate = np.array(
                    [i, j, k, n_steps - i - j - k], dtype=float) * step
                best = min(best, np.linalg.norm(np.sort(candidate) - input_eigs))
    assert dist <= best + 1e-12

    # nor does any random density-matrix probe
    for _ in range(100):
        probe = random_density_matrix(rng)
        assert np.linalg.norm(m - probe) >= dist - 1e-12


def test_projection_recovers_noisy_singlet():
    rng = np.random.default_rng(15)
    noise = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    noise = 1e-3 * (noise + noise.conj().T) / 2.0
    noise -= np.trace(noise) / 4.0 * np.eye(4)
    projected = project_to_physical(singlet_state() + noise)
    assert fidelity(projected, singlet_state()) > 0.99


def test_projection_rejects_bad_input():
    with pytest.raises(ValueError):
        project_to_physical(np.diag([1.0, 1.0, 0.0, 0.0]))  # trace 2
    bad = np.eye(4, dtype=complex) / 4.0
    bad[0, 1] = 0.3
    with pytest.raises(ValueError):
        project_to_physical(bad)


# ---------------------------------------------------------- input mapping


def test_input_requires_all_nine_settings():
    record = forced_pairs_record(tomography_settings()[:8], 100, seed=4)
    with pytest.raises(ValueError, match="missing"):
        TomographyInput.from_record(record)


def test_input_rejects_zero_count_setting():
    record = forced_pairs_record(tomography_settings(), 100, seed=5)
    joint = record.joint.copy()
    joint[4] = 0
    broken = CountsRecord(settings=record.settings, joint=joint,
                          singles=record.singles, metadata={})
    with pytest.raises(ValueError, match="zero"):
        TomographyInput.from_record(broken)


def test_input_ignores_extra_settings():
    from fermipairs import AnalyzerSetting

    extra = AnalyzerSetting(axis1=[0.0, 0.6, 0.8], axis2=[0.0, 0.0, 1.0], label="tilt")
    settings = tomography_settings() + (extra,)
    record = forced_pairs_record(settings, 500, seed=6)
    inp = TomographyInput.from_record(record)
    assert inp.joint.sum() == record.joint[:9].sum()


# ---------------------------------------------------------------- pipeline


def test_end_to_end_high_statistics_singlet():
    record = forced_pairs_record(tomography_settings(), 100000,
                                 pair_separation=0.0, seed=7)
    result = end_to_end(record)
    assert trace_distance(result.physical_state, singlet_state()) < 0.02
    ok, _ = is_physical(result.physical_state, tol=1e-9)
    assert ok
    assert result.raw[0, 0] == 1.0 and result.reconciled[0, 0] == 1.0


def test_end_to_end_accidentals_only():
    record = forced_pairs_record(tomography_settings(), 100000,
                                 true_pair_fraction=0.0, seed=8)
    result = end_to_end(record)
    assert trace_distance(result.physical_state, maximally_mixed()) < 0.02


def test_end_to_end_tiny_statistics_reports_large_errors():
    # about 30 pairs in total, 3-4 per setting
    record = forced_pairs_record(tomography_settings(), 3, pair_separation=1.0,
                                 true_pair_fraction=0.5, seed=9)
    result = end_to_end(record)
    errors = result.errors.copy()
    errors[0, 0] = np.inf  # a00 is fixed, not estimated
    assert errors[errors < np.inf].min() > 0.15
    ok, _ = is_physical(result.physical_state, tol=1e-9)
    assert ok


def test_estimates_unbiased_over_seeds():
    truth = decompose(pair_state(PairQuery(1.0)))
    n_seeds, n_pairs = 200, 10000
    sums = np.zeros((4, 4))
    errs = None
    for seed in range(n_seeds):
        record = forced_pairs_record(tomography_settings(), n_pairs,
                                     pair_separation=1.0, seed=seed)
        coeffs, errors = reconcile(
            coefficients_from_coincidences(TomographyInput.from_record(record))
        )
        sums += coeffs
        errs = errors
    mean = sums / n_seeds
    tol = 4.0 * errs / math.sqrt(n_seeds)
    tol[0, 0] = 1e-12
    assert np.all(np.abs(mean - truth) <= tol + 1e-12)


def test_linear_state_minimum_eigenvalue_reported():
    record = forced_pairs_record(tomography_settings(), 2000,
                                 pair_separation=0.0, seed=10)
    result = end_to_end(record)
    assert result.min_eigenvalue == pytest.approx(
        float(np.linalg.eigvalsh(result.linear_state)[0])
    )
    # noisy singlet reconstructions overshoot the physical boundary
    assert result.min_eigenvalue < 0.05
