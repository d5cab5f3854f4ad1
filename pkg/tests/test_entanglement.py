import math

import numpy as np
import pytest

from conftest import bisect, random_density_matrix, random_unitary
from fermipairs import (
    DetectorProfile,
    PairQuery,
    chsh_max,
    compose,
    concurrence,
    entanglement_distance,
    entanglement_report,
    maximally_mixed,
    negativity,
    pair_state,
    partial_transpose,
    singlet_state,
)


def g_closed_form(x):
    return 3.0 * (math.sin(x) - x * math.cos(x)) / x**3


def visibility(g):
    return g * g / (2.0 - g * g)


# g at which the CHSH maximum of the pair state equals 2:
# 2 sqrt(2) v = 2 with v = g^2/(2 - g^2).
G_CHSH_THRESHOLD = math.sqrt(2.0 / (1.0 + math.sqrt(2.0)))


def test_partial_transpose_fixes_mixed_state():
    np.testing.assert_allclose(partial_transpose(maximally_mixed()),
                               maximally_mixed(), atol=0)


def test_partial_transpose_singlet_spectrum():
    eigs = np.sort(np.linalg.eigvalsh(partial_transpose(singlet_state())))
    np.testing.assert_allclose(eigs, [-0.5, 0.5, 0.5, 0.5], atol=1e-12)


def test_partial_transpose_product_state_stays_positive():
    rng = np.random.default_rng(1)
    for _ in range(10):
        rho1 = random_density_matrix(rng, dim=2)
        rho2 = random_density_matrix(rng, dim=2)
        pt = partial_transpose(np.kron(rho1, rho2))
        np.testing.assert_allclose(pt, np.kron(rho1, rho2.T), atol=1e-14)
        assert np.linalg.eigvalsh(pt)[0] > -1e-12


def test_negativity_reference_values():
    assert abs(negativity(singlet_state()) - 0.5) < 1e-12
    assert negativity(maximally_mixed()) == 0.0


def test_negativity_vanishes_at_separability_boundary():
    x_boundary = bisect(lambda x: g_closed_form(x) ** 2 - 0.5, 1.0, 3.0)
    assert negativity(pair_state(PairQuery(x_boundary))) < 1e-9


def test_negativity_matches_werner_closed_form():
    for x in (0.4, 1.0, 1.6, 2.2):
        v = visibility(g_closed_form(x))
        expected = max(0.0, (3.0 * v - 1.0) / 4.0)
        assert abs(negativity(pair_state(PairQuery(x))) - expected) < 1e-12


def test_concurrence_reference_values():
    assert abs(concurrence(singlet_state()) - 1.0) < 1e-9
    assert concurrence(maximally_mixed()) < 1e-9


def test_concurrence_matches_werner_closed_form():
    x_g2_08 = bisect(lambda x: g_closed_form(x) ** 2 - 0.8, 0.1, 1.8)
    v = visibility(math.sqrt(0.8))
    expected = max(0.0, (3.0 * v - 1.0) / 2.0)
    assert abs(expected - 0.5) < 1e-12
    assert abs(concurrence(pair_state(PairQuery(x_g2_08))) - expected) < 1e-9


def test_chsh_reference_values():
    assert abs(chsh_max(singlet_state()) - 2.0 * math.sqrt(2.0)) < 1e-10
    assert chsh_max(maximally_mixed()) < 1e-12


def test_chsh_threshold_of_pair_state():
    assert abs(G_CHSH_THRESHOLD - 0.9102) < 1e-4
    x_threshold = bisect(lambda x: g_closed_form(x) - G_CHSH_THRESHOLD, 0.1, 1.8)
    assert abs(chsh_max(pair_state(PairQuery(x_threshold))) - 2.0) < 1e-6
    assert chsh_max(pair_state(PairQuery(x_threshold - 0.05))) > 2.0
    assert chsh_max(pair_state(PairQuery(x_threshold + 0.05))) < 2.0


def test_entanglement_distance_point_like():
    oracle = bisect(lambda x: g_closed_form(x) - 1.0 / math.sqrt(2.0), 1.0, 3.0)
    solved = entanglement_distance()
    assert abs(solved - oracle) < 2e-6
    assert abs(solved - 1.815) < 1e-3


def test_entanglement_distance_grows_with_broadening():
    x_point = entanglement_distance()
    x_broad = entanglement_distance(DetectorProfile(0.5))
    assert x_broad > x_point
    # dense-scan cross-check of the broadened root
    xs = np.arange(1.5, 2.2, 1e-3)
    values = [negativity(pair_state(PairQuery(x, DetectorProfile(0.5)))) for x in xs]
    last_entangled = xs[np.nonzero(np.array(values) > 0)[0][-1]]
    assert abs(last_entangled - x_broad) < 2e-3


def test_entanglement_distance_delta_limit():
    assert abs(entanglement_distance(DetectorProfile(1e-4)) - entanglement_distance()) < 1e-4


def test_entanglement_distance_unbracketed_reports_failure():
    with pytest.raises(RuntimeError):
        entanglement_distance(DetectorProfile(10.0))


def test_ppt_and_concurrence_agree_along_sweep():
    for x in np.arange(0.0, 4.01, 0.1):
        rho = pair_state(PairQuery(x))
        assert (negativity(rho) > 1e-12) == (concurrence(rho) > 1e-9)


def test_entangled_without_chsh_violation_window():
    x_lo = bisect(lambda x: g_closed_form(x) - G_CHSH_THRESHOLD, 0.1, 1.8)
    x_hi = bisect(lambda x: g_closed_form(x) ** 2 - 0.5, 1.0, 3.0)
    assert x_lo < x_hi
    rho = pair_state(PairQuery(0.5 * (x_lo + x_hi)))
    assert negativity(rho) > 0.05
    assert chsh_max(rho) < 2.0 - 0.05


def test_measures_invariant_under_local_unitaries():
    rng = np.random.default_rng(9)
    states = [pair_state(PairQuery(1.0)), random_density_matrix(rng)]
    for rho in states:
        base = (negativity(rho), concurrence(rho), chsh_max(rho))
        for _ in range(10):
            u = np.kron(random_unitary(rng), random_unitary(rng))
            rotated = u @ rho @ u.conj().T
            assert abs(negativity(rotated) - base[0]) < 1e-9
            assert abs(concurrence(rotated) - base[1]) < 1e-9
            assert abs(chsh_max(rotated) - base[2]) < 1e-9


def test_product_states_carry_no_entanglement():
    rng = np.random.default_rng(14)
    for _ in range(50):
        b1 = rng.uniform(-1, 1, 3)
        b2 = rng.uniform(-1, 1, 3)
        for b in (b1, b2):
            norm = np.linalg.norm(b)
            if norm > 1.0:
                b *= rng.uniform(0.0, 1.0) / norm
        a = np.zeros((4, 4))
        a[0, 0] = 1.0
        a[1:, 0] = b1
        a[0, 1:] = b2
        a[1:, 1:] = np.outer(b1, b2)
        rho = compose(a)
        assert negativity(rho) < 1e-12
        assert concurrence(rho) < 1e-9


def test_distance_is_negativity_sign_change():
    x_star = entanglement_distance()
    xs = np.arange(x_star - 0.05, x_star + 0.05, 1e-3)
    values = np.array([negativity(pair_state(PairQuery(x))) for x in xs])
    entangled = values > 1e-12
    # entangled below, separable above, single crossover
    assert entangled[0] and not entangled[-1]
    crossover = xs[np.nonzero(~entangled)[0][0]]
    assert abs(crossover - x_star) < 2e-3


def test_negativity_stays_zero_beyond_distance():
    # includes the region past the kernel's first zero, where g < 0
    for x in np.arange(1.82, 8.0, 0.05):
        assert negativity(pair_state(PairQuery(x))) == 0.0


def test_entanglement_report_consistency():
    for x in (0.0, 1.0, 2.5):
        report = entanglement_report(pair_state(PairQuery(x)))
        assert report.ppt_entangled == (report.negativity > 1e-12)
        assert report.chsh_max <= 2.0 * math.sqrt(2.0) + 1e-10
        assert 0.0 <= report.concurrence <= 1.0
