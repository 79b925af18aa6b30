"""Fisher information series, the FI/GFI/QFI hierarchy, and scaling fits."""

import math

import numpy as np
import pytest

from qwsense import bayes
from qwsense.metrology import (
    FisherSeries,
    averaged_fisher,
    binary_fisher,
    fisher_at_defect,
    fit_scaling,
    global_fisher,
    power_law_fit,
    quantum_fisher,
)
from qwsense.walk import WalkParams, default_initial_state

PI = math.pi

NONTRIVIAL = (0.9 * PI, 0.75 * PI)
TRIVIAL = (0.05 * PI, 0.75 * PI)
DEFECT = -0.55 * PI


def params(theta1, theta2, n):
    return WalkParams(theta1, theta2, DEFECT, n)


def series_pair(theta1, theta2, steps):
    n = 2 * steps + 3
    p = params(theta1, theta2, n)
    return p, default_initial_state(n)


def test_binary_fisher_arithmetic():
    values, flags = binary_fisher(0.5, 1.0)
    assert values == pytest.approx(4.0)
    assert not flags


def test_binary_fisher_degenerate_flags():
    values, flags = binary_fisher(np.array([0.0, 1.0, 1e-13, 0.3]), np.array([1.0, 1.0, 1.0, 0.0]))
    np.testing.assert_array_equal(flags, [True, True, True, False])
    np.testing.assert_array_equal(values[:3], 0.0)


def test_fi_zero_and_flagged_before_arrival():
    from qwsense.walk import WalkerState

    n = 23
    p = params(*NONTRIVIAL, n)
    far = WalkerState.from_position(-5, "down", n)
    fi = fisher_at_defect(p, far, 10)
    # light cone: nothing reaches the defect before t = 4
    assert fi.flagged[:4].all()
    np.testing.assert_array_equal(fi.values[:4], 0.0)
    assert fi.values[5:].max() > 0.0


def test_fi_heisenberg_scaling_nontrivial():
    p, init = series_pair(*NONTRIVIAL, steps=100)
    fit = fit_scaling(fisher_at_defect(p, init, 100))
    assert 1.8 <= fit.exponent <= 2.2


def test_defect_neutral_point_keeps_parametric_sensitivity():
    # theta02 == theta2 removes the defect from the dynamics but not from the
    # parametrization: dP_i/dtheta02 at that point is finite and generically
    # nonzero, which central differences confirm
    n = 43
    steps = 10
    h = 1e-6
    p = WalkParams(*NONTRIVIAL, NONTRIVIAL[1], n)
    init = default_initial_state(n)
    gfi = global_fisher(p, init, steps)
    assert gfi.values[0] == 0.0
    assert gfi.values[steps] > 0.0
    plus = bayes.defect_probability_series(
        WalkParams(p.theta1, p.theta2, p.theta02 + h, n), init, steps
    )
    minus = bayes.defect_probability_series(
        WalkParams(p.theta1, p.theta2, p.theta02 - h, n), init, steps
    )
    assert abs(plus[steps] - minus[steps]) / (2 * h) > 1e-3


@pytest.mark.parametrize("point", [NONTRIVIAL, TRIVIAL])
def test_information_hierarchy(point):
    p, init = series_pair(*point, steps=60)
    fi = fisher_at_defect(p, init, 60).values
    gfi = global_fisher(p, init, 60).values
    qfi = quantum_fisher(p, init, 60).values
    assert (fi <= gfi + 1e-9).all()
    assert (gfi <= qfi + 1e-9).all()


def test_qfi_starts_at_zero_and_trivial_stays_below():
    p_nt, init = series_pair(*NONTRIVIAL, steps=60)
    p_tr, _ = series_pair(*TRIVIAL, steps=60)
    qfi_nt = quantum_fisher(p_nt, init, 60).values
    qfi_tr = quantum_fisher(p_tr, init, 60).values
    assert qfi_nt[0] == 0.0 and qfi_tr[0] == 0.0
    sel = np.arange(20, 61)
    assert (qfi_tr[sel] < qfi_nt[sel]).all()


def test_fi_matches_probability_finite_differences():
    steps = 50
    n = 2 * steps + 3
    h = 1e-6
    p = params(*NONTRIVIAL, n)
    init = default_initial_state(n)
    fi = fisher_at_defect(p, init, steps)
    plus = bayes.defect_probability_series(
        WalkParams(p.theta1, p.theta2, p.theta02 + h, n), init, steps
    )
    minus = bayes.defect_probability_series(
        WalkParams(p.theta1, p.theta2, p.theta02 - h, n), init, steps
    )
    base = bayes.defect_probability_series(p, init, steps)
    dp0 = (plus - minus) / (2 * h)
    expected, flags = binary_fisher(base, dp0)
    for t in range(steps + 1):
        if fi.flagged[t] or flags[t]:
            continue
        assert fi.values[t] == pytest.approx(expected[t], rel=1e-5)


def test_trivial_case_peaks_sit_above_the_bulk_fit():
    p, init = series_pair(*TRIVIAL, steps=100)
    series = fisher_at_defect(p, init, 100)
    fit_all = fit_scaling(series, mode="all_points")
    fit_peaks = fit_scaling(series, mode="peaks_only")
    t_mid = math.sqrt(10 * 100)
    assert fit_all.value_at(t_mid) < fit_peaks.value_at(t_mid)


# --- multi-time averaging ----------------------------------------------------


def constant_series(value, steps=30):
    return FisherSeries(
        np.arange(steps + 1), np.full(steps + 1, value), "defect_site_fi",
        params(*NONTRIVIAL, 9), None,
    )


def test_averaging_window_one_is_identity():
    p, init = series_pair(*NONTRIVIAL, steps=30)
    series = fisher_at_defect(p, init, 30)
    avg = averaged_fisher(series, window=1, spacing=5)
    np.testing.assert_array_equal(avg.steps, series.steps)
    np.testing.assert_array_equal(avg.values, series.values)


def test_averaging_constant_series():
    avg = averaged_fisher(constant_series(3.5), window=5, spacing=5)
    np.testing.assert_allclose(avg.values, 3.5, atol=1e-15)
    # centers sit at the mean of the five constituent times
    assert avg.steps[0] == pytest.approx(10.0)


def test_averaging_window_arithmetic():
    steps = np.arange(0, 21)
    series = FisherSeries(steps, steps.astype(float), "defect_site_fi",
                          params(*NONTRIVIAL, 9), None)
    avg = averaged_fisher(series, window=5, spacing=5)
    # first admissible start is t=0: mean of FI at {0,5,10,15,20} = 10
    assert avg.steps[0] == pytest.approx(10.0)
    assert avg.values[0] == pytest.approx(10.0)
    assert avg.steps[-1] == pytest.approx(10.0)  # only one admissible window


def test_averaging_rejects_short_series():
    with pytest.raises(ValueError):
        averaged_fisher(constant_series(1.0, steps=10), window=5, spacing=5)


def test_averaging_fills_fi_drops():
    p, init = series_pair(*NONTRIVIAL, steps=100)
    series = fisher_at_defect(p, init, 100)
    avg = averaged_fisher(series, window=5, spacing=5)
    centers = avg.steps[avg.steps >= 10]
    lookup = dict(zip(series.steps.tolist(), series.values.tolist()))
    plain = np.array([lookup[c] for c in centers])
    min_avg = (avg.values[avg.steps >= 10] / centers**2).min()
    min_plain = (plain / centers**2).min()
    assert min_avg > min_plain


# --- power-law fitting -------------------------------------------------------


def test_fit_exact_quadratic():
    t = np.arange(1, 40)
    fit = power_law_fit(t, 3.0 * t**2, window=(1, 40))
    assert fit.exponent == pytest.approx(2.0, abs=1e-10)
    assert fit.prefactor == pytest.approx(3.0, rel=1e-9)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


def test_fit_exact_linear():
    t = np.arange(1, 40)
    fit = power_law_fit(t, 5.0 * t, window=(1, 40))
    assert fit.exponent == pytest.approx(1.0, abs=1e-10)
    assert fit.prefactor == pytest.approx(5.0, rel=1e-9)


def test_fit_peaks_only_on_modulated_quadratic():
    t = np.arange(1, 60, dtype=float)
    values = t**2 * (1.0 + 0.5 * (-1.0) ** np.arange(1, 60))
    fit = power_law_fit(t, values, window=(1, 60), mode="peaks_only")
    assert fit.exponent == pytest.approx(2.0, abs=1e-6)
    assert fit.prefactor == pytest.approx(1.5, rel=1e-5)


def test_fit_requires_five_points():
    t = np.arange(1, 5)
    with pytest.raises(ValueError):
        power_law_fit(t, t.astype(float), window=(1, 4))


def test_fit_excludes_flagged_and_zero_values():
    steps = np.arange(0, 21)
    values = steps.astype(float) ** 2
    flagged = np.zeros(21, dtype=bool)
    flagged[:3] = True
    series = FisherSeries(steps, values, "defect_site_fi", params(*NONTRIVIAL, 9), flagged)
    fit = fit_scaling(series, window=(0, 20))
    assert fit.exponent == pytest.approx(2.0, abs=1e-10)
    assert fit.n_points == 18  # 21 minus three flagged (t=0 also zero-valued)


def test_fit_unknown_mode_rejected():
    with pytest.raises(ValueError):
        power_law_fit(np.arange(10), np.arange(10, dtype=float), mode="median")
