import math

import numpy as np
import pytest

from squeezed_com import (HBAR, K_B, NoStablePoint, ZeroSignalGain,
                          backaction_suppression_phase,
                          broadband_spectrum_standard, force_transfer,
                          g_opt_theta_zero, g_sql, noise_spectrum,
                          optimize_coupling, output_quadratures,
                          params_with_coupling, rotated_output_quadrature,
                          solve_steady_state, sql)
from squeezed_com.steadystate import SteadyState

TWO_PI = 2.0 * math.pi


def at_coupling(params, u, omega):
    """Params rescaled so g^2/g_SQL^2(omega) = u."""
    return params_with_coupling(params, math.sqrt(u) * g_sql(params, omega))


def eq15_zero_phase(params, g, omega):
    """Resonant zero-pump-phase broadband PSD, computed independently."""
    chi_m = params.omega_m / (params.omega_m ** 2 - omega ** 2
                              - 1j * omega * params.gamma_m)
    half = params.kappa / 2.0 - 2.0 * params.G
    return (g ** 2 * params.kappa / (4.0 * params.gamma_m * half ** 2)
            + half ** 2 / (4.0 * params.kappa * params.gamma_m * g ** 2
                           * abs(chi_m) ** 2))


# ---------------------------------------------------------------------------
# force transfer


def test_standard_sensor_transfer_reduction(baseline):
    # without OPA/detuning the vacuum gains reduce to the textbook
    # backaction and imprecision terms in the wideband limit
    omega = baseline.kappa / 1000.0
    p = at_coupling(baseline, 1.0, omega)
    ss = solve_steady_state(p)
    tf = force_transfer(p, ss, omega)
    g = ss.g_eff
    abs_chi_m = abs(p.omega_m / (p.omega_m ** 2 - omega ** 2
                                 - 1j * omega * p.gamma_m))
    assert 0.5 * abs(tf.x_a_coeff) ** 2 == pytest.approx(
        g ** 2 / (p.kappa * p.gamma_m), rel=1e-5)
    assert 0.5 * abs(tf.p_a_coeff) ** 2 == pytest.approx(
        p.kappa / (16.0 * g ** 2 * p.gamma_m * abs_chi_m ** 2), rel=1e-5)


def test_transfer_conjugation(baseline, rng):
    p = baseline.with_updates(G=0.17 * baseline.kappa, theta=-1.1,
                              delta=0.05 * baseline.kappa)
    ss = solve_steady_state(p)
    for _ in range(10):
        omega = rng.uniform(0.1, 2.0) * p.omega_m
        plus = force_transfer(p, ss, omega)
        minus = force_transfer(p, ss, -omega)
        assert minus.x_a_coeff == pytest.approx(np.conj(plus.x_a_coeff),
                                                rel=1e-12)
        assert minus.p_a_coeff == pytest.approx(np.conj(plus.p_a_coeff),
                                                rel=1e-12)


def test_signal_transfer_linear_in_coupling(baseline):
    omega = TWO_PI * 1e5
    ss1 = solve_steady_state(baseline)
    ss2 = solve_steady_state(params_with_coupling(baseline, 2.0 * ss1.g_eff))
    f1 = force_transfer(baseline, ss1, omega).f_f
    f2 = force_transfer(baseline, ss2, omega).f_f
    assert f2 / f1 == pytest.approx(2.0, rel=1e-10)


def test_zero_coupling_is_refused(baseline):
    p = baseline.with_updates(p_in=0.0)
    ss = solve_steady_state(p)
    with pytest.raises(ZeroSignalGain):
        force_transfer(p, ss, TWO_PI * 1e5)


def test_signal_free_quadrature_is_refused(baseline):
    # an operating point measuring the quadrature orthogonal to the signal
    ss = SteadyState(alpha=0j, phi=math.pi / 2.0, psi=0.0, x_bar=0.0,
                     p_bar=0.0, g_eff=1e6, n_a=0.0)
    with pytest.raises(ZeroSignalGain):
        force_transfer(baseline, ss, 0.0)


# ---------------------------------------------------------------------------
# noise spectrum


def test_standard_sensor_reaches_quantum_limit(baseline):
    omega = TWO_PI * 1e5
    p = at_coupling(baseline, 1.0, omega)
    point = noise_spectrum(p, solve_steady_state(p), omega)
    assert point.ratio == pytest.approx(1.0, abs=1e-3)


@pytest.mark.parametrize("gain_frac", [0.0, 0.1, 0.2])
def test_zero_phase_matches_broadband_closed_form(baseline, gain_frac):
    for omega in (baseline.kappa / 200.0, baseline.kappa / 100.0):
        p = baseline.with_updates(G=gain_frac * baseline.kappa, theta=0.0)
        for u in np.geomspace(1e-2, 10.0, 50):
            pu = at_coupling(p, u, omega)
            ss = solve_steady_state(pu)
            point = noise_spectrum(pu, ss, omega)
            closed = eq15_zero_phase(pu, ss.g_eff, omega)
            assert abs(point.s_ff - closed) <= 1e-2 * point.s_ff


def test_zero_phase_never_beats_quantum_limit(baseline):
    omega = TWO_PI * 1e5
    for gain_frac in (0.0, 0.1, 0.2):
        p = baseline.with_updates(G=gain_frac * baseline.kappa, theta=0.0)
        for u in np.geomspace(1e-2, 1e2, 50):
            pu = at_coupling(p, u, omega)
            point = noise_spectrum(pu, solve_steady_state(pu), omega)
            assert point.ratio >= 1.0 - 1e-2


def test_weak_coupling_diverges_as_imprecision(baseline):
    omega = TWO_PI * 1e5
    values = []
    for u in (1e-4, 1e-6):
        p = at_coupling(baseline, u, omega)
        ss = solve_steady_state(p)
        point = noise_spectrum(p, ss, omega)
        assert point.s_shot > 100.0 * point.s_backaction
        values.append(point.s_shot * ss.g_eff ** 2)
    assert values[0] == pytest.approx(values[1], rel=1e-3)


def test_decomposition_is_exact_and_nonnegative(baseline, rng):
    p = baseline.with_updates(G=0.21 * baseline.kappa, theta=-0.9,
                              temperature=0.031)
    ss = solve_steady_state(p)
    for _ in range(10):
        point = noise_spectrum(p, ss, rng.uniform(0.01, 2.0) * p.omega_m)
        assert point.s_ff == point.s_thermal + point.s_backaction + point.s_shot
        assert point.s_thermal >= 0 and point.s_backaction >= 0
        assert point.s_shot >= 0


def test_thermal_term_is_additive_white_level(baseline):
    omega = TWO_PI * 2e5
    cold = at_coupling(baseline, 0.3, omega)
    hot = cold.with_updates(temperature=77.0)
    ss = solve_steady_state(cold)
    s_cold = noise_spectrum(cold, ss, omega)
    s_hot = noise_spectrum(hot, solve_steady_state(hot), omega)
    expected = K_B * 77.0 / (HBAR * baseline.omega_m)
    assert s_hot.s_ff - s_cold.s_ff == pytest.approx(expected, rel=1e-12)
    assert s_hot.s_thermal == pytest.approx(expected, rel=1e-12)
    assert s_hot.s_backaction == s_cold.s_backaction
    assert s_hot.s_shot == s_cold.s_shot


def test_spectrum_even_in_frequency(baseline, rng):
    for _ in range(10):
        p = baseline.with_updates(G=rng.uniform(0, 0.24) * baseline.kappa,
                                  theta=rng.uniform(-math.pi, math.pi),
                                  delta=rng.uniform(-0.2, 0.2) * baseline.kappa)
        p = params_with_coupling(p, rng.uniform(1e5, 1e7))
        ss = solve_steady_state(p)
        omega = rng.uniform(0.01, 2.0) * p.omega_m
        plus = noise_spectrum(p, ss, omega)
        minus = noise_spectrum(p, ss, -omega)
        assert minus.s_ff == pytest.approx(plus.s_ff, rel=1e-12)


def test_symmetrization_cancels_cross_correlations(baseline, rng):
    # oracle: the one-sided PSD from the vacuum correlators, including the
    # +-i/2 cross terms, averaged over +-omega
    p = baseline.with_updates(G=0.19 * baseline.kappa, theta=-0.7)
    p = params_with_coupling(p, 0.7 * g_sql(p, TWO_PI * 1e5))
    ss = solve_steady_state(p)
    for _ in range(10):
        omega = rng.uniform(0.005, 1.5) * p.omega_m
        tf = force_transfer(p, ss, omega)
        one_sided = (0.5 * abs(tf.x_a_coeff) ** 2
                     + 0.5 * abs(tf.p_a_coeff) ** 2
                     - np.imag(tf.x_a_coeff * np.conj(tf.p_a_coeff)))
        tf_m = force_transfer(p, ss, -omega)
        other = (0.5 * abs(tf_m.x_a_coeff) ** 2
                 + 0.5 * abs(tf_m.p_a_coeff) ** 2
                 - np.imag(tf_m.x_a_coeff * np.conj(tf_m.p_a_coeff)))
        point = noise_spectrum(p, ss, omega)
        symmetrized = 0.5 * (one_sided + other)
        assert symmetrized == pytest.approx(
            point.s_backaction + point.s_shot, rel=1e-10)


# ---------------------------------------------------------------------------
# quantum-limit reference and closed-form optima


def test_sql_reference_values(baseline):
    assert sql(baseline, 0.0) == pytest.approx(
        baseline.omega_m / (2.0 * baseline.gamma_m), rel=1e-12)
    assert sql(baseline, baseline.omega_m) == pytest.approx(0.5, rel=1e-12)
    assert sql(baseline, TWO_PI * 3e5) == sql(baseline, -TWO_PI * 3e5)


def test_broadband_standard_form_at_quantum_limit_coupling(baseline):
    omega = TWO_PI * 1e5
    p = at_coupling(baseline, 1.0, omega)
    assert broadband_spectrum_standard(p, omega) == pytest.approx(
        float(sql(p, omega)), rel=1e-12)


def test_broadband_standard_form_at_double_coupling(baseline):
    omega = TWO_PI * 1e5
    p = at_coupling(baseline, 4.0, omega)  # g = 2 g_SQL
    ratio = broadband_spectrum_standard(p, omega) / float(sql(p, omega))
    assert ratio == pytest.approx((4.0 + 0.25) / 2.0, rel=1e-10)


def test_broadband_standard_form_lower_bound(baseline):
    omega = TWO_PI * 1e5
    floor = float(sql(baseline, omega))
    for u in np.geomspace(1e-3, 1e3, 40):
        p = at_coupling(baseline, u, omega)
        assert broadband_spectrum_standard(p, omega) >= floor * (1.0 - 1e-12)


def test_zero_phase_optimal_coupling_closed_form(baseline):
    omega = TWO_PI * 1e4
    assert g_opt_theta_zero(baseline, omega) == pytest.approx(
        float(g_sql(baseline, omega)), rel=1e-12)
    at_quarter = baseline.with_updates(G=baseline.kappa / 4.0)
    assert g_opt_theta_zero(at_quarter, omega) == 0.0


def test_zero_phase_optimum_is_a_minimum(baseline):
    omega = TWO_PI * 1e4
    p = baseline.with_updates(G=0.1 * baseline.kappa, theta=0.0)
    g_star = g_opt_theta_zero(p, omega)

    def s_ff(g):
        pg = params_with_coupling(p, g)
        return noise_spectrum(pg, solve_steady_state(pg), omega).s_ff

    center = s_ff(g_star)
    assert s_ff(1.01 * g_star) > center
    assert s_ff(0.99 * g_star) > center


# ---------------------------------------------------------------------------
# coupling optimizer


def test_optimizer_recovers_quantum_limit_point(baseline):
    omega = TWO_PI * 1e5
    reference = float(g_sql(baseline, omega))
    result = optimize_coupling(baseline, omega,
                               (reference / 10.0, 10.0 * reference))
    assert result.ratio == pytest.approx(1.0, abs=1e-3)
    assert result.g_opt == pytest.approx(reference, rel=1e-3)
    assert result.stable


def test_optimizer_beats_quantum_limit_with_pump_phase(baseline):
    omega = TWO_PI * 1e5
    p = baseline.with_updates(G=0.1 * baseline.kappa, theta=-math.pi / 4.0)
    reference = float(g_sql(p, omega))
    result = optimize_coupling(p, omega, (reference / 10.0, 10.0 * reference))
    assert result.ratio < 0.5
    assert result.g_opt < reference
    # the sub-SQL optimum sits beyond the parametric-drive instability
    assert not result.stable


def test_optimizer_phase_sweep_reaches_deep_suppression(baseline):
    omega = TWO_PI * 1e5
    p = baseline.with_updates(G=0.2 * baseline.kappa)
    reference = float(g_sql(p, omega))
    best = min(
        optimize_coupling(p.with_updates(theta=theta), omega,
                          (reference / 10.0, 10.0 * reference)).ratio
        for theta in np.linspace(-math.pi + 0.01, -0.01, 25))
    assert best <= 0.1


def test_optimizer_stability_constrained_mode(baseline):
    omega = TWO_PI * 1e5
    p = baseline.with_updates(G=0.1 * baseline.kappa, theta=-math.pi / 4.0)
    reference = float(g_sql(p, omega))
    with pytest.raises(NoStablePoint):
        optimize_coupling(p, omega, (reference / 3.0, 10.0 * reference),
                          require_stable=True)
    constrained = optimize_coupling(p, omega,
                                    (reference / 100.0, 10.0 * reference),
                                    require_stable=True)
    # the constrained optimum rides the stability boundary
    assert constrained.stability in ("stable", "marginal")
    unconstrained = optimize_coupling(p, omega,
                                      (reference / 100.0, 10.0 * reference))
    assert unconstrained.s_min < constrained.s_min


def test_optimizer_rejects_bad_range(baseline):
    with pytest.raises(ValueError):
        optimize_coupling(baseline, TWO_PI * 1e5, (1e6, 1e4))


# ---------------------------------------------------------------------------
# backaction suppression phase


def test_suppression_phase_vanishes_at_weak_coupling(baseline):
    p = baseline.with_updates(G=0.1 * baseline.kappa)
    theta = backaction_suppression_phase(p, 1e-4 * p.kappa, TWO_PI * 1e5)
    assert theta == pytest.approx(0.0, abs=1e-6)


def test_suppression_phase_infeasible_for_strong_coupling(baseline):
    p = baseline.with_updates(G=0.01 * baseline.kappa)
    omega = TWO_PI * 1e5
    strong = 10.0 * float(g_sql(p, omega))
    assert backaction_suppression_phase(p, strong, omega) is None


def test_suppression_phase_none_above_mechanical_resonance(baseline):
    p = baseline.with_updates(G=0.1 * baseline.kappa)
    assert backaction_suppression_phase(p, 1e6, 1.5 * p.omega_m) is None


def test_suppression_phase_kills_backaction(baseline):
    omega = TWO_PI * 1e5
    p = baseline.with_updates(G=0.1 * baseline.kappa)
    g = 0.8 * float(g_sql(p, omega))
    theta = backaction_suppression_phase(p, g, omega)
    assert theta is not None and -math.pi < theta <= 0.0

    def backaction(theta_value):
        pt = params_with_coupling(p.with_updates(theta=theta_value), g)
        return noise_spectrum(pt, solve_steady_state(pt), omega).s_backaction

    suppressed = backaction(theta)
    assert suppressed <= backaction(0.0) / 2.0
    # self-consistency of the defining balance at the returned phase
    pt = p.with_updates(theta=theta)
    from squeezed_com import intracavity_phase
    chi_m_real = p.omega_m / (p.omega_m ** 2 - omega ** 2)
    residual = (2.0 * p.G * math.sin(theta)
                + g ** 2 * chi_m_real * math.cos(intracavity_phase(pt)) ** 2)
    assert abs(residual) < 1e-6 * p.kappa


def test_suppression_phase_requires_gain(baseline):
    with pytest.raises(ValueError):
        backaction_suppression_phase(baseline, 1e6, TWO_PI * 1e5)


# ---------------------------------------------------------------------------
# homodyne quadrature rotation


def test_rotated_quadrature_selects_axes(baseline):
    p = baseline.with_updates(G=0.15 * baseline.kappa, theta=-0.6)
    ss = solve_steady_state(p)
    omega = TWO_PI * 2e5
    x_out, p_out = output_quadratures(p, ss, omega)
    at_zero = rotated_output_quadrature(p, ss, omega, 0.0)
    at_quarter = rotated_output_quadrature(p, ss, omega, math.pi / 2.0)
    at_half = rotated_output_quadrature(p, ss, omega, math.pi)
    for field in ("f_in", "x_a_in", "p_a_in"):
        assert getattr(at_zero, field) == pytest.approx(
            getattr(x_out, field), rel=1e-12, abs=1e-15)
        assert getattr(at_quarter, field) == pytest.approx(
            getattr(p_out, field), rel=1e-12, abs=1e-15)
        assert getattr(at_half, field) == pytest.approx(
            -getattr(x_out, field), rel=1e-12, abs=1e-15)
