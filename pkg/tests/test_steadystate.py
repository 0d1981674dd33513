import cmath
import math

import numpy as np
import pytest

from squeezed_com import (ParametricThreshold, derived, intracavity_phase,
                          output_phase_psi, params_with_coupling,
                          solve_effective_detuning, solve_steady_state)
from squeezed_com.errors import NoConvergence
from squeezed_com.steadystate import stationary_residual


def random_point(baseline, rng, g_max=0.24, d_max=0.3):
    return baseline.with_updates(
        G=rng.uniform(0.0, g_max) * baseline.kappa,
        theta=rng.uniform(-math.pi, math.pi),
        delta=rng.uniform(-d_max, d_max) * baseline.kappa,
    )


def test_bare_resonant_cavity(baseline):
    ss = solve_steady_state(baseline)
    expected = 2.0 * derived(baseline).alpha_in / math.sqrt(baseline.kappa)
    assert ss.alpha == pytest.approx(expected, rel=1e-12)
    assert ss.alpha.imag == 0.0
    assert ss.phi == 0.0


def test_real_gain_resonant_closed_form(baseline):
    p = baseline.with_updates(G=0.15 * baseline.kappa)
    ss = solve_steady_state(p)
    expected = (2.0 * math.sqrt(p.kappa) * derived(p).alpha_in
                / (p.kappa - 4.0 * p.G))
    assert ss.alpha == pytest.approx(expected, rel=1e-12)
    assert ss.phi == 0.0


def test_strong_driving_at_reference_point(baseline):
    # the linearization regime requires |alpha| >> 1; here it is ~ 1e2
    assert solve_steady_state(baseline).n_a > 1e4
    assert abs(solve_steady_state(baseline).alpha) > 1e2


def test_stationary_equation_residual(baseline, rng):
    for _ in range(50):
        p = random_point(baseline, rng)
        ss = solve_steady_state(p)
        assert stationary_residual(p, ss) < 1e-10


def test_displacement_and_momentum(baseline, rng):
    p = random_point(baseline, rng)
    ss = solve_steady_state(p)
    assert ss.p_bar == 0.0
    assert ss.x_bar == -p.g0 * ss.n_a / p.omega_m


def test_phase_quarter_turn_at_quarter_kappa_gain(baseline):
    quarter = baseline.with_updates(G=baseline.kappa / 4.0)
    up = intracavity_phase(quarter.with_updates(theta=math.pi / 2.0))
    down = intracavity_phase(quarter.with_updates(theta=-math.pi / 2.0))
    assert up == pytest.approx(math.pi / 4.0, abs=1e-15)
    assert down == pytest.approx(-math.pi / 4.0, abs=1e-15)
    assert up - down == pytest.approx(math.pi / 2.0, abs=1e-15)


def test_phase_odd_in_pump_phase_on_resonance(baseline, rng):
    for _ in range(20):
        G = rng.uniform(0.0, 0.24) * baseline.kappa
        theta = rng.uniform(0.0, math.pi)
        plus = intracavity_phase(baseline.with_updates(G=G, theta=theta))
        minus = intracavity_phase(baseline.with_updates(G=G, theta=-theta))
        assert plus == pytest.approx(-minus, abs=1e-12)


def test_phase_agrees_with_field_argument(baseline, rng):
    for _ in range(30):
        p = random_point(baseline, rng)
        ss = solve_steady_state(p)
        mismatch = (intracavity_phase(p) - cmath.phase(ss.alpha)) % (2 * math.pi)
        assert min(mismatch, 2 * math.pi - mismatch) < 1e-10


def test_no_opa_gives_zero_phase_any_pump(baseline):
    for theta in (-2.0, 0.0, 1.3):
        assert intracavity_phase(baseline.with_updates(theta=theta)) == 0.0


def test_power_scaling(baseline, rng):
    p = random_point(baseline, rng)
    ss1 = solve_steady_state(p)
    ss4 = solve_steady_state(p.with_updates(p_in=4.0 * p.p_in))
    assert abs(ss4.alpha) == pytest.approx(2.0 * abs(ss1.alpha), rel=1e-12)
    assert ss4.phi == ss1.phi


def test_output_phase_trivial_cases(baseline):
    assert output_phase_psi(baseline) == 0.0
    with_gain = baseline.with_updates(G=0.2 * baseline.kappa, theta=0.0)
    assert output_phase_psi(with_gain) == 0.0


def test_output_phase_odd_in_pump_phase(baseline, rng):
    for _ in range(20):
        G = rng.uniform(0.01, 0.24) * baseline.kappa
        theta = rng.uniform(0.0, math.pi)
        plus = output_phase_psi(baseline.with_updates(G=G, theta=theta))
        minus = output_phase_psi(baseline.with_updates(G=G, theta=-theta))
        assert plus == pytest.approx(-minus, abs=1e-12)


def test_output_phase_matches_output_field_argument(baseline, rng):
    for _ in range(30):
        p = random_point(baseline, rng)
        ss = solve_steady_state(p)
        alpha_out = (math.sqrt(p.kappa) * ss.alpha - derived(p).alpha_in)
        mismatch = (output_phase_psi(p) - cmath.phase(alpha_out)) % (2 * math.pi)
        assert min(mismatch, 2 * math.pi - mismatch) < 1e-10


def test_threshold_refusal(baseline):
    at = baseline.with_updates(G=baseline.kappa / 4.0)
    with pytest.raises(ParametricThreshold):
        solve_steady_state(at)
    with pytest.raises(ParametricThreshold):
        output_phase_psi(at)
    # the phase formula itself stays finite at threshold
    assert np.isfinite(intracavity_phase(at))


def test_params_with_coupling_hits_target(baseline):
    target = 3.3e6
    rescaled = params_with_coupling(baseline, target)
    ss = solve_steady_state(rescaled)
    assert ss.g_eff == pytest.approx(target, rel=1e-12)
    assert ss.phi == solve_steady_state(baseline).phi


def test_detuning_solver_without_backaction(baseline):
    p = baseline.with_updates(g0=0.0)
    assert solve_effective_detuning(p, 0.0) == 0.0
    assert solve_effective_detuning(p, 123.0) == 123.0


def test_detuning_solver_small_shift_converges_quickly(baseline):
    # reference-point backaction shift is ~ 2e-4 kappa; 20 sweeps suffice
    delta_a = 0.01 * baseline.kappa
    delta = solve_effective_detuning(baseline, delta_a, max_iter=20)
    ss = solve_steady_state(baseline.with_updates(delta=delta))
    assert delta == pytest.approx(delta_a + baseline.g0 * ss.x_bar,
                                  abs=1e-9 * baseline.kappa)


def test_detuning_solver_reports_nonconvergence(baseline):
    with pytest.raises(NoConvergence) as info:
        solve_effective_detuning(baseline, 0.01 * baseline.kappa, max_iter=2)
    assert info.value.last_iterate is not None
