"""Added-force noise spectral density and its optimization.

The force is inferred from the output momentum quadrature, F =
p_a_out / F_f with F_f the signal transfer function.  The symmetrized
noise PSD of the inferred force in scaled-force units splits exactly into

    S_FF = k_B T / (hbar omega_m)  +  |X_a|^2 / 2  +  |P_a|^2 / 2
           (thermal)                 (backaction)     (shot)

where X_a and P_a are the vacuum-noise gains of the two input quadratures
referred to the force.  Both are computed as ratios of the underlying
coefficient products (the common chi_minus cancels), so nothing overflows
as the signal gain f_minus shrinks; a ZeroSignalGain guard fires before
catastrophic cancellation.

S_SQL = 1/(2 gamma_m |chi_m|) is the broadband standard-sensor floor used
for ratio reporting, frequency by frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import HBAR, K_B
from .errors import NoConvergence, NoStablePoint, ZeroSignalGain
from .params import SystemParams
from .response import QuadratureCoefficients, coefficient_set, output_quadratures
from .stability import verdict_for_coupling
from .steadystate import SteadyState, intracavity_phase, solve_steady_state

ZERO_GAIN_TOL = 1e-12
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ForceTransfer:
    """Signal transfer F_f and vacuum-noise gains at one frequency.

    Satisfies x_a_coeff(-omega) = x_a_coeff(omega)* and likewise for
    p_a_coeff.
    """

    omega: float
    f_f: complex        # signal transfer into the measured quadrature
    x_a_coeff: complex  # X_a: amplitude-vacuum gain referred to the force
    p_a_coeff: complex  # P_a: phase-vacuum gain referred to the force


@dataclass(frozen=True)
class SpectrumPoint:
    """Symmetrized added-force PSD and its exact three-way decomposition."""

    omega: float
    s_thermal: float
    s_backaction: float
    s_shot: float
    s_ff: float
    s_sql: float
    ratio: float


def noise_gains(kappa, gamma_m, omega_m, G, theta, delta, g, phi, omega):
    """Vacuum-noise gains (X_a, P_a) of the force estimator.

    Broadcasts over array arguments; division by zero (vanishing signal
    gain or coupling) produces inf/nan entries rather than raising, so
    grid evaluators can flag them.  Scalar callers wanting hard errors use
    :func:`force_transfer`.
    """
    cs = coefficient_set(kappa, gamma_m, omega_m, G, theta, delta, g, phi,
                         omega)
    with np.errstate(divide="ignore", invalid="ignore"):
        denom = g * cs.f_minus * cs.chi_m * np.sqrt(2.0 * kappa * gamma_m)
        x_gain = cs.mu_plus * cs.lambda_plus * kappa / denom
        p_gain = (kappa - 1.0 / cs.lambda_minus
                  + cs.mu_plus * cs.mu_minus * cs.lambda_plus) / denom
    return x_gain, p_gain


def _gains_for(params: SystemParams, ss: SteadyState, omega):
    return noise_gains(params.kappa, params.gamma_m, params.omega_m,
                       params.G, params.theta, params.delta,
                       ss.g_eff, ss.phi, omega)


def force_transfer(params: SystemParams, ss: SteadyState,
                   omega: float) -> ForceTransfer:
    """Force estimator coefficients at one frequency.

    Raises :class:`ZeroSignalGain` when the effective coupling vanishes or
    the measured quadrature carries no force signal (|f_minus| < 1e-12).
    """
    if ss.g_eff <= 0.0:
        raise ZeroSignalGain("effective coupling g_eff is zero; the inferred "
                             "force is undefined")
    cs = coefficient_set(params.kappa, params.gamma_m, params.omega_m,
                         params.G, params.theta, params.delta,
                         ss.g_eff, ss.phi, omega)
    if np.any(np.abs(cs.f_minus) < ZERO_GAIN_TOL):
        raise ZeroSignalGain(
            f"|f_minus| < {ZERO_GAIN_TOL:g} at omega = {omega!r}: the "
            "measured quadrature carries no force signal")
    f_f = (ss.g_eff * cs.f_minus * cs.chi_minus * cs.chi_m
           * np.sqrt(2.0 * params.kappa * params.gamma_m))
    x_gain, p_gain = _gains_for(params, ss, omega)
    return ForceTransfer(omega=omega, f_f=f_f, x_a_coeff=x_gain,
                         p_a_coeff=p_gain)


def mechanical_susceptibility(params: SystemParams, omega):
    """chi_m(omega); broadcasts over arrays."""
    return params.omega_m / (params.omega_m ** 2 - omega ** 2
                             - 1j * omega * params.gamma_m)


def sql(params: SystemParams, omega) -> float:
    """Standard quantum limit reference 1/(2 gamma_m |chi_m(omega)|)."""
    return 1.0 / (2.0 * params.gamma_m
                  * np.abs(mechanical_susceptibility(params, omega)))


def thermal_noise_level(params: SystemParams) -> float:
    """Scaled thermal-force PSD k_B T / (hbar omega_m); 0 at T = 0.

    This is the classical (high-occupation) white level the decomposition
    uses; the exact occupation is available via
    :func:`squeezed_com.params.mean_phonon_number`.
    """
    return K_B * params.temperature / (HBAR * params.omega_m)


def noise_spectrum(params: SystemParams, ss: SteadyState,
                   omega: float) -> SpectrumPoint:
    """Symmetrized added-force PSD at one frequency, decomposed."""
    transfer = force_transfer(params, ss, omega)
    s_thermal = thermal_noise_level(params)
    s_backaction = 0.5 * float(np.abs(transfer.x_a_coeff)) ** 2
    s_shot = 0.5 * float(np.abs(transfer.p_a_coeff)) ** 2
    s_ff = s_thermal + s_backaction + s_shot
    s_sql = float(sql(params, omega))
    return SpectrumPoint(omega=omega, s_thermal=s_thermal,
                         s_backaction=s_backaction, s_shot=s_shot,
                         s_ff=s_ff, s_sql=s_sql, ratio=s_ff / s_sql)


def broadband_spectrum_standard(params: SystemParams, omega) -> float:
    """Two-term broadband PSD of the standard sensor (no OPA, resonant).

    g^2/(kappa gamma_m) + kappa / (16 g^2 gamma_m |chi_m|^2); valid for
    omega << kappa.  The coupling comes from the steady state of
    ``params``.
    """
    g = solve_steady_state(params).g_eff
    abs_chi_m = np.abs(mechanical_susceptibility(params, omega))
    return (g ** 2 / (params.kappa * params.gamma_m)
            + params.kappa / (16.0 * g ** 2 * params.gamma_m * abs_chi_m ** 2))


def g_opt_theta_zero(params: SystemParams, omega) -> float:
    """Noise-minimizing coupling for zero pump phase, |kappa - 4G| /
    (2 sqrt(kappa |chi_m|)); reduces to g_SQL = sqrt(kappa/(4|chi_m|)) at
    G = 0."""
    abs_chi_m = np.abs(mechanical_susceptibility(params, omega))
    return (abs(params.kappa - 4.0 * params.G)
            / (2.0 * np.sqrt(params.kappa * abs_chi_m)))


def g_sql(params: SystemParams, omega) -> float:
    """Coupling at which the standard sensor reaches the SQL."""
    abs_chi_m = np.abs(mechanical_susceptibility(params, omega))
    return np.sqrt(params.kappa / (4.0 * abs_chi_m))


@dataclass(frozen=True)
class CouplingOptimum:
    """Result of :func:`optimize_coupling`."""

    g_opt: float
    s_min: float
    ratio: float        # s_min / S_SQL(omega)
    stability: str      # RH/eigenvalue verdict at the optimum

    @property
    def stable(self) -> bool:
        return self.stability == "stable"


def _added_noise_at(params: SystemParams, phi: float, omega: float, g):
    """s_ff (thermal + quantum) for explicit coupling value(s)."""
    x_gain, p_gain = noise_gains(params.kappa, params.gamma_m,
                                 params.omega_m, params.G, params.theta,
                                 params.delta, g, phi, omega)
    quantum = 0.5 * np.abs(x_gain) ** 2 + 0.5 * np.abs(p_gain) ** 2
    return thermal_noise_level(params) + quantum


def optimize_coupling(params: SystemParams, omega: float,
                      g_range: tuple[float, float],
                      require_stable: bool = False,
                      grid_points: int = 64,
                      rel_tol: float = 1e-6) -> CouplingOptimum:
    """Minimize s_ff over the effective coupling g.

    A log-spaced scan over ``g_range`` brackets the minimum (the objective
    spans decades in g); golden-section refinement narrows the bracket to
    ``rel_tol`` relative width.  With ``require_stable`` every candidate is
    checked against the stability report and unstable couplings are
    skipped (:class:`NoStablePoint` if that empties the range); by default
    the spectrum formula itself is minimized and the optimum's stability
    is reported in the result, since the sub-SQL operating points of this
    scheme generally sit beyond the parametric-drive instability of the
    linearized dynamics.
    """
    g_lo, g_hi = g_range
    if not (0.0 < g_lo < g_hi):
        raise ValueError("g_range must satisfy 0 < g_lo < g_hi")
    phi = intracavity_phase(params)

    grid = np.geomspace(g_lo, g_hi, grid_points)
    values = np.asarray(_added_noise_at(params, phi, omega, grid), dtype=float)
    values[~np.isfinite(values)] = np.inf
    if require_stable:
        unstable = np.array([verdict_for_coupling(params, g, phi) == "unstable"
                             for g in grid])
        values[unstable] = np.inf
        if not np.isfinite(values).any():
            raise NoStablePoint("no dynamically stable coupling in "
                                f"[{g_lo:.6g}, {g_hi:.6g}] rad/s")
    best = int(np.argmin(values))

    def objective(g: float) -> float:
        if require_stable and verdict_for_coupling(params, g, phi) == "unstable":
            return np.inf
        value = float(_added_noise_at(params, phi, omega, g))
        return value if np.isfinite(value) else np.inf

    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, grid_points - 1)]
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = objective(c), objective(d)
    while (b - a) > rel_tol * b:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = objective(d)
    g_opt = 0.5 * (a + b)
    s_min = objective(g_opt)
    # keep the scan winner if refinement never improved on it
    if values[best] < s_min:
        g_opt, s_min = float(grid[best]), float(values[best])
    return CouplingOptimum(
        g_opt=float(g_opt), s_min=float(s_min),
        ratio=float(s_min) / float(sql(params, omega)),
        stability=verdict_for_coupling(params, float(g_opt), phi))


def backaction_suppression_phase(params: SystemParams, g: float,
                                 omega: float,
                                 tol: float = 1e-12,
                                 max_iter: int = 1000):
    """Pump phase that cancels the backaction gain, if one exists.

    Solves sin(theta) = -g^2 Re(chi_m) cos^2(phi) / (2G) self-consistently
    with phi(theta), by damped-free fixed-point iteration on the principal
    branch; the real part of chi_m replaces the complex susceptibility
    (below the mechanical resonance the imaginary part is down by
    ~ omega gamma_m / omega_m^2).  Returns the phase in (-pi, 0], or None
    when no such phase exists there (required |sin| > 1, or the required
    sine is positive, which happens above the mechanical resonance).

    Raises :class:`NoConvergence` after ``max_iter`` sweeps.
    """
    if params.G <= 0.0:
        raise ValueError("backaction suppression needs G > 0")
    chi_m_real = float(np.real(mechanical_susceptibility(params, omega)))
    theta = 0.0
    for _ in range(max_iter):
        phi = intracavity_phase(params.with_updates(theta=theta))
        sine = -g ** 2 * chi_m_real * math.cos(phi) ** 2 / (2.0 * params.G)
        if abs(sine) > 1.0:
            return None
        if sine > 0.0:
            return None  # no solution with theta in (-pi, 0]
        new_theta = math.asin(sine)
        if abs(new_theta - theta) < tol:
            return new_theta
        theta = new_theta
    raise NoConvergence("backaction-suppression phase iteration did not "
                        f"converge in {max_iter} steps", last_iterate=theta)


def rotated_output_quadrature(params: SystemParams, ss: SteadyState,
                              omega: float, varphi: float):
    """Input coefficients of the homodyne quadrature at LO phase varphi.

    cos(varphi) x_a_out + sin(varphi) p_a_out; varphi = pi/2 selects the
    momentum quadrature the force estimator reads out.
    """
    x_out, p_out = output_quadratures(params, ss, omega)
    c, s = math.cos(varphi), math.sin(varphi)
    return QuadratureCoefficients(
        f_in=c * x_out.f_in + s * p_out.f_in,
        x_a_in=c * x_out.x_a_in + s * p_out.x_a_in,
        p_a_in=c * x_out.p_a_in + s * p_out.p_a_in,
    )
