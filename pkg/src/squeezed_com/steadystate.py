"""Classical steady state of the driven cavity + OPA + mirror system.

With the drive as zero-phase reference the stationary intracavity field is

    alpha = sqrt(kappa) * alpha_in * (kappa - 2i*delta + 4G e^{i theta})
            / (2 * sigma_plus),

which diverges at the parametric threshold sigma_plus -> 0; amplitude
dependent quantities refuse to evaluate there.  The intracavity and output
phases stay finite and are computed with the two-argument arctangent so
every quadrant is resolved (a single-argument arctan would be ambiguous
once 4G cos(theta) + kappa <= 0).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import NoConvergence, ParametricThreshold
from .params import SystemParams, derived

# |sigma_plus| below this multiple of kappa^2 counts as "at threshold"
THRESHOLD_TOL = 1e-9


@dataclass(frozen=True)
class SteadyState:
    """Stationary operating point of the linearized model.

    ``alpha`` is the mean intracavity field (photon-amplitude units),
    ``phi`` its phase, ``psi`` the phase of the output field, ``x_bar``
    the static mirror displacement in zero-point units (``p_bar`` is
    exactly zero), ``g_eff = sqrt(2) g0 |alpha|`` the linearized
    optomechanical coupling and ``n_a = |alpha|^2`` the mean photon number.
    """

    alpha: complex
    phi: float
    psi: float
    x_bar: float
    p_bar: float
    g_eff: float
    n_a: float


def _check_threshold(params: SystemParams) -> float:
    sigma_plus = derived(params).sigma_plus
    if abs(sigma_plus) <= THRESHOLD_TOL * params.kappa ** 2:
        raise ParametricThreshold(
            f"sigma_plus = {sigma_plus:.6g} (rad/s)^2 is within "
            f"{THRESHOLD_TOL:g}*kappa^2 of the parametric oscillation "
            "threshold; the linear steady state diverges")
    return sigma_plus


def intracavity_phase(params: SystemParams) -> float:
    """Phase of the mean intracavity field; finite at any gain."""
    return math.atan2(4.0 * params.G * math.sin(params.theta) - 2.0 * params.delta,
                      4.0 * params.G * math.cos(params.theta) + params.kappa)


def output_phase_psi(params: SystemParams) -> float:
    """Phase of the mean output field sqrt(kappa)*alpha - alpha_in."""
    _check_threshold(params)
    sigma_minus = derived(params).sigma_minus
    gk = params.G * params.kappa
    return math.atan2(2.0 * gk * math.sin(params.theta) - params.delta * params.kappa,
                      2.0 * gk * math.cos(params.theta) + sigma_minus)


def solve_steady_state(params: SystemParams) -> SteadyState:
    """Solve the stationary mean-field equations.

    Raises :class:`ParametricThreshold` when |sigma_plus| <= 1e-9 kappa^2.
    """
    sigma_plus = _check_threshold(params)
    dp = derived(params)
    alpha = (math.sqrt(params.kappa) * dp.alpha_in
             * (params.kappa - 2j * params.delta
                + 4.0 * params.G * cmath.exp(1j * params.theta))
             / (2.0 * sigma_plus))
    n_a = abs(alpha) ** 2
    return SteadyState(
        alpha=alpha,
        phi=intracavity_phase(params),
        psi=output_phase_psi(params),
        x_bar=-params.g0 * n_a / params.omega_m,
        p_bar=0.0,
        g_eff=math.sqrt(2.0) * params.g0 * abs(alpha),
        n_a=n_a,
    )


def stationary_residual(params: SystemParams, ss: SteadyState) -> float:
    """Relative residual of the stationary field equation.

    |-(i delta + kappa/2) alpha + 2G e^{i theta} alpha* + sqrt(kappa) alpha_in|
    normalized by the magnitude of its largest term; 0 for an exact root.
    """
    dp = derived(params)
    terms = (
        -(1j * params.delta + params.kappa / 2.0) * ss.alpha,
        2.0 * params.G * cmath.exp(1j * params.theta) * ss.alpha.conjugate(),
        math.sqrt(params.kappa) * dp.alpha_in + 0j,
    )
    scale = max(abs(t) for t in terms)
    if scale == 0.0:
        return 0.0
    return abs(sum(terms)) / scale


def params_with_coupling(params: SystemParams, g_target: float) -> SystemParams:
    """Rescale the drive power so the effective coupling equals ``g_target``.

    |alpha| scales as sqrt(P_in) at fixed detuning, so this leaves the
    phases and drift structure untouched.  Requires g0 > 0 and p_in > 0.
    """
    if g_target < 0.0:
        raise ValueError("g_target must be non-negative")
    base = solve_steady_state(params)
    if base.g_eff == 0.0:
        raise ValueError("cannot rescale coupling: baseline g_eff is zero "
                         "(needs g0 > 0 and p_in > 0)")
    return params.with_updates(p_in=params.p_in * (g_target / base.g_eff) ** 2)


def solve_effective_detuning(params: SystemParams, delta_a: float,
                             damping: float = 0.5,
                             tol_factor: float = 1e-9,
                             max_iter: int = 10_000) -> float:
    """Self-consistent effective detuning for a given bare detuning.

    Iterates delta <- delta_a - g0^2 |alpha(delta)|^2 / omega_m with
    under-relaxation until the update is below ``tol_factor * kappa``.
    Optional utility; the default workflows take delta as a direct input.

    Raises :class:`NoConvergence` (carrying the last iterate) if the map
    does not settle, e.g. in a multistable regime or when an iterate
    crosses the parametric threshold.
    """
    delta = delta_a
    tol = tol_factor * params.kappa
    lo = hi = delta
    for _ in range(max_iter):
        try:
            ss = solve_steady_state(params.with_updates(delta=delta))
        except ParametricThreshold as exc:
            raise NoConvergence(
                f"detuning iteration crossed the parametric threshold at "
                f"delta = {delta:.6g} rad/s", last_iterate=delta) from exc
        target = delta_a + params.g0 * ss.x_bar
        step = target - delta
        delta += damping * step
        lo, hi = min(lo, delta), max(hi, delta)
        if abs(step) < tol:
            return delta
    raise NoConvergence(
        f"effective-detuning iteration did not converge in {max_iter} steps; "
        f"last iterate {delta:.6g} rad/s, bracket [{lo:.6g}, {hi:.6g}]",
        last_iterate=delta)
