"""Linearized frequency response of the fluctuation dynamics.

The fluctuation vector (X, P, x_a, p_a) obeys  dv/dt = C v + A v_in  with
v_in = (0, f_in, x_a_in, p_a_in); in the frequency domain
(-i omega - C) v = A v_in.  Two routes to the optical quadratures are
provided:

* closed-form coefficients obtained by eliminating the mechanics
  (:func:`response_coefficients`, :func:`output_quadratures`) — the
  production path for dense sweeps;
* the direct 4x4 solve (:func:`solve_fluctuations`) — the independent
  oracle the closed forms are tested against, and a fallback.

Everything here is a pure function of immutable inputs; the coefficient
functions broadcast over numpy arrays of ``omega``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import SingularResponse
from .params import SystemParams
from .steadystate import SteadyState

# reciprocal-susceptibility magnitudes below SINGULAR_TOL*kappa count as
# a resonance on the real-frequency axis
SINGULAR_TOL = 1e-12
MAX_CONDITION = 1e12


@dataclass(frozen=True)
class DriftMatrices:
    """Drift matrix C and noise-coupling matrix A of the linearized model.

    ``c_plus``/``c_minus`` (2G cos(theta) +- kappa/2) and ``s_plus``/
    ``s_minus`` (2G sin(theta) +- delta) are the cavity-block entries; the
    optical quadratures decouple exactly when both s-coefficients vanish.
    """

    c_matrix: np.ndarray
    a_matrix: np.ndarray
    c_plus: float
    c_minus: float
    s_plus: float
    s_minus: float


def build_matrices(params: SystemParams, ss: SteadyState) -> DriftMatrices:
    """Assemble C and A for the state ordering (X, P, x_a, p_a)."""
    g = ss.g_eff
    cos_phi = np.cos(ss.phi)
    sin_phi = np.sin(ss.phi)
    c_plus = 2.0 * params.G * np.cos(params.theta) + params.kappa / 2.0
    c_minus = 2.0 * params.G * np.cos(params.theta) - params.kappa / 2.0
    s_plus = 2.0 * params.G * np.sin(params.theta) + params.delta
    s_minus = 2.0 * params.G * np.sin(params.theta) - params.delta
    c = np.array([
        [0.0, params.omega_m, 0.0, 0.0],
        [-params.omega_m, -params.gamma_m, -g * cos_phi, -g * sin_phi],
        [g * sin_phi, 0.0, c_minus, s_plus],
        [-g * cos_phi, 0.0, s_minus, -c_plus],
    ])
    a = np.diag([0.0, np.sqrt(2.0 * params.gamma_m),
                 np.sqrt(params.kappa), np.sqrt(params.kappa)])
    return DriftMatrices(c_matrix=c, a_matrix=a, c_plus=c_plus,
                         c_minus=c_minus, s_plus=s_plus, s_minus=s_minus)


class CoefficientSet(NamedTuple):
    """Closed-form susceptibilities and quadrature-mixing coefficients."""

    chi: np.ndarray        # cavity susceptibility (kappa/2 - i omega)^-1
    chi_m: np.ndarray      # mechanical susceptibility
    lambda_plus: np.ndarray
    lambda_minus: np.ndarray
    mu_plus: np.ndarray
    mu_minus: np.ndarray
    chi_plus: np.ndarray
    chi_minus: np.ndarray
    f_plus: np.ndarray     # force-signal gain into the amplitude quadrature
    f_minus: np.ndarray    # force-signal gain into the momentum quadrature


def coefficient_set(kappa, gamma_m, omega_m, G, theta, delta, g, phi,
                    omega) -> CoefficientSet:
    """Evaluate the coefficient chain; broadcasts over array arguments.

    Eliminating the mechanical response from the cavity block leaves a
    2x2 system for (x_a, p_a) whose diagonal inverse entries are
    1/lambda_+- and whose cross couplings are -mu_-+; chi_+- invert that
    system and f_+- collect the force drive entering each quadrature.
    Note the radiation-pressure dressing enters mu_plus through cos^2(phi)
    but mu_minus through sin^2(phi).
    """
    omega = np.asarray(omega)
    with np.errstate(divide="ignore", invalid="ignore"):
        chi = 1.0 / (kappa / 2.0 - 1j * omega)
        chi_m = omega_m / (omega_m ** 2 - omega ** 2 - 1j * omega * gamma_m)
        g2chi_m = g ** 2 * chi_m
        two_g_sin = 2.0 * G * np.sin(theta)
        two_g_cos = 2.0 * G * np.cos(theta)
        half_sin2phi = 0.5 * np.sin(2.0 * phi)
        mu_plus = -delta + two_g_sin + g2chi_m * np.cos(phi) ** 2
        mu_minus = delta + two_g_sin - g2chi_m * np.sin(phi) ** 2
        lambda_plus = 1.0 / (1.0 / chi - two_g_cos + g2chi_m * half_sin2phi)
        lambda_minus = 1.0 / (1.0 / chi + two_g_cos - g2chi_m * half_sin2phi)
        cross = mu_plus * mu_minus
        chi_plus = 1.0 / (1.0 / lambda_plus - cross * lambda_minus)
        chi_minus = 1.0 / (1.0 / lambda_minus - cross * lambda_plus)
        f_plus = np.sin(phi) - mu_minus * lambda_minus * np.cos(phi)
        f_minus = mu_plus * lambda_plus * np.sin(phi) - np.cos(phi)
    return CoefficientSet(chi, chi_m, lambda_plus, lambda_minus, mu_plus,
                          mu_minus, chi_plus, chi_minus, f_plus, f_minus)


@dataclass(frozen=True)
class ResponseCoefficients:
    """Frequency-dependent response coefficients at analysis frequency
    ``omega``.  Every coefficient satisfies c(-omega) = c(omega)* (all are
    rational in i*omega with real parameters)."""

    omega: float
    chi: complex
    chi_m: complex
    lambda_plus: complex
    lambda_minus: complex
    mu_plus: complex
    mu_minus: complex
    chi_plus: complex
    chi_minus: complex
    f_plus: complex
    f_minus: complex


def _coefficients_for(params: SystemParams, ss: SteadyState,
                      omega) -> CoefficientSet:
    return coefficient_set(params.kappa, params.gamma_m, params.omega_m,
                           params.G, params.theta, params.delta,
                           ss.g_eff, ss.phi, omega)


def response_coefficients(params: SystemParams, ss: SteadyState,
                          omega) -> ResponseCoefficients:
    """Closed-form coefficients at ``omega`` (scalar or array).

    Raises :class:`SingularResponse` if any inverse susceptibility falls
    below 1e-12*kappa in magnitude, which flags a resonance of the
    linearized system on the real axis (typically past an instability).
    """
    cs = _coefficients_for(params, ss, omega)
    floor = SINGULAR_TOL * params.kappa
    for name, value in (("lambda_plus", cs.lambda_plus),
                        ("lambda_minus", cs.lambda_minus),
                        ("chi_plus", cs.chi_plus),
                        ("chi_minus", cs.chi_minus)):
        with np.errstate(divide="ignore", invalid="ignore"):
            inverse_magnitude = np.abs(1.0 / value)
        # negated comparison so non-finite values are refused too
        if not np.all(inverse_magnitude >= floor):
            raise SingularResponse(
                f"1/{name} magnitude below {floor:.3g} rad/s at "
                f"omega = {omega!r}")
    return ResponseCoefficients(omega, cs.chi, cs.chi_m, cs.lambda_plus,
                                cs.lambda_minus, cs.mu_plus, cs.mu_minus,
                                cs.chi_plus, cs.chi_minus, cs.f_plus,
                                cs.f_minus)


def solve_fluctuations(matrices: DriftMatrices, omega: float) -> np.ndarray:
    """Direct transfer matrix T(omega) = (-i omega I - C)^-1 A.

    Maps the input vector (0, f_in, x_a_in, p_a_in) to (X, P, x_a, p_a).
    Raises :class:`SingularResponse` when the system matrix is
    ill-conditioned beyond 1e12.
    """
    system = -1j * omega * np.eye(4) - matrices.c_matrix
    condition = np.linalg.cond(system)
    if not np.isfinite(condition) or condition > MAX_CONDITION:
        raise SingularResponse(
            f"(-i omega - C) condition number {condition:.3g} exceeds "
            f"{MAX_CONDITION:g} at omega = {omega:.6g} rad/s")
    return np.linalg.solve(system, matrices.a_matrix.astype(complex))


class QuadratureCoefficients(NamedTuple):
    """Coefficients of (f_in, x_a_in, p_a_in) for one quadrature."""

    f_in: complex
    x_a_in: complex
    p_a_in: complex


def intracavity_quadratures(params: SystemParams, ss: SteadyState, omega
                            ) -> tuple[QuadratureCoefficients, QuadratureCoefficients]:
    """Closed-form input coefficients of the intracavity x_a and p_a."""
    cs = _coefficients_for(params, ss, omega)
    g = ss.g_eff
    root_2gm = np.sqrt(2.0 * params.gamma_m)
    root_k = np.sqrt(params.kappa)
    x_a = QuadratureCoefficients(
        f_in=g * cs.f_plus * cs.chi_plus * cs.chi_m * root_2gm,
        x_a_in=cs.chi_plus * root_k,
        p_a_in=cs.mu_minus * cs.lambda_minus * cs.chi_plus * root_k,
    )
    p_a = QuadratureCoefficients(
        f_in=g * cs.f_minus * cs.chi_minus * cs.chi_m * root_2gm,
        x_a_in=cs.mu_plus * cs.lambda_plus * cs.chi_minus * root_k,
        p_a_in=cs.chi_minus * root_k,
    )
    return x_a, p_a


def output_quadratures(params: SystemParams, ss: SteadyState, omega
                       ) -> tuple[QuadratureCoefficients, QuadratureCoefficients]:
    """Input coefficients of the output quadratures.

    Applies the boundary relation s_out = sqrt(kappa) s - s_in to the
    intracavity solution.
    """
    cs = _coefficients_for(params, ss, omega)
    g = ss.g_eff
    root_2kgm = np.sqrt(2.0 * params.kappa * params.gamma_m)
    x_out = QuadratureCoefficients(
        f_in=g * cs.f_plus * cs.chi_plus * cs.chi_m * root_2kgm,
        x_a_in=cs.chi_plus * params.kappa - 1.0,
        p_a_in=cs.mu_minus * cs.lambda_minus * cs.chi_plus * params.kappa,
    )
    p_out = QuadratureCoefficients(
        f_in=g * cs.f_minus * cs.chi_minus * cs.chi_m * root_2kgm,
        x_a_in=cs.mu_plus * cs.lambda_plus * cs.chi_minus * params.kappa,
        p_a_in=cs.chi_minus * params.kappa - 1.0,
    )
    return x_out, p_out
