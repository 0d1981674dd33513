"""Dynamical stability of the linearized model.

The drift matrix C has the quartic characteristic polynomial
lambda^4 + C3 lambda^3 + C2 lambda^2 + C1 lambda + C0 with closed-form
coefficients.  Stability is decided by the Routh-Hurwitz conditions (the
documented procedure) and cross-checked against the eigenvalues of C (the
oracle); both verdicts are always computed.  For a quartic the complete
criterion needs C0 > 0 alongside the three composite conditions —
without it a positive real root can hide behind otherwise-positive rows,
which the eigenvalue oracle exposes.

Near-zero condition values (relative to the size of their additive terms)
or near-imaginary-axis eigenvalues are reported as MARGINAL rather than
silently classified: double-precision verdicts are ambiguous there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import SystemParams, derived
from .response import build_matrices
from .steadystate import SteadyState

MARGIN_TOL = 1e-9


@dataclass(frozen=True)
class StabilityReport:
    """Characteristic-polynomial coefficients, Routh-Hurwitz condition
    values, and the eigenvalue-oracle verdict."""

    c0: float
    c1: float
    c2: float
    c3: float
    rh1: float
    rh2: float
    rh3: float
    stable_rh: bool
    stable_eig: bool
    max_real_eig: float
    marginal: bool

    @property
    def verdict(self) -> str:
        if self.marginal:
            return "marginal"
        return "stable" if self.stable_rh else "unstable"


def _coefficients_raw(params: SystemParams, g: float, phi: float
                      ) -> tuple[float, float, float, float]:
    sigma_plus = derived(params).sigma_plus
    om2 = params.omega_m ** 2
    c3 = params.kappa + params.gamma_m
    c2 = om2 + params.kappa * params.gamma_m + sigma_plus
    c1 = params.kappa * om2 + sigma_plus * params.gamma_m
    c0 = (sigma_plus * om2
          + 2.0 * g ** 2 * params.G * params.omega_m
          * math.sin(2.0 * phi - params.theta)
          - g ** 2 * params.omega_m * params.delta)
    return c0, c1, c2, c3


def characteristic_coefficients(params: SystemParams, ss: SteadyState
                                ) -> tuple[float, float, float, float]:
    """(C0, C1, C2, C3) of det(C - lambda I) = lambda^4 + C3 lambda^3 + ..."""
    return _coefficients_raw(params, ss.g_eff, ss.phi)


def _phantom(g: float, phi: float) -> SteadyState:
    """Operating point carrying only what the drift matrix needs."""
    return SteadyState(alpha=0j, phi=phi, psi=0.0, x_bar=0.0, p_bar=0.0,
                       g_eff=g, n_a=0.0)


def _report_raw(params: SystemParams, g: float, phi: float) -> StabilityReport:
    c0, c1, c2, c3 = _coefficients_raw(params, g, phi)
    rh1 = c3
    rh2 = c3 * c2 - c1
    rh3 = c3 * c2 * c1 - (c1 ** 2 + c3 ** 2 * c0)
    stable_rh = (rh1 > 0.0) and (rh2 > 0.0) and (rh3 > 0.0) and (c0 > 0.0)

    # term-magnitude scales for the marginality bands; c0's uses sigma
    # (= kappa^2/4 + delta^2 + 4G^2) so a sigma_plus ~ 0 crossing registers
    dp = derived(params)
    g2om = g ** 2 * params.omega_m
    scale_c0 = (dp.sigma * params.omega_m ** 2
                + 2.0 * g2om * params.G + g2om * abs(params.delta))
    scale_rh2 = abs(c3 * c2) + abs(c1)
    scale_rh3 = abs(c3 * c2 * c1) + c1 ** 2 + abs(c3 ** 2 * c0)

    eigenvalues = np.linalg.eigvals(build_matrices(params, _phantom(g, phi)).c_matrix)
    max_real = float(np.max(eigenvalues.real))
    stable_eig = max_real < 0.0

    marginal = (abs(c0) < MARGIN_TOL * scale_c0
                or abs(rh2) < MARGIN_TOL * scale_rh2
                or abs(rh3) < MARGIN_TOL * scale_rh3
                or abs(max_real) < MARGIN_TOL * params.kappa)
    return StabilityReport(c0=c0, c1=c1, c2=c2, c3=c3, rh1=rh1, rh2=rh2,
                           rh3=rh3, stable_rh=stable_rh,
                           stable_eig=stable_eig, max_real_eig=max_real,
                           marginal=marginal)


def is_stable(params: SystemParams, ss: SteadyState) -> StabilityReport:
    """Full stability report for an operating point."""
    return _report_raw(params, ss.g_eff, ss.phi)


def verdict_for_coupling(params: SystemParams, g: float, phi: float) -> str:
    """Verdict string for an explicit coupling value, bypassing the drive
    power (used by coupling sweeps and optimizers)."""
    return _report_raw(params, g, phi).verdict


def verdicts_for_grid(params_grid, g_grid, phi_grid) -> np.ndarray:
    """Vectorized verdicts over broadcastable grids.

    ``params_grid`` supplies per-point (kappa, gamma_m, omega_m, G, theta,
    delta) as a mapping of broadcastable arrays; returns an object array of
    verdict strings with the broadcast shape.
    """
    kappa = np.asarray(params_grid["kappa"], dtype=float)
    gamma_m = np.asarray(params_grid["gamma_m"], dtype=float)
    omega_m = np.asarray(params_grid["omega_m"], dtype=float)
    G = np.asarray(params_grid["G"], dtype=float)
    theta = np.asarray(params_grid["theta"], dtype=float)
    delta = np.asarray(params_grid["delta"], dtype=float)
    g = np.asarray(g_grid, dtype=float)
    phi = np.asarray(phi_grid, dtype=float)

    shape = np.broadcast_shapes(kappa.shape, gamma_m.shape, omega_m.shape,
                                G.shape, theta.shape, delta.shape,
                                g.shape, phi.shape)
    kappa, gamma_m, omega_m, G, theta, delta, g, phi = (
        np.broadcast_to(a, shape) for a in
        (kappa, gamma_m, omega_m, G, theta, delta, g, phi))

    sigma_plus = kappa ** 2 / 4.0 + delta ** 2 - 4.0 * G ** 2
    sigma = kappa ** 2 / 4.0 + delta ** 2 + 4.0 * G ** 2
    om2 = omega_m ** 2
    c3 = kappa + gamma_m
    c2 = om2 + kappa * gamma_m + sigma_plus
    c1 = kappa * om2 + sigma_plus * gamma_m
    c0 = (sigma_plus * om2
          + 2.0 * g ** 2 * G * omega_m * np.sin(2.0 * phi - theta)
          - g ** 2 * omega_m * delta)
    rh2 = c3 * c2 - c1
    rh3 = c3 * c2 * c1 - (c1 ** 2 + c3 ** 2 * c0)
    stable_rh = (c3 > 0) & (rh2 > 0) & (rh3 > 0) & (c0 > 0)

    g2om = g ** 2 * omega_m
    scale_c0 = sigma * om2 + 2.0 * g2om * G + g2om * np.abs(delta)
    scale_rh2 = np.abs(c3 * c2) + np.abs(c1)
    scale_rh3 = np.abs(c3 * c2 * c1) + c1 ** 2 + np.abs(c3 ** 2 * c0)

    # stacked 4x4 drift matrices for the eigenvalue oracle
    zeros = np.zeros(shape)
    cos_phi, sin_phi = np.cos(phi), np.sin(phi)
    c_mat = np.stack([
        np.stack([zeros, omega_m, zeros, zeros], axis=-1),
        np.stack([-omega_m, -gamma_m, -g * cos_phi, -g * sin_phi], axis=-1),
        np.stack([g * sin_phi, zeros,
                  2.0 * G * np.cos(theta) - kappa / 2.0,
                  2.0 * G * np.sin(theta) + delta], axis=-1),
        np.stack([-g * cos_phi, zeros,
                  2.0 * G * np.sin(theta) - delta,
                  -(2.0 * G * np.cos(theta) + kappa / 2.0)], axis=-1),
    ], axis=-2)
    max_real = np.max(np.linalg.eigvals(c_mat).real, axis=-1)

    marginal = ((np.abs(c0) < MARGIN_TOL * scale_c0)
                | (np.abs(rh2) < MARGIN_TOL * scale_rh2)
                | (np.abs(rh3) < MARGIN_TOL * scale_rh3)
                | (np.abs(max_real) < MARGIN_TOL * kappa))

    return np.where(marginal, "marginal",
                    np.where(stable_rh, "stable", "unstable"))
