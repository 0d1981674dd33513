"""System parameters, derived quantities, validation, and config I/O.

Unit conventions
----------------
Internally every rate and frequency is an *angular* frequency in rad/s.
Config files (JSON) carry ordinary frequencies in Hz under ``*_hz`` keys
(nu = omega / 2*pi); ingestion multiplies by 2*pi, dumping divides.  The
OPA pump phase is stored in radians and normalized into (-pi, pi].
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

from .constants import HBAR, K_B

TWO_PI = 2.0 * math.pi

# config keys carrying nu = omega/2pi, in the fixed file order
_HZ_KEYS = ("kappa_hz", "gamma_m_hz", "omega_m_hz", "omega_l_hz",
            "g0_hz", "G_hz", "delta_hz")
_CONFIG_KEYS = _HZ_KEYS + ("theta_rad", "p_in_w", "temperature_k")

# mapping config key -> SystemParams field
_FIELD_FOR_KEY = {
    "kappa_hz": "kappa",
    "gamma_m_hz": "gamma_m",
    "omega_m_hz": "omega_m",
    "omega_l_hz": "omega_l",
    "g0_hz": "g0",
    "G_hz": "G",
    "delta_hz": "delta",
    "theta_rad": "theta",
    "p_in_w": "p_in",
    "temperature_k": "temperature",
}


def _normalize_phase(theta: float) -> float:
    """Wrap a phase into (-pi, pi]."""
    wrapped = math.remainder(theta, TWO_PI)  # lands in [-pi, pi]
    if wrapped == -math.pi:
        wrapped = math.pi
    return wrapped


@dataclass(frozen=True)
class SystemParams:
    """Physical inputs of the cavity + mechanical oscillator + OPA model.

    All rates/frequencies are angular (rad/s); ``theta`` is the OPA pump
    phase in radians, ``p_in`` the drive power in W, ``temperature`` the
    mechanical bath temperature in K.  ``delta`` is the *effective* cavity
    detuning (drive-frame detuning already shifted by the static
    radiation-pressure displacement); it is a direct input, not solved
    self-consistently.  Instances are immutable and safe to share between
    threads.
    """

    kappa: float          # cavity energy decay rate
    gamma_m: float        # mechanical damping rate
    omega_m: float        # mechanical resonance frequency
    omega_l: float        # drive laser frequency
    g0: float             # single-photon optomechanical coupling
    G: float              # OPA parametric gain
    theta: float          # OPA pump phase, (-pi, pi]
    delta: float          # effective cavity detuning
    p_in: float           # input laser power, W
    temperature: float    # bath temperature, K

    def __post_init__(self):
        object.__setattr__(self, "theta", _normalize_phase(self.theta))

    def with_updates(self, **changes) -> "SystemParams":
        """Copy with some fields replaced (phase re-normalized)."""
        return replace(self, **changes)


@dataclass(frozen=True)
class DerivedParams:
    """Quantities derived algebraically from :class:`SystemParams`.

    ``alpha_in`` is the (real, by the zero-phase drive convention) input
    field amplitude sqrt(P_in / hbar omega_l).  ``sigma_plus`` vanishing
    marks the parametric oscillation threshold.
    """

    alpha_in: float       # s^(-1/2)
    sigma_plus: float     # (rad/s)^2,  kappa^2/4 + delta^2 - 4 G^2
    sigma_minus: float    # (rad/s)^2,  kappa^2/4 - delta^2 + 4 G^2
    sigma: float          # (rad/s)^2,  kappa^2/4 + delta^2 + 4 G^2
    n_bar: float          # mean thermal phonon occupation


def mean_phonon_number(omega_m: float, temperature: float) -> float:
    """Bose-Einstein occupation of the mechanical mode at temperature T.

    Returns 0 for T = 0.  Uses expm1 so the high-temperature limit
    k_B T / (hbar omega_m) is reached without cancellation.
    """
    if temperature == 0.0:
        return 0.0
    return 1.0 / math.expm1(HBAR * omega_m / (K_B * temperature))


def derived(params: SystemParams) -> DerivedParams:
    """Compute the derived parameter set.  Pure function of the inputs."""
    quarter_k2 = params.kappa ** 2 / 4.0
    d2 = params.delta ** 2
    four_g2 = 4.0 * params.G ** 2
    return DerivedParams(
        alpha_in=math.sqrt(params.p_in / (HBAR * params.omega_l)),
        sigma_plus=quarter_k2 + d2 - four_g2,
        sigma_minus=quarter_k2 - d2 + four_g2,
        sigma=quarter_k2 + d2 + four_g2,
        n_bar=mean_phonon_number(params.omega_m, params.temperature),
    )


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of :func:`validate`: hard violations and soft warnings."""

    violations: tuple[str, ...]
    warnings: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def validate(params: SystemParams) -> ValidationReport:
    """Check parameter invariants.  Reports, never raises.

    Violations: non-positive decay/oscillation rates, negative couplings,
    power, or temperature, non-finite values.  Warnings: mechanical quality
    factor below 100 (the Markovian thermal-force model needs Q >> 1), and
    OPA gain within 2 percent of (or beyond) the parametric threshold.
    """
    violations = []
    warnings = []

    for name in ("kappa", "gamma_m", "omega_m", "omega_l"):
        value = getattr(params, name)
        if not (value > 0.0) or not math.isfinite(value):
            violations.append(f"{name} must be positive and finite, got {value!r}")
    for name in ("g0", "G", "p_in", "temperature"):
        value = getattr(params, name)
        if value < 0.0 or not math.isfinite(value):
            violations.append(f"{name} must be non-negative and finite, got {value!r}")
    if not math.isfinite(params.delta):
        violations.append(f"delta must be finite, got {params.delta!r}")
    if not math.isfinite(params.theta):
        violations.append(f"theta must be finite, got {params.theta!r}")

    if not violations:
        quality = params.omega_m / params.gamma_m
        if quality < 100.0:
            warnings.append(
                f"mechanical quality factor Q = {quality:.3g} < 100; the "
                "delta-correlated thermal-force model assumes Q >> 1")
        # gain at which sigma_plus crosses zero for this detuning
        g_threshold = 0.5 * math.sqrt(params.kappa ** 2 / 4.0 + params.delta ** 2)
        if params.G >= 0.98 * g_threshold:
            warnings.append(
                f"OPA gain G = {params.G:.6g} rad/s is within 2% of (or beyond) "
                f"the parametric threshold {g_threshold:.6g} rad/s")

    return ValidationReport(tuple(violations), tuple(warnings))


# ---------------------------------------------------------------------------
# config I/O


def params_from_config(config: dict) -> SystemParams:
    """Build :class:`SystemParams` from a config mapping (Hz convention)."""
    missing = [k for k in _CONFIG_KEYS if k not in config]
    if missing:
        raise ValueError(f"config missing keys: {', '.join(missing)}")
    unknown = [k for k in config if k not in _CONFIG_KEYS]
    if unknown:
        raise ValueError(f"config has unknown keys: {', '.join(unknown)}")
    fields = {}
    for key in _CONFIG_KEYS:
        value = config[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValueError(f"config key {key} must be a number, got {value!r}")
        value = float(value)
        if key in _HZ_KEYS:
            value *= TWO_PI
        fields[_FIELD_FOR_KEY[key]] = value
    return SystemParams(**fields)


def load_config(path) -> SystemParams:
    """Read a JSON config file into :class:`SystemParams`."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            config = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(
                f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: "
                f"{exc.msg}") from exc
    if not isinstance(config, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    return params_from_config(config)


def _exact_hz(omega: float) -> float:
    """nu such that 2*pi*nu round-trips to omega bit-exactly when possible.

    Straight division is within 1 ulp of a preimage of omega under
    nu -> fl(2*pi*nu); nudge a few ulps to land on one.  When omega has no
    preimage (possible for values that never came from a Hz config), the
    plain quotient is returned.
    """
    nu = omega / TWO_PI
    up = down = nu
    for _ in range(4):
        if up * TWO_PI == omega:
            return up
        if down * TWO_PI == omega:
            return down
        up = math.nextafter(up, math.inf)
        down = math.nextafter(down, -math.inf)
    return nu


def config_from_params(params: SystemParams) -> dict:
    """Render :class:`SystemParams` back into the Hz config mapping."""
    config = {}
    for key in _CONFIG_KEYS:
        value = getattr(params, _FIELD_FOR_KEY[key])
        if key in _HZ_KEYS:
            value = _exact_hz(value)
        config[key] = value
    return config


def dump_config(params: SystemParams) -> str:
    """JSON text for ``--dump-config``; re-ingests to identical params."""
    return json.dumps(config_from_params(params), indent=2)


def reference_params() -> SystemParams:
    """Experimentally accessible reference operating point.

    kappa/2pi = omega_m/2pi = 10 MHz, gamma_m/2pi = 1 kHz, g0/2pi = 100 Hz,
    drive at 2e14 Hz and 700 nW, resonant (delta = 0), OPA off, T = 0.
    The bundled figure recipes start from this point.
    """
    return SystemParams(
        kappa=TWO_PI * 10e6,
        gamma_m=TWO_PI * 1e3,
        omega_m=TWO_PI * 10e6,
        omega_l=TWO_PI * 2e14,
        g0=TWO_PI * 100.0,
        G=0.0,
        theta=0.0,
        delta=0.0,
        p_in=700e-9,
        temperature=0.0,
    )
