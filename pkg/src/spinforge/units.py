"""Physical constants and unit conversions.

Internal convention: frequencies are angular rates in rad/ms (numerically
equal to krad/s), times are in ms.  Forces stay in SI newtons and lengths in
SI meters; hbar enters only where those convert into angular rates.  Input
suffixes "kHz"/"MHz" are read as angular rates (1 kHz -> 1 rad/ms), which is
the reading under which the optimal-time consistency checks (t = pi/upsilon)
come out right.
"""

from __future__ import annotations

import math
import re

HBAR = 1.0545718e-34  # J s

#: 1 (rad/s) expressed in rad/ms.
RAD_PER_S_TO_RAD_PER_MS = 1e-3

UNIT_CONVENTION_NOTE = (
    "frequencies are angular rates: 1 kHz input = 1 rad/ms = 1 krad/s internally"
)


def ground_state_spread(mass: float, omega: float) -> float:
    """Spread sqrt(hbar / (2 m omega)) of the oscillator ground state.

    mass in kg, omega in rad/s; returns meters.
    """
    if mass <= 0 or omega <= 0:
        raise ValueError("mass and omega must be positive")
    return math.sqrt(HBAR / (2.0 * mass * omega))


def trap_frequency_for_spread(mass: float, r0: float) -> float:
    """Inverse of ground_state_spread: omega (rad/s) giving the spread r0 (m)."""
    if mass <= 0 or r0 <= 0:
        raise ValueError("mass and r0 must be positive")
    return HBAR / (2.0 * mass * r0 * r0)


def force_energy(f_d: float, r0: float) -> float:
    """Resonantly retained force energy r0 * f_d / 2 in joules."""
    return r0 * f_d / 2.0


def force_rate(f_d: float, r0: float) -> float:
    """Force energy over hbar, as an angular rate in rad/ms."""
    return force_energy(f_d, r0) / HBAR * RAD_PER_S_TO_RAD_PER_MS


def force_from_rate(rate: float, r0: float) -> float:
    """Invert force_rate: newtons from a rad/ms drive rate."""
    if r0 <= 0:
        raise ValueError("r0 must be positive")
    return rate / RAD_PER_S_TO_RAD_PER_MS * HBAR * 2.0 / r0


def omega_f(g: float, r0: float, f_d: float, delta: float) -> float:
    """Effective spin rotation rate 2 g r0 f_d / (hbar delta) in rad/ms.

    g and delta in rad/ms (their ratio is dimensionless), r0 in m, f_d in N.
    """
    if delta == 0.0:
        raise ValueError("delta must be nonzero")
    return 2.0 * (g / delta) * (r0 * f_d / HBAR) * RAD_PER_S_TO_RAD_PER_MS


def force_from_omega_f(omega: float, g: float, r0: float, delta: float) -> float:
    """Invert omega_f: force amplitude in newtons."""
    if g == 0.0 or r0 <= 0:
        raise ValueError("g and r0 must be nonzero")
    return omega / RAD_PER_S_TO_RAD_PER_MS * HBAR * delta / (2.0 * g * r0)


# suffix -> (dimension, factor into internal unit of that dimension)
_SUFFIXES = {
    "N": ("force", 1.0),
    "yN": ("force", 1e-24),
    "xN": ("force", 1e-27),
    "aN": ("force", 1e-18),
    "nm": ("length", 1e-9),
    "kHz": ("frequency", 1.0),
    "MHz": ("frequency", 1e3),
    "ms": ("time", 1.0),
    "s": ("time", 1e3),
}

#: internal unit per dimension, for documentation and error messages
INTERNAL_UNITS = {
    "force": "N",
    "length": "m",
    "frequency": "rad/ms",
    "time": "ms",
}

_QUANTITY_RE = re.compile(r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*([a-zA-Z]*)\s*$")


def parse_quantity(text: str, dimension: str) -> float:
    """Parse "2.5kHz", "14.5nm", "3yN", "10ms" or a bare number.

    Bare numbers are taken in the internal unit of the expected dimension
    (rad/ms, N, m or ms).  A suffix of the wrong dimension is an error.
    """
    if dimension not in INTERNAL_UNITS:
        raise ValueError(f"unknown dimension {dimension!r}")
    m = _QUANTITY_RE.match(str(text))
    if not m:
        raise ValueError(f"cannot parse quantity {text!r}")
    value = float(m.group(1))
    suffix = m.group(2)
    if not suffix:
        return value
    if suffix not in _SUFFIXES:
        raise ValueError(f"unknown unit suffix {suffix!r} in {text!r}")
    dim, factor = _SUFFIXES[suffix]
    if dim != dimension:
        raise ValueError(
            f"{text!r} is a {dim}, expected a {dimension} "
            f"(internal unit {INTERNAL_UNITS[dimension]})"
        )
    return value * factor
