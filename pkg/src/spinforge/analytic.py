"""Closed-form signal, variance and sensitivity formulas.

These are the analytic counterparts of the numeric propagators and serve as
their oracles.  Angles: xi is the accumulated twisting phase (signed when the
detuning is negative), phi_f = Omega_f * t the force phase.  The envelope
exponent of the twisting signal is (2j-1)/2: squaring it reproduces the last
term of the half-pi variance, and exact propagation confirms it to rounding
(the test suite demonstrates both this and the failure of the 2j-1 variant).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import units
from .models import ModelParams, StrongDerived, derive_strong

__all__ = [
    "SensitivityQuote",
    "kappa_angle",
    "oat_signal",
    "oat_signal_slope_phi",
    "oat_variance",
    "oat_variance_halfpi",
    "invert_oat_signal",
    "frequency_uncertainty",
    "ghz_sensitivity",
    "min_force_strong",
    "min_force_harmonic",
    "min_force_harmonic_resonant",
    "strong_signal",
]


@dataclass(frozen=True)
class SensitivityQuote:
    """A per-root-hertz force sensitivity, with where and how it was reached.

    value in N/sqrt(Hz); achieved_at_time in ms.  The quote convention is
    f_min(t) * sqrt(t) with t in seconds (one shot per evolution window);
    this is the bridge that reproduces the quoted numbers from the formulas.
    """

    value: float
    achieved_at_time: float
    protocol: str

    def __post_init__(self) -> None:
        if self.value <= 0:
            raise ValueError("sensitivity must be positive")


def kappa_angle(xi, cos_theta):
    """Continuous branch of atan(tan(xi) cos(theta)), zero at xi = 0.

    Works pointwise: the branch index is recovered from round(xi/pi), so no
    series unwrapping is needed.
    """
    xi = np.asarray(xi, dtype=float)
    n = np.round(xi / math.pi)
    base = np.arctan(np.tan(xi - n * math.pi) * cos_theta)
    out = base + n * math.pi * np.sign(cos_theta)
    return out if out.ndim else float(out)


def oat_signal(j: float, theta: float, xi, phi_f):
    """Twisted-state signal <J_z>(t).

    j sin(theta) (1 - sin^2 theta sin^2 xi)^((2j-1)/2) cos(phi_f + (2j-1) kappa)
    """
    xi = np.asarray(xi, dtype=float)
    phi_f = np.asarray(phi_f, dtype=float)
    c = math.cos(theta)
    s = math.sin(theta)
    env = (1.0 - s * s * np.sin(xi) ** 2) ** ((2.0 * j - 1.0) / 2.0)
    out = j * s * env * np.cos(phi_f + (2.0 * j - 1.0) * kappa_angle(xi, c))
    return out if out.ndim else float(out)


def oat_signal_slope_phi(j: float, theta: float, xi, phi_f):
    """d<J_z>/d(phi_f) at fixed xi."""
    xi = np.asarray(xi, dtype=float)
    phi_f = np.asarray(phi_f, dtype=float)
    c = math.cos(theta)
    s = math.sin(theta)
    env = (1.0 - s * s * np.sin(xi) ** 2) ** ((2.0 * j - 1.0) / 2.0)
    out = -j * s * env * np.sin(phi_f + (2.0 * j - 1.0) * kappa_angle(xi, c))
    return out if out.ndim else float(out)


def oat_variance(j: float, theta: float, xi, phi_f):
    """Exact signal variance <J_z^2> - <J_z>^2 for any preparation angle.

    Built from the second ladder moment: <K_+^2>(t) has envelope
    (s^2 + c^2 e^(-4 i xi))^(2j-2) with c = cos(theta/2), s = sin(theta/2),
    while <K_z^2> is conserved.
    """
    xi = np.asarray(xi, dtype=float)
    phi_f = np.asarray(phi_f, dtype=float)
    ch, sh = math.cos(theta / 2.0) ** 2, math.sin(theta / 2.0) ** 2
    s = math.sin(theta)
    # conserved ladder part: (j(j+1) - <K_z^2>)/2 with <K_z^2> of the cone
    kz2 = j * s * s / 2.0 + j * j * math.cos(theta) ** 2
    const = (j * (j + 1.0) - kz2) / 2.0
    base = sh + ch * np.exp(-4.0j * xi)
    kplus2 = (
        (j * (2.0 * j - 1.0) / 2.0)
        * s
        * s
        * np.exp(-2.0j * phi_f)
        * np.exp(4.0j * xi * (j - 1.0))
        * base ** (2.0 * j - 2.0)
    )
    second = const + 0.5 * np.real(kplus2)
    mean = oat_signal(j, theta, xi, phi_f)
    out = second - np.asarray(mean) ** 2
    return out if out.ndim else float(out)


def oat_variance_halfpi(j: float, xi, phi_f):
    """Variance at theta = pi/2 in its compact printed form."""
    xi = np.asarray(xi, dtype=float)
    phi_f = np.asarray(phi_f, dtype=float)
    out = (
        j / 2.0
        + j * (2.0 * j - 1.0) / 4.0
        + (j * (2.0 * j - 1.0) / 4.0) * np.cos(2.0 * xi) ** (2.0 * (j - 1.0)) * np.cos(2.0 * phi_f)
        - j * j * np.cos(xi) ** (2.0 * (2.0 * j - 1.0)) * np.cos(phi_f) ** 2
    )
    return out if out.ndim else float(out)


def invert_oat_signal(j: float, theta: float, xi: float, measured: float) -> float:
    """Local inversion of the signal for phi_f, on the principal branch."""
    c = math.cos(theta)
    s = math.sin(theta)
    env = j * s * (1.0 - s * s * math.sin(xi) ** 2) ** ((2.0 * j - 1.0) / 2.0)
    if env == 0.0:
        raise ZeroDivisionError("signal envelope vanishes at this readout point")
    ratio = min(1.0, max(-1.0, measured / env))
    return math.acos(ratio) - (2.0 * j - 1.0) * kappa_angle(xi, c)


def frequency_uncertainty(
    j: float,
    theta: float,
    xi: float,
    phi_f: float,
    repetitions: float,
    t: float,
) -> float:
    """Estimation uncertainty sqrt(Var)/(|d<J_z>/dOmega_f| sqrt(nu)) in 1/ms.

    t is the evolution time in ms (the slope in Omega_f is t times the slope
    in phi_f).  A zero-slope readout point returns +inf.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    if t <= 0:
        raise ValueError("t must be positive")
    var = oat_variance(j, theta, xi, phi_f)
    slope = t * oat_signal_slope_phi(j, theta, xi, phi_f)
    if slope == 0.0:
        return math.inf
    var = max(var, 0.0)
    return math.sqrt(var) / (abs(slope) * math.sqrt(repetitions))


def ghz_sensitivity(params: ModelParams, t: float) -> SensitivityQuote:
    """Parity-readout force sensitivity hbar delta_x / (2 N g_x r0 sqrt(t)).

    t in ms; the quote is already per sqrt(Hz) (the total time cancels).
    """
    if params.delta_x <= 0 or params.g_x <= 0 or params.r0_x <= 0:
        raise ValueError("delta_x, g_x and r0_x must be positive")
    if t <= 0:
        raise ValueError("t must be positive")
    t_s = t * 1e-3
    value = (
        units.HBAR
        * params.delta_x
        / (2.0 * params.spin_count * params.g_x * params.r0_x * math.sqrt(t_s))
    )
    return SensitivityQuote(value, t, "ghz_parity")


def min_force_strong(
    params: ModelParams, t: float, n_ions: int | None = None
) -> SensitivityQuote:
    """Phonon-readout minimal force, quoted per sqrt(Hz) at evolution time t (ms).

    f_min = hbar pi sqrt(1 - lambda_x^2) / (t r0_x sqrt(N)); the quote is
    f_min * sqrt(t) with t in seconds.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    n = params.spin_count if n_ions is None else n_ions
    strong = derive_strong(params)
    t_s = t * 1e-3
    f_min = (
        units.HBAR
        * math.pi
        * math.sqrt(1.0 - strong.lambda_x**2)
        / (t_s * params.r0_x * math.sqrt(n))
    )
    return SensitivityQuote(f_min * math.sqrt(t_s), t, "strong_phonon")


def min_force_harmonic(r0: float, t: float) -> SensitivityQuote:
    """Plain oscillator probe at delta t = k pi: f = hbar pi / (t r0), per sqrt(Hz)."""
    if r0 <= 0 or t <= 0:
        raise ValueError("r0 and t must be positive")
    t_s = t * 1e-3
    f = units.HBAR * math.pi / (t_s * r0)
    return SensitivityQuote(f * math.sqrt(t_s), t, "harmonic_oscillator")


def min_force_harmonic_resonant(r0: float, t: float) -> SensitivityQuote:
    """Resonantly driven oscillator probe: f = 2 hbar / (r0 t), per sqrt(Hz)."""
    if r0 <= 0 or t <= 0:
        raise ValueError("r0 and t must be positive")
    t_s = t * 1e-3
    f = 2.0 * units.HBAR / (r0 * t_s)
    return SensitivityQuote(f * math.sqrt(t_s), t, "harmonic_oscillator")


def _gaussian_number_stats(eps: float, nu: float, phase: float) -> tuple[float, float]:
    """Mean and variance of a+a after the displaced-squeezed-rotated cycle.

    Derived by Heisenberg-propagating a through the full cycle starting from
    vacuum; exact for the quadratic sector Hamiltonian.
    """
    c = math.cos(phase) - 1j * math.sin(phase) * math.cosh(2.0 * nu)
    s_t = 1j * math.sinh(2.0 * nu) * math.sin(phase)
    d = eps * (c + s_t - 1.0)
    mean = abs(s_t) ** 2 + abs(d) ** 2
    var = (
        abs(c * s_t + d * d) ** 2
        - abs(d) ** 4
        + 2.0 * abs(d) ** 2 * abs(s_t) ** 2
        + abs(s_t) ** 4
        + abs(d) ** 2
        + abs(s_t) ** 2
    )
    return mean, var


def strong_signal(
    strong: StrongDerived, t: float, mode: str = "x"
) -> tuple[float, float, float]:
    """Mean phonon number, its standard deviation and their ratio at time t (ms).

    At upsilon t = pi the mean is 4 eps^2 with standard deviation 2 eps, so
    SNR = 2 eps there; the general-t form follows the exact propagator of the
    quadratic sector model.
    """
    if mode == "x":
        eps, nu, ups = strong.epsilon_x, strong.nu_x, strong.upsilon_x
    elif mode == "y":
        eps, nu, ups = strong.epsilon_y, strong.nu_y, strong.upsilon_y
    else:
        raise ValueError(f"unknown mode {mode!r}")
    mean, var = _gaussian_number_stats(eps, nu, ups * t)
    std = math.sqrt(max(var, 0.0))
    snr = mean / std if std > 0 else 0.0
    return mean, std, snr
