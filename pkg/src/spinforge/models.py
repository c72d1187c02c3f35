"""Hamiltonian builders for the spin-boson force-sensing models.

All Hamiltonians are returned as H/hbar in rad/ms.  Couplings g, detunings
delta and the spin frequency Delta are angular rates in rad/ms (= krad/s);
force amplitudes are SI newtons and spreads SI meters, converted internally.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from . import units
from .core import (
    LayoutError,
    OperatorMatrix,
    SpaceLayout,
    _embed,
    _mode_matrix,
    _spin_matrices,
    operator,
)

__all__ = [
    "ModelParams",
    "WeakDerived",
    "StrongDerived",
    "WeakRegimeWarning",
    "build_full",
    "build_effective_lmg",
    "build_oat",
    "build_strong_effective",
    "derive_weak",
    "derive_strong",
]


class WeakRegimeWarning(UserWarning):
    """The adiabatic-elimination premise |delta| >> g looks shaky."""


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the full model plus drive amplitudes and spreads.

    g_x, g_y: spin-phonon couplings (rad/ms); delta_x, delta_y: signed force
    detunings (rad/ms); Delta: effective spin frequency (rad/ms); f_dx, f_dy:
    force amplitudes (N); r0_x, r0_y: ground-state spreads (m).
    """

    spin_count: int
    g_x: float = 0.0
    g_y: float = 0.0
    delta_x: float = 0.0
    delta_y: float = 0.0
    Delta: float = 0.0
    f_dx: float = 0.0
    f_dy: float = 0.0
    r0_x: float = 14.5e-9
    r0_y: float = 14.5e-9

    def __post_init__(self) -> None:
        if self.spin_count < 1:
            raise ValueError("spin_count must be >= 1")
        if self.r0_x <= 0 or self.r0_y <= 0:
            raise ValueError("oscillator spreads must be positive")
        for name in ("g_x", "g_y", "delta_x", "delta_y", "Delta", "f_dx", "f_dy"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def force_rate(self, mode: str) -> float:
        """F_alpha/hbar = r0 f_d / (2 hbar) as a rad/ms rate (computed on demand)."""
        if mode == "x":
            return units.force_rate(self.f_dx, self.r0_x)
        if mode == "y":
            return units.force_rate(self.f_dy, self.r0_y)
        raise ValueError(f"unknown mode {mode!r}")

    def with_(self, **kwargs) -> "ModelParams":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class WeakDerived:
    """Quantities of the far-detuned regime.

    chi_x, chi_y: twisting scales sqrt(4 g^2 / (N |delta|)); omega_f: force
    rotation rate (rad/ms); mu_x, mu_y: dimensionless drive ratios; gamma:
    the complex offset mu_x chi_x + i mu_y chi_y entering the factorized form.
    """

    chi_x: float
    chi_y: float
    omega_f: float
    mu_x: float
    mu_y: float
    gamma: complex

    @property
    def chi(self) -> float:
        return self.chi_x


@dataclass(frozen=True)
class StrongDerived:
    """Displaced-squeezed-frame parameters of the slow-drive regime."""

    lambda_x: float
    lambda_y: float
    upsilon_x: float
    upsilon_y: float
    epsilon_x: float
    epsilon_y: float
    nu_x: float
    nu_y: float


def _ratio(num: float, den: float, what: str) -> float:
    if num == 0.0:
        return 0.0
    if den == 0.0:
        raise ZeroDivisionError(f"{what}: zero denominator")
    return num / den


def derive_weak(params: ModelParams) -> WeakDerived:
    """Twisting rates, force rotation rate and factorization offset."""
    n = params.spin_count
    chi_x = math.sqrt(_ratio(4.0 * params.g_x**2, n * abs(params.delta_x), "chi_x"))
    chi_y = math.sqrt(_ratio(4.0 * params.g_y**2, n * abs(params.delta_y), "chi_y"))
    if params.g_x != 0.0 or params.f_dx != 0.0:
        omega_f = units.omega_f(params.g_x, params.r0_x, params.f_dx, params.delta_x)
    else:
        omega_f = 0.0
    mu_x = _ratio(params.force_rate("x") * n, 2.0 * params.g_x, "mu_x")
    mu_y = _ratio(params.force_rate("y") * n, 2.0 * params.g_y, "mu_y")
    return WeakDerived(
        chi_x=chi_x,
        chi_y=chi_y,
        omega_f=omega_f,
        mu_x=mu_x,
        mu_y=mu_y,
        gamma=complex(mu_x * chi_x, mu_y * chi_y),
    )


def _strong_mode(params: ModelParams, mode: str) -> tuple[float, float, float, float]:
    g = params.g_x if mode == "x" else params.g_y
    delta = params.delta_x if mode == "x" else params.delta_y
    r0 = params.r0_x if mode == "x" else params.r0_y
    f = params.f_dx if mode == "x" else params.f_dy
    if g == 0.0 and f == 0.0:
        return 0.0, delta, 0.0, 0.0
    if delta == 0.0 or params.Delta == 0.0:
        raise ZeroDivisionError(f"mode {mode}: delta and Delta must be nonzero")
    lam_sq = 4.0 * g**2 / (delta * params.Delta)
    if lam_sq >= 1.0:
        raise ValueError(f"mode {mode}: lambda^2 = {lam_sq:.4f} >= 1 is outside the model")
    if lam_sq < 0.0:
        raise ValueError(f"mode {mode}: delta*Delta must be positive (lambda^2 < 0)")
    upsilon = delta * math.sqrt(1.0 - lam_sq)
    nu = -0.25 * math.log(1.0 - lam_sq)
    drive = math.sqrt(params.spin_count) * units.force_rate(f, r0)
    epsilon = drive / (delta * (1.0 - lam_sq))
    return math.sqrt(lam_sq), upsilon, epsilon, nu


def derive_strong(params: ModelParams) -> StrongDerived:
    """Displacement/squeeze parameters; rejects lambda^2 >= 1."""
    lx, ux, ex, nx = _strong_mode(params, "x")
    ly, uy, ey, ny = _strong_mode(params, "y")
    return StrongDerived(
        lambda_x=lx, lambda_y=ly,
        upsilon_x=ux, upsilon_y=uy,
        epsilon_x=ex, epsilon_y=ey,
        nu_x=nx, nu_y=ny,
    )


def _check_mode_coupling(params: ModelParams, layout: SpaceLayout) -> None:
    if layout.spin_count != params.spin_count:
        raise LayoutError(
            f"layout spin count {layout.spin_count} != params spin count {params.spin_count}"
        )
    if layout.n_modes < 1:
        raise LayoutError("this builder needs at least one boson mode in the layout")
    if layout.n_modes < 2 and (params.g_y != 0.0 or params.f_dy != 0.0):
        raise LayoutError("params couple mode y but the layout has no y mode")


def build_full(params: ModelParams, layout: SpaceLayout) -> OperatorMatrix:
    """The full spin-boson Hamiltonian with two-mode Jahn-Teller coupling.

    H/hbar = sum_a delta_a n_a + Delta J_z + sum_a (2 g_a / sqrt(N)) J_a q_a
             + sum_a sqrt(N) (F_a/hbar) q_a,   q_a = a_a^dag + a_a.
    """
    _check_mode_coupling(params, layout)
    n = params.spin_count
    jx, jy, jz = _spin_matrices(n)
    modes = ["x", "y"][: layout.n_modes]
    spin_for = {"x": jx, "y": jy}
    g_for = {"x": params.g_x, "y": params.g_y}
    delta_for = {"x": params.delta_x, "y": params.delta_y}

    h = sp.csr_matrix((layout.total_dim, layout.total_dim), dtype=complex)
    h = h + params.Delta * _embed(layout, [jz] + [None] * layout.n_modes)
    for mode in modes:
        idx = layout.mode_index(mode)
        cutoff = layout.fock_cutoffs[idx]
        num = _mode_matrix(cutoff, "number")
        pos = _mode_matrix(cutoff, "position_sum")
        fac_num = [None] * (1 + layout.n_modes)
        fac_num[1 + idx] = num
        fac_pos = [None] * (1 + layout.n_modes)
        fac_pos[1 + idx] = pos
        h = h + delta_for[mode] * _embed(layout, fac_num)
        if g_for[mode] != 0.0:
            fac_jt = list(fac_pos)
            fac_jt[0] = spin_for[mode]
            h = h + (2.0 * g_for[mode] / math.sqrt(n)) * _embed(layout, fac_jt)
        rate = params.force_rate(mode)
        if rate != 0.0:
            h = h + math.sqrt(n) * rate * _embed(layout, fac_pos)
    return operator(layout, h, hermitian=True)


def build_effective_lmg(
    params: ModelParams, layout: SpaceLayout
) -> tuple[OperatorMatrix, OperatorMatrix | None]:
    """Adiabatically eliminated model: collective-spin part and residual part.

    h_spin/hbar = Delta J_z - (4 g_x^2 / N delta_x) J_x^2 - (4 g_y^2 / N delta_y) J_y^2
                  - (4 g_x F_x / hbar delta_x) J_x - (4 g_y F_y / hbar delta_y) J_y
    h_res is the free boson term plus the beam-splitter/two-mode-squeeze
    residual; it is None on a spin-only layout, and reduces to the free boson
    term when either coupling vanishes.  Constant terms are dropped, so only
    observables are comparable, never absolute energies.
    """
    if layout.spin_count != params.spin_count:
        raise LayoutError("layout spin count does not match params")
    for mode, g, delta in (("x", params.g_x, params.delta_x), ("y", params.g_y, params.delta_y)):
        if (g != 0.0 or getattr(params, f"f_d{mode}") != 0.0) and delta == 0.0:
            raise ZeroDivisionError(f"delta_{mode} must be nonzero")
        if g != 0.0 and abs(delta) < 5.0 * abs(g):
            warnings.warn(
                f"|delta_{mode}| < 5 g_{mode}: adiabatic elimination is inaccurate",
                WeakRegimeWarning,
                stacklevel=2,
            )
    n = params.spin_count
    jx, jy, jz = _spin_matrices(n)
    cx = _ratio(4.0 * params.g_x**2, n * params.delta_x, "J_x^2 coefficient")
    cy = _ratio(4.0 * params.g_y**2, n * params.delta_y, "J_y^2 coefficient")
    lx = _ratio(4.0 * params.g_x * params.force_rate("x"), params.delta_x, "J_x coefficient")
    ly = _ratio(4.0 * params.g_y * params.force_rate("y"), params.delta_y, "J_y coefficient")
    h_spin_mat = params.Delta * jz - cx * (jx @ jx) - cy * (jy @ jy) - lx * jx - ly * jy
    pad = [None] * layout.n_modes
    h_spin = operator(layout, _embed(layout, [h_spin_mat] + pad), hermitian=True)

    if layout.n_modes == 0:
        return h_spin, None

    delta_for = {"x": params.delta_x, "y": params.delta_y}
    h_res = sp.csr_matrix((layout.total_dim, layout.total_dim), dtype=complex)
    for mode in ["x", "y"][: layout.n_modes]:
        idx = layout.mode_index(mode)
        fac = [None] * (1 + layout.n_modes)
        fac[1 + idx] = _mode_matrix(layout.fock_cutoffs[idx], "number")
        h_res = h_res + delta_for[mode] * _embed(layout, fac)
    if layout.n_modes == 2 and params.g_x != 0.0 and params.g_y != 0.0:
        ax = _embed(layout, [None, _mode_matrix(layout.fock_cutoffs[0], "annihilate"), None])
        ay = _embed(layout, [None, None, _mode_matrix(layout.fock_cutoffs[1], "annihilate")])
        jz_full = _embed(layout, [jz, None, None])
        beam = ax.getH() @ ay
        pair = ax.getH() @ ay.getH()
        coeff = 2.0 * params.g_x * params.g_y / (n * params.delta_x * params.delta_y)
        dsum, ddiff = params.delta_x + params.delta_y, params.delta_x - params.delta_y
        h_res = h_res + coeff * (
            jz_full @ (1j * dsum * (beam - beam.getH()) - 1j * ddiff * (pair - pair.getH()))
        )
    return h_spin, operator(layout, h_res, hermitian=True)


def build_oat(params: ModelParams, layout: SpaceLayout) -> OperatorMatrix:
    """One-axis twisting limit of the single-mode model, on a spin-only layout.

    H/hbar = -(4 g_x^2 / N delta_x) J_x^2 - Omega_f J_x.  For delta_x > 0 the
    quadratic coefficient equals chi^2; the sign follows delta_x.
    """
    if layout.n_modes != 0:
        raise LayoutError("build_oat expects a spin-only layout")
    if layout.spin_count != params.spin_count:
        raise LayoutError("layout spin count does not match params")
    if params.delta_x == 0.0:
        raise ZeroDivisionError("delta_x must be nonzero")
    n = params.spin_count
    jx = _spin_matrices(n)[0]
    twist = 4.0 * params.g_x**2 / (n * params.delta_x)
    omega = units.omega_f(params.g_x, params.r0_x, params.f_dx, params.delta_x)
    return operator(layout, -twist * (jx @ jx) - omega * jx, hermitian=True)


def oat_twist_rate(params: ModelParams) -> float:
    """Signed quadratic coefficient 4 g_x^2 / (N delta_x) used by build_oat."""
    return 4.0 * params.g_x**2 / (params.spin_count * params.delta_x)


def build_strong_effective(
    params: ModelParams, layout: SpaceLayout, variant: str = "full"
) -> OperatorMatrix:
    """Frozen-spin effective model for Delta >> g.

    variant "full": spin (x) boson form
        H/hbar = sum_a delta_a n_a + Delta J_z + sum_a (2 g_a^2 / N Delta) J_z q_a^2
                 + sum_a sqrt(N) (F_a/hbar) q_a
    variant "sector": the |j,-j> block on a boson-only layout,
        H/hbar = sum_a [ delta_a n_a - (g_a^2/Delta) q_a^2 + sqrt(N)(F_a/hbar) q_a ].
    The sqrt(N) on the drive carries over from the full model; it is what
    makes the displacement (and hence the signal) grow with ion number.
    """
    if params.Delta == 0.0:
        raise ZeroDivisionError("Delta must be nonzero")
    g_for = {"x": params.g_x, "y": params.g_y}
    delta_for = {"x": params.delta_x, "y": params.delta_y}
    n = params.spin_count

    if variant == "sector":
        if layout.spin_count != 0:
            raise LayoutError("sector variant expects a boson-only layout (spin_count 0)")
        if layout.n_modes < 1:
            raise LayoutError("sector variant needs at least one mode")
        if layout.n_modes < 2 and (params.g_y != 0.0 or params.f_dy != 0.0):
            raise LayoutError("params couple mode y but the layout has no y mode")
        h = sp.csr_matrix((layout.total_dim, layout.total_dim), dtype=complex)
        for mode in ["x", "y"][: layout.n_modes]:
            idx = layout.mode_index(mode)
            cutoff = layout.fock_cutoffs[idx]
            fac_n = [None] * (1 + layout.n_modes)
            fac_n[1 + idx] = _mode_matrix(cutoff, "number")
            fac_q = [None] * (1 + layout.n_modes)
            fac_q[1 + idx] = _mode_matrix(cutoff, "position_sum")
            q = _embed(layout, fac_q)
            h = h + delta_for[mode] * _embed(layout, fac_n)
            h = h - (g_for[mode] ** 2 / params.Delta) * (q @ q)
            h = h + math.sqrt(n) * params.force_rate(mode) * q
        return operator(layout, h, hermitian=True)

    if variant != "full":
        raise ValueError(f"variant must be 'full' or 'sector', got {variant!r}")
    _check_mode_coupling(params, layout)
    jz = _spin_matrices(n)[2]
    h = params.Delta * _embed(layout, [jz] + [None] * layout.n_modes)
    for mode in ["x", "y"][: layout.n_modes]:
        idx = layout.mode_index(mode)
        cutoff = layout.fock_cutoffs[idx]
        fac_n = [None] * (1 + layout.n_modes)
        fac_n[1 + idx] = _mode_matrix(cutoff, "number")
        fac_q = [None] * (1 + layout.n_modes)
        fac_q[1 + idx] = _mode_matrix(cutoff, "position_sum")
        q = _embed(layout, fac_q)
        jz_q2 = _embed(layout, [jz] + [None] * layout.n_modes) @ (q @ q)
        h = h + delta_for[mode] * _embed(layout, fac_n)
        h = h + (2.0 * g_for[mode] ** 2 / (n * params.Delta)) * jz_q2
        h = h + math.sqrt(n) * params.force_rate(mode) * q
    return operator(layout, h, hermitian=True)
