"""End-to-end sensing protocols: prepare, evolve, measure, estimate.

Three drivers cover the paper-style use cases: twisting readout of the
collective spin (weak_css), parity readout of an entangled register
(ghz_parity) and phonon-number readout in the strong-coupling regime
(strong_phonon).  Measurement shot noise enters analytically through the
projection-noise variance; there is no Monte-Carlo sampling anywhere, so
every run is deterministic.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import curve_fit

from . import units
from .analytic import (
    SensitivityQuote,
    invert_oat_signal,
    min_force_strong,
    oat_signal_slope_phi,
)
from .core import (
    QuantumState,
    SpaceLayout,
    basis_state,
    coherent_spin_state,
    collective_spin_op,
    ghz_state,
    make_layout,
    mode_level_populations,
    product_state,
    spin_parity_op,
    boson_op,
    thermal_cutoff,
    thermal_occupations,
    thermal_state,
)
from .evolve import NoiseParams, StateSequence, Trajectory, evolve_lindblad, evolve_unitary, record
from .models import (
    ModelParams,
    build_full,
    build_oat,
    build_strong_effective,
    derive_strong,
    oat_twist_rate,
)

__all__ = [
    "ProtocolSpec",
    "SensingReport",
    "SweepPoint",
    "CutoffEscalationError",
    "run_weak_css",
    "run_ghz_parity",
    "run_strong_phonon",
    "run_protocol",
    "search_min_force",
    "sweep",
]

PROTOCOLS = ("weak_css", "ghz_parity", "strong_phonon")
TAIL_WEIGHT_LIMIT = 1e-6
MAX_CUTOFF_ESCALATIONS = 5


class CutoffEscalationError(RuntimeError):
    """Fock-space truncation kept overflowing after repeated escalation."""


@dataclass(frozen=True)
class ProtocolSpec:
    """Declarative description of one sensing run.

    t: evolution window (ms); T: total experiment time (ms, default t), so
    nu = T/t repetitions enter the uncertainty.  initial_nbar > 0 starts the
    boson mode in a thermal state.  model picks the simulated Hamiltonian:
    "full" for the complete spin-boson model, "effective" for the reduced one
    (twisting Hamiltonian or frozen-spin sector model).  fock_cutoff overrides
    the automatic truncation (no escalation when set).
    """

    kind: str
    params: ModelParams
    t: float
    T: float | None = None
    theta: float = math.pi / 2.0
    initial_nbar: float = 0.0
    model: str = "full"
    noise: NoiseParams | None = None
    grid_points: int = 400
    fock_cutoff: int | None = None
    readout_time: float | None = None
    tol: float = 1e-8

    def __post_init__(self) -> None:
        if self.kind not in PROTOCOLS:
            raise ValueError(f"kind must be one of {PROTOCOLS}, got {self.kind!r}")
        if self.t <= 0:
            raise ValueError("t must be positive")
        if self.T is not None and self.T < self.t:
            raise ValueError("T must be >= t (nu = T/t >= 1)")
        if self.model not in ("full", "effective"):
            raise ValueError("model must be 'full' or 'effective'")
        if self.initial_nbar < 0:
            raise ValueError("initial_nbar must be >= 0")
        if self.grid_points < 2:
            raise ValueError("grid_points must be >= 2")

    @property
    def total_time(self) -> float:
        return self.t if self.T is None else self.T

    @property
    def repetitions(self) -> float:
        return self.total_time / self.t

    def with_(self, **kwargs) -> "ProtocolSpec":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class SensingReport:
    """Protocol output: series, estimate, uncertainty and search result."""

    spec: ProtocolSpec
    trajectory: Trajectory
    readout_time: float
    omega_f_est: float | None = None
    f_d_est: float | None = None
    f_d_uncertainty: float | None = None
    snr: float | None = None
    min_force: SensitivityQuote | None = None
    notes: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.trajectory.records:
            raise ValueError("report must carry a non-empty signal series")
        if self.f_d_uncertainty is not None and not self.f_d_uncertainty > 0:
            raise ValueError("uncertainty must be positive")


def _times(spec: ProtocolSpec) -> np.ndarray:
    return np.linspace(0.0, spec.t, spec.grid_points)


def _readout_index(times: np.ndarray, target: float) -> int:
    return int(np.argmin(np.abs(times - target)))


def _boson_components(spec: ProtocolSpec, cutoff: int) -> list[tuple[float, int]]:
    """(weight, fock level) decomposition of the initial boson state."""
    if spec.initial_nbar == 0.0:
        return [(1.0, 0)]
    probs = thermal_occupations(spec.initial_nbar, cutoff)
    return [(float(p), n) for n, p in enumerate(probs) if p > 1e-12]


def _max_mode_tail(seq: StateSequence, modes: Sequence[str]) -> float:
    worst = 0.0
    for state in seq.states:
        for mode in modes:
            pops = mode_level_populations(state, mode)
            worst = max(worst, float(pops[-2:].sum()))
    return worst


def _initial_weak_cutoff(spec: ProtocolSpec) -> int:
    p = spec.params
    base = thermal_cutoff(spec.initial_nbar, TAIL_WEIGHT_LIMIT, minimum=6)
    # coherent displacement of the driven mode sets the dynamic occupation
    if p.delta_x != 0.0:
        beta = (
            2.0 * abs(p.g_x) * (p.spin_count / 2.0) / math.sqrt(p.spin_count)
            + math.sqrt(p.spin_count) * abs(p.force_rate("x"))
        ) / abs(p.delta_x)
        base += math.ceil(4.0 * beta * beta + 4.0 * beta)
    return max(base, 6)


def _initial_strong_cutoff(spec: ProtocolSpec) -> int:
    strong = derive_strong(spec.params)
    eps, nu = abs(strong.epsilon_x), strong.nu_x
    peak = math.sinh(2.0 * nu) ** 2 + eps * eps * (4.0 + math.exp(4.0 * nu))
    if spec.noise is not None:
        peak += spec.noise.heating_rate * spec.t
    return max(10, math.ceil(peak + 6.0 * math.sqrt(peak + 1.0) + 6.0))


def _escalate_cutoff(
    spec: ProtocolSpec,
    initial: int,
    attempt: Callable[[int], tuple[object, float]],
):
    """Run attempt(cutoff), re-running at 1.5x cutoff while the tail overflows."""
    if spec.fock_cutoff is not None:
        result, _tail = attempt(spec.fock_cutoff)
        return result
    cutoff = initial
    for _ in range(MAX_CUTOFF_ESCALATIONS):
        result, tail = attempt(cutoff)
        if tail <= TAIL_WEIGHT_LIMIT:
            return result
        cutoff = math.ceil(1.5 * cutoff)
    raise CutoffEscalationError(
        f"top Fock levels stayed above {TAIL_WEIGHT_LIMIT} after "
        f"{MAX_CUTOFF_ESCALATIONS} escalations (last cutoff {cutoff})"
    )


def _mixture_series(
    spec: ProtocolSpec,
    cutoff: int,
    spin_state: QuantumState,
    observable_builder: Callable[[SpaceLayout], dict],
) -> tuple[np.ndarray, dict[str, np.ndarray], float, SpaceLayout]:
    """Propagate the full model from spin (x) thermal-mixture components.

    Returns (times, combined records incl. variances, worst tail weight).
    Each thermal Fock level is propagated as a pure component and the
    expectations are mixed with the thermal weights.
    """
    p = spec.params
    layout = make_layout(p.spin_count, [cutoff])
    h = build_full(p, layout)
    times = _times(spec)
    observables = observable_builder(layout)
    names = list(observables)
    mode_layout = make_layout(0, [cutoff])
    mean = {name: np.zeros(times.size) for name in names}
    second = {name: np.zeros(times.size) for name in names}
    tail = 0.0
    for weight, level in _boson_components(spec, cutoff):
        psi0 = product_state(layout, spin_state, basis_state(mode_layout, 0, [level]))
        seq = evolve_unitary(h, psi0, times, tol=spec.tol)
        traj = record(seq, observables, variance_of=names)
        tail = max(tail, weight * _max_mode_tail(seq, ["x"]))
        for name in names:
            m = traj.records[name]
            mean[name] += weight * m
            second[name] += weight * (traj.records[f"var_{name}"] + m * m)
    records: dict[str, np.ndarray] = {}
    for name in names:
        records[name] = mean[name]
        records[f"var_{name}"] = second[name] - mean[name] ** 2
    return times, records, tail, layout


def _weak_attempt(spec: ProtocolSpec, cutoff: int):
    spin_only = make_layout(spec.params.spin_count)
    if spec.kind == "weak_css":
        spin_state = coherent_spin_state(spin_only, spec.theta)
        builder = lambda layout: {"J_z": collective_spin_op(layout, "z")}
    else:
        spin_state = ghz_state(spin_only)
        builder = lambda layout: {"parity_s": spin_parity_op(layout)}
    times, records, tail, layout = _mixture_series(spec, cutoff, spin_state, builder)
    meta = {"model": "full", "cutoff": cutoff, "tol": spec.tol, "dim": layout.total_dim}
    return (times, records, meta), tail


def _weak_effective_series(spec: ProtocolSpec):
    layout = make_layout(spec.params.spin_count)
    h = build_oat(spec.params, layout)
    if spec.kind == "weak_css":
        psi0 = coherent_spin_state(layout, spec.theta)
        observables = {"J_z": collective_spin_op(layout, "z")}
    else:
        psi0 = ghz_state(layout)
        observables = {"parity_s": spin_parity_op(layout)}
    times = _times(spec)
    seq = evolve_unitary(h, psi0, times, tol=spec.tol)
    traj = record(seq, observables, variance_of=list(observables))
    meta = {"model": "effective", "cutoff": None, "tol": spec.tol, "dim": layout.total_dim}
    return times, traj.records, meta


def _weak_series(spec: ProtocolSpec):
    if spec.model == "effective":
        return _weak_effective_series(spec)
    return _escalate_cutoff(
        spec, _initial_weak_cutoff(spec), lambda c: _weak_attempt(spec, c)
    )


def run_weak_css(spec: ProtocolSpec) -> SensingReport:
    """Twisting protocol: evolve a spin coherent state, read <J_z>, invert.

    The readout defaults to the first optimal point (twist phase 2 pi) when it
    lies inside the window.  The local inversion of the signal yields the
    force rotation rate and from it the force amplitude; the attached
    uncertainty combines the simulated variance with the analytic slope.
    """
    if spec.kind != "weak_css":
        raise ValueError("spec.kind must be 'weak_css'")
    p = spec.params
    twist = oat_twist_rate(p)
    times, records, meta = _weak_series(spec)
    target = spec.readout_time
    if target is None:
        optimal = 2.0 * math.pi / abs(twist) if twist != 0.0 else spec.t
        target = optimal if optimal <= spec.t else spec.t
    idx = _readout_index(times, target)
    t_r = float(times[idx])
    if t_r <= 0.0:
        raise ValueError("readout time must be positive")
    j = p.spin_count / 2.0
    xi_r = twist * t_r
    notes: list[str] = []
    phi_hat = invert_oat_signal(j, spec.theta, xi_r, float(records["J_z"][idx]))
    omega_hat = phi_hat / t_r
    f_hat = units.force_from_omega_f(omega_hat, p.g_x, p.r0_x, p.delta_x)
    var_r = max(float(records["var_J_z"][idx]), 0.0)
    slope = t_r * oat_signal_slope_phi(j, spec.theta, xi_r, phi_hat)
    if slope == 0.0:
        d_omega = math.inf
        notes.append("zero-slope readout point: uncertainty unbounded")
    else:
        d_omega = math.sqrt(var_r) / (abs(slope) * math.sqrt(spec.repetitions))
    d_f = abs(units.force_from_omega_f(d_omega, p.g_x, p.r0_x, p.delta_x)) if math.isfinite(
        d_omega
    ) else math.inf
    traj = Trajectory(times, records, meta | {"protocol": "weak_css"})
    return SensingReport(
        spec=spec,
        trajectory=traj,
        readout_time=t_r,
        omega_f_est=omega_hat,
        f_d_est=f_hat,
        f_d_uncertainty=d_f,
        notes=tuple(notes),
    )


def _fit_fringe(times: np.ndarray, series: np.ndarray):
    """Least-squares cosine fit A cos(w t + phi) + C seeded from the spectrum."""
    detrended = series - series.mean()
    if np.ptp(series) < 1e-6:
        return None
    spectrum = np.fft.rfft(detrended)
    k = int(np.argmax(np.abs(spectrum[1:]))) + 1
    dt = times[1] - times[0]
    w0 = 2.0 * math.pi * k / (dt * times.size)
    a0 = 2.0 * np.abs(spectrum[k]) / times.size
    p0 = float(np.angle(spectrum[k]))

    def model(t, a, w, phi, c):
        return a * np.cos(w * t + phi) + c

    try:
        popt, _ = curve_fit(
            model,
            times,
            series,
            p0=[a0, w0, p0, float(series.mean())],
            maxfev=20000,
        )
    except RuntimeError:
        return None
    a, w, phi, c = popt
    if a < 0:  # normalize the sign convention
        a, phi = -a, phi + math.pi
    if abs(a) < 0.05:
        return None
    return float(a), float(abs(w)), float(phi), float(c)


def run_ghz_parity(spec: ProtocolSpec) -> SensingReport:
    """Entangled-register protocol: evolve a GHZ state and fit the parity fringe.

    The fringe oscillates at N times the force rotation rate; the fitted
    frequency gives the force estimate and the projection-noise variance at
    the steepest recorded point gives the uncertainty.
    """
    if spec.kind != "ghz_parity":
        raise ValueError("spec.kind must be 'ghz_parity'")
    p = spec.params
    times, records, meta = _weak_series(spec)
    series = records["parity_s"]
    traj = Trajectory(times, records, meta | {"protocol": "ghz_parity"})
    fit = _fit_fringe(times, series)
    if fit is None:
        return SensingReport(
            spec=spec,
            trajectory=traj,
            readout_time=float(times[-1]),
            notes=("fringe fit failed: signal flat over the window",),
        )
    amp, w_fit, phi_fit, _ = fit
    n = p.spin_count
    omega_hat = w_fit / n
    f_hat = abs(units.force_from_omega_f(omega_hat, p.g_x, p.r0_x, p.delta_x))
    # steepest recorded fringe point: |sin| maximal there
    slopes = np.abs(np.sin(w_fit * times + phi_fit))
    slopes[0] = 0.0  # never read out at t = 0
    idx = int(np.argmax(slopes))
    t_r = float(times[idx])
    var_r = max(0.0, 1.0 - float(series[idx]) ** 2)
    d_omega_fringe = (
        math.sqrt(var_r) / (amp * slopes[idx] * t_r * math.sqrt(spec.repetitions))
        if slopes[idx] > 0
        else math.inf
    )
    d_omega = d_omega_fringe / n
    d_f = abs(units.force_from_omega_f(d_omega, p.g_x, p.r0_x, p.delta_x))
    return SensingReport(
        spec=spec,
        trajectory=traj,
        readout_time=t_r,
        omega_f_est=omega_hat,
        f_d_est=f_hat,
        f_d_uncertainty=d_f,
    )


def _strong_attempt(spec: ProtocolSpec, cutoff: int):
    p = spec.params
    times = _times(spec)
    if spec.model == "effective":
        layout = make_layout(0, [cutoff])
        h = build_strong_effective(p, layout, variant="sector")
        vac = basis_state(layout, 0, [0])
        if spec.noise is not None:
            rho0: QuantumState = vac
            if spec.initial_nbar > 0.0:
                from .core import thermal_state

                rho0 = thermal_state(layout, "x", spec.initial_nbar)
            seq = evolve_lindblad(h, "x", spec.noise, rho0, times, tol=spec.tol)
            seqs = [(1.0, seq)]
        elif spec.initial_nbar > 0.0:
            seqs = [
                (w, evolve_unitary(h, basis_state(layout, 0, [lev]), times, tol=spec.tol))
                for w, lev in _boson_components(spec, cutoff)
            ]
        else:
            seqs = [(1.0, evolve_unitary(h, vac, times, tol=spec.tol))]
    else:
        layout = make_layout(p.spin_count, [cutoff])
        h = build_full(p, layout)
        spin_down = basis_state(make_layout(p.spin_count), p.spin_count)  # |j,-j>
        mode_layout = make_layout(0, [cutoff])
        if spec.noise is not None:
            rho0 = product_state(layout, spin_down, basis_state(mode_layout, 0, [0]))
            if spec.initial_nbar > 0.0:
                from .core import thermal_state

                rho0 = product_state(
                    layout, spin_down, thermal_state(layout, "x", spec.initial_nbar)
                )
            seq = evolve_lindblad(h, "x", spec.noise, rho0, times, tol=spec.tol)
            seqs = [(1.0, seq)]
        else:
            seqs = [
                (
                    w,
                    evolve_unitary(
                        h,
                        product_state(layout, spin_down, basis_state(mode_layout, 0, [lev])),
                        times,
                        tol=spec.tol,
                    ),
                )
                for w, lev in _boson_components(spec, cutoff)
            ]
    number = boson_op(layout, "x", "number")
    mean = np.zeros(times.size)
    second = np.zeros(times.size)
    tail = 0.0
    for weight, seq in seqs:
        traj = record(seq, {"n_x": number}, variance_of=["n_x"])
        tail = max(tail, weight * _max_mode_tail(seq, ["x"]))
        m = traj.records["n_x"]
        mean += weight * m
        second += weight * (traj.records["var_n_x"] + m * m)
    records = {"n_x": mean, "var_n_x": second - mean**2}
    meta = {
        "model": spec.model,
        "cutoff": cutoff,
        "tol": spec.tol,
        "dim": layout.total_dim,
        "protocol": "strong_phonon",
    }
    return (times, records, meta), tail


def run_strong_phonon(spec: ProtocolSpec) -> SensingReport:
    """Phonon-number protocol: spins parked in |j,-j>, read <a+a> and its spread.

    The signal-to-noise ratio mean/std is evaluated at the readout time,
    which defaults to the half-period pi/upsilon where the displacement
    refocuses to its maximum.
    """
    if spec.kind != "strong_phonon":
        raise ValueError("spec.kind must be 'strong_phonon'")
    p = spec.params
    strong = derive_strong(p)  # validates lambda^2 < 1
    times_records_meta = _escalate_cutoff(
        spec, _initial_strong_cutoff(spec), lambda c: _strong_attempt(spec, c)
    )
    times, records, meta = times_records_meta
    target = spec.readout_time
    if target is None:
        target = math.pi / strong.upsilon_x if strong.upsilon_x > 0 else spec.t
        target = min(target, spec.t)
    idx = _readout_index(times, target)
    t_r = float(times[idx])
    mean_r = float(records["n_x"][idx])
    std_r = math.sqrt(max(float(records["var_n_x"][idx]), 0.0))
    snr = mean_r / std_r if std_r > 0 else 0.0
    notes: list[str] = []
    f_hat = None
    d_f = None
    signal = mean_r
    if spec.noise is not None:
        signal = mean_r - spec.noise.heating_rate * t_r
        notes.append("heating-corrected estimate: subtracted <ndot> t from the signal")
    if signal > 0 and strong.upsilon_x > 0:
        eps_hat = math.sqrt(signal) / 2.0
        rate = eps_hat * p.delta_x * (1.0 - strong.lambda_x**2) / math.sqrt(p.spin_count)
        f_hat = units.force_from_rate(rate, p.r0_x)
        if snr > 0:
            d_f = f_hat * (std_r / mean_r) / (2.0 * math.sqrt(spec.repetitions))
    traj = Trajectory(times, records, meta)
    return SensingReport(
        spec=spec,
        trajectory=traj,
        readout_time=t_r,
        f_d_est=f_hat,
        f_d_uncertainty=d_f,
        snr=snr,
        notes=tuple(notes),
    )


def run_protocol(spec: ProtocolSpec) -> SensingReport:
    """Dispatch on spec.kind."""
    return {
        "weak_css": run_weak_css,
        "ghz_parity": run_ghz_parity,
        "strong_phonon": run_strong_phonon,
    }[spec.kind](spec)


def search_min_force(spec: ProtocolSpec, snr_target: float = 1.0) -> SensitivityQuote:
    """Bisect the drive amplitude until the readout SNR hits the target.

    Monotonicity of SNR in the amplitude is asserted over the bracket before
    bisecting; the quote is f * sqrt(t) at the readout time.
    """
    if spec.kind != "strong_phonon":
        raise ValueError("search_min_force needs a strong_phonon spec")
    if snr_target <= 0:
        raise ValueError("snr_target must be positive")
    strong = derive_strong(spec.params)
    t_r = spec.readout_time if spec.readout_time is not None else min(
        math.pi / strong.upsilon_x, spec.t
    )
    f_scale = min_force_strong(spec.params, t_r).value / math.sqrt(t_r * 1e-3)

    def snr_at(f: float) -> float:
        rep = run_strong_phonon(spec.with_(params=spec.params.with_(f_dx=f)))
        return rep.snr if rep.snr is not None else 0.0

    lo, hi = 0.05 * f_scale, 3.0 * f_scale
    s_lo = snr_at(lo)
    s_hi = snr_at(hi)
    expansions = 0
    while s_hi < snr_target and expansions < 4:
        hi *= 2.0
        s_hi = snr_at(hi)
        expansions += 1
    if not (s_lo < snr_target < s_hi):
        raise ValueError(
            f"initial interval does not bracket SNR={snr_target}: "
            f"[{s_lo:.3f}, {s_hi:.3f}]"
        )
    s_mid_probe = snr_at(0.5 * (lo + hi))
    if not (s_lo <= s_mid_probe <= s_hi):
        raise RuntimeError("SNR is not monotone in the drive amplitude over the bracket")
    f_mid = 0.5 * (lo + hi)
    s_mid = s_mid_probe
    for _ in range(60):
        if abs(s_mid - snr_target) <= 0.01 * snr_target:
            break
        if s_mid < snr_target:
            lo = f_mid
        else:
            hi = f_mid
        f_mid = 0.5 * (lo + hi)
        s_mid = snr_at(f_mid)
    else:
        raise RuntimeError("minimal-force bisection did not converge")
    t_s = t_r * 1e-3
    return SensitivityQuote(f_mid * math.sqrt(t_s), t_r, "strong_phonon")


@dataclass(frozen=True)
class SweepPoint:
    """One sweep sample: either a report/quote or an isolated failure."""

    axis: str
    value: float
    report: SensingReport | None = None
    quote: SensitivityQuote | None = None
    error: str | None = None


_PARAM_AXES = (
    "g_x", "g_y", "delta_x", "delta_y", "Delta", "f_dx", "f_dy", "r0_x", "r0_y",
)
_SPEC_AXES = ("t", "T", "theta", "initial_nbar")


def _spec_with_axis(spec: ProtocolSpec, axis: str, value: float) -> ProtocolSpec:
    if axis in _PARAM_AXES:
        return spec.with_(params=spec.params.with_(**{axis: value}))
    if axis in _SPEC_AXES:
        return spec.with_(**{axis: value})
    if axis == "ndot":
        nbar = spec.noise.nbar_res if spec.noise is not None else 20.0
        return spec.with_(noise=NoiseParams.from_heating_rate(value, nbar))
    raise ValueError(f"unknown sweep axis {axis!r}")


def _sweep_workers(n_points: int, threads: int | None) -> int:
    if threads is None:
        threads = min(os.cpu_count() or 1, 8)
    cap = os.environ.get("SPINFORGE_THREADS")
    if cap:
        threads = min(threads, max(1, int(cap)))
    return max(1, min(threads, n_points))


def sweep(
    axis: str,
    values: Sequence[float],
    spec: ProtocolSpec,
    task: str = "run",
    threads: int | None = None,
) -> list[SweepPoint]:
    """Independent protocol runs over one named parameter.

    task "run" executes the protocol; task "search_min_force" performs the
    SNR=1 search per point.  Points run concurrently but the result order is
    the input order, and per-point failures are isolated.
    """
    values = [float(v) for v in values]
    if not all(math.isfinite(v) for v in values):
        raise ValueError("sweep values must be finite")
    if task not in ("run", "search_min_force"):
        raise ValueError(f"unknown sweep task {task!r}")

    def one(value: float) -> SweepPoint:
        try:
            pt_spec = _spec_with_axis(spec, axis, value)
            if task == "run":
                return SweepPoint(axis, value, report=run_protocol(pt_spec))
            return SweepPoint(axis, value, quote=search_min_force(pt_spec))
        except Exception as exc:  # isolated per point
            return SweepPoint(axis, value, error=f"{type(exc).__name__}: {exc}")

    workers = _sweep_workers(len(values), threads)
    if workers == 1:
        return [one(v) for v in values]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, values))
