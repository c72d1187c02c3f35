"""Time propagation: Schrodinger dynamics and the single-mode master equation.

Unitary propagation uses exact eigendecomposition stepping up to dimension
2048 and adaptive Lanczos (Krylov) exponential stepping above.  Dissipative
propagation integrates the density matrix directly (no trajectory
unraveling), so repeated runs are deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.integrate import solve_ivp

from .core import (
    LayoutError,
    OperatorMatrix,
    QuantumState,
    boson_op,
    expectation,
    mixed_state,
    pure_state,
)

__all__ = [
    "NoiseParams",
    "StateSequence",
    "Trajectory",
    "NumericToleranceError",
    "evolve_unitary",
    "evolve_lindblad",
    "record",
]

DENSE_EVOLVE_LIMIT = 2048
DEFAULT_TOL = 1e-8
POSITIVITY_FLOOR = 1e-7


class NumericToleranceError(RuntimeError):
    """An integrator or propagator breached its accuracy contract."""


@dataclass(frozen=True)
class NoiseParams:
    """Reservoir coupling for the motional heating channel.

    gamma_dec in 1/ms, nbar_res dimensionless; the single physical knob is
    the heating rate <ndot> = nbar_res * gamma_dec.
    """

    gamma_dec: float
    nbar_res: float

    def __post_init__(self) -> None:
        if self.gamma_dec < 0 or self.nbar_res < 0:
            raise ValueError("gamma_dec and nbar_res must be >= 0")

    @property
    def heating_rate(self) -> float:
        return self.gamma_dec * self.nbar_res

    @classmethod
    def from_heating_rate(cls, ndot: float, nbar_res: float = 20.0) -> "NoiseParams":
        """Split <ndot> into (gamma, nbar) with the reservoir default nbar = 20."""
        if ndot < 0:
            raise ValueError("heating rate must be >= 0")
        if ndot == 0.0:
            return cls(0.0, nbar_res)
        return cls(ndot / nbar_res, nbar_res)


@dataclass(frozen=True)
class StateSequence:
    """States on a time grid, ready for observable recording."""

    times: np.ndarray
    states: tuple[QuantumState, ...]
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Trajectory:
    """Per-observable real time series on a shared grid."""

    times: np.ndarray
    records: dict[str, np.ndarray]
    meta: dict = field(default_factory=dict)


def _check_times(times) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size < 1:
        raise ValueError("times must be a non-empty 1-D grid")
    if t.size > 1 and not np.all(np.diff(t) > 0):
        raise ValueError("times must be strictly increasing")
    return t


def _require_hermitian(h: OperatorMatrix) -> None:
    if not h.hermitian:
        raise ValueError("evolve_unitary requires a Hermitian Hamiltonian")


def _lanczos_expm_step(matvec, v: np.ndarray, dt: float, tol: float, m_max: int = 64) -> np.ndarray:
    """exp(-i dt H) v by adaptive Lanczos; splits the step if needed."""
    norm_v = np.linalg.norm(v)
    if norm_v == 0.0:
        return v
    dim = v.size
    m_cap = min(m_max, dim)
    basis = np.empty((m_cap + 1, dim), dtype=complex)
    alphas: list[float] = []
    betas: list[float] = []
    basis[0] = v / norm_v
    prev_beta = 0.0
    for mi in range(m_cap):
        w = matvec(basis[mi])
        alpha = float(np.real(np.vdot(basis[mi], w)))
        w = w - alpha * basis[mi]
        if mi > 0:
            w = w - prev_beta * basis[mi - 1]
        # full reorthogonalization: cheap at these subspace sizes, keeps the
        # propagated norm at rounding level
        w -= basis[: mi + 1].T @ (basis[: mi + 1].conj() @ w)
        beta = float(np.linalg.norm(w))
        alphas.append(alpha)
        betas.append(beta)
        m = mi + 1
        if beta < 1e-14 or m >= 2:
            tmat = np.diag(np.array(alphas)) + np.diag(np.array(betas[: m - 1]), 1) + np.diag(
                np.array(betas[: m - 1]), -1
            )
            u = scipy.linalg.expm(-1j * dt * tmat)[:, 0]
            err = beta * abs(dt) * abs(u[-1])
            if beta < 1e-14 or err < tol:
                return norm_v * (basis[:m].T @ u)
        if beta < 1e-14:
            break
        prev_beta = beta
        basis[mi + 1] = w / beta
    # did not converge within m_cap: halve the step
    half = _lanczos_expm_step(matvec, v, dt / 2.0, tol / 2.0, m_max)
    return _lanczos_expm_step(matvec, half, dt / 2.0, tol / 2.0, m_max)


def evolve_unitary(
    h: OperatorMatrix,
    psi0: QuantumState,
    times: Sequence[float],
    tol: float = DEFAULT_TOL,
    method: str = "auto",
) -> StateSequence:
    """Propagate a pure state on a time grid; psi0 is the state at times[0].

    method: "auto" picks eigendecomposition stepping for dim <= 2048 and
    Lanczos stepping above; "dense"/"krylov" force a path.
    """
    _require_hermitian(h)
    if psi0.layout != h.layout:
        raise LayoutError("state and Hamiltonian layouts differ")
    if not psi0.is_pure:
        raise ValueError("evolve_unitary propagates pure states")
    t = _check_times(times)
    dim = h.dim
    if method == "auto":
        method = "dense" if dim <= DENSE_EVOLVE_LIMIT else "krylov"
    if method not in ("dense", "krylov"):
        raise ValueError(f"unknown method {method!r}")

    vecs: list[np.ndarray] = []
    if method == "dense":
        w, v = np.linalg.eigh(h.dense())
        coef = v.conj().T @ psi0.data
        for tk in t:
            vecs.append(v @ (np.exp(-1j * w * (tk - t[0])) * coef))
    else:
        mat = h.entries if sp.issparse(h.entries) else sp.csr_matrix(h.entries)
        matvec = mat.dot
        cur = np.asarray(psi0.data, dtype=complex)
        vecs.append(cur)
        for k in range(1, t.size):
            cur = _lanczos_expm_step(matvec, cur, t[k] - t[k - 1], tol)
            vecs.append(cur)
    states = []
    for tk, vec in zip(t, vecs):
        norm = np.linalg.norm(vec)
        if abs(norm - 1.0) > 10.0 * tol:
            raise NumericToleranceError(f"norm drifted to {norm} at t = {tk}")
        states.append(pure_state(h.layout, vec / norm))
    meta = {"method": method, "tol": tol, "dim": dim}
    return StateSequence(t, tuple(states), meta)


def evolve_lindblad(
    h: OperatorMatrix,
    mode: str,
    noise: NoiseParams,
    rho0: QuantumState,
    times: Sequence[float],
    tol: float = DEFAULT_TOL,
) -> StateSequence:
    """Integrate the master equation with thermal-reservoir collapse channels.

    drho/dt = -i[H, rho] + (gamma/2)(nbar+1)(2 a rho a+ - {a+a, rho})
              + (gamma/2) nbar (2 a+ rho a - {a a+, rho})
    on the given mode.  A pure rho0 is promoted to a density matrix.
    """
    _require_hermitian(h)
    if rho0.layout != h.layout:
        raise LayoutError("state and Hamiltonian layouts differ")
    t = _check_times(times)
    dim = h.dim
    hm = h.dense()
    a = boson_op(h.layout, mode, "annihilate").dense()
    ad = a.conj().T
    n_op = ad @ a
    aad = a @ ad
    g_down = 0.5 * noise.gamma_dec * (noise.nbar_res + 1.0)
    g_up = 0.5 * noise.gamma_dec * noise.nbar_res

    def rhs(_t, y):
        rho = y.reshape(dim, dim)
        out = -1j * (hm @ rho - rho @ hm)
        if g_down != 0.0:
            out += g_down * (2.0 * (a @ rho @ ad) - n_op @ rho - rho @ n_op)
        if g_up != 0.0:
            out += g_up * (2.0 * (ad @ rho @ a) - aad @ rho - rho @ aad)
        return out.ravel()

    rho_init = rho0.density().astype(complex)
    sol = solve_ivp(
        rhs,
        (t[0], t[-1]),
        rho_init.ravel(),
        t_eval=t,
        method="DOP853",
        rtol=tol,
        atol=tol,
    )
    if not sol.success:
        raise NumericToleranceError(f"master-equation integration failed: {sol.message}")
    states = []
    for k, tk in enumerate(t):
        rho = sol.y[:, k].reshape(dim, dim)
        rho = 0.5 * (rho + rho.conj().T)
        tr = float(np.real(np.trace(rho)))
        if abs(tr - 1.0) > 10.0 * tol:
            raise NumericToleranceError(f"trace drifted to {tr} at t = {tk}")
        lo = float(np.min(np.linalg.eigvalsh(rho)))
        if lo < -POSITIVITY_FLOOR:
            raise NumericToleranceError(f"state lost positivity ({lo:.2e}) at t = {tk}")
        states.append(mixed_state(h.layout, rho / tr, positivity_tol=POSITIVITY_FLOOR))
    meta = {
        "method": "lindblad-dop853",
        "tol": tol,
        "dim": dim,
        "gamma_dec": noise.gamma_dec,
        "nbar_res": noise.nbar_res,
    }
    return StateSequence(t, tuple(states), meta)


IMAG_PART_ATOL = 1e-8


def record(
    seq: StateSequence,
    observables: Mapping[str, OperatorMatrix],
    variance_of: Sequence[str] = (),
) -> Trajectory:
    """Expectation series per named observable; optionally variance series.

    Variance series are stored under "var_<name>".  Hermitian expectations
    must have |Im| < 1e-8 before the real cast.
    """
    records: dict[str, np.ndarray] = {}
    want_var = set(variance_of)
    unknown = want_var - set(observables)
    if unknown:
        raise KeyError(f"variance requested for unknown observables {sorted(unknown)}")
    for name, op in observables.items():
        vals = np.empty(seq.times.size)
        vvals = np.empty(seq.times.size) if name in want_var else None
        sq = None
        if vvals is not None:
            dense_sq = op.dense()
            sq = OperatorMatrix(op.layout, dense_sq @ dense_sq, hermitian=op.hermitian)
        for k, state in enumerate(seq.states):
            if state.layout != op.layout:
                raise LayoutError(f"observable {name!r} layout differs from state layout")
            val = expectation(state, op)
            if abs(val.imag) > IMAG_PART_ATOL * max(1.0, abs(val.real)):
                raise NumericToleranceError(
                    f"observable {name!r} has imaginary part {val.imag:.3e} at index {k}"
                )
            vals[k] = val.real
            if vvals is not None:
                v2 = expectation(state, sq)
                vvals[k] = v2.real - val.real**2
        records[name] = vals
        if vvals is not None:
            records[f"var_{name}"] = vvals
    return Trajectory(seq.times.copy(), records, dict(seq.meta))
