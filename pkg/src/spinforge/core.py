"""Hilbert-space layout, collective-spin and boson operators, state preparation.

The spin factor is the symmetric (Dicke) subspace with j = N/2, dimension
N + 1: the collective couplings conserve total J and every initial state used
here is symmetric, so the full 2^N product basis is never needed.  Basis
ordering: spin index k corresponds to m = j - k (so index 0 is m = +j), and
the full space is spin (x) mode_x (x) mode_y in row-major kron order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

__all__ = [
    "LayoutError",
    "SpaceLayout",
    "OperatorMatrix",
    "QuantumState",
    "make_layout",
    "operator",
    "pure_state",
    "mixed_state",
    "collective_spin_op",
    "boson_op",
    "spin_parity_op",
    "total_parity_op",
    "coherent_spin_state",
    "ghz_state",
    "thermal_state",
    "basis_state",
    "product_state",
    "expectation",
    "mode_level_populations",
]

#: below this dimension operators are stored dense (eigendecomposition needs
#: dense anyway at small sizes)
DENSE_DIM_LIMIT = 64

HERMITICITY_ATOL = 1e-12
PURE_NORM_ATOL = 1e-9
TRACE_ATOL = 1e-9

_MODE_INDEX = {"x": 0, "y": 1}


class LayoutError(ValueError):
    """Raised for invalid Hilbert-space compositions or mismatched layouts."""


@dataclass(frozen=True)
class SpaceLayout:
    """Composition of the Hilbert space: N two-level ions plus 0..2 boson modes."""

    spin_count: int
    fock_cutoffs: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.spin_count < 0:
            raise LayoutError("spin_count must be >= 0")
        if len(self.fock_cutoffs) > 2:
            raise LayoutError("at most two boson modes (x, y) are supported")
        if any(c < 1 for c in self.fock_cutoffs):
            raise LayoutError("every Fock cutoff must be >= 1")

    @property
    def j(self) -> float:
        return self.spin_count / 2.0

    @property
    def spin_dim(self) -> int:
        return self.spin_count + 1

    @property
    def mode_dims(self) -> tuple[int, ...]:
        return tuple(c + 1 for c in self.fock_cutoffs)

    @property
    def n_modes(self) -> int:
        return len(self.fock_cutoffs)

    @property
    def factor_dims(self) -> tuple[int, ...]:
        return (self.spin_dim,) + self.mode_dims

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.factor_dims))

    def m_values(self) -> np.ndarray:
        """J_z eigenvalues in index order: j, j-1, ..., -j."""
        return self.j - np.arange(self.spin_dim)

    def mode_index(self, mode: str) -> int:
        idx = _MODE_INDEX.get(mode)
        if idx is None or idx >= self.n_modes:
            raise LayoutError(f"layout has no mode {mode!r}")
        return idx

    def index(self, spin_index: int, *fock: int) -> int:
        """Flat index of |spin_index> (x) |n_x> (x) |n_y>."""
        labels = (spin_index,) + tuple(fock)
        dims = self.factor_dims
        if len(labels) != len(dims):
            raise LayoutError(f"expected {len(dims)} labels, got {len(labels)}")
        flat = 0
        for lab, dim in zip(labels, dims):
            if not 0 <= lab < dim:
                raise LayoutError(f"label {lab} out of range for factor of dim {dim}")
            flat = flat * dim + lab
        return flat

    def unindex(self, flat: int) -> tuple[int, ...]:
        """Inverse of index(): (spin_index, n_x, n_y...) for a flat index."""
        if not 0 <= flat < self.total_dim:
            raise LayoutError(f"flat index {flat} out of range")
        labels = []
        for dim in reversed(self.factor_dims):
            labels.append(flat % dim)
            flat //= dim
        return tuple(reversed(labels))


def make_layout(spin_count: int, fock_cutoffs: Sequence[int] = ()) -> SpaceLayout:
    """Build a SpaceLayout; rejects >2 modes and negative inputs."""
    return SpaceLayout(int(spin_count), tuple(int(c) for c in fock_cutoffs))


@dataclass(frozen=True)
class OperatorMatrix:
    """Sparse (or small dense) complex matrix tagged with its SpaceLayout."""

    layout: SpaceLayout
    entries: object  # np.ndarray or scipy.sparse matrix
    hermitian: bool = False

    @property
    def dim(self) -> int:
        return self.layout.total_dim

    def dense(self) -> np.ndarray:
        if sp.issparse(self.entries):
            return np.asarray(self.entries.todense())
        return np.asarray(self.entries)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.entries @ v

    def diagonal(self) -> np.ndarray:
        if sp.issparse(self.entries):
            return np.asarray(self.entries.diagonal())
        return np.diagonal(self.entries).copy()


def _hermiticity_defect(mat) -> float:
    if sp.issparse(mat):
        d = mat - mat.getH()
        return float(abs(d).max()) if d.nnz else 0.0
    return float(np.max(np.abs(mat - mat.conj().T))) if mat.size else 0.0


def operator(layout: SpaceLayout, mat, hermitian: bool = False) -> OperatorMatrix:
    """Wrap a matrix as an OperatorMatrix, checking dimension and hermiticity.

    Storage follows the layout size: dense below DENSE_DIM_LIMIT, CSR above.
    """
    if mat.shape != (layout.total_dim, layout.total_dim):
        raise LayoutError(
            f"matrix shape {mat.shape} does not match layout dim {layout.total_dim}"
        )
    if layout.total_dim < DENSE_DIM_LIMIT:
        if sp.issparse(mat):
            mat = np.asarray(mat.todense())
        mat = np.asarray(mat, dtype=complex)
    else:
        if not sp.issparse(mat):
            mat = sp.csr_matrix(np.asarray(mat, dtype=complex))
        else:
            mat = mat.tocsr().astype(complex)
    if hermitian:
        defect = _hermiticity_defect(mat)
        if defect >= HERMITICITY_ATOL:
            raise ValueError(f"operator flagged hermitian has defect {defect:.3e}")
    return OperatorMatrix(layout, mat, hermitian)


@lru_cache(maxsize=None)
def _spin_matrices(spin_count: int):
    """Dense (Jx, Jy, Jz) on the (N+1)-dim Dicke subspace, index k <-> m = j-k."""
    j = spin_count / 2.0
    dim = spin_count + 1
    jz = np.diag(j - np.arange(dim)).astype(complex)
    jp = np.zeros((dim, dim), dtype=complex)
    for k in range(1, dim):
        m = j - k
        jp[k - 1, k] = math.sqrt(j * (j + 1) - m * (m + 1))
    jx = (jp + jp.conj().T) / 2.0
    jy = (jp - jp.conj().T) / 2.0j
    for m_ in (jx, jy, jz):
        m_.setflags(write=False)
    return jx, jy, jz


def _mode_matrix(cutoff: int, which: str) -> sp.csr_matrix:
    dim = cutoff + 1
    if which == "annihilate":
        data = np.sqrt(np.arange(1, dim))
        return sp.diags(data, offsets=1, format="csr").astype(complex)
    if which == "create":
        data = np.sqrt(np.arange(1, dim))
        return sp.diags(data, offsets=-1, format="csr").astype(complex)
    if which == "number":
        return sp.diags(np.arange(dim, dtype=float), format="csr").astype(complex)
    if which == "position_sum":
        data = np.sqrt(np.arange(1, dim))
        return (sp.diags(data, 1) + sp.diags(data, -1)).tocsr().astype(complex)
    raise ValueError(f"unknown boson operator {which!r}")


def _embed(layout: SpaceLayout, factor_ops: Sequence) -> sp.csr_matrix:
    """Kron together one matrix per factor (None = identity)."""
    out = None
    for dim, op in zip(layout.factor_dims, factor_ops):
        m = sp.identity(dim, format="csr", dtype=complex) if op is None else sp.csr_matrix(op)
        out = m if out is None else sp.kron(out, m, format="csr")
    return out


def collective_spin_op(layout: SpaceLayout, axis: str) -> OperatorMatrix:
    """J_x, J_y or J_z on the layout (identity on the boson factors)."""
    try:
        mat = _spin_matrices(layout.spin_count)[{"x": 0, "y": 1, "z": 2}[axis]]
    except KeyError:
        raise ValueError(f"axis must be x, y or z, got {axis!r}") from None
    full = _embed(layout, [mat] + [None] * layout.n_modes)
    return operator(layout, full, hermitian=True)


def boson_op(layout: SpaceLayout, mode: str, which: str) -> OperatorMatrix:
    """Truncated mode operator: annihilate, create, number or position_sum."""
    idx = layout.mode_index(mode)
    mat = _mode_matrix(layout.fock_cutoffs[idx], which)
    factors = [None] * (1 + layout.n_modes)
    factors[1 + idx] = mat
    full = _embed(layout, factors)
    return operator(layout, full, hermitian=which in ("number", "position_sum"))


def spin_parity_op(layout: SpaceLayout) -> OperatorMatrix:
    """Product of sigma_z over all ions: diag((-1)^(j-m)) on the Dicke subspace."""
    phases = (-1.0) ** np.arange(layout.spin_dim)
    full = _embed(layout, [sp.diags(phases)] + [None] * layout.n_modes)
    return operator(layout, full, hermitian=True)


def total_parity_op(layout: SpaceLayout) -> OperatorMatrix:
    """Spin parity times boson parity (-1)^(n_x + n_y)."""
    factors = [sp.diags((-1.0) ** np.arange(layout.spin_dim))]
    for dim in layout.mode_dims:
        factors.append(sp.diags((-1.0) ** np.arange(dim)))
    return operator(layout, _embed(layout, factors), hermitian=True)


@dataclass(frozen=True)
class QuantumState:
    """Pure state vector or density matrix tagged with its SpaceLayout."""

    layout: SpaceLayout
    kind: str  # "pure" | "mixed"
    data: np.ndarray = field(repr=False)

    @property
    def is_pure(self) -> bool:
        return self.kind == "pure"

    def density(self) -> np.ndarray:
        if self.is_pure:
            return np.outer(self.data, self.data.conj())
        return self.data


def pure_state(layout: SpaceLayout, amplitudes: np.ndarray) -> QuantumState:
    vec = np.asarray(amplitudes, dtype=complex).ravel()
    if vec.size != layout.total_dim:
        raise LayoutError("amplitude vector does not match layout dimension")
    norm = np.linalg.norm(vec)
    if abs(norm - 1.0) > PURE_NORM_ATOL:
        raise ValueError(f"pure state norm {norm} deviates from 1 beyond {PURE_NORM_ATOL}")
    vec = vec.copy()
    vec.setflags(write=False)
    return QuantumState(layout, "pure", vec)


def mixed_state(
    layout: SpaceLayout,
    rho: np.ndarray,
    positivity_tol: float = 1e-9,
) -> QuantumState:
    mat = np.asarray(rho, dtype=complex)
    if mat.shape != (layout.total_dim, layout.total_dim):
        raise LayoutError("density matrix does not match layout dimension")
    tr = np.trace(mat)
    if abs(tr - 1.0) > TRACE_ATOL:
        raise ValueError(f"density matrix trace {tr} deviates from 1 beyond {TRACE_ATOL}")
    herm = np.max(np.abs(mat - mat.conj().T))
    if herm > HERMITICITY_ATOL:
        raise ValueError(f"density matrix hermiticity defect {herm:.3e}")
    lo = float(np.min(np.linalg.eigvalsh(mat)))
    if lo < -positivity_tol:
        raise ValueError(f"density matrix has eigenvalue {lo:.3e} below -{positivity_tol}")
    mat = mat.copy()
    mat.setflags(write=False)
    return QuantumState(layout, "mixed", mat)


@lru_cache(maxsize=None)
def _x_basis(spin_count: int) -> np.ndarray:
    """Columns |j,m>_x for m = j..-j with <m+1| J_z |m>_x real positive.

    That phase chain makes J_z act in the x basis exactly like the standard
    ladder form, so the rotated-frame formulas for the twisting signal hold
    verbatim.  Column 0 is anchored by making its largest entry real positive.
    """
    jx, _, jz = _spin_matrices(spin_count)
    w, v = np.linalg.eigh(jx)
    v = v[:, ::-1].copy()  # descending eigenvalues: column k <-> m = j - k
    anchor = np.argmax(np.abs(v[:, 0]))
    v[:, 0] *= np.abs(v[anchor, 0]) / v[anchor, 0]
    for k in range(1, spin_count + 1):
        ov = v[:, k - 1].conj() @ (jz @ v[:, k])
        v[:, k] *= np.abs(ov) / ov
    v.setflags(write=False)
    return v


def wigner_amplitudes(spin_count: int, theta: float) -> np.ndarray:
    """Reduced Wigner rotation amplitudes d_m, index k <-> m = j - k."""
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array(
        [
            math.sqrt(math.comb(spin_count, k)) * c ** (spin_count - k) * s**k
            for k in range(spin_count + 1)
        ]
    )


def _attach_vacuum(layout: SpaceLayout, spin_vec: np.ndarray) -> np.ndarray:
    if layout.n_modes == 0:
        return spin_vec
    full = np.zeros(layout.total_dim, dtype=complex)
    block = int(np.prod(layout.mode_dims))
    full[::block] = spin_vec
    return full


def coherent_spin_state(layout: SpaceLayout, theta: float) -> QuantumState:
    """Spin coherent state sum_m d_m |j,m>_x; boson factors start in vacuum.

    theta in [0, pi]; theta = 0 gives |j, j>_x exactly.
    """
    if not 0.0 <= theta <= math.pi:
        raise ValueError("theta must lie in [0, pi]")
    d = wigner_amplitudes(layout.spin_count, theta)
    spin_vec = _x_basis(layout.spin_count) @ d.astype(complex)
    return pure_state(layout, _attach_vacuum(layout, spin_vec))


def ghz_state(layout: SpaceLayout) -> QuantumState:
    """(|j, j>_x + |j, -j>_x) / sqrt(2); boson factors start in vacuum."""
    if layout.spin_count < 1:
        raise LayoutError("GHZ state needs at least one spin")
    v = _x_basis(layout.spin_count)
    spin_vec = (v[:, 0] + v[:, -1]) / math.sqrt(2.0)
    return pure_state(layout, _attach_vacuum(layout, spin_vec))


def thermal_occupations(nbar: float, cutoff: int) -> np.ndarray:
    """Truncated, renormalized geometric occupation law p_n."""
    if nbar < 0:
        raise ValueError("nbar must be >= 0")
    if nbar == 0.0:
        p = np.zeros(cutoff + 1)
        p[0] = 1.0
        return p
    n = np.arange(cutoff + 1)
    p = nbar**n / (1.0 + nbar) ** (n + 1)
    return p / p.sum()


def thermal_state(layout: SpaceLayout, mode: str, nbar: float) -> QuantumState:
    """Thermal density matrix of one mode, on a single-mode layout.

    The cutoff is taken from `mode` of `layout`; combine with spin states via
    product_state.  nbar = 0 returns |0><0| exactly.
    """
    idx = layout.mode_index(mode)
    cutoff = layout.fock_cutoffs[idx]
    sub = make_layout(0, [cutoff])
    return mixed_state(sub, np.diag(thermal_occupations(nbar, cutoff)).astype(complex))


def thermal_cutoff(nbar: float, tail: float = 1e-6, minimum: int = 4) -> int:
    """Smallest cutoff with truncated tail weight below `tail`."""
    if nbar <= 0:
        return minimum
    r = nbar / (1.0 + nbar)
    n = math.ceil(math.log(tail) / math.log(r)) - 1
    return max(minimum, int(n))


def basis_state(layout: SpaceLayout, spin_index: int = 0, fock: Iterable[int] = ()) -> QuantumState:
    """Computational basis vector |spin_index> (x) |n_x, n_y...>."""
    fock = tuple(fock)
    if len(fock) != layout.n_modes:
        fock = fock + (0,) * (layout.n_modes - len(fock))
    vec = np.zeros(layout.total_dim, dtype=complex)
    vec[layout.index(spin_index, *fock)] = 1.0
    return pure_state(layout, vec)


def product_state(layout: SpaceLayout, *factors: QuantumState) -> QuantumState:
    """Tensor product of factor states; factor layouts must tile `layout`.

    Trivial spin factors (from N = 0 sub-layouts, dimension 1) are ignored in
    the tiling comparison, so a spin-only state can be combined directly with
    single-mode states such as thermal_state output.
    """
    got = [d for f in factors for d in f.layout.factor_dims if d != 1]
    want = [d for d in layout.factor_dims if d != 1]
    if got != want:
        raise LayoutError(f"factor dims {got} do not tile layout dims {want}")
    if all(f.is_pure for f in factors):
        vec = np.array([1.0 + 0j])
        for f in factors:
            vec = np.kron(vec, f.data)
        return pure_state(layout, vec)
    rho = np.array([[1.0 + 0j]])
    for f in factors:
        rho = np.kron(rho, f.density())
    return mixed_state(layout, rho)


def expectation(state: QuantumState, op: OperatorMatrix) -> complex:
    """<psi|A|psi> or Tr(rho A); layouts must match."""
    if state.layout != op.layout:
        raise LayoutError("state and operator layouts differ")
    if state.is_pure:
        return complex(np.vdot(state.data, op.matvec(state.data)))
    prod = op.entries @ state.data if sp.issparse(op.entries) else op.entries @ state.data
    return complex(np.trace(prod))


def real_expectation(state: QuantumState, op: OperatorMatrix, imag_atol: float = 1e-8) -> float:
    """Expectation of a Hermitian observable, with the imaginary part checked."""
    val = expectation(state, op)
    if abs(val.imag) > imag_atol * max(1.0, abs(val.real)):
        raise ValueError(f"expectation has imaginary part {val.imag:.3e}")
    return val.real


def mode_level_populations(state: QuantumState, mode: str) -> np.ndarray:
    """Marginal Fock-level populations of one mode."""
    idx = state.layout.mode_index(mode)
    dims = state.layout.factor_dims
    axis = 1 + idx
    if state.is_pure:
        probs = np.abs(state.data.reshape(dims)) ** 2
        other = tuple(a for a in range(len(dims)) if a != axis)
        return probs.sum(axis=other)
    diag = np.real(np.diagonal(state.data)).reshape(dims)
    other = tuple(a for a in range(len(dims)) if a != axis)
    return diag.sum(axis=other)
