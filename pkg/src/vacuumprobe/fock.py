"""States and operators over truncated Fock spaces joined with atomic levels.

Basis ordering convention: the atomic index is slowest-varying, followed by
the Fock indices of the modes in mode-id order.  All matrices are dense; the
dynamics layer converts to sparse where it pays off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, TruncationError, UnnormalizedStateError

NORM_TOL = 1e-10
TRACE_TOL = 1e-8
COHERENT_TAIL_TOL = 1e-8


@dataclass(frozen=True)
class FockTruncation:
    """Retained Fock states |0>..|n_max> of one field mode."""

    n_max: int

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {self.n_max}")

    @property
    def dim(self) -> int:
        return self.n_max + 1


@dataclass(frozen=True)
class AtomLevelSet:
    """Ordered atomic level labels.  The sink level 's' carries no couplings."""

    labels: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"duplicate atom labels: {self.labels}")

    @property
    def dim(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    @staticmethod
    def lambda_system() -> "AtomLevelSet":
        """Three-level Lambda atom {g, g', e} plus the decay sink."""
        return AtomLevelSet(("g", "gp", "e", "s"))

    @staticmethod
    def npod(n_modes: int) -> "AtomLevelSet":
        """(n+1)-pod atom for joint-vacuum probing of n modes: g0..gn, e, sink."""
        if n_modes < 1:
            raise ValueError("npod needs at least one mode")
        grounds = tuple(f"g{j}" for j in range(n_modes + 1))
        return AtomLevelSet(grounds + ("e", "s"))


@dataclass(frozen=True)
class HilbertSpace:
    """Composite basis: optional atom factor tensored with zero or more modes."""

    atom: AtomLevelSet | None
    modes: tuple[FockTruncation, ...]

    @property
    def dims(self) -> tuple[int, ...]:
        atom_dims = (self.atom.dim,) if self.atom is not None else ()
        return atom_dims + tuple(m.dim for m in self.modes)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def n_factors(self) -> int:
        return len(self.dims)

    def factor_axis(self, slot: int | str) -> int:
        """Axis of a subsystem: 'atom' or a mode id (0-based)."""
        has_atom = self.atom is not None
        if slot == "atom":
            if not has_atom:
                raise DimensionMismatchError("space has no atom factor")
            return 0
        axis = int(slot) + (1 if has_atom else 0)
        if not 0 <= int(slot) < len(self.modes):
            raise DimensionMismatchError(f"no mode {slot} in space with {len(self.modes)} modes")
        return axis

    def index(self, atom_label: str | None = None, fock: tuple[int, ...] | int = ()) -> int:
        """Flat basis index of |atom_label> (x) |n_0, n_1, ...>."""
        if isinstance(fock, int):
            fock = (fock,)
        parts: list[int] = []
        if self.atom is not None:
            if atom_label is None:
                raise DimensionMismatchError("atom label required")
            parts.append(self.atom.index(atom_label))
        if len(fock) != len(self.modes):
            raise DimensionMismatchError(f"expected {len(self.modes)} Fock indices, got {len(fock)}")
        for n, m in zip(fock, self.modes):
            if not 0 <= n <= m.n_max:
                raise DimensionMismatchError(f"Fock index {n} outside truncation {m.n_max}")
            parts.append(n)
        idx = 0
        for p, d in zip(parts, self.dims):
            idx = idx * d + p
        return idx

    def basis_labels(self) -> list[str]:
        labels = []
        for multi in np.ndindex(*self.dims):
            parts = []
            i = 0
            if self.atom is not None:
                parts.append(self.atom.labels[multi[0]])
                i = 1
            parts.extend(str(n) for n in multi[i:])
            labels.append("|" + ",".join(parts) + ">")
        return labels


def field_space(*truncs: FockTruncation) -> HilbertSpace:
    return HilbertSpace(atom=None, modes=tuple(truncs))


def _check_same_space(a, b):
    if a.space != b.space:
        raise DimensionMismatchError(f"spaces differ: {a.space} vs {b.space}")


@dataclass(frozen=True)
class PureState:
    """Complex amplitude vector over a composite basis."""

    space: HilbertSpace
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape != (self.space.dim,):
            raise DimensionMismatchError(f"amplitude shape {amp.shape} != ({self.space.dim},)")
        object.__setattr__(self, "amplitudes", amp)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "PureState":
        n = self.norm
        if n == 0.0:
            raise UnnormalizedStateError("cannot normalize the zero vector")
        return PureState(self.space, self.amplitudes / n)

    def require_normalized(self, tol: float = NORM_TOL) -> "PureState":
        if abs(self.norm**2 - 1.0) > tol:
            raise UnnormalizedStateError(f"squared norm {self.norm**2} != 1 within {tol}")
        return self

    def overlap(self, other: "PureState") -> complex:
        _check_same_space(self, other)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def to_density(self) -> "DensityOperator":
        return DensityOperator(self.space, np.outer(self.amplitudes, self.amplitudes.conj()))

    def reduced_density(self, slot: int | str) -> "DensityOperator":
        return self.to_density().reduced(slot)


def basis_state(space: HilbertSpace, atom_label: str | None = None,
                fock: tuple[int, ...] | int = ()) -> PureState:
    amp = np.zeros(space.dim, dtype=complex)
    amp[space.index(atom_label, fock)] = 1.0
    return PureState(space, amp)


@dataclass(frozen=True)
class DensityOperator:
    """Density matrix over a composite basis."""

    space: HilbertSpace
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        d = self.space.dim
        if mat.shape != (d, d):
            raise DimensionMismatchError(f"matrix shape {mat.shape} != ({d},{d})")
        object.__setattr__(self, "matrix", mat)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def normalized(self) -> "DensityOperator":
        tr = self.trace
        if tr <= 0.0:
            raise UnnormalizedStateError(f"non-positive trace {tr}")
        return DensityOperator(self.space, self.matrix / tr)

    def validate(self, trace_tol: float = TRACE_TOL, herm_tol: float = 1e-10,
                 eig_tol: float = 1e-8) -> "DensityOperator":
        m = self.matrix
        if np.max(np.abs(m - m.conj().T)) > herm_tol:
            raise UnnormalizedStateError("density matrix is not Hermitian")
        if abs(self.trace - 1.0) > trace_tol:
            raise UnnormalizedStateError(f"trace {self.trace} != 1")
        if np.min(np.linalg.eigvalsh((m + m.conj().T) / 2)) < -eig_tol:
            raise UnnormalizedStateError("density matrix has a significantly negative eigenvalue")
        return self

    @property
    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)

    def reduced(self, slot: int | str) -> "DensityOperator":
        """Partial trace over every factor except the given one."""
        dims = self.space.dims
        axis = self.space.factor_axis(slot)
        nf = len(dims)
        tensor_form = self.matrix.reshape(dims + dims)
        for ax in reversed([i for i in range(nf) if i != axis]):
            # trace axis ax against its primed partner; primed block shrinks with it
            tensor_form = np.trace(tensor_form, axis1=ax, axis2=ax + tensor_form.ndim // 2)
        if slot == "atom":
            sub = HilbertSpace(self.space.atom, ())
        else:
            sub = field_space(self.space.modes[int(slot)])
        return DensityOperator(sub, tensor_form)

    def expectation(self, op: "LinearOperator") -> complex:
        _check_same_space(self, op)
        return complex(np.trace(op.matrix @ self.matrix))


@dataclass(frozen=True)
class LinearOperator:
    """Dense operator over a composite basis."""

    space: HilbertSpace
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        d = self.space.dim
        if mat.shape != (d, d):
            raise DimensionMismatchError(f"matrix shape {mat.shape} != ({d},{d})")
        object.__setattr__(self, "matrix", mat)

    def dagger(self) -> "LinearOperator":
        return LinearOperator(self.space, self.matrix.conj().T)

    def __add__(self, other: "LinearOperator") -> "LinearOperator":
        _check_same_space(self, other)
        return LinearOperator(self.space, self.matrix + other.matrix)

    def __sub__(self, other: "LinearOperator") -> "LinearOperator":
        _check_same_space(self, other)
        return LinearOperator(self.space, self.matrix - other.matrix)

    def __mul__(self, scalar) -> "LinearOperator":
        return LinearOperator(self.space, self.matrix * complex(scalar))

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, LinearOperator):
            _check_same_space(self, other)
            return LinearOperator(self.space, self.matrix @ other.matrix)
        if isinstance(other, PureState):
            _check_same_space(self, other)
            return PureState(self.space, self.matrix @ other.amplitudes)
        if isinstance(other, DensityOperator):
            _check_same_space(self, other)
            return DensityOperator(self.space, self.matrix @ other.matrix)
        return NotImplemented


def identity(space: HilbertSpace) -> LinearOperator:
    return LinearOperator(space, np.eye(space.dim, dtype=complex))


# ---------------------------------------------------------------------------
# Field-mode operators (single mode)
# ---------------------------------------------------------------------------

def annihilation(trunc: FockTruncation) -> LinearOperator:
    """a|n> = sqrt(n)|n-1>.  The top row is a truncation artifact: a|n_max>
    is exact, but a^dag cannot repopulate |n_max> from outside the space."""
    d = trunc.dim
    m = np.diag(np.sqrt(np.arange(1, d)), k=1).astype(complex)
    return LinearOperator(field_space(trunc), m)


def creation(trunc: FockTruncation) -> LinearOperator:
    return annihilation(trunc).dagger()


def number_operator(trunc: FockTruncation) -> LinearOperator:
    return LinearOperator(field_space(trunc), np.diag(np.arange(trunc.dim)).astype(complex))


def bare_raise(trunc: FockTruncation) -> LinearOperator:
    """Photon-number shift up without the Bose sqrt(n) factor.

    Truncated form: sum_{n<n_max} |n+1><n|, so the |n_max> amplitude of the
    input is discarded.
    """
    d = trunc.dim
    m = np.diag(np.ones(d - 1), k=-1).astype(complex)
    return LinearOperator(field_space(trunc), m)


def bare_lower(trunc: FockTruncation) -> LinearOperator:
    """Photon-number shift down: sum_{n>=1} |n-1><n|; annihilates |0>."""
    d = trunc.dim
    m = np.diag(np.ones(d - 1), k=1).astype(complex)
    return LinearOperator(field_space(trunc), m)


def vacuum_projectors(trunc: FockTruncation) -> tuple[LinearOperator, LinearOperator]:
    """(P0, I - P0) with P0 = |0><0|."""
    d = trunc.dim
    p0 = np.zeros((d, d), dtype=complex)
    p0[0, 0] = 1.0
    sp = field_space(trunc)
    return LinearOperator(sp, p0), LinearOperator(sp, np.eye(d) - p0)


def suggest_truncation(alpha: complex, tail_tol: float = COHERENT_TAIL_TOL) -> FockTruncation:
    """Smallest n_max whose Poisson tail beyond it is below tail_tol."""
    mean = abs(alpha) ** 2
    n, cumulative = 0, math.exp(-mean)
    while 1.0 - cumulative >= tail_tol and n < 10_000:
        n += 1
        cumulative += math.exp(-mean) * mean**n / math.factorial(n)
    return FockTruncation(max(n, 1))


def coherent_state(alpha: complex, trunc: FockTruncation) -> PureState:
    """Truncated coherent state, renormalized; fails if the discarded
    probability reaches the truncation tolerance."""
    ns = np.arange(trunc.dim)
    log_fact = np.cumsum(np.concatenate(([0.0], np.log(np.arange(1, trunc.dim)))))
    if alpha == 0:
        amps = np.zeros(trunc.dim, dtype=complex)
        amps[0] = 1.0
        return PureState(field_space(trunc), amps)
    # c_n = exp(-|a|^2/2) a^n / sqrt(n!), in log form to dodge overflow
    log_mod = -abs(alpha) ** 2 / 2 + ns * math.log(abs(alpha)) - log_fact / 2
    amps = np.exp(log_mod) * np.exp(1j * ns * np.angle(alpha))
    kept = float(np.sum(np.abs(amps) ** 2))
    if 1.0 - kept >= COHERENT_TAIL_TOL:
        raise TruncationError(
            f"coherent state |alpha|={abs(alpha)} loses {1.0 - kept:.3e} probability "
            f"at n_max={trunc.n_max}; increase the truncation"
        )
    return PureState(field_space(trunc), amps / math.sqrt(kept))


# ---------------------------------------------------------------------------
# Embedding and tensor products
# ---------------------------------------------------------------------------

def embed(op: LinearOperator, slot: int | str, space: HilbertSpace) -> LinearOperator:
    """Lift a single-factor operator to the composite space (identity elsewhere)."""
    axis = space.factor_axis(slot)
    dims = space.dims
    if op.space.dim != dims[axis]:
        raise DimensionMismatchError(
            f"operator dim {op.space.dim} != factor dim {dims[axis]} at slot {slot}"
        )
    result = np.array([[1.0 + 0j]])
    for ax, d in enumerate(dims):
        result = np.kron(result, op.matrix if ax == axis else np.eye(d))
    return LinearOperator(space, result)


def atom_transition(space: HilbertSpace, upper: str, lower: str) -> LinearOperator:
    """|upper><lower| on the atom factor, identity on all modes."""
    if space.atom is None:
        raise DimensionMismatchError("space has no atom factor")
    d = space.atom.dim
    m = np.zeros((d, d), dtype=complex)
    m[space.atom.index(upper), space.atom.index(lower)] = 1.0
    small = LinearOperator(HilbertSpace(space.atom, ()), m)
    return embed(small, "atom", space)


def atom_projector(space: HilbertSpace, label: str) -> LinearOperator:
    return atom_transition(space, label, label)


def tensor(*states: PureState) -> PureState:
    """Tensor product of pure states; at most one factor may carry an atom,
    and it must come first (atom-major basis ordering)."""
    atoms = [s.space.atom for s in states if s.space.atom is not None]
    if len(atoms) > 1 or (atoms and states[0].space.atom is None):
        raise DimensionMismatchError("atom factor must be unique and first")
    amp = states[0].amplitudes
    modes = states[0].space.modes
    for s in states[1:]:
        amp = np.kron(amp, s.amplitudes)
        modes = modes + s.space.modes
    return PureState(HilbertSpace(states[0].space.atom, modes), amp)


# ---------------------------------------------------------------------------
# Photon statistics and fidelity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhotonStatistics:
    mean_n: float
    var_n: float
    mandel_q: float
    distribution: np.ndarray = field(repr=False)


def number_distribution(state: PureState | DensityOperator, mode: int = 0) -> np.ndarray:
    """P_k for one field mode, tracing out everything else."""
    if isinstance(state, PureState):
        rho = state.reduced_density(mode)
    else:
        rho = state.reduced(mode)
    p = np.real(np.diag(rho.matrix)).copy()
    p[np.abs(p) < 1e-300] = 0.0
    return p


def photon_statistics(state: PureState | DensityOperator, mode: int = 0) -> PhotonStatistics:
    if isinstance(state, PureState):
        state.require_normalized()
    else:
        if abs(state.trace - 1.0) > TRACE_TOL:
            raise UnnormalizedStateError(f"trace {state.trace} != 1")
    p = number_distribution(state, mode)
    total = float(np.sum(p))
    if abs(total - 1.0) > TRACE_TOL:
        raise UnnormalizedStateError(f"number distribution sums to {total}")
    ns = np.arange(len(p))
    mean = float(np.sum(ns * p))
    var = float(np.sum(ns**2 * p) - mean**2)
    q = var / mean - 1.0 if mean > 0 else 0.0
    return PhotonStatistics(mean_n=mean, var_n=var, mandel_q=q, distribution=p)


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh((m + m.conj().T) / 2)
    # suppress eigenvalue noise at machine level: sqrt amplifies O(eps)
    # eigenvalues of low-rank matrices into O(sqrt(eps)) errors otherwise
    floor = max(np.max(vals), 0.0) * 1e-14
    vals = np.where(vals > floor, vals, 0.0)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def fidelity(a: PureState | DensityOperator, b: PureState | DensityOperator) -> float:
    """Squared-convention fidelity: pure-pure |<a|b>|^2, mixed Uhlmann
    (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2."""
    _check_same_space(a, b)
    if isinstance(a, PureState) and isinstance(b, PureState):
        return float(np.clip(abs(a.overlap(b)) ** 2, 0.0, 1.0))
    if isinstance(a, PureState):
        a, b = b, a
    if isinstance(b, PureState):
        val = np.real(np.vdot(b.amplitudes, a.matrix @ b.amplitudes))
        return float(np.clip(val, 0.0, 1.0))
    sa = _psd_sqrt(a.matrix)
    inner = _psd_sqrt(sa @ b.matrix @ sa)
    return float(np.clip(np.trace(inner).real ** 2, 0.0, 1.0))
