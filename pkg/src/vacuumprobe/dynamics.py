"""Time-dependent Hamiltonian construction and closed/open time evolution.

The coupled atom-cavity Hamiltonian (hbar = 1, rates in units of g):

    H(t) = Delta |e><e| + gamma_A(t) (|e><g| + |g><e|)
         + gamma_B(t) (|e><g'| a + |g'><e| a^dag)

The sink level 's' carries no couplings; it only receives spontaneous-decay
population from |e> in the open dynamics.  Both integrators reduce the
problem to dy/dt = (M0 + gamma_A(t) M1 + gamma_B(t) M2) y and share the
adaptive kernel; a fixed-step matrix-exponential oracle is provided for
cross-validation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import sparse

from . import kernels, pulses
from .errors import DimensionMismatchError, UnnormalizedStateError, VacuumProbeError
from .fock import (
    AtomLevelSet,
    DensityOperator,
    FockTruncation,
    HilbertSpace,
    LinearOperator,
    PureState,
    annihilation,
    atom_projector,
    atom_transition,
    embed,
)
from .pulses import PulseSchedule

ORACLE_DIM_CAP = 64


@dataclass(frozen=True)
class SystemConfig:
    """Physical parameters and integration tolerances, in units of g."""

    schedule: PulseSchedule
    trunc: FockTruncation
    Delta: float = 0.0
    kappa: float = 0.0
    Gamma_e: float = 0.0
    rtol_closed: float = 1e-11
    atol_closed: float = 1e-13
    rtol_open: float = 1e-10
    atol_open: float = 1e-12

    def __post_init__(self):
        for name in ("kappa", "Gamma_e"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
        if not math.isfinite(self.Delta):
            raise ValueError("Delta must be finite")

    @property
    def space(self) -> HilbertSpace:
        return HilbertSpace(AtomLevelSet.lambda_system(), (self.trunc,))

    def with_schedule(self, schedule: PulseSchedule) -> "SystemConfig":
        return replace(self, schedule=schedule)


@dataclass
class EvolveResult:
    """Final state plus diagnostics of one sweep."""

    state: PureState | DensityOperator
    sink_population: float
    series: list[dict] = field(default_factory=list)
    sampled_states: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# Hamiltonian terms
# ---------------------------------------------------------------------------

def hamiltonian_terms(space: HilbertSpace) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(H_Delta, H_A, H_B): H(t) = Delta*H_Delta + gamma_A(t)*H_A + gamma_B(t)*H_B.

    Works for the Lambda system; the multimode analogue lives in protocol.py.
    """
    h_delta = atom_projector(space, "e").matrix
    h_a = (atom_transition(space, "e", "g") + atom_transition(space, "g", "e")).matrix
    a_emb = embed(annihilation(space.modes[0]), 0, space).matrix
    eg = atom_transition(space, "e", "gp").matrix
    h_b = eg @ a_emb + (eg @ a_emb).conj().T
    return h_delta, h_a, h_b


def build_hamiltonian(t: float, config: SystemConfig) -> LinearOperator:
    space = config.space
    h_delta, h_a, h_b = hamiltonian_terms(space)
    gA, gB = pulses.envelopes(t, config.schedule)
    return LinearOperator(space, config.Delta * h_delta + gA * h_a + gB * h_b)


def triplet_eigenenergies(n: int, t: float, config: SystemConfig) -> tuple[float, float, float]:
    """Eigenenergies (0, E+, E-) of the invariant subspace
    span{|g,n-1>, |e,n-1>, |g',n>}."""
    if n < 1:
        raise ValueError("n >= 1 required")
    gA, gB = pulses.envelopes(t, config.schedule)
    root = math.sqrt(config.Delta**2 + 4 * gA**2 + 4 * n * gB**2)
    return 0.0, 0.5 * (config.Delta + root), 0.5 * (config.Delta - root)


# ---------------------------------------------------------------------------
# Generator assembly (shared by the kernel-based integrators and the oracle)
# ---------------------------------------------------------------------------

def _lambda_operator_matrices(config: SystemConfig):
    """(H_Delta, H_A, H_B, collapse_ops) for the Lambda system."""
    space = config.space
    h_delta, h_a, h_b = hamiltonian_terms(space)
    collapse = []
    if config.kappa > 0:
        collapse.append((config.kappa, embed(annihilation(space.modes[0]), 0, space).matrix))
    if config.Gamma_e > 0:
        collapse.append((config.Gamma_e, atom_transition(space, "s", "e").matrix))
    return h_delta, h_a, h_b, collapse


def schrodinger_generators(config: SystemConfig) -> list[sparse.csr_matrix]:
    h_delta, h_a, h_b, _ = _lambda_operator_matrices(config)
    return [sparse.csr_matrix(-1j * config.Delta * h_delta),
            sparse.csr_matrix(-1j * h_a),
            sparse.csr_matrix(-1j * h_b)]


def _dissipator_super(rate: float, l_mat: np.ndarray) -> sparse.csr_matrix:
    """Superoperator of rate * (L rho L+ - {L+L, rho}/2) on row-major vec(rho)."""
    l_sp = sparse.csr_matrix(l_mat)
    ldl = l_sp.conj().T @ l_sp
    eye = sparse.identity(l_mat.shape[0], format="csr")
    out = sparse.kron(l_sp, l_sp.conj()) - 0.5 * (sparse.kron(ldl, eye) + sparse.kron(eye, ldl.T))
    return (rate * out).tocsr()


def _commutator_super(h_mat: np.ndarray) -> sparse.csr_matrix:
    h_sp = sparse.csr_matrix(h_mat)
    eye = sparse.identity(h_mat.shape[0], format="csr")
    return (-1j * (sparse.kron(h_sp, eye) - sparse.kron(eye, h_sp.T))).tocsr()


def lindblad_generators(config: SystemConfig) -> list[sparse.csr_matrix]:
    h_delta, h_a, h_b, collapse = _lambda_operator_matrices(config)
    static = _commutator_super(config.Delta * h_delta)
    for rate, l_mat in collapse:
        static = static + _dissipator_super(rate, l_mat)
    return [static.tocsr(), _commutator_super(h_a), _commutator_super(h_b)]


def _coeff_fn(schedule: PulseSchedule):
    def coeffs(t: float):
        gA, gB = pulses.envelopes(t, schedule)
        return (1.0, gA, gB)
    return coeffs


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------

def _component_populations(state_vec_or_rho, space: HilbertSpace, t: float,
                           schedule: PulseSchedule, is_rho: bool) -> dict:
    """Populations of dark/bright/excited/sink components at time t."""
    n_max = space.modes[0].n_max
    p_dark = p_bright = 0.0

    def prob(vec: np.ndarray) -> float:
        if is_rho:
            return float(np.real(np.vdot(vec, state_vec_or_rho @ vec)))
        return float(abs(np.vdot(vec, state_vec_or_rho)) ** 2)

    vac = np.zeros(space.dim, dtype=complex)
    vac[space.index("gp", 0)] = 1.0
    p_dark += prob(vac)
    for n in range(1, n_max + 1):
        th = pulses.theta(t, n, schedule)
        dark = np.zeros(space.dim, dtype=complex)
        dark[space.index("g", n - 1)] = math.sin(th)
        dark[space.index("gp", n)] = -math.cos(th)
        bright = np.zeros(space.dim, dtype=complex)
        bright[space.index("g", n - 1)] = math.cos(th)
        bright[space.index("gp", n)] = math.sin(th)
        p_dark += prob(dark)
        p_bright += prob(bright)

    def level_pop(label: str) -> float:
        total = 0.0
        for n in range(n_max + 1):
            e = np.zeros(space.dim, dtype=complex)
            e[space.index(label, n)] = 1.0
            total += prob(e)
        return total

    trace = float(np.real(np.trace(state_vec_or_rho))) if is_rho \
        else float(np.linalg.norm(state_vec_or_rho) ** 2)
    return {"t": t, "P_dark": p_dark, "P_bright": p_bright,
            "P_e": level_pop("e"), "P_sink": level_pop("s"), "trace": trace}


def dump_time_series(result: EvolveResult, path) -> None:
    """Write the recorded population series as CSV (needs record_series=True)."""
    cols = ("t", "P_dark", "P_bright", "P_e", "P_sink", "trace")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(cols) + "\n")
        for row in result.series:
            fh.write(",".join(f"{row[c]:.12g}" for c in cols) + "\n")


def sink_population_of(state: PureState | DensityOperator) -> float:
    space = state.space
    proj = atom_projector(space, "s").matrix
    if isinstance(state, PureState):
        return float(np.real(np.vdot(state.amplitudes, proj @ state.amplitudes)))
    return float(np.real(np.trace(proj @ state.matrix)))


# ---------------------------------------------------------------------------
# Integrators
# ---------------------------------------------------------------------------

def _segment_times(config: SystemConfig, sample_times) -> list[float]:
    T = config.schedule.T
    times = sorted(set([0.0, T] + [float(t) for t in (sample_times or [])]))
    if times[0] < 0 or times[-1] > T + 1e-12:
        raise ValueError("sample times must lie within [0, T]")
    return times


def evolve_schrodinger(psi0: PureState, config: SystemConfig,
                       sample_times=None, record_series: bool = False) -> EvolveResult:
    """Closed-system evolution under H(t) over the full sweep [0, T]."""
    if config.kappa != 0 or config.Gamma_e != 0:
        raise VacuumProbeError("evolve_schrodinger requires kappa = Gamma_e = 0")
    if psi0.space != config.space:
        raise DimensionMismatchError("state does not live on the configured space")
    psi0.require_normalized()
    mats = schrodinger_generators(config)
    prepared = kernels.prepare_mats(mats)
    coeffs = _coeff_fn(config.schedule)

    times = _segment_times(config, sample_times)
    y = psi0.amplitudes
    sampled, series = [], []
    if record_series:
        series.append(_component_populations(y, config.space, 0.0, config.schedule, False))
    for t0, t1 in zip(times[:-1], times[1:]):
        y = kernels.solve(mats, coeffs, y, t0, t1, config.rtol_closed,
                          config.atol_closed, prepared=prepared)
        if sample_times is not None and t1 in set(float(t) for t in sample_times):
            sampled.append((t1, PureState(config.space, y.copy())))
        if record_series:
            series.append(_component_populations(y, config.space, t1, config.schedule, False))
    final = PureState(config.space, y)
    drift = abs(final.norm**2 - 1.0)
    if drift > 1e-9:
        raise UnnormalizedStateError(f"norm drift {drift:.2e} exceeds 1e-9; tighten tolerances")
    return EvolveResult(state=final, sink_population=0.0, series=series, sampled_states=sampled)


def evolve_lindblad(rho0: DensityOperator, config: SystemConfig,
                    sample_times=None, record_series: bool = False) -> EvolveResult:
    """Open-system evolution with cavity loss kappa D[a] and spontaneous
    decay Gamma_e D[|s><e|]."""
    if rho0.space != config.space:
        raise DimensionMismatchError("state does not live on the configured space")
    rho0.validate()
    d = config.space.dim
    mats = lindblad_generators(config)
    prepared = kernels.prepare_mats(mats)
    coeffs = _coeff_fn(config.schedule)

    times = _segment_times(config, sample_times)
    y = rho0.matrix.reshape(-1)
    sampled, series = [], []

    def to_rho(vec):
        m = vec.reshape(d, d)
        return DensityOperator(config.space, (m + m.conj().T) / 2)

    if record_series:
        series.append(_component_populations(rho0.matrix, config.space, 0.0,
                                             config.schedule, True))
    for t0, t1 in zip(times[:-1], times[1:]):
        y = kernels.solve(mats, coeffs, y, t0, t1, config.rtol_open,
                          config.atol_open, prepared=prepared)
        if sample_times is not None and t1 in set(float(t) for t in sample_times):
            sampled.append((t1, to_rho(y.copy())))
        if record_series:
            series.append(_component_populations(y.reshape(d, d), config.space, t1,
                                                 config.schedule, True))
    final = to_rho(y)
    if abs(final.trace - 1.0) > 1e-8:
        raise UnnormalizedStateError(f"trace drift {final.trace - 1.0:.2e} exceeds 1e-8")
    return EvolveResult(state=final, sink_population=sink_population_of(final),
                        series=series, sampled_states=sampled)


# ---------------------------------------------------------------------------
# Fixed-step oracle
# ---------------------------------------------------------------------------

def _taylor_expm_apply(mats, coeffs, dt: float, y: np.ndarray) -> np.ndarray:
    """exp(dt * G) y for the frozen generator G = sum c_i M_i, via a Taylor
    series converged to machine precision (||dt G|| << 1 for oracle steps)."""
    out = y.copy()
    term = y.copy()
    ynorm = np.linalg.norm(y)
    for m in range(1, 60):
        nxt = np.zeros_like(term)
        for c, mat in zip(coeffs, mats):
            if c != 0.0:
                nxt += c * (mat @ term)
        term = (dt / m) * nxt
        out += term
        if np.linalg.norm(term) < 1e-18 * max(ynorm, 1e-30):
            return out
    raise VacuumProbeError("oracle Taylor series failed to converge; reduce dt")


def oracle_evolve(state: PureState | DensityOperator, config: SystemConfig,
                  dt_fixed: float = 1e-4):
    """First-order fixed-step reference integrator: the generator is frozen
    at the left endpoint of each step and applied by exact matrix
    exponential.  Small dimensions only; used for cross-validation."""
    if config.space.dim > ORACLE_DIM_CAP:
        raise VacuumProbeError(
            f"oracle restricted to dimension <= {ORACLE_DIM_CAP}, got {config.space.dim}"
        )
    is_rho = isinstance(state, DensityOperator)
    if is_rho:
        mats = [sparse.csr_matrix(m) for m in lindblad_generators(config)]
        y = state.matrix.reshape(-1)
    else:
        if config.kappa != 0 or config.Gamma_e != 0:
            raise VacuumProbeError("pure-state oracle requires kappa = Gamma_e = 0")
        mats = [sparse.csr_matrix(m) for m in schrodinger_generators(config)]
        y = state.amplitudes.copy()

    T = config.schedule.T
    n_steps = int(math.ceil(T / dt_fixed))
    t = 0.0
    for k in range(n_steps):
        h = min(dt_fixed, T - t)
        gA, gB = pulses.envelopes(t, config.schedule)
        y = _taylor_expm_apply(mats, (1.0, gA, gB), h, y)
        t += h
    if is_rho:
        d = config.space.dim
        m = y.reshape(d, d)
        return DensityOperator(config.space, (m + m.conj().T) / 2)
    return PureState(config.space, y)
