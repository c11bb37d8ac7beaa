"""Protocol orchestration: vacuum measurement, photon replacement, bare
raising/lowering, quantum scissors, photon counting, and the multimode
joint-vacuum projection.

Every operation runs in one of two modes:

* ``ideal``      - the algebraic map (perfect adiabaticity, no loss): the
  atom branch probabilities and conditional field states follow directly
  from the projectors and the bare shift operators.
* ``simulated``  - the atom is attached, the sweep Hamiltonian is integrated
  (Schroedinger when lossless and pure, Lindblad otherwise), and the atom is
  measured projectively in {g, g', other}; 'other' (excited + sink) counts
  as protocol loss.

Atom readout is ideal and instantaneous; no loss is modeled between protocol
stages (no idle interval by default).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import kernels, pulses
from .dynamics import SystemConfig, evolve_lindblad, evolve_schrodinger
from .errors import DimensionMismatchError, TruncationError, VacuumProbeError
from .fock import (
    AtomLevelSet,
    DensityOperator,
    FockTruncation,
    HilbertSpace,
    PureState,
    annihilation,
    atom_projector,
    atom_transition,
    bare_lower,
    bare_raise,
    basis_state,
    embed,
    field_space,
    tensor,
    vacuum_projectors,
)
from .pulses import MEASUREMENT, PulseSchedule

IDEAL = "ideal"
SIMULATED = "simulated"
BRANCH_EPS = 1e-12
HEADROOM_TOL = 1e-8


@dataclass(frozen=True)
class MeasurementRecord:
    """Outcome probabilities and conditional field states of one vacuum probe."""

    p_vacuum: float
    p_not_vacuum: float
    p_sink: float
    conditional_field_vacuum: DensityOperator | None
    conditional_field_not_vacuum: DensityOperator | None
    atom_disposed: bool = True


@dataclass(frozen=True)
class AdditionResult:
    field: DensityOperator | None
    p_success: float


@dataclass(frozen=True)
class ProjectionRecord:
    p_success: float
    field: DensityOperator | None
    measurement: MeasurementRecord
    p_addition: float


@dataclass(frozen=True)
class ScissorsRecord:
    n_cut: int
    p_success: float
    output_field: DensityOperator | None
    rounds: tuple[MeasurementRecord, ...] = ()


@dataclass(frozen=True)
class JointVacuumRecord:
    p_vacuum: float
    p_not_vacuum: float
    p_sink: float
    conditional_field_vacuum: DensityOperator | None
    conditional_field_not_vacuum: DensityOperator | None
    restore_residual: float = 0.0
    atom_disposed: bool = True


def _check_mode(mode: str):
    if mode not in (IDEAL, SIMULATED):
        raise ValueError(f"mode must be 'ideal' or 'simulated', got {mode!r}")


def _as_field_density(field) -> DensityOperator:
    if isinstance(field, PureState):
        return field.to_density()
    return field


def _field_trunc(field) -> FockTruncation:
    space = field.space
    if space.atom is not None or len(space.modes) != 1:
        raise DimensionMismatchError("expected a single-mode field-only state")
    return space.modes[0]


# ---------------------------------------------------------------------------
# Single-mode vacuum measurement
# ---------------------------------------------------------------------------

def ideal_premeasurement(field: PureState) -> PureState:
    """Entangled atom-field state after a perfect reverse sweep:
    |g'> a_0 |0>  -  |g> sum_{n>=1} a_n |n-1>."""
    trunc = _field_trunc(field)
    space = HilbertSpace(AtomLevelSet.lambda_system(), (trunc,))
    out = np.zeros(space.dim, dtype=complex)
    amps = field.amplitudes
    out[space.index("gp", 0)] = amps[0]
    for n in range(1, trunc.dim):
        out[space.index("g", n - 1)] = -amps[n]
    return PureState(space, out)


def _atom_branches_pure(joint: PureState) -> dict[str, np.ndarray]:
    space = joint.space
    atom_dim = space.atom.dim
    field_dim = space.dim // atom_dim
    resh = joint.amplitudes.reshape(atom_dim, field_dim)
    return {label: resh[i] for i, label in enumerate(space.atom.labels)}


def _atom_blocks_rho(joint: DensityOperator) -> dict[str, np.ndarray]:
    space = joint.space
    atom_dim = space.atom.dim
    field_dim = space.dim // atom_dim
    resh = joint.matrix.reshape(atom_dim, field_dim, atom_dim, field_dim)
    return {label: resh[i, :, i, :] for i, label in enumerate(space.atom.labels)}


def _branch_record(joint, field_sub: HilbertSpace, vacuum_label: str,
                   notvac_label: str) -> MeasurementRecord:
    """Project the atom of the evolved joint state and package the outcome."""
    if isinstance(joint, PureState):
        branches = _atom_branches_pure(joint)
        p = {k: float(np.linalg.norm(v) ** 2) for k, v in branches.items()}

        def cond(label):
            if p[label] < BRANCH_EPS:
                return None
            v = branches[label] / math.sqrt(p[label])
            return PureState(field_sub, v).to_density()
    else:
        blocks = _atom_blocks_rho(joint)
        p = {k: float(np.real(np.trace(v))) for k, v in blocks.items()}

        def cond(label):
            if p[label] < BRANCH_EPS:
                return None
            m = blocks[label] / p[label]
            return DensityOperator(field_sub, (m + m.conj().T) / 2)

    p_vac = p[vacuum_label]
    p_not = p[notvac_label]
    return MeasurementRecord(
        p_vacuum=p_vac,
        p_not_vacuum=p_not,
        p_sink=max(1.0 - p_vac - p_not, 0.0),
        conditional_field_vacuum=cond(vacuum_label),
        conditional_field_not_vacuum=cond(notvac_label),
    )


def _run_sweep(field, config: SystemConfig, atom_label: str):
    """Attach the atom in atom_label and integrate one sweep; returns the
    joint final state (pure when possible)."""
    trunc = _field_trunc(field)
    if trunc != config.trunc:
        raise DimensionMismatchError("field truncation differs from config.trunc")
    space = config.space
    atom0 = basis_state(HilbertSpace(space.atom, ()), atom_label)
    lossless = config.kappa == 0 and config.Gamma_e == 0
    if isinstance(field, PureState) and lossless:
        joint0 = tensor(atom0, field)
        return evolve_schrodinger(joint0, config).state
    rho_f = _as_field_density(field)
    joint0 = DensityOperator(space, np.kron(atom0.to_density().matrix, rho_f.matrix))
    return evolve_lindblad(joint0, config).state


def measure_vacuum(field, config: SystemConfig, mode: str = IDEAL) -> MeasurementRecord:
    """Non-destructive vacuum probe.  The not-vacuum branch has all field
    amplitudes shifted down by one (photon subtracted, not yet replaced)."""
    _check_mode(mode)
    trunc = _field_trunc(field)
    fs = field_space(trunc)
    if mode == IDEAL:
        rho = _as_field_density(field).validate()
        p_vac = float(np.real(rho.matrix[0, 0]))
        em = bare_lower(trunc).matrix
        shifted = em @ rho.matrix @ em.conj().T
        p_not = float(np.real(np.trace(shifted)))
        cond_not = None
        if p_not >= BRANCH_EPS:
            cond_not = DensityOperator(fs, shifted / p_not)
        cond_vac = None
        if p_vac >= BRANCH_EPS:
            vac = np.zeros((trunc.dim, trunc.dim), dtype=complex)
            vac[0, 0] = 1.0
            cond_vac = DensityOperator(fs, vac)
        return MeasurementRecord(p_vacuum=p_vac, p_not_vacuum=p_not, p_sink=0.0,
                                 conditional_field_vacuum=cond_vac,
                                 conditional_field_not_vacuum=cond_not)
    sched = config.schedule
    if sched.direction != MEASUREMENT:
        config = config.with_schedule(sched.reversed())
    joint = _run_sweep(field, config, "gp")
    return _branch_record(joint, fs, vacuum_label="gp", notvac_label="g")


def add_photon(field, config: SystemConfig, mode: str = IDEAL,
               dispose_atom: bool = False) -> AdditionResult:
    """Deterministic photon addition (forward sweep); the bare raise E+.

    In simulated mode the atom is read out after the sweep and p_success is
    the probability of finding it in |g'>.  With ``dispose_atom`` the atom is
    discarded unread instead (traced out): the returned field then carries
    the re-addition failures, which is the conditioning used for the
    published fidelity figures (conditioned on the g detection only).
    """
    _check_mode(mode)
    trunc = _field_trunc(field)
    rho = _as_field_density(field)
    top = float(np.real(rho.matrix[-1, -1]))
    if top > HEADROOM_TOL:
        raise TruncationError(
            f"population {top:.3e} at the truncation edge; no headroom to add a photon"
        )
    if mode == IDEAL:
        ep = bare_raise(trunc).matrix
        if isinstance(field, PureState):
            out = PureState(field.space, ep @ field.amplitudes).normalized().to_density()
        else:
            m = ep @ rho.matrix @ ep.conj().T
            out = DensityOperator(field.space, m / np.real(np.trace(m)))
        return AdditionResult(field=out, p_success=1.0)
    sched = config.schedule
    if sched.direction == MEASUREMENT:
        config = config.with_schedule(sched.reversed())
    joint = _run_sweep(field, config, "g")
    rec = _branch_record(joint, field_space(trunc), vacuum_label="g", notvac_label="gp")
    if dispose_atom:
        if isinstance(joint, PureState):
            red = joint.reduced_density(0)
        else:
            red = joint.reduced(0)
        return AdditionResult(field=red.normalized(), p_success=rec.p_not_vacuum)
    # forward sweep succeeds when the atom arrives in g'
    return AdditionResult(field=rec.conditional_field_not_vacuum, p_success=rec.p_not_vacuum)


def project_nonvacuum(field, config: SystemConfig, mode: str = IDEAL,
                      dispose_atom: bool = False) -> ProjectionRecord:
    """Measure, then replace the subtracted photon on the not-vacuum branch,
    realizing the ideal projection I - |0><0| conditionally.

    ``dispose_atom`` is forwarded to ``add_photon``: the overall success is
    then the g-detection probability alone and the output field retains the
    unverified re-addition (the published-figure convention)."""
    _check_mode(mode)
    rec = measure_vacuum(field, config, mode)
    if rec.conditional_field_not_vacuum is None:
        return ProjectionRecord(p_success=0.0, field=None, measurement=rec, p_addition=0.0)
    add = add_photon(rec.conditional_field_not_vacuum, config, mode,
                     dispose_atom=dispose_atom)
    p_add = add.p_success
    p_success = rec.p_not_vacuum if dispose_atom else rec.p_not_vacuum * p_add
    return ProjectionRecord(p_success=p_success,
                            field=add.field, measurement=rec, p_addition=p_add)


def bare_lower_protocol(field, config: SystemConfig,
                        mode: str = IDEAL) -> tuple[float, DensityOperator | None]:
    """Measurement without replacement: conditional realization of E-."""
    rec = measure_vacuum(field, config, mode)
    return rec.p_not_vacuum, rec.conditional_field_not_vacuum


def scissors_truncate(field, n_cut: int, config: SystemConfig,
                      mode: str = IDEAL) -> ScissorsRecord:
    """Reverse quantum scissors: remove the lowest n_cut Fock amplitudes
    (conditioned on never seeing vacuum), then re-add n_cut photons."""
    _check_mode(mode)
    if n_cut < 1:
        raise ValueError("n_cut >= 1 required")
    current = field
    p_success = 1.0
    rounds = []
    for _ in range(n_cut):
        rec = measure_vacuum(current, config, mode)
        rounds.append(rec)
        p_success *= rec.p_not_vacuum
        if rec.conditional_field_not_vacuum is None:
            return ScissorsRecord(n_cut=n_cut, p_success=0.0, output_field=None,
                                  rounds=tuple(rounds))
        current = rec.conditional_field_not_vacuum
    for _ in range(n_cut):
        add = add_photon(current, config, mode)
        p_success *= add.p_success
        if add.field is None:
            return ScissorsRecord(n_cut=n_cut, p_success=0.0, output_field=None,
                                  rounds=tuple(rounds))
        current = add.field
    return ScissorsRecord(n_cut=n_cut, p_success=p_success, output_field=current,
                          rounds=tuple(rounds))


def number_resolving_measure(field, config: SystemConfig, mode: str = IDEAL) -> np.ndarray:
    """Repeat the probe without replacement until the vacuum outcome; the
    number of not-vacuum rounds is the photon count.  Returns the count
    distribution (index = count); in lossy simulated runs the missing
    probability went to the sink."""
    _check_mode(mode)
    trunc = _field_trunc(field)
    probs = np.zeros(trunc.dim, dtype=float)
    current = field
    prefix = 1.0
    for k in range(trunc.dim):
        rec = measure_vacuum(current, config, mode)
        probs[k] = prefix * rec.p_vacuum
        prefix *= rec.p_not_vacuum
        if prefix < BRANCH_EPS or rec.conditional_field_not_vacuum is None:
            return probs
        current = rec.conditional_field_not_vacuum
    raise VacuumProbeError(
        f"round cap {trunc.dim} exceeded with residual probability {prefix:.3e}"
    )


def rotate_ground(state, angle: float, phase: float = 0.0):
    """Unitary rotation in span{|g>, |g'>} (identity elsewhere), applied to a
    joint atom-field state before the atomic population measurement."""
    space = state.space
    if space.atom is None:
        raise DimensionMismatchError("rotate_ground needs an atom factor")
    d = space.atom.dim
    u = np.eye(d, dtype=complex)
    i, j = space.atom.index("g"), space.atom.index("gp")
    half = angle / 2
    u[i, i] = math.cos(half)
    u[j, j] = math.cos(half)
    u[i, j] = -np.exp(-1j * phase) * math.sin(half)
    u[j, i] = np.exp(1j * phase) * math.sin(half)
    from .fock import LinearOperator  # local import to avoid cycle noise
    u_full = embed(LinearOperator(HilbertSpace(space.atom, ()), u), "atom", space)
    if isinstance(state, PureState):
        return u_full @ state
    return DensityOperator(space, u_full.matrix @ state.matrix @ u_full.matrix.conj().T)


# ---------------------------------------------------------------------------
# Multimode joint-vacuum projection
# ---------------------------------------------------------------------------

def _multimode_generators(space: HilbertSpace, sweep_mode: int, Delta: float):
    """Generator triple for the pair sweep of one mode: laser leg e<->g_{m+1}
    plays gamma_A, cavity leg e<->g0 (x) a_m plays gamma_B."""
    h_delta = atom_projector(space, "e").matrix
    laser_ground = f"g{sweep_mode + 1}"
    h_laser = (atom_transition(space, "e", laser_ground)
               + atom_transition(space, laser_ground, "e")).matrix
    a_emb = embed(annihilation(space.modes[sweep_mode]), sweep_mode, space).matrix
    eg0 = atom_transition(space, "e", "g0").matrix
    h_cav = eg0 @ a_emb + (eg0 @ a_emb).conj().T
    return [(-1j * Delta) * h_delta, -1j * h_laser, -1j * h_cav]


def _pure_sweep(amps: np.ndarray, space: HilbertSpace, sweep_mode: int,
                config: SystemConfig) -> np.ndarray:
    mats = _multimode_generators(space, sweep_mode, config.Delta)
    prepared = kernels.prepare_mats(mats)
    sched = config.schedule

    def coeffs(t):
        gA, gB = pulses.envelopes(t, sched)
        return (1.0, gA, gB)

    return kernels.solve(mats, coeffs, amps, 0.0, sched.T,
                         config.rtol_closed, config.atol_closed, prepared=prepared)


def joint_vacuum_measure(fields, configs, mode: str = IDEAL,
                         restore: bool = True) -> JointVacuumRecord:
    """Project n modes onto their joint vacuum |00...0> or its complement.

    ``fields`` is a field-only multimode state; ``configs`` gives one sweep
    configuration per mode (schedules applied pairwise in mode order).  The
    complement branch is optionally disentangled by running the sweeps
    reversed and in reverse order, which re-adds the subtracted photon.
    Simulated mode supports lossless pure inputs (Schroedinger evolution).
    """
    _check_mode(mode)
    f_space = fields.space
    if f_space.atom is not None or not f_space.modes:
        raise DimensionMismatchError("expected a field-only multimode state")
    n_modes = len(f_space.modes)
    if n_modes > 3:
        raise DimensionMismatchError("joint vacuum projection capped at 3 modes")
    if len(configs) != n_modes:
        raise ValueError(f"need {n_modes} sweep configs, got {len(configs)}")

    vac_index = f_space.index(None, tuple([0] * n_modes))
    if mode == IDEAL:
        rho = _as_field_density(fields).validate()
        p_vac = float(np.real(rho.matrix[vac_index, vac_index]))
        p_not = 1.0 - p_vac
        comp = rho.matrix.copy()
        comp[vac_index, :] = 0.0
        comp[:, vac_index] = 0.0
        cond_not = None
        if p_not >= BRANCH_EPS:
            cond_not = DensityOperator(f_space, comp / np.real(np.trace(comp)))
        vac = np.zeros_like(rho.matrix)
        vac[vac_index, vac_index] = 1.0
        return JointVacuumRecord(p_vacuum=p_vac, p_not_vacuum=p_not, p_sink=0.0,
                                 conditional_field_vacuum=DensityOperator(f_space, vac),
                                 conditional_field_not_vacuum=cond_not)

    if not isinstance(fields, PureState):
        raise VacuumProbeError("simulated joint-vacuum probing needs a pure input state")
    for cfg in configs:
        if cfg.kappa != 0 or cfg.Gamma_e != 0:
            raise VacuumProbeError("simulated joint-vacuum probing is lossless only")

    atom = AtomLevelSet.npod(n_modes)
    space = HilbertSpace(atom, f_space.modes)
    atom0 = basis_state(HilbertSpace(atom, ()), "g0")
    joint = tensor(atom0, fields)
    amps = joint.amplitudes
    for m, cfg in enumerate(configs):
        sched = cfg.schedule
        if sched.direction != MEASUREMENT:
            cfg = cfg.with_schedule(sched.reversed())
        amps = _pure_sweep(amps, space, m, cfg)

    field_dim = f_space.dim
    resh = amps.reshape(atom.dim, field_dim)
    g0 = atom.index("g0")
    p_vac = float(np.linalg.norm(resh[g0]) ** 2)
    p_other = sum(float(np.linalg.norm(resh[atom.index(lbl)]) ** 2)
                  for lbl in ("e", "s"))
    p_not = max(1.0 - p_vac - p_other, 0.0)

    cond_vac = None
    if p_vac >= BRANCH_EPS:
        cond_vac = PureState(f_space, resh[g0] / math.sqrt(p_vac)).to_density()

    cond_not = None
    residual = 0.0
    if p_not >= BRANCH_EPS:
        comp = amps.copy().reshape(atom.dim, field_dim)
        comp[g0] = 0.0
        comp = comp.reshape(-1)
        comp = comp / np.linalg.norm(comp)
        if restore:
            for m in reversed(range(n_modes)):
                cfg = configs[m]
                sched = cfg.schedule
                if sched.direction == MEASUREMENT:
                    cfg = cfg.with_schedule(sched.reversed())
                comp = _pure_sweep(comp, space, m, cfg)
            resh_c = comp.reshape(atom.dim, field_dim)
            p_g0 = float(np.linalg.norm(resh_c[g0]) ** 2)
            residual = 1.0 - p_g0
            cond_not = PureState(f_space, resh_c[g0] / math.sqrt(p_g0)).to_density()
        else:
            # without restore the atom stays entangled; report the reduced field state
            resh_c = comp.reshape(atom.dim, field_dim)
            red = resh_c.T @ resh_c.conj()
            cond_not = DensityOperator(f_space, red)
    return JointVacuumRecord(p_vacuum=p_vac, p_not_vacuum=p_not, p_sink=p_other,
                             conditional_field_vacuum=cond_vac,
                             conditional_field_not_vacuum=cond_not,
                             restore_residual=residual)
