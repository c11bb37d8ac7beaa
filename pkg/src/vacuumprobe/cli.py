"""Command-line front door: config parsing, experiment orchestration, and
deterministic tabular outputs.

Experiments
-----------
measure / project-nonvacuum / scissors / number-resolve / joint-vacuum
    One protocol run at a fixed sweep duration; JSON result with the
    probabilities and (where applicable) serialized conditional states.
sweep-fig3
    Grid over (alpha, kappa) with a per-point optimal-T search; CSV surface.
wigner-fig4
    Single-point replacement run at the optimal T with Wigner diagnostics of
    the vacuum-stripped output; summary JSON plus Wigner CSV.
adiabatic-study
    Dark-frame error analysis over (n, T) lists; CSV report.

All rates are in units of g and times in 1/g; every output file carries that
convention in its header comment.  Outputs are byte-identical across reruns
of the same config (floats fixed at 12 significant digits, deterministic row
order regardless of worker count).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np
from scipy.optimize import minimize_scalar

from . import adiabatic, protocol, pulses, serialize, wigner
from .dynamics import SystemConfig
from .errors import ConfigError, VacuumProbeError
from .fock import (FockTruncation, PureState, coherent_state, fidelity,
                   field_space, suggest_truncation, tensor, vacuum_projectors)

UNITS_COMMENT = "units: rates in g, times in 1/g"
EXPERIMENTS = ("measure", "project-nonvacuum", "scissors", "number-resolve",
               "joint-vacuum", "sweep-fig3", "wigner-fig4", "adiabatic-study")

FIG3_ALPHAS = (0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0)
FIG3_KAPPAS = (0.0, 0.001, 0.002, 0.005, 0.01, 0.02)


@dataclass(frozen=True)
class RunConfig:
    """One experiment run.  Unknown keys in the JSON document are rejected."""

    experiment: str
    alpha: float = 1.0
    n_max: int = 12
    Delta: float = 0.0
    kappa: float = 0.005
    Gamma_e: float = 0.01
    mode: str = protocol.SIMULATED
    T: float | None = None
    T_min: float = 5.0
    T_max: float = 500.0
    T_grid: int = 12
    gA_max: float = 2.0
    gB_max: float = 1.0
    schedule_family: str = "cos2"
    alpha_list: tuple[float, ...] = FIG3_ALPHAS
    kappa_list: tuple[float, ...] = FIG3_KAPPAS
    n_cut: int = 1
    n_list: tuple[int, ...] = (1, 2, 3)
    T_list: tuple[float, ...] = (20.0, 40.0, 80.0, 160.0, 320.0, 640.0)
    joint_alphas: tuple[float, ...] = (1.0, 1.0)
    grid_extent: float = 4.0
    grid_points: int = 161
    seed: int = 0  # reserved; every current computation is deterministic
    workers: int = 1

    def __post_init__(self):
        for name in ("alpha_list", "kappa_list", "n_list", "T_list", "joint_alphas"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; "
                              f"choose one of {EXPERIMENTS}")
        if self.mode not in (protocol.IDEAL, protocol.SIMULATED):
            raise ConfigError(f"mode must be 'ideal' or 'simulated', got {self.mode!r}")
        if self.T_min <= 0 or self.T_max <= self.T_min:
            raise ConfigError("need 0 < T_min < T_max")
        if self.T is not None and self.T <= 0:
            raise ConfigError("T must be positive when given")
        if self.kappa < 0 or self.Gamma_e < 0:
            raise ConfigError("loss rates must be non-negative")
        if self.T_grid < 3:
            raise ConfigError("T_grid must be at least 3")

    def to_dict(self) -> dict:
        d = asdict(self)
        for name in ("alpha_list", "kappa_list", "n_list", "T_list", "joint_alphas"):
            d[name] = list(d[name])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        if "experiment" not in d:
            raise ConfigError("config must name an experiment")
        return cls(**d)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config document must be a JSON object")
        return cls.from_dict(doc)


# ---------------------------------------------------------------------------
# Shared pieces
# ---------------------------------------------------------------------------

def _fmt(v: float) -> str:
    return f"{float(v):.12g}"


def _round12(v: float) -> float:
    """Round to 12 significant digits so JSON output is formatting-stable."""
    return float(_fmt(v))


def _effective_n_max(cfg: RunConfig, alpha: float) -> int:
    return max(cfg.n_max, suggest_truncation(alpha).n_max)


def _system_config(cfg: RunConfig, T: float, kappa: float | None = None,
                   n_max: int | None = None) -> SystemConfig:
    sched = pulses.PulseSchedule(T=float(T), gA_max=cfg.gA_max, gB_max=cfg.gB_max,
                                 direction=pulses.MEASUREMENT,
                                 family=cfg.schedule_family)
    return SystemConfig(schedule=sched,
                        trunc=FockTruncation(n_max if n_max is not None else cfg.n_max),
                        Delta=cfg.Delta,
                        kappa=cfg.kappa if kappa is None else kappa,
                        Gamma_e=cfg.Gamma_e)


def stripped_target(alpha: float, trunc: FockTruncation) -> PureState:
    """Normalized (I - |0><0|) |alpha>: the ideal vacuum-stripped state."""
    psi = coherent_state(alpha, trunc)
    _, pnot = vacuum_projectors(trunc)
    return PureState(psi.space, pnot.matrix @ psi.amplitudes).normalized()


def replacement_run(cfg: RunConfig, alpha: float, kappa: float,
                    T: float) -> tuple[protocol.ProjectionRecord, float]:
    """One simulated measure-and-replace run; returns the record (atom
    disposed after the re-addition, i.e. conditioned on the g detection
    only) and the output fidelity against the ideal vacuum-stripped state."""
    n_max = _effective_n_max(cfg, alpha)
    sys_cfg = _system_config(cfg, T, kappa=kappa, n_max=n_max)
    field = coherent_state(alpha, sys_cfg.trunc)
    rec = protocol.project_nonvacuum(field, sys_cfg, protocol.SIMULATED,
                                     dispose_atom=True)
    if rec.field is None:
        return rec, 0.0
    target = stripped_target(alpha, sys_cfg.trunc)
    return rec, fidelity(target, rec.field)


def optimal_T_search(alpha: float, kappa: float,
                     cfg: RunConfig) -> tuple[float, float]:
    """Maximize the replacement fidelity over T: coarse log-spaced grid, then
    golden-section refinement on the best interior bracket.  A maximum at a
    range edge is returned as-is with a warning (the objective is monotone
    there, e.g. lossless runs improve all the way up to T_max)."""
    cache: dict[float, float] = {}

    def f(T: float) -> float:
        T = float(T)
        if T not in cache:
            cache[T] = replacement_run(cfg, alpha, kappa, T)[1]
        return cache[T]

    Ts = np.geomspace(cfg.T_min, cfg.T_max, cfg.T_grid)
    vals = np.array([f(T) for T in Ts])
    i = int(np.argmax(vals))
    if i == 0 or i == len(Ts) - 1:
        warnings.warn("fidelity maximum sits at the edge of the T search range; "
                      "the optimum may lie outside [T_min, T_max]", stacklevel=2)
        return float(Ts[i]), float(vals[i])
    res = minimize_scalar(lambda T: -f(T), bracket=(Ts[i - 1], Ts[i], Ts[i + 1]),
                          method="golden", options={"xtol": 1e-3})
    return float(res.x), float(-res.fun)


def _write_csv(path: Path, header: str, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# {UNITS_COMMENT}\n")
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------

def _fig3_point(cfg_doc: dict, alpha: float, kappa: float) -> tuple:
    """One Fig.-3 grid point (top-level so worker processes can run it)."""
    cfg = RunConfig.from_dict(cfg_doc)
    T_opt, fid = optimal_T_search(alpha, kappa, cfg)
    rec, _ = replacement_run(cfg, alpha, kappa, T_opt)
    return (alpha, kappa, T_opt, fid, rec.p_success,
            rec.measurement.p_vacuum, rec.measurement.p_sink)


def run_sweep_fig3(cfg: RunConfig, out_dir: Path) -> Path:
    points = [(a, k) for a in cfg.alpha_list for k in cfg.kappa_list]
    doc = cfg.to_dict()
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_fig3_point, [doc] * len(points),
                                 [a for a, _ in points], [k for _, k in points]))
    else:
        rows = [_fig3_point(doc, a, k) for a, k in points]
    path = out_dir / "fig3.csv"
    _write_csv(path, "alpha,kappa,T_opt,fidelity,p_success,p_vacuum,p_sink", rows)
    return path


def run_wigner_fig4(cfg: RunConfig, out_dir: Path) -> dict:
    T_opt, fid = optimal_T_search(cfg.alpha, cfg.kappa, cfg)
    rec, _ = replacement_run(cfg, cfg.alpha, cfg.kappa, T_opt)
    n_max = _effective_n_max(cfg, cfg.alpha)
    field_in = coherent_state(cfg.alpha, FockTruncation(n_max))
    # The published probability budget books every vacuum detection in excess
    # of the input state's true vacuum weight as part of the photon-loss
    # error (a lost photon is read out as "vacuum").  p_vacuum below is that
    # true vacuum weight; the raw branch probability is reported alongside.
    p_vacuum = float(abs(field_in.amplitudes[0]) ** 2)
    p_success = rec.p_success
    loss_error = 1.0 - (p_success + p_vacuum)
    ext, pts = cfg.grid_extent, cfg.grid_points
    axis = np.linspace(-ext, ext, pts)
    grid = wigner.wigner(rec.field, axis, axis)
    wigner.write_csv(grid, out_dir / "fig4_wigner.csv", header_comment=UNITS_COMMENT)
    summary = {
        "experiment": cfg.experiment,
        "alpha": cfg.alpha,
        "kappa": cfg.kappa,
        "Gamma_e": cfg.Gamma_e,
        "Delta": cfg.Delta,
        "T_opt": _round12(T_opt),
        "p_success": _round12(p_success),
        "p_vacuum": _round12(p_vacuum),
        "p_vacuum_detected": _round12(rec.measurement.p_vacuum),
        "p_addition": _round12(rec.p_addition),
        "p_sink": _round12(rec.measurement.p_sink),
        "loss_error": _round12(loss_error),
        "fidelity": _round12(fid),
        "min_W": _round12(float(grid.W.min())),
        "negativity_volume": _round12(wigner.negativity_volume(grid)),
        "conventions": {
            "p_vacuum": "vacuum weight of the input state; excess vacuum "
                        "detections caused by photon loss count toward loss_error",
            "p_vacuum_detected": "raw probability of the vacuum readout branch",
            "fidelity": "output conditioned on the g detection only (atom "
                        "disposed after the re-addition sweep) vs the ideal "
                        "vacuum-stripped state",
        },
    }
    serialize.dump_json(summary, out_dir / "fig4_summary.json")
    return summary


def run_adiabatic_study(cfg: RunConfig, out_dir: Path) -> Path:
    rows = []
    for n in cfg.n_list:
        base = _system_config(cfg, cfg.T_list[0], kappa=0.0)
        fit = adiabatic.diabatic_scaling_fit(n, cfg.T_list, base)
        for T in cfg.T_list:
            rep = adiabatic.adiabatic_report(n, _system_config(cfg, T, kappa=0.0))
            rows.append((n, T, rep.nu0, rep.p_diabatic, rep.phi_pred, rep.phi_num,
                         abs(rep.kappa_b_end - rep.kappa_b_pred),
                         abs(rep.kappa_e_end - rep.kappa_e_pred), fit.slope))
    path = out_dir / "adiabatic.csv"
    _write_csv(path, "n,T,nu0,p_diabatic,phi_pred,phi_num,"
                     "kappa_b_residual,kappa_e_residual,slope", rows)
    return path


def _single_shot(cfg: RunConfig, out_dir: Path) -> dict:
    T = cfg.T if cfg.T is not None else 100.0
    if cfg.experiment == "joint-vacuum":
        truncs = [FockTruncation(_effective_n_max(cfg, a)) for a in cfg.joint_alphas]
        parts = [coherent_state(a, tr) for a, tr in zip(cfg.joint_alphas, truncs)]
        fields = tensor(*parts)
        configs = [_system_config(cfg, T, n_max=tr.n_max) for tr in truncs]
        rec = protocol.joint_vacuum_measure(fields, configs, cfg.mode)
    else:
        n_max = _effective_n_max(cfg, cfg.alpha)
        sys_cfg = _system_config(cfg, T, n_max=n_max)
        field = coherent_state(cfg.alpha, sys_cfg.trunc)
        if cfg.experiment == "measure":
            rec = protocol.measure_vacuum(field, sys_cfg, cfg.mode)
        elif cfg.experiment == "project-nonvacuum":
            rec = protocol.project_nonvacuum(field, sys_cfg, cfg.mode)
        elif cfg.experiment == "scissors":
            rec = protocol.scissors_truncate(field, cfg.n_cut, sys_cfg, cfg.mode)
        else:  # number-resolve
            dist = protocol.number_resolving_measure(field, sys_cfg, cfg.mode)
            result = {"experiment": cfg.experiment, "T": T, "mode": cfg.mode,
                      "alpha": cfg.alpha,
                      "count_distribution": [_round12(p) for p in dist]}
            serialize.dump_json(result, out_dir / "result.json")
            return result
    result = {"experiment": cfg.experiment, "T": T, "mode": cfg.mode,
              **serialize.record_to_dict(rec)}
    serialize.dump_json(result, out_dir / "result.json")
    return result


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vacuum-probe",
        description="Cavity vacuum-probe simulator (units: rates in g, times in 1/g)")
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", required=True, help="JSON run-config path")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--workers", type=int, default=None,
                        help="override the worker count from the config")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = RunConfig.from_file(args.config)
        if cfg.experiment != args.experiment:
            raise ConfigError(f"config names experiment {cfg.experiment!r} but the "
                              f"command line asked for {args.experiment!r}")
        if args.workers is not None:
            cfg = replace(cfg, workers=args.workers)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        if cfg.experiment == "sweep-fig3":
            run_sweep_fig3(cfg, out_dir)
        elif cfg.experiment == "wigner-fig4":
            summary = run_wigner_fig4(cfg, out_dir)
            print(json.dumps({k: summary[k] for k in
                              ("T_opt", "p_success", "p_vacuum", "loss_error",
                               "fidelity")}, sort_keys=True))
        elif cfg.experiment == "adiabatic-study":
            run_adiabatic_study(cfg, out_dir)
        else:
            _single_shot(cfg, out_dir)
    except VacuumProbeError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
