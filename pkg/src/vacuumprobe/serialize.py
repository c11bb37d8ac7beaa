"""JSON serialization of states, operators, and protocol records.

States and operators are stored with their basis labels plus a flat
interleaved [re, im, re, im, ...] array, so fixtures are readable, diffable,
and round-trip exactly.  Protocol records store probabilities alongside the
state payloads of their conditional fields.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .errors import ConfigError
from .fock import (AtomLevelSet, DensityOperator, FockTruncation, HilbertSpace,
                   LinearOperator, PureState)
from . import protocol


def _space_to_dict(space: HilbertSpace) -> dict:
    return {
        "atom_labels": list(space.atom.labels) if space.atom is not None else None,
        "mode_n_max": [m.n_max for m in space.modes],
    }


def _space_from_dict(d: dict) -> HilbertSpace:
    atom = AtomLevelSet(tuple(d["atom_labels"])) if d["atom_labels"] is not None else None
    return HilbertSpace(atom, tuple(FockTruncation(n) for n in d["mode_n_max"]))


def _interleave(arr: np.ndarray) -> list[float]:
    flat = np.asarray(arr, dtype=complex).ravel()
    out = np.empty(2 * flat.size)
    out[0::2] = flat.real
    out[1::2] = flat.imag
    return out.tolist()


def _deinterleave(data: list[float], shape: tuple[int, ...]) -> np.ndarray:
    raw = np.asarray(data, dtype=float)
    return (raw[0::2] + 1j * raw[1::2]).reshape(shape)


def state_to_dict(obj: PureState | DensityOperator | LinearOperator) -> dict:
    kinds = {PureState: "pure", DensityOperator: "density", LinearOperator: "operator"}
    kind = kinds.get(type(obj))
    if kind is None:
        raise ConfigError(f"cannot serialize {type(obj).__name__}")
    data = obj.amplitudes if kind == "pure" else obj.matrix
    return {
        "kind": kind,
        "space": _space_to_dict(obj.space),
        "basis_labels": obj.space.basis_labels(),
        "data": _interleave(data),
    }


def state_from_dict(d: dict) -> PureState | DensityOperator | LinearOperator:
    space = _space_from_dict(d["space"])
    if d["kind"] == "pure":
        return PureState(space, _deinterleave(d["data"], (space.dim,)))
    cls = DensityOperator if d["kind"] == "density" else LinearOperator
    return cls(space, _deinterleave(d["data"], (space.dim, space.dim)))


def _maybe_state(obj) -> Any:
    return None if obj is None else state_to_dict(obj)


def record_to_dict(rec) -> dict:
    """Serialize any protocol result dataclass to a JSON-ready dict."""
    if isinstance(rec, protocol.MeasurementRecord):
        return {
            "record": "measurement",
            "p_vacuum": rec.p_vacuum,
            "p_not_vacuum": rec.p_not_vacuum,
            "p_sink": rec.p_sink,
            "conditional_field_vacuum": _maybe_state(rec.conditional_field_vacuum),
            "conditional_field_not_vacuum": _maybe_state(rec.conditional_field_not_vacuum),
        }
    if isinstance(rec, protocol.AdditionResult):
        return {"record": "addition", "p_success": rec.p_success,
                "field": _maybe_state(rec.field)}
    if isinstance(rec, protocol.ProjectionRecord):
        return {"record": "projection", "p_success": rec.p_success,
                "p_addition": rec.p_addition, "field": _maybe_state(rec.field),
                "measurement": record_to_dict(rec.measurement)}
    if isinstance(rec, protocol.ScissorsRecord):
        return {"record": "scissors", "n_cut": rec.n_cut, "p_success": rec.p_success,
                "output_field": _maybe_state(rec.output_field),
                "rounds": [record_to_dict(r) for r in rec.rounds]}
    if isinstance(rec, protocol.JointVacuumRecord):
        return {"record": "joint_vacuum", "p_vacuum": rec.p_vacuum,
                "p_not_vacuum": rec.p_not_vacuum, "p_sink": rec.p_sink,
                "restore_residual": rec.restore_residual,
                "conditional_field_vacuum": _maybe_state(rec.conditional_field_vacuum),
                "conditional_field_not_vacuum": _maybe_state(rec.conditional_field_not_vacuum)}
    raise ConfigError(f"cannot serialize record {type(rec).__name__}")


def dump_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
