"""
JSON interchange for matrices, maps, block encodings and phase sequences.

Complex matrices are stored as ``{"rows", "cols", "re", "im"}`` with ``re``
and ``im`` row-major nested lists. Python's float repr round-trips every
double exactly, so ``load(dump(x)) == x`` bit for bit.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from belt.blockenc import BlockEncoding
from belt.linalg import ComplexMatrix, as_matrix, num_qubits
from belt.maps import LinearMapRep, by_name
from belt.spectral import PhaseSequence


def matrix_to_json(m) -> dict:
    m = as_matrix(m)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "re": np.real(m).tolist(),
        "im": np.imag(m).tolist(),
    }


def matrix_from_json(obj: dict) -> ComplexMatrix:
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
        re = np.asarray(obj["re"], dtype=np.float64)
        im = np.asarray(obj.get("im", np.zeros((rows, cols))), dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed matrix object: {exc}") from None
    if re.shape != (rows, cols) or im.shape != (rows, cols):
        raise ValueError(f"matrix data does not have shape ({rows}, {cols})")
    out = np.empty((rows, cols), dtype=np.complex128)
    out.real, out.imag = re, im
    return out


def map_to_json(m: LinearMapRep) -> dict:
    return {"in_qubits": m.in_qubits, "out_qubits": m.out_qubits, "superop": matrix_to_json(m.superop)}


def map_from_json(obj: dict) -> LinearMapRep:
    """Superoperator form, or a named map ``{"name": ..., "p": ..., "qubits": ...}``."""
    if "name" in obj:
        params = {k: v for k, v in obj.items() if k != "name"}
        return by_name(obj["name"], **params)
    return LinearMapRep(int(obj["in_qubits"]), int(obj["out_qubits"]), matrix_from_json(obj["superop"]))


def block_encoding_to_json(be: BlockEncoding) -> dict:
    return {
        "alpha": be.alpha,
        "m": be.anc_qubits,
        "eps": be.declared_eps,
        "sys_qubits": be.sys_qubits,
        "unitary": matrix_to_json(be.unitary),
    }


def block_encoding_from_json(obj: dict) -> BlockEncoding:
    u = matrix_from_json(obj["unitary"])
    m = int(obj["m"])
    sys_q = int(obj["sys_qubits"]) if "sys_qubits" in obj else num_qubits(u.shape[0]) - m
    return BlockEncoding(u, float(obj["alpha"]), m, float(obj.get("eps", 0.0)), sys_q)


def phases_to_json(ph: PhaseSequence) -> dict:
    return {"convention": ph.convention, "phases": list(ph.phases)}


def phases_from_json(obj: dict) -> PhaseSequence:
    return PhaseSequence(tuple(obj["phases"]), obj.get("convention", "qsvt-reflection"))


def read_json(path) -> Any:
    with open(Path(path), encoding="utf-8") as fh:
        return json.load(fh)


def write_json(obj, path) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def to_jsonable(obj):
    """Recursively convert numpy scalars and arrays to plain JSON values."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return matrix_to_json(obj)
        return obj.tolist()
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def dumps(obj, pretty: bool = False) -> str:
    return json.dumps(to_jsonable(obj), indent=2 if pretty else None, sort_keys=True, allow_nan=True)
