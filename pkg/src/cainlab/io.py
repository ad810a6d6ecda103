"""JSON input and output.

Complex tensors are written as nested lists whose innermost axis holds
``[re, im]``. Parameter files for the quantum cases use that encoding; set
``"real": true`` at the top level to supply plain real tensors instead.
"""
from __future__ import annotations

import json
import math

import numpy as np

from .cbnet import MarkovChainSpec, StructuredChainSpec
from .szilard import C1Params, C2Params, Q1Params, Q2Params


class InputError(ValueError):
    """Malformed or inconsistent input file."""


def load_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_json(text, path)


def parse_json(text: str, source: str = "<input>"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{source}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def _clean(obj):
    """Convert numpy scalars/arrays and non-finite floats to JSON values."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            obj = np.stack([obj.real, obj.imag], axis=-1)
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps(obj) -> str:
    """Deterministic JSON: sorted keys, two-space indent, trailing newline."""
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def decode_complex(value, name: str = "tensor") -> np.ndarray:
    a = np.asarray(value, dtype=float)
    if a.ndim < 1 or a.shape[-1] != 2:
        raise InputError(f"{name}: complex tensors need a trailing [re, im] axis, got shape {a.shape}")
    return a[..., 0] + 1j * a[..., 1]


def _require(data: dict, keys, case: str) -> None:
    missing = [k for k in keys if k not in data]
    if missing:
        raise InputError(f"{case} parameters missing: {', '.join(missing)}")
    extra = set(data) - set(keys) - {"case", "real", "n_s", "n_t"}
    if extra:
        raise InputError(f"unknown {case} parameter fields: {', '.join(sorted(extra))}")


CASE_KEYS = {
    "c1": ("p_s0", "p_sigma1_given_s0", "p_s2_given_sigma1"),
    "c2": ("p_s0t0", "p_sigma1_given_s0", "p_s2_given_sigma1", "p_t2_given_sigma1"),
    "q1": ("a_init", "a_meas", "a_feedback"),
    "q2": ("a_init", "a_meas", "a_feedback"),
}


def params_from_dict(data: dict, case: str | None = None):
    """Build C1/C2/Q1/Q2 parameters from a decoded JSON object."""
    case = (case or data.get("case") or "").lower()
    if case not in CASE_KEYS:
        raise InputError(f"unknown case {case!r}; choose from c1, c2, q1, q2")
    if data.get("case") and data["case"].lower() != case:
        raise InputError(f"parameter file is for case {data['case']!r}, not {case!r}")
    keys = CASE_KEYS[case]
    _require(data, keys, case)
    try:
        if case == "c1":
            return C1Params(*(np.asarray(data[k], dtype=float) for k in keys))
        if case == "c2":
            return C2Params(*(np.asarray(data[k], dtype=float) for k in keys))
        if data.get("real", False):
            tensors = [np.asarray(data[k], dtype=float) for k in keys]
        else:
            tensors = [decode_complex(data[k], k) for k in keys]
        if case == "q1":
            return Q1Params(*tensors)
        return Q2Params(*tensors, n_s=int(data.get("n_s", 0)), n_t=int(data.get("n_t", 0)))
    except InputError:
        raise
    except (ValueError, TypeError, IndexError) as exc:
        raise InputError(f"invalid {case} parameters: {exc}") from exc


def chain_from_dict(data: dict):
    """Decode a chain file.

    Required: ``initial`` and ``steps`` (column-stochastic, ``[y][x]``).
    Optional: ``sub_axes`` as ``[[name, dim], ...]`` and ``thermal`` names;
    when both are given a :class:`StructuredChainSpec` is returned.
    """
    allowed = {"initial", "steps", "sub_axes", "thermal"}
    extra = set(data) - allowed
    if extra:
        raise InputError(f"unknown chain fields: {', '.join(sorted(extra))}")
    if "initial" not in data or "steps" not in data:
        raise InputError("chain needs 'initial' and 'steps'")
    try:
        chain = MarkovChainSpec(np.asarray(data["initial"], dtype=float), tuple(np.asarray(s, dtype=float) for s in data["steps"]))
        if "sub_axes" in data or "thermal" in data:
            if "sub_axes" not in data or "thermal" not in data:
                raise InputError("'sub_axes' and 'thermal' must be given together")
            return StructuredChainSpec(chain, tuple((n, int(d)) for n, d in data["sub_axes"]), tuple(data["thermal"]))
        return chain
    except InputError:
        raise
    except (ValueError, TypeError) as exc:
        raise InputError(f"invalid chain: {exc}") from exc
