#!/usr/bin/env python3
"""
JSON system documents.

Layout (complex entries are [re, im] pairs; bare numbers are read as real):

    {
      "dimension": 2,
      "ground_indices": [0],
      "basis_labels": ["0", "1"],
      "hamiltonian": [[[0, 0], [0.05, 0]], [[0.05, 0], [1, 0]]],
      "jumps": [{"label": "gamma", "matrix": [...]}],
      "fields": [{"label": "probe", "v_plus": [...], "omega": 0.5}],
      "metadata": {"preset": "two-level", "initial_index": 0}
    }

Floats are written with shortest round-trip formatting, so a document
written and read back gives bit-identical matrices.
"""

import json
import numbers
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from errors import InvalidMatrix, ParseError
from system_model import FieldDrive, Jump, SystemSpec


@dataclass(frozen=True, eq=False)
class SpecDocument:
    spec: SystemSpec
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def initial_index(self) -> Optional[int]:
        value = self.metadata.get("initial_index")
        return int(value) if isinstance(value, numbers.Integral) else None


# ---------- encoding ----------

def encode_matrix(m: np.ndarray) -> List[List[List[float]]]:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=np.complex128)]


def to_dict(spec: SystemSpec, metadata: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    doc: Dict[str, Any] = {
        "dimension": spec.dim,
        "ground_indices": list(spec.ground_indices),
    }
    if spec.basis_labels is not None:
        doc["basis_labels"] = list(spec.basis_labels)
    doc["hamiltonian"] = encode_matrix(spec.hamiltonian)
    doc["jumps"] = [{"label": j.label, "matrix": encode_matrix(j.op)} for j in spec.jumps]
    doc["fields"] = [{"label": f.label, "v_plus": encode_matrix(f.v_plus), "omega": f.omega} for f in spec.fields]
    doc["metadata"] = dict(metadata or {})
    return doc


def dumps(spec: SystemSpec, metadata: Optional[Dict[str, Any]] = None) -> str:
    return json.dumps(to_dict(spec, metadata), indent=2, ensure_ascii=False) + "\n"


def dump(spec: SystemSpec, path: str, metadata: Optional[Dict[str, Any]] = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(dumps(spec, metadata))


# ---------- decoding ----------

def _is_number(x: Any) -> bool:
    return isinstance(x, numbers.Real) and not isinstance(x, bool)


def _complex(x: Any, path: str) -> complex:
    if _is_number(x):
        return complex(float(x), 0.0)
    if isinstance(x, list) and len(x) == 2 and all(_is_number(v) for v in x):
        return complex(float(x[0]), float(x[1]))
    raise ParseError(f"expected a number or an [re, im] pair, got {json.dumps(x)}", field=path)


def decode_matrix(rows: Any, path: str) -> np.ndarray:
    if not isinstance(rows, list) or not rows:
        raise ParseError("expected a nonempty list of rows", field=path)
    width = None
    out = []
    for i, row in enumerate(rows):
        if not isinstance(row, list):
            raise ParseError("expected a list of entries", field=f"{path}[{i}]")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ParseError(f"row has {len(row)} entries, expected {width}", field=f"{path}[{i}]")
        out.append([_complex(x, f"{path}[{i}][{j}]") for j, x in enumerate(row)])
    return np.array(out, dtype=np.complex128)


def _require(obj: Dict[str, Any], key: str, path: str = "") -> Any:
    if key not in obj:
        raise ParseError("missing required field", field=f"{path}{key}")
    return obj[key]


def _int_list(value: Any, path: str) -> List[int]:
    if not isinstance(value, list) or not all(isinstance(i, int) and not isinstance(i, bool) for i in value):
        raise ParseError("expected a list of integers", field=path)
    return list(value)


def from_dict(obj: Any) -> SpecDocument:
    if not isinstance(obj, dict):
        raise ParseError("document root must be an object")
    dim = _require(obj, "dimension")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ParseError("expected a positive integer", field="dimension")
    ground = _int_list(_require(obj, "ground_indices"), "ground_indices")

    labels = obj.get("basis_labels")
    if labels is not None and (not isinstance(labels, list) or not all(isinstance(s, str) for s in labels)):
        raise ParseError("expected a list of strings", field="basis_labels")

    try:
        hamiltonian = decode_matrix(_require(obj, "hamiltonian"), "hamiltonian")

        jumps = []
        raw_jumps = obj.get("jumps", [])
        if not isinstance(raw_jumps, list):
            raise ParseError("expected a list", field="jumps")
        for k, item in enumerate(raw_jumps):
            path = f"jumps[{k}]"
            if not isinstance(item, dict):
                raise ParseError("expected an object with label and matrix", field=path)
            label = _require(item, "label", f"{path}.")
            jumps.append(Jump(str(label), decode_matrix(_require(item, "matrix", f"{path}."), f"{path}.matrix")))

        fields = []
        raw_fields = obj.get("fields", [])
        if not isinstance(raw_fields, list):
            raise ParseError("expected a list", field="fields")
        for k, item in enumerate(raw_fields):
            path = f"fields[{k}]"
            if not isinstance(item, dict):
                raise ParseError("expected an object with label, v_plus and omega", field=path)
            omega = _require(item, "omega", f"{path}.")
            if not _is_number(omega):
                raise ParseError("expected a number", field=f"{path}.omega")
            v_plus = decode_matrix(_require(item, "v_plus", f"{path}."), f"{path}.v_plus")
            fields.append(FieldDrive(str(_require(item, "label", f"{path}.")), v_plus, float(omega)))

        spec = SystemSpec(dim=dim, ground_indices=tuple(ground), hamiltonian=hamiltonian,
                          jumps=tuple(jumps), fields=tuple(fields),
                          basis_labels=tuple(labels) if labels is not None else None)
    except InvalidMatrix as e:
        raise ParseError(str(e)) from e

    metadata = obj.get("metadata", {})
    if not isinstance(metadata, dict):
        raise ParseError("expected an object", field="metadata")
    return SpecDocument(spec, metadata)


def loads(text: str) -> SpecDocument:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"malformed JSON: {e.msg}", line=e.lineno, column=e.colno) from e
    return from_dict(obj)


def load(path: str) -> SpecDocument:
    with open(path, "r", encoding="utf-8") as f:
        return loads(f.read())
