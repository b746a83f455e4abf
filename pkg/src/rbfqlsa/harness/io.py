"""Matrix Market, CSV and JSON helpers."""
from __future__ import annotations

import csv
import json
import os
from fractions import Fraction
from pathlib import Path

import numpy as np
import scipy.io as sio
import scipy.sparse as sp

__all__ = [
    "OUTPUT_ENV",
    "output_dir",
    "write_matrix",
    "read_matrix",
    "write_vector",
    "read_vector",
    "write_json",
    "to_jsonable",
]

OUTPUT_ENV = "RBFQLSA_OUTPUT_DIR"


def output_dir(default=None) -> Path:
    """Output directory: the environment override, else ``default``, else the cwd."""
    path = Path(os.environ.get(OUTPUT_ENV) or default or ".")
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_matrix(path, mat, comment=""):
    sio.mmwrite(str(path), sp.coo_matrix(mat), comment=comment, precision=17)


def read_matrix(path):
    return sp.csc_matrix(sio.mmread(str(path)))


def write_vector(path, vec, name="value"):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([name])
        for v in np.asarray(vec).reshape(-1):
            w.writerow([repr(float(v))])


def read_vector(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    body = rows[1:] if rows and not _is_number(rows[0][0]) else rows
    return np.array([float(r[0]) for r in body])


def _is_number(s):
    try:
        float(s)
    except ValueError:
        return False
    return True


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, Fraction):
        return int(obj) if obj.denominator == 1 else float(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(to_jsonable(obj), fh, indent=2, sort_keys=False)
        fh.write("\n")
