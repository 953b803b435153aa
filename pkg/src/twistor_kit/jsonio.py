"""Deterministic JSON for matrices, spheres, periods, paths and reports.

Floats are printed with 17 significant digits (round-trip exact for doubles)
and dictionary keys are emitted sorted, so identical inputs produce
byte-identical files.  Exact rational entries travel as strings "p/q".
"""

import json
from fractions import Fraction

import numpy as np

from .charts import PeriodMatrix
from .errors import DimensionError
from .genericity import AlternatingForm
from .structures import ComplexStructure, TwistorSphere


def format_float(x):
    return format(float(x), ".17g")


def _encode(obj):
    if isinstance(obj, dict):
        items = ", ".join(
            f"{json.dumps(str(k))}: {_encode(v)}" for k, v in sorted(obj.items())
        )
        return "{" + items + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist())
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, Fraction):
        return json.dumps(f"{obj.numerator}/{obj.denominator}")
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if not np.isfinite(value):
            return json.dumps(repr(value))
        return format_float(value)
    if isinstance(obj, complex):
        return _encode([obj.real, obj.imag])
    return json.dumps(obj)


def dumps(obj):
    return _encode(obj) + "\n"


def write_json(path, obj):
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(dumps(obj))


def read_json(path):
    with open(path, "r", encoding="utf-8") as handle:
        return json.load(handle)


def matrix_to_json(mat):
    mat = np.asarray(mat)
    if mat.shape[0] % 4:
        raise DimensionError("matrix JSON carries size-4n matrices")
    return {"n": mat.shape[0] // 4, "rows": [list(map(float, row)) for row in mat]}


def matrix_from_json(data):
    rows = data["rows"]
    parsed = [[_entry(x) for x in row] for row in rows]
    if any(isinstance(x, Fraction) for row in parsed for x in row):
        return [[Fraction(x) for x in row] for row in parsed]
    return np.array(parsed, dtype=float)


def _entry(x):
    if isinstance(x, str):
        return Fraction(x)
    return float(x)


def structure_to_json(structure):
    return matrix_to_json(structure.mat)


def structure_from_json(data):
    mat = matrix_from_json(data)
    if not isinstance(mat, np.ndarray):
        mat = np.array([[float(x) for x in row] for row in mat])
    return ComplexStructure(mat)


def form_to_json(form):
    if form.is_rational:
        return {"n": form.size // 4, "rows": form.exact}
    return matrix_to_json(form.mat)


def form_from_json(data):
    mat = matrix_from_json(data)
    if isinstance(mat, np.ndarray):
        return AlternatingForm(mat)
    return AlternatingForm(None, exact=mat)


def sphere_to_json(sphere):
    return {"frame": [structure_to_json(f) for f in sphere.frame]}


def sphere_from_json(data):
    return TwistorSphere(tuple(structure_from_json(f) for f in data["frame"]))


def period_to_json(period):
    return {
        "n": period.n,
        "Z_re": [list(map(float, row)) for row in period.z.real],
        "Z_im": [list(map(float, row)) for row in period.z.imag],
    }


def period_from_json(data):
    return PeriodMatrix(np.array(data["Z_re"], dtype=float) + 1j * np.array(data["Z_im"], dtype=float))


def path_to_json(path, report):
    return {
        "spheres": [[structure_to_json(f) for f in s.frame] for s in path.spheres],
        "joints": [structure_to_json(j) for j in path.joints],
        "endpoints": [structure_to_json(e) for e in path.endpoints],
        "residuals": {
            "joint_membership": report["joint_membership"],
            "joint_square": report["joint_square"],
            "endpoint_membership": report["endpoint_membership"],
            "frame_residual": report["frame_residual"],
            "max_residual": report["max_residual"],
            "solver": path.solver_residuals,
        },
        "ok": report["ok"],
    }


def conic_report_to_json(report):
    return {
        "plane_dim": report.plane_dim,
        "conic_residual": report.conic_residual,
        "degree": report.degree,
    }


def ns_report_to_json(report):
    data = {
        "rank": report.rank,
        "method": report.method,
        "basis": [form_to_json(b) for b in report.basis],
    }
    if report.height_bound is not None:
        data["height_bound"] = report.height_bound
        data["generic_up_to_height"] = report.generic_up_to_height
    return data


def riemann_certificate_to_json(cert):
    herm = cert.hermitian_matrix
    return {
        "first_relation_residual": cert.first_relation_residual,
        "hermitian_re": [list(map(float, row)) for row in herm.real],
        "hermitian_im": [list(map(float, row)) for row in herm.imag],
        "determinant": cert.determinant,
        "formula_determinant": cert.formula_determinant,
        "positive_definite": cert.positive_definite,
    }
