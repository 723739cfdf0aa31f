"""File formats: samples CSV, count/design CSVs, and JSON result documents.

Samples CSV layout: header ``x1..xd, g1..gd, f_<name>, ...`` with matching
x/g column counts, at least one integrand column, decimal-dot floats, UTF-8.
Parse failures carry the offending 1-based data row number.
"""

import csv
import json
from dataclasses import asdict

import numpy as np

from .errors import InputError
from .samplers import SampleSet


def _split_header(header):
    header = [h.strip() for h in header]
    x_cols = [h for h in header if h.startswith("x")]
    g_cols = [h for h in header if h.startswith("g")]
    f_cols = [h for h in header if h.startswith("f_")]
    d = len(x_cols)
    if d == 0:
        raise InputError("samples CSV has no x columns")
    if len(g_cols) != d:
        raise InputError(
            f"gradient column count mismatch: {d} x columns but {len(g_cols)} g columns"
        )
    expected = [f"x{i}" for i in range(1, d + 1)] + [f"g{i}" for i in range(1, d + 1)] + f_cols
    if header != expected:
        raise InputError(
            "samples CSV header must be x1..xd, g1..gd, f_<name>... in order; got "
            + ",".join(header)
        )
    if not f_cols:
        raise InputError("samples CSV needs at least one f_<name> integrand column")
    return d, [c[2:] for c in f_cols]


def load_samples(path):
    """Parse a samples CSV into a SampleSet, rejecting ragged or non-finite rows."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: empty file") from None
        d, names = _split_header(header)
        width = 2 * d + len(names)
        rows = []
        for lineno, row in enumerate(reader, start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != width:
                raise InputError(f"{path}: row {lineno} has {len(row)} fields, expected {width}")
            try:
                vals = [float(v) for v in row]
            except ValueError:
                raise InputError(f"{path}: row {lineno} contains a non-numeric field") from None
            if not all(np.isfinite(vals)):
                raise InputError(f"{path}: row {lineno} contains a non-finite value")
            rows.append(vals)
    if not rows:
        raise InputError(f"{path}: no data rows")
    data = np.asarray(rows)
    return SampleSet(
        points=data[:, :d],
        gradients=data[:, d : 2 * d],
        integrands={name: data[:, 2 * d + j] for j, name in enumerate(names)},
    )


def write_samples(samples, path):
    """Write a SampleSet in the samples CSV layout (full float precision)."""
    d = samples.d
    names = list(samples.integrands)
    header = (
        [f"x{i}" for i in range(1, d + 1)]
        + [f"g{i}" for i in range(1, d + 1)]
        + [f"f_{name}" for name in names]
    )
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        cols = [samples.points, samples.gradients] + [
            samples.integrands[name][:, None] for name in names
        ]
        for row in np.hstack(cols):
            writer.writerow([repr(float(v)) for v in row])


def load_matrix(path):
    """Plain numeric CSV (no header) as a 2-D float array."""
    try:
        data = np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None
    if not np.isfinite(data).all():
        raise InputError(f"{path}: contains non-finite values")
    return data


def load_cjs_counts(path):
    """Capture-recapture count table.

    CSV with header ``D,y2,y3,y4,y5,y6,y7`` and six data rows (release years
    1..6): the release count followed by first-recapture counts per year.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        if header != ["D", "y2", "y3", "y4", "y5", "y6", "y7"]:
            raise InputError(f"{path}: expected header D,y2,y3,y4,y5,y6,y7")
        rows = [row for row in reader if row and any(c.strip() for c in row)]
    if len(rows) != 6:
        raise InputError(f"{path}: expected 6 data rows, got {len(rows)}")
    try:
        table = np.asarray([[float(v) for v in row] for row in rows])
    except ValueError:
        raise InputError(f"{path}: non-numeric count") from None
    return table[:, 0], table[:, 1:]


def load_logistic_data(path):
    """Binary-response regression data: header ``y,x1..xp``, one row per case."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        if header[0] != "y" or len(header) < 2:
            raise InputError(f"{path}: expected header y,x1,...")
        rows = [row for row in reader if row and any(c.strip() for c in row)]
    try:
        data = np.asarray([[float(v) for v in row] for row in rows])
    except ValueError:
        raise InputError(f"{path}: non-numeric field") from None
    if data.shape[1] != len(header):
        raise InputError(f"{path}: ragged rows")
    return data[:, 0], data[:, 1:]


# ---------------------------------------------------------------------------
# JSON result documents
# ---------------------------------------------------------------------------


def _jsonable(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return [float(v) for v in value.reshape(-1)]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def estimate_document(result, *, n, d, kernel=None, basis_order=None, seed=None, emit_weights=False):
    """Stable-key-order JSON document for one estimator result.

    Floats are serialized with Python's shortest round-trip representation
    (up to 17 significant digits), so write -> load is value-exact.
    """
    doc = {
        "method": result.method,
        "estimate": float(result.estimate),
        "n": int(n),
        "d": int(d),
    }
    if kernel is not None:
        doc["kernel"] = {
            "family": kernel.family,
            "lambda": float(kernel.lengthscale),
            "nu": float(kernel.nu) if kernel.family == "matern" else None,
        }
    if basis_order is not None:
        doc["basis_order"] = int(basis_order)
    if emit_weights and result.weights is not None:
        doc["weights"] = [float(w) for w in result.weights]
    if result.diagnostics is not None:
        doc["diagnostics"] = {
            "ksd": float(result.diagnostics.ksd),
            "seminorm_proxy": float(result.diagnostics.seminorm_proxy),
            "bound_product": float(result.diagnostics.bound_product),
        }
    if result.nystrom is not None:
        doc["nystrom"] = {
            "n0": int(result.nystrom.n0),
            "iterations": int(result.nystrom.iterations),
            "residual": float(result.nystrom.residual),
        }
    doc["wall_time_s"] = float(result.wall_time)
    if seed is not None:
        doc["seed"] = int(seed)
    return doc


def diagnostic_document(report):
    return {
        "ksd": float(report.ksd),
        "seminorm_proxy": float(report.seminorm_proxy),
        "bound_product": float(report.bound_product),
    }


def write_result(doc, path):
    """Write a result document (dict or dataclass) as JSON, keys in insertion order."""
    if not isinstance(doc, dict):
        doc = asdict(doc)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(doc), fh, indent=2)
        fh.write("\n")


def read_result(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
