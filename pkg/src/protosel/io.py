"""CSV ingestion and the JSON solution document."""

import csv
import json
import os
import tempfile

import numpy as np

from .errors import InputError


def _is_number(s):
    try:
        float(s)
    except ValueError:
        return False
    return True


def read_table(path):
    """Read a comma-separated table. Returns ``(header or None, rows of strings)``.

    The first row is a header when any of its fields is not a number.
    """
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(f.strip() for f in r)]
    except OSError as exc:
        raise InputError(f"{path}: cannot read ({exc.strerror})") from exc
    if not rows:
        raise InputError(f"{path}: file is empty")
    rows = [[f.strip() for f in r] for r in rows]
    header = None
    if not all(_is_number(f) for f in rows[0]):
        header, rows = rows[0], rows[1:]
    width = len(header) if header else len(rows[0]) if rows else 0
    first_data_line = 2 if header else 1
    for k, r in enumerate(rows):
        if len(r) != width:
            raise InputError(
                f"{path}: line {k + first_data_line} has {len(r)} fields, expected {width}")
    return header, rows


def _to_float(path, rows, cols, first_line, names=None):
    out = np.empty((len(rows), len(cols)))
    for k, r in enumerate(rows):
        for c_out, c in enumerate(cols):
            try:
                out[k, c_out] = float(r[c])
            except ValueError:
                field = names[c] if names else f"column {c + 1}"
                raise InputError(
                    f"{path}: line {k + first_line}, field {field}: not a number: {r[c]!r}"
                ) from None
    if not np.all(np.isfinite(out)):
        k, c = np.argwhere(~np.isfinite(out))[0]
        field = names[cols[c]] if names else f"column {cols[c] + 1}"
        raise InputError(f"{path}: line {k + first_line}, field {field}: non-finite value")
    return out


def _parse_label(s):
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def read_features(path, labels_col=None):
    """Feature matrix and (optionally) labels taken from a named or 1-based column."""
    header, rows = read_table(path)
    if not rows:
        raise InputError(f"{path}: no data rows")
    width = len(rows[0])
    first_line = 2 if header else 1
    label_idx = None
    if labels_col is not None:
        if header and labels_col in header:
            label_idx = header.index(labels_col)
        elif str(labels_col).isdigit() and 1 <= int(labels_col) <= width:
            label_idx = int(labels_col) - 1
        else:
            raise InputError(f"{path}: no label column {labels_col!r}")
    cols = [c for c in range(width) if c != label_idx]
    if not cols:
        raise InputError(f"{path}: no feature columns")
    x = _to_float(path, rows, cols, first_line, header)
    labels = [_parse_label(r[label_idx]) for r in rows] if label_idx is not None else None
    return x, labels, ([header[c] for c in cols] if header else None)


def read_matrix(path, square=False):
    header, rows = read_table(path)
    if not rows:
        raise InputError(f"{path}: no data rows")
    first_line = 2 if header else 1
    m = _to_float(path, rows, list(range(len(rows[0]))), first_line, header)
    if square and m.shape[0] != m.shape[1]:
        raise InputError(f"{path}: expected a square matrix, got {m.shape[0]}x{m.shape[1]}")
    return m


def read_labels(path):
    header, rows = read_table(path)
    if rows and len(rows[0]) != 1:
        raise InputError(f"{path}: label file must have exactly one column")
    return [_parse_label(r[0]) for r in rows]


def atomic_write(path, text):
    """Write ``text`` to ``path`` via a temporary file in the same directory."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _jsonable(v):
    if isinstance(v, np.generic):
        return v.item()
    return v


def solution_document(solution, problem, classes, *, metric, epsilon, lam, input_kind,
                      candidate_features=None, synthetic=None, base_metric=None,
                      rank_reference=None, solver=None, seed=None):
    """JSON-ready dict describing a fitted prototype model.

    ``candidate_features`` embeds prototype coordinates so feature-space
    models can classify raw query rows. ``rank_reference[j]`` holds the
    sorted base distances from the training points to candidate ``j``,
    needed to rank-transform queries.
    """
    per_class = []
    for l, s in enumerate(solution.sets):
        protos = []
        for j in s:
            entry = {"candidate": int(j),
                     "synthetic": bool(synthetic[j]) if synthetic is not None else False}
            if candidate_features is not None:
                entry["coordinates"] = [float(v) for v in candidate_features[j]]
            if rank_reference is not None:
                entry["rank_reference"] = [float(v) for v in rank_reference[j]]
            protos.append(entry)
        per_class.append({"class_id": _jsonable(classes[l]), "prototypes": protos,
                          "count": len(s)})
    doc = {
        "epsilon": float(epsilon),
        "lambda": float(lam),
        "metric": metric,
        "base_metric": base_metric,
        "input_kind": input_kind,
        "solver": solver,
        "seed": seed,
        "n_train": int(problem.n),
        "n_candidates": int(problem.m),
        "candidate_provenance": {
            "data": int(problem.m - (int(np.sum(synthetic)) if synthetic is not None else 0)),
            "kmeans": int(np.sum(synthetic)) if synthetic is not None else 0,
        },
        "classes": [_jsonable(c) for c in classes],
        "per_class": per_class,
        "counts": [len(s) for s in solution.sets],
        "xi_total": int(np.sum(solution.xi)),
        "eta_total": int(np.sum(solution.eta)),
        "objective": float(solution.objective),
        "per_class_objective": [float(v) for v in solution.per_class_objective],
    }
    if solution.trace is not None:
        doc["trace"] = [
            {"step": k, "class_id": _jsonable(classes[s.class_id]), "candidate": s.candidate,
             "delta_xi": s.delta_xi, "delta_eta": s.delta_eta,
             "delta_obj": float(s.delta_obj),
             "cumulative_objective": float(s.cumulative_objective)}
            for k, s in enumerate(solution.trace, start=1)
        ]
    return doc


def dump_json(doc):
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def load_model(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"{path}: cannot read ({exc.strerror})") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno}: invalid JSON ({exc.msg})") from exc
    for key in ("per_class", "classes", "metric", "epsilon"):
        if key not in doc:
            raise InputError(f"{path}: model document missing field {key!r}")
    return doc
