"""Text formats: LIBSVM datasets, regression CSV, trace CSV, problem files.

Reals in the trace CSV are formatted with 17 significant digits, which
round-trips float64 exactly.
"""

from __future__ import annotations

import csv
import logging
from typing import List

import numpy as np

from .apps import LabeledDataset
from .exceptions import ParseError, ValidationError
from .ialm import IterationRecord
from .problem import CopProblem, quadratic_objective

logger = logging.getLogger(__name__)

TRACE_HEADER = [
    "k", "lyapunov_beta", "merit", "step_w", "step_u", "step_z", "feas",
    "p_residual_max", "epsilon_k", "inner_iterations", "zero_one_loss", "f_value",
]


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def read_libsvm(path) -> LabeledDataset:
    """Parse 'label idx:val idx:val ...' lines (1-based indices, dense output).

    Labels {0, 1} are auto-mapped to {-1, +1} with a logged notice. A label
    field with commas ('1,3') is treated as a multilabel class list and
    produces a {-1, +1} label matrix instead of a vector.
    """
    rows: List[dict] = []
    labels: List[str] = []
    max_idx = 0
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            labels.append(parts[0])
            feats = {}
            for tok in parts[1:]:
                if ":" not in tok:
                    raise ParseError(f"expected idx:val, got {tok!r}", lineno)
                idx_s, val_s = tok.split(":", 1)
                try:
                    idx = int(idx_s)
                    val = float(val_s)
                except ValueError:
                    raise ParseError(f"non-numeric feature {tok!r}", lineno) from None
                if idx < 1:
                    raise ParseError(f"indices are 1-based, got {idx}", lineno)
                feats[idx - 1] = val
                max_idx = max(max_idx, idx)
            rows.append(feats)
    if not rows:
        raise ParseError(f"empty dataset: {path}")
    n = len(rows)
    X = np.zeros((n, max_idx))
    for i, feats in enumerate(rows):
        for j, val in feats.items():
            X[i, j] = val

    multilabel = any("," in lab for lab in labels)
    if multilabel:
        sets = []
        classes: set[int] = set()
        for lineno, lab in enumerate(labels, start=1):
            try:
                ids = {int(tok) for tok in lab.split(",") if tok != ""}
            except ValueError:
                raise ParseError(f"non-numeric label {lab!r}", lineno) from None
            sets.append(ids)
            classes |= ids
        ordered = sorted(classes)
        Y = -np.ones((n, len(ordered)))
        col = {cls: k for k, cls in enumerate(ordered)}
        for i, ids in enumerate(sets):
            for cls in ids:
                Y[i, col[cls]] = 1.0
        return LabeledDataset(X, Y=Y)

    y = np.empty(n)
    for lineno, lab in enumerate(labels, start=1):
        try:
            y[lineno - 1] = float(lab)
        except ValueError:
            raise ParseError(f"non-numeric label {lab!r}", lineno) from None
    vals = set(np.unique(y))
    if vals <= {0.0, 1.0}:
        logger.info("mapping labels {0,1} to {-1,+1} in %s", path)
        y = np.where(y > 0, 1.0, -1.0)
    return LabeledDataset(X, y=y)


def read_csv_regression(path) -> LabeledDataset:
    """Comma-separated rows; a non-numeric header row is skipped; last column
    is the response."""
    X_rows: List[List[float]] = []
    y_vals: List[float] = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            cells = [c.strip() for c in line.split(",")]
            try:
                vals = [float(c) for c in cells]
            except ValueError:
                if lineno == 1:
                    continue  # header
                raise ParseError("non-numeric cell", lineno) from None
            if len(vals) < 2:
                raise ParseError("need at least one feature and a response", lineno)
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise ParseError(
                    f"ragged row: {len(vals)} cells, expected {width}", lineno
                )
            X_rows.append(vals[:-1])
            y_vals.append(vals[-1])
    if not X_rows:
        raise ParseError(f"empty dataset: {path}")
    return LabeledDataset(np.array(X_rows), y=np.array(y_vals))


def write_trace(trace: List[IterationRecord], path) -> None:
    """Round-trip-exact CSV of the outer iteration records."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_HEADER)
        for r in trace:
            writer.writerow([
                r.k, _fmt(r.lyapunov_beta), _fmt(r.merit), _fmt(r.step_w),
                _fmt(r.step_u), _fmt(r.step_z), _fmt(r.feas),
                _fmt(r.p_residual_max), _fmt(r.epsilon_k),
                r.inner_iterations, r.zero_one_loss, _fmt(r.f_value),
            ])


def read_trace(path) -> List[IterationRecord]:
    records: List[IterationRecord] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != TRACE_HEADER:
            raise ParseError(f"unexpected trace header in {path}", 1)
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(TRACE_HEADER):
                raise ParseError("wrong number of columns", lineno)
            try:
                records.append(IterationRecord(
                    k=int(row[0]), lyapunov_beta=float(row[1]), merit=float(row[2]),
                    step_w=float(row[3]), step_u=float(row[4]), step_z=float(row[5]),
                    feas=float(row[6]), p_residual_max=float(row[7]),
                    epsilon_k=float(row[8]), inner_iterations=int(row[9]),
                    zero_one_loss=int(row[10]), f_value=float(row[11]),
                ))
            except ValueError:
                raise ParseError("non-numeric cell", lineno) from None
    return records


def _parse_matrix(text: str, key: str, line: int) -> np.ndarray:
    try:
        rows = [
            [float(tok) for tok in row.split()]
            for row in text.split(";")
            if row.strip()
        ]
    except ValueError:
        raise ParseError(f"non-numeric entry in {key}", line) from None
    widths = {len(r) for r in rows}
    if not rows or len(widths) != 1:
        raise ParseError(f"ragged matrix for {key}", line)
    return np.array(rows)


def read_problem_file(path) -> CopProblem:
    """Flat key=value problem file for quadratic instances.

    Keys: lambda (required), H, c, d, A, b. Matrices use ';' between rows and
    whitespace between entries, e.g. ``H = 1 0 ; 0 1``.
    """
    fields: dict = {}
    lines: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError(f"expected key = value, got {line!r}", lineno)
            key, val = (part.strip() for part in line.split("=", 1))
            fields[key] = val
            lines[key] = lineno
    for key in ("lambda", "A", "b"):
        if key not in fields:
            raise ParseError(f"missing required key {key!r} in {path}")
    A = _parse_matrix(fields["A"], "A", lines["A"])
    b = _parse_matrix(fields["b"], "b", lines["b"]).ravel()
    p = A.shape[1]
    H = _parse_matrix(fields["H"], "H", lines["H"]) if "H" in fields else np.eye(p)
    c = (
        _parse_matrix(fields["c"], "c", lines["c"]).ravel()
        if "c" in fields
        else np.zeros(p)
    )
    try:
        lam = float(fields["lambda"])
        d = float(fields.get("d", "0"))
    except ValueError:
        raise ParseError("non-numeric scalar", lines["lambda"]) from None
    try:
        return CopProblem(quadratic_objective(H, c, d), A, b, lam)
    except ValidationError as exc:
        raise ParseError(f"inconsistent problem file: {exc}") from exc
