"""
Flat-file formats used by the command line tool.

Matrices are CSV with a ``dim=`` first line: ``dim=n`` for a stack of
``n x n`` blocks (a single SPD matrix is a stack of one) and ``dim=r,c`` for
one rectangular ``r x c`` matrix.  Rows are written row-major with a dot
decimal separator and LF line endings.  Markov kernels, joint measures and
measures carry their labels in the first row and column.  Label lists and
configurations are JSON.
"""
import csv
import io
import json
from typing import Dict, List, Sequence, Tuple

import numpy as np

from . import markov as mk
from .errors import ValidationError


def fmt(x: float) -> str:
    """Shortest round-tripping decimal form of a float."""
    return repr(float(x))


def _read_text(path) -> str:
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            return fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None


def _rows(text: str, what: str) -> List[List[str]]:
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
    if not rows:
        raise ValidationError(f"{what} is empty")
    return rows


def _floats(cells: Sequence[str], what: str) -> List[float]:
    try:
        vals = [float(c) for c in cells]
    except ValueError:
        raise ValidationError(f"non-numeric entry in {what}") from None
    if not all(np.isfinite(vals)):
        raise ValidationError(f"non-finite entry in {what}")
    return vals


def _parse_dim(cell: str, what: str) -> Tuple[int, ...]:
    if not cell.startswith("dim="):
        raise ValidationError(f"{what}: first line must be a dim= header")
    try:
        dims = tuple(int(v) for v in cell[4:].split(","))
    except ValueError:
        raise ValidationError(f"{what}: malformed dim header {cell!r}") from None
    if len(dims) not in (1, 2) or min(dims) < 1:
        raise ValidationError(f"{what}: malformed dim header {cell!r}")
    return dims


def parse_matrices(text: str, what: str = "matrix file") -> List[np.ndarray]:
    """Parse ``dim=`` CSV text into a list of matrices."""
    rows = _rows(text, what)
    header = ",".join(rows[0])
    dims = _parse_dim(header, what)
    body = np.array([_floats(r, what) for r in rows[1:]]) if len(rows) > 1 else np.zeros((0, 0))
    ncol = dims[-1] if len(dims) == 2 else dims[0]
    nrow = dims[0]
    if body.ndim != 2 or body.shape[0] == 0 or body.shape[1] != ncol:
        raise ValidationError(f"{what}: rows must have {ncol} entries")
    if body.shape[0] % nrow:
        raise ValidationError(f"{what}: {body.shape[0]} rows do not form blocks of {nrow}")
    if len(dims) == 2 and body.shape[0] != nrow:
        raise ValidationError(f"{what}: expected {nrow} rows, found {body.shape[0]}")
    return [body[i:i + nrow] for i in range(0, body.shape[0], nrow)]


def read_matrices(path) -> List[np.ndarray]:
    return parse_matrices(_read_text(path), str(path))


def read_matrix(path) -> np.ndarray:
    mats = read_matrices(path)
    if len(mats) != 1:
        raise ValidationError(f"{path}: expected one matrix, found {len(mats)}")
    return mats[0]


def format_matrices(mats: Sequence[np.ndarray]) -> str:
    """Inverse of :func:`parse_matrices`; square stacks get ``dim=n``."""
    mats = [np.atleast_2d(np.asarray(M, dtype=float)) for M in mats]
    if not mats:
        raise ValidationError("nothing to write")
    r, c = mats[0].shape
    if any(M.shape != (r, c) for M in mats):
        raise ValidationError("all blocks must share one shape")
    if r != c and len(mats) > 1:
        raise ValidationError("only square blocks can be stacked")
    lines = [f"dim={r}" if r == c else f"dim={r},{c}"]
    for M in mats:
        lines.extend(",".join(fmt(v) for v in row) for row in M)
    return "\n".join(lines) + "\n"


def _labelled_table(text: str, what: str) -> Tuple[List[str], List[str], np.ndarray]:
    rows = _rows(text, what)
    cols = rows[0][1:]
    if not cols or len(rows) < 2:
        raise ValidationError(f"{what}: need a label row and at least one data row")
    labels, body = [], []
    for r in rows[1:]:
        if len(r) != len(cols) + 1:
            raise ValidationError(f"{what}: ragged row for label {r[0]!r}")
        labels.append(r[0])
        body.append(_floats(r[1:], what))
    return labels, cols, np.array(body)


def _format_labelled(corner: str, rlabels, clabels, table) -> str:
    lines = [",".join([corner, *clabels])]
    for lab, row in zip(rlabels, np.atleast_2d(table)):
        lines.append(",".join([lab, *(fmt(v) for v in row)]))
    return "\n".join(lines) + "\n"


def parse_kernel(text: str, what: str = "kernel file") -> mk.MarkovKernel:
    labels, cols, rows = _labelled_table(text, what)
    return mk.MarkovKernel(mk.FiniteSpace(tuple(labels)), mk.FiniteSpace(tuple(cols)), rows)


def parse_joint(text: str, what: str = "joint measure file") -> mk.JointMeasure:
    labels, cols, table = _labelled_table(text, what)
    return mk.JointMeasure(mk.FiniteSpace(tuple(labels)), mk.FiniteSpace(tuple(cols)), table)


def parse_measure(text: str, what: str = "measure file") -> mk.Measure:
    labels, cols, table = _labelled_table(text, what)
    if len(cols) != 1:
        raise ValidationError(f"{what}: a measure has a single weight column")
    return mk.Measure(mk.FiniteSpace(tuple(labels)), table[:, 0])


def read_kernel(path) -> mk.MarkovKernel:
    return parse_kernel(_read_text(path), str(path))


def read_joint(path) -> mk.JointMeasure:
    return parse_joint(_read_text(path), str(path))


def read_measure(path) -> mk.Measure:
    return parse_measure(_read_text(path), str(path))


def format_kernel(T: mk.MarkovKernel) -> str:
    return _format_labelled("x\\y", T.source.labels, T.target.labels, T.rows)


def format_joint(mu: mk.JointMeasure) -> str:
    return _format_labelled("x\\y", mu.xspace.labels, mu.yspace.labels, mu.table)


def format_measure(mu: mk.Measure) -> str:
    return _format_labelled("label", mu.space.labels, ["weight"], mu.weights[:, None])


def format_table(columns: Sequence[str], rows: Sequence[Sequence]) -> str:
    """Plain CSV table; floats are written in round-tripping form."""
    out = [",".join(columns)]
    for r in rows:
        out.append(",".join(fmt(v) if isinstance(v, (float, np.floating)) else str(v) for v in r))
    return "\n".join(out) + "\n"


def read_labels(path) -> List[str]:
    """A JSON list of label strings."""
    try:
        data = json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc.msg})") from None
    if not isinstance(data, list) or not all(isinstance(v, str) for v in data):
        raise ValidationError(f"{path}: expected a JSON list of strings")
    return data


def format_labels(labels: Sequence[str]) -> str:
    return json.dumps(list(labels)) + "\n"


def read_config(path) -> Dict[str, object]:
    """A JSON object mapping option names to values."""
    try:
        data = json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc.msg})") from None
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: a configuration must be a JSON object")
    return data
