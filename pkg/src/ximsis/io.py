"""Delimited-text input and output for survival tables, screening results and reports."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .metrics import QUANTILE_LEVELS, ExperimentReport
from .screening import ScreeningResult
from .survival import SurvivalResponse

__all__ = [
    "MISSING_MARKERS",
    "RawTable",
    "load_survival_csv",
    "load_matrix_csv",
    "load_vector",
    "write_table_csv",
    "write_screening_csv",
    "read_screening_csv",
    "write_reports_csv",
    "read_reports_csv",
    "write_reports_json",
    "read_reports_json",
    "fmt",
]

MISSING_MARKERS = frozenset({"", "NA", "na", "N/A", "NaN", "nan"})


def fmt(x) -> str:
    """Full-precision text for a float (17 significant digits)."""
    x = float(x)
    if np.isnan(x):
        return "NA"
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return f"{x:.17g}"


@dataclass
class RawTable:
    """Parsed survival table. Missing feature cells are NaN."""

    feature_names: list
    features: np.ndarray
    time: np.ndarray | None = None
    status: np.ndarray | None = None
    time_col: str | None = None
    status_col: str | None = None

    @property
    def missing(self) -> np.ndarray:
        return np.isnan(self.features)

    @property
    def n_missing(self) -> int:
        return int(self.missing.sum())

    def response(self) -> SurvivalResponse:
        if self.time is None or self.status is None:
            raise ValueError("table has no time/status columns")
        if np.isnan(self.time).any() or np.isnan(self.status).any():
            raise ValueError("missing time or status values")
        return SurvivalResponse(self.time, self.status.astype(np.int8))


def _sniff_delimiter(first_line: str) -> str:
    if "\t" in first_line and "," not in first_line:
        return "\t"
    return ","


def _read_rows(path):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    with path.open(newline="") as fh:
        first = fh.readline()
        fh.seek(0)
        rows = list(csv.reader(fh, delimiter=_sniff_delimiter(first)))
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    for lineno, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
    return header, body


def _parse_cell(cell: str, where: str) -> float:
    cell = cell.strip()
    if cell in MISSING_MARKERS:
        return np.nan
    try:
        return float(cell)
    except ValueError:
        raise ValueError(f"non-numeric value {cell!r} at {where}") from None


def load_survival_csv(path, time_col: str | None = None, status_col: str | None = None) -> RawTable:
    """Read a delimited table with a header row.

    Comma is the default delimiter; tab is detected from the header line.
    ``time_col`` and ``status_col`` are optional so that feature-only files
    can be read for imputation.
    """
    header, body = _read_rows(path)
    for col in (time_col, status_col):
        if col is not None and col not in header:
            raise ValueError(f"column {col!r} not found in {path}")
    special = {c for c in (time_col, status_col) if c is not None}
    feat_idx = [j for j, h in enumerate(header) if h not in special]
    if not feat_idx:
        raise ValueError("no feature columns")
    values = np.array(
        [[_parse_cell(row[j], f"row {i + 2}, column {header[j]!r}") for j in range(len(header))] for i, row in enumerate(body)],
        dtype=np.float64,
    ).reshape(len(body), len(header))

    time = status = None
    if time_col is not None:
        time = values[:, header.index(time_col)]
        present = ~np.isnan(time)
        if np.any(time[present] <= 0):
            raise ValueError("time must be positive")
    if status_col is not None:
        status = values[:, header.index(status_col)]
        present = ~np.isnan(status)
        if not np.all(np.isin(status[present], (0.0, 1.0))):
            raise ValueError("status must be 0/1")
    return RawTable(
        feature_names=[header[j] for j in feat_idx],
        features=values[:, feat_idx],
        time=time,
        status=status,
        time_col=time_col,
        status_col=status_col,
    )


def load_matrix_csv(path):
    """Header plus numeric matrix, missing cells as NaN."""
    table = load_survival_csv(path)
    return table.feature_names, table.features


def load_vector(path) -> np.ndarray:
    """One number per line (a single header line is skipped if non-numeric)."""
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if lines:
        try:
            float(lines[0].split(",")[0])
        except ValueError:
            lines = lines[1:]
    if not lines:
        raise ValueError(f"{path}: no values")
    return np.array([_parse_cell(ln.split(",")[0], f"{path} line {i + 1}") for i, ln in enumerate(lines)])


def write_table_csv(path, header, columns) -> None:
    """Write equally long numeric columns under ``header``."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in zip(*columns):
            writer.writerow([fmt(v) for v in row])


def write_screening_csv(path, result: ScreeningResult, feature_names=None) -> None:
    """Ranked feature list; ``path`` may also be an open text stream."""
    if hasattr(path, "write"):
        _write_screening(path, result, feature_names)
        return
    with Path(path).open("w", newline="") as fh:
        _write_screening(fh, result, feature_names)


def _write_screening(fh, result, feature_names):
    p = result.omega.shape[0]
    names = feature_names or [f"X{k + 1}" for k in range(p)]
    selected = np.zeros(p, dtype=bool)
    selected[result.selected] = True
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["rank", "feature", "index", "omega", "selected", "M"])
    for rank, k in enumerate(result.order, start=1):
        writer.writerow([rank, names[k], int(k), f"{result.omega[k]:.17g}", int(selected[k]), result.M_used])


def read_screening_csv(path):
    """Inverse of :func:`write_screening_csv`; returns ``(result, names)``."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    p = len(rows)
    omega = np.empty(p)
    names = [""] * p
    order = np.empty(p, dtype=np.int64)
    chosen = []
    for pos, row in enumerate(rows):
        k = int(row["index"])
        omega[k] = float(row["omega"])
        names[k] = row["feature"]
        order[pos] = k
        if row["selected"] == "1":
            chosen.append(k)
    M = int(rows[0]["M"]) if rows else 0
    return ScreeningResult(omega, order, np.array(chosen, dtype=np.int64), M), names


def _report_columns(reports):
    width = max(len(r.p_j) for r in reports)
    q_cols = [f"q{round(q * 100):02d}" for q in QUANTILE_LEVELS]
    return q_cols, width


def write_reports_csv(path, reports) -> None:
    """One row per (variant, d).

    Columns: variant, d, n_reps, q05..q95, iqr, active, p_<j> (1-based
    feature numbers), p_a, realized_cr, seconds_per_rep.
    """
    q_cols, width = _report_columns(reports)
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["variant", "d", "n_reps", *q_cols, "iqr", "active", *[f"p_{j + 1}" for j in range(width)], "p_a", "realized_cr", "seconds_per_rep"])
        for r in reports:
            pj = [fmt(v) for v in r.p_j] + [""] * (width - len(r.p_j))
            active = " ".join(str(a + 1) for a in r.active_set)
            writer.writerow([r.variant, r.d, r.n_reps, *[fmt(q) for q in r.s_quantiles], fmt(r.iqr), active, *pj, fmt(r.p_a), fmt(r.realized_cr), fmt(r.seconds_per_rep)])


def read_reports_csv(path) -> list[ExperimentReport]:
    out = []
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            active = tuple(int(a) - 1 for a in row["active"].split())
            pj = tuple(float(row[f"p_{j + 1}"]) for j in range(len(active)))
            out.append(
                ExperimentReport(
                    variant=row["variant"],
                    d=int(row["d"]),
                    s_quantiles=tuple(float(row[f"q{round(q * 100):02d}"]) for q in QUANTILE_LEVELS),
                    iqr=float(row["iqr"]),
                    p_j=pj,
                    p_a=float(row["p_a"]),
                    active_set=active,
                    n_reps=int(row["n_reps"]),
                    realized_cr=float(row["realized_cr"]) if row["realized_cr"] != "NA" else float("nan"),
                    seconds_per_rep=float(row["seconds_per_rep"]) if row["seconds_per_rep"] != "NA" else float("nan"),
                )
            )
    return out


def write_reports_json(path, reports, metadata=None) -> None:
    payload = {"metadata": metadata or {}, "reports": [asdict(r) for r in reports]}
    Path(path).write_text(json.dumps(payload, indent=2, default=_json_default))


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def read_reports_json(path) -> list[ExperimentReport]:
    payload = json.loads(Path(path).read_text())
    out = []
    for r in payload["reports"]:
        r = dict(r)
        for key in ("s_quantiles", "p_j", "active_set"):
            r[key] = tuple(r[key])
        out.append(ExperimentReport(**r))
    return out
