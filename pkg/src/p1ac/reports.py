"""Experiment report rows, CSV emission, and summary statistics.

CSV header (fixed contract):
method, point_sigma_px, affine_sigma, normal_sigma_deg, angular_err_deg,
position_err, solve_time_us, seed

Failure rows (empty solution sets) carry the sentinel angular error 180 and
an empty position field; they are excluded from means but counted in the
summary.  solve_time_us is the only non-deterministic column.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field

import numpy as np

CSV_HEADER = ("method", "point_sigma_px", "affine_sigma", "normal_sigma_deg",
              "angular_err_deg", "position_err", "solve_time_us", "seed")

FAILURE_ANGULAR = 180.0

# CSV columns that vary between reruns with the same seed.
TIMING_COLUMNS = ("solve_time_us",)


@dataclass(frozen=True)
class ReportRow:
    method: str
    point_sigma_px: float
    affine_sigma: float
    normal_sigma_deg: float
    angular_err_deg: float
    position_err: float      # inf marks a failure (empty solution set)
    solve_time_us: float
    seed: str

    @property
    def failed(self) -> bool:
        return not np.isfinite(self.position_err)


@dataclass
class ExperimentReport:
    """Rows of per-problem results plus derived per-cell summaries."""

    rows: list = field(default_factory=list)

    def append(self, row: ReportRow) -> None:
        self.rows.append(row)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(CSV_HEADER) + "\n")
        for r in self.rows:
            pos = repr(r.position_err) if np.isfinite(r.position_err) else ""
            buf.write(f"{r.method},{r.point_sigma_px!r},{r.affine_sigma!r},"
                      f"{r.normal_sigma_deg!r},{r.angular_err_deg!r},{pos},"
                      f"{r.solve_time_us!r},{r.seed}\n")
        return buf.getvalue()

    def summary(self) -> dict:
        """Mean/median error and timing per (method, noise cell)."""
        cells = {}
        for r in self.rows:
            key = (r.method, r.point_sigma_px, r.affine_sigma, r.normal_sigma_deg)
            cells.setdefault(key, []).append(r)
        out = []
        for key in sorted(cells):
            rows = cells[key]
            ok = [r for r in rows if not r.failed]
            ang = np.array([r.angular_err_deg for r in ok])
            pos = np.array([r.position_err for r in ok])
            tus = np.array([r.solve_time_us for r in rows])
            out.append({
                "method": key[0],
                "point_sigma_px": key[1],
                "affine_sigma": key[2],
                "normal_sigma_deg": key[3],
                "n": len(rows),
                "failures": len(rows) - len(ok),
                "mean_angular_err_deg": float(ang.mean()) if len(ok) else None,
                "median_angular_err_deg": float(np.median(ang)) if len(ok) else None,
                "mean_position_err": float(pos.mean()) if len(ok) else None,
                "median_position_err": float(np.median(pos)) if len(ok) else None,
                "mean_solve_time_us": float(tus.mean()) if len(rows) else None,
            })
        return {"cells": out}

    def summary_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True) + "\n"


def strip_timing_csv(csv_text: str) -> str:
    """Drop the timing columns; what remains must be identical across reruns
    with the same seed."""
    lines = csv_text.splitlines()
    header = lines[0].split(",")
    keep = [i for i, h in enumerate(header) if h not in TIMING_COLUMNS]
    out = []
    for line in lines:
        parts = line.split(",")
        out.append(",".join(parts[i] for i in keep))
    return "\n".join(out) + "\n"


def strip_timing_summary(summary: dict) -> dict:
    cells = []
    for cell in summary.get("cells", []):
        cells.append({k: v for k, v in cell.items() if not k.startswith("mean_solve_time")})
    return {"cells": cells}
