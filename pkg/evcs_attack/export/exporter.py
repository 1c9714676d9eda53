"""
Write run results as CSV/JSON report files with a hash manifest
"""

import csv
import hashlib
import json
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

from evcs_attack.attack.synthesis import AttackPlan
from evcs_attack.dynamics.simulate import SimulationTrace
from evcs_attack.dynamics.spectral import Spectrum, mode_table
from evcs_attack.dynamics.trips import TripEvent
from evcs_attack.vulnerability.sensitivity import SensitivityRow
from evcs_attack.vulnerability.sweep import SweepResult

FLOAT_FORMAT = "%.9g"
NA = "NA"


def fmt(value: float) -> str:
    """Fixed 9-significant-digit text used in every report"""
    return format(value, ".9g")


def _round_json(obj: Any) -> Any:
    """Round floats to 9 significant digits; non-finite values are not allowed in reports"""
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError(f"refusing to write non-finite value {obj}")
        return float(fmt(obj))
    if isinstance(obj, dict):
        return {k: _round_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_json(v) for v in obj]
    return obj


def sha256_of(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


class ReportBundle:
    """Collects the files of one run under `out_dir` and finishes with summary.txt and manifest.json"""

    def __init__(self, out_dir: Path, config_hash: str = "", dataset_hash: str = "", version: str = ""):
        self.out_dir = Path(out_dir)
        self.config_hash = config_hash
        self.dataset_hash = dataset_hash
        self.version = version
        self.files: List[Path] = []

    def _path(self, name: str) -> Path:
        path = self.out_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        self.files.append(path)
        return path

    def write_json(self, name: str, data: Dict[str, Any]) -> Path:
        path = self._path(name)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(_round_json(data), f, indent=2, ensure_ascii=False)
            f.write("\n")
        return path

    def write_frame(self, name: str, frame: pd.DataFrame, index: bool = False) -> Path:
        path = self._path(name)
        frame.to_csv(path, index=index, float_format=FLOAT_FORMAT, na_rep=NA, lineterminator="\n")
        return path

    def write_spectrum(self, spec: Spectrum, name: str = "spectrum.csv") -> Path:
        """Eigenvalues with damping ratio, natural frequency and oscillation frequency"""
        rows = [
            (row.eigenvalue.real, row.eigenvalue.imag, row.xi, row.omega_n, row.f_hz) for row in mode_table(spec)
        ]
        return self.write_frame(name, pd.DataFrame(rows, columns=["real", "imag", "xi", "omega_n", "f_hz"]))

    def write_plan(self, plan: AttackPlan, name: str = "plan.json") -> Path:
        return self.write_json(name, plan.to_dict())

    def write_trace(self, trace: SimulationTrace, name: str = "trace.csv") -> Path:
        """Header t, state names, f_<generator>, u; one row per sample"""
        path = self._path(name)
        header = ["t"] + trace.state_names + [f"f_{g}" for g in trace.generator_ids] + ["u"]
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            for k, t in enumerate(trace.times):
                values = [t, *trace.states[k], *trace.frequencies[k], trace.input[k]]
                writer.writerow([fmt(v) for v in values])
        return path

    def write_trips(self, events: Sequence[TripEvent], name: str = "trips.json") -> Path:
        return self.write_json(name, {"events": [e.to_dict() for e in events]})

    def write_sweep(self, result: SweepResult, prefix: str = "sweep") -> List[Path]:
        """Table layout (omega_n rows, xi columns, NA markers) plus the long form"""
        matrix = result.matrix()
        matrix.index.name = "omega_n"
        matrix.columns = [fmt(xi) for xi in matrix.columns]
        return [
            self.write_frame(f"{prefix}_matrix.csv", matrix, index=True),
            self.write_frame(f"{prefix}_long.csv", result.long_frame()),
            self.write_json(f"{prefix}_meta.json", result.metadata),
        ]

    def write_sensitivity(self, rows: Sequence[SensitivityRow], name: str = "sensitivity.csv") -> Path:
        columns = ["error_pct", "delta_p_mw", "xi", "omega_n", "epsilon", "feasible", "not_available"]
        records = [
            {
                "error_pct": r.error_pct,
                "delta_p_mw": None if r.not_available else r.delta_p_mw,
                "xi": r.xi,
                "omega_n": r.omega_n,
                "epsilon": r.epsilon,
                "feasible": r.feasible,
                "not_available": r.not_available,
            }
            for r in rows
        ]
        return self.write_frame(name, pd.DataFrame(records, columns=columns))

    def finish(self, summary_lines: Sequence[str], extra: Optional[Dict[str, Any]] = None) -> Path:
        """Write summary.txt, then manifest.json hashing every file written so far"""
        summary = self._path("summary.txt")
        summary.write_text("\n".join(summary_lines) + "\n", encoding="utf-8")

        manifest = {
            "tool_version": self.version,
            "config_hash": self.config_hash,
            "dataset_hash": self.dataset_hash,
            "files": {p.relative_to(self.out_dir).as_posix(): sha256_of(p) for p in self.files},
        }
        if extra:
            manifest.update(extra)
        path = self.out_dir / "manifest.json"
        with open(path, "w", encoding="utf-8") as f:
            json.dump(manifest, f, indent=2)
            f.write("\n")
        return path
