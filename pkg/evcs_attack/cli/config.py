"""
Run configuration shared by the command-line entry points
"""

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Tuple

from evcs_attack.dynamics.simulate import DEFAULT_DT_S, DEFAULT_HORIZON_S

DATA_DIR_ENV = "EVCS_ATTACK_DATA_DIR"
DEFAULT_GRID_NAME = "manhattan.json"

# Not part of the result identity
_UNHASHED = ("out_dir", "workers")


def default_grid_path() -> Path:
    """`manhattan.json` in $EVCS_ATTACK_DATA_DIR when it exists there, else the bundled copy"""
    data_dir = os.environ.get(DATA_DIR_ENV)
    if data_dir:
        candidate = Path(data_dir) / DEFAULT_GRID_NAME
        if candidate.exists():
            return candidate
    return Path(str(resources.files("evcs_attack.data") / DEFAULT_GRID_NAME))


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines the numbers a command writes"""

    command: str
    grid_path: str
    attack_node: str = "B4"
    targets: Optional[Tuple[Tuple[float, float], ...]] = None
    region: Optional[Tuple[float, float, float, float, float, float]] = None
    cell: Optional[Tuple[float, float]] = None
    trip_node: Optional[str] = None
    hour: Optional[int] = None
    cap_mw: Optional[float] = None
    scale: float = 1.0
    eta: Optional[float] = None
    stdev_mw: Optional[float] = None
    stdev_from_profile: bool = False
    horizon_s: float = DEFAULT_HORIZON_S
    dt_s: float = DEFAULT_DT_S
    error_pcts: Tuple[float, ...] = field(default_factory=tuple)
    out_dir: str = "reports"
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.targets is not None and self.region is not None:
            raise ValueError("give either target eigenvalues or a region, not both")
        if self.hour is not None and not 0 <= self.hour < 168:
            raise ValueError(f"hour of week must be in [0, 167], got {self.hour}")
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        if self.stdev_mw is not None and self.stdev_from_profile:
            raise ValueError("--stdev and --stdev-from-profile are mutually exclusive")
        if not self.dt_s > 0 or self.horizon_s < self.dt_s:
            raise ValueError(f"need 0 < dt <= horizon, got dt={self.dt_s}, horizon={self.horizon_s}")

    def to_dict(self) -> dict:
        return asdict(self)

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON of the result-relevant fields"""
        data = {k: v for k, v in self.to_dict().items() if k not in _UNHASHED}
        canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
