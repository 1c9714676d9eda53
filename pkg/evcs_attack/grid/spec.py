"""
Declarative grid description: nodes, branches, generators, loads and EVCS demand statistics
"""

from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

HOURS_PER_WEEK = 168
DEFAULT_LOAD_DAMPING_FRACTION = 0.015  # D_L as a fraction of nodal load, per rad/s

NODE_KINDS = ("generator", "load", "reference")


@dataclass(frozen=True)
class NodeRecord:
    """A bus of the reduced grid"""

    id: str
    kind: str  # "generator", "load" or "reference"
    base_kv: float = 0.0


@dataclass(frozen=True)
class GeneratorParams:
    """Swing-equation and AGC parameters of a generator (or tie-in) node, per-unit on base_mva"""

    node: str
    inertia: float  # M, pu * s^2 / rad
    damping: float  # D_G, pu / (rad/s)
    k_p: float
    k_i: float
    rating: float = 0.0
    dispatch: Optional[float] = None  # None on the reference node means slack


@dataclass(frozen=True)
class LoadParams:
    """Load node parameters and its hour-of-week EVCS demand statistics, per-unit on base_mva"""

    node: str
    p_bar: float
    damping: float  # D_L, pu / (rad/s)
    evcs_mean: Tuple[float, ...] = ()
    evcs_stdev: Tuple[float, ...] = ()
    evcs_max: float = 0.0

    @property
    def peak_hour(self) -> int:
        """Hour of week with the largest mean EVCS demand (first one on ties)"""
        if not self.evcs_mean:
            return 0
        return max(range(len(self.evcs_mean)), key=lambda h: (self.evcs_mean[h], -h))

    def cap(self, hour: Optional[int] = None) -> float:
        """Compromisable EVCS demand: the mean at `hour`, or evcs_max when no hour is given"""
        if hour is None:
            return self.evcs_max
        return self.evcs_mean[_check_hour(hour, len(self.evcs_mean))]

    def stdev_at(self, hour: Optional[int] = None) -> float:
        """Standard deviation of the EVCS estimate at `hour` (default: the peak hour)"""
        if not self.evcs_stdev:
            return 0.0
        if hour is None:
            hour = self.peak_hour
        return self.evcs_stdev[_check_hour(hour, len(self.evcs_stdev))]

    def scaled(self, factor: float) -> "LoadParams":
        return replace(
            self,
            evcs_mean=tuple(v * factor for v in self.evcs_mean),
            evcs_stdev=tuple(v * factor for v in self.evcs_stdev),
            evcs_max=self.evcs_max * factor,
        )


@dataclass(frozen=True)
class Branch:
    """A lossless line or transformer; susceptance is the imaginary part of its admittance"""

    from_node: str
    to_node: str
    susceptance: float


@dataclass(frozen=True)
class GridSpec:
    """Complete grid description"""

    base_mva: float
    f_s: float
    nodes: Tuple[NodeRecord, ...] = ()
    generators: Tuple[GeneratorParams, ...] = ()
    loads: Tuple[LoadParams, ...] = ()
    branches: Tuple[Branch, ...] = ()
    name: str = ""

    @property
    def reference_id(self) -> str:
        return next(n.id for n in self.nodes if n.kind == "reference")

    @property
    def generator_ids(self) -> List[str]:
        return [g.node for g in self.generators]

    @property
    def load_ids(self) -> List[str]:
        return [ld.node for ld in self.loads]

    @property
    def bus_order(self) -> List[str]:
        """Row/column order of the admittance matrix: generator nodes, then load nodes"""
        return self.generator_ids + self.load_ids

    def generator(self, node: str) -> GeneratorParams:
        for g in self.generators:
            if g.node == node:
                return g
        raise KeyError(node)

    def load(self, node: str) -> LoadParams:
        for ld in self.loads:
            if ld.node == node:
                return ld
        raise KeyError(node)

    def dispatch_of(self, node: str) -> float:
        """Scheduled output of a generator; the reference node picks up the slack when unset"""
        gen = self.generator(node)
        if gen.dispatch is not None:
            return gen.dispatch
        if node != self.reference_id:
            return 0.0
        others = sum(g.dispatch or 0.0 for g in self.generators if g.node != node)
        return sum(ld.p_bar for ld in self.loads) - others

    def to_mw(self, value_pu: float) -> float:
        return value_pu * self.base_mva

    def to_pu(self, value_mw: float) -> float:
        return value_mw / self.base_mva


@dataclass(frozen=True)
class StateIndexMap:
    """Layout of the state vector x = [delta, omega, theta]"""

    generators: Tuple[str, ...]
    loads: Tuple[str, ...]

    @classmethod
    def from_spec(cls, spec: GridSpec) -> "StateIndexMap":
        return cls(tuple(spec.generator_ids), tuple(spec.load_ids))

    @property
    def n(self) -> int:
        return 2 * len(self.generators) + len(self.loads)

    @property
    def delta_slice(self) -> slice:
        return slice(0, len(self.generators))

    @property
    def omega_slice(self) -> slice:
        g = len(self.generators)
        return slice(g, 2 * g)

    @property
    def theta_slice(self) -> slice:
        g = len(self.generators)
        return slice(2 * g, 2 * g + len(self.loads))

    def delta(self, node: str) -> int:
        return self.generators.index(node)

    def omega(self, node: str) -> int:
        return len(self.generators) + self.generators.index(node)

    def theta(self, node: str) -> int:
        return 2 * len(self.generators) + self.loads.index(node)

    def state_names(self) -> List[str]:
        return (
            [f"delta_{g}" for g in self.generators]
            + [f"omega_{g}" for g in self.generators]
            + [f"theta_{ld}" for ld in self.loads]
        )


def _check_hour(hour: int, length: int) -> int:
    if not 0 <= hour < length:
        raise ValueError(f"hour of week must be in [0, {length - 1}], got {hour}")
    return hour
