"""
Semantic validation of a parsed GridSpec.

Collects every violated invariant as a GridValidationError naming the offending field,
plus non-fatal warnings.
"""

import math
from collections import Counter
from typing import List

import networkx as nx

from evcs_attack.errors import GridValidationError
from evcs_attack.grid.spec import HOURS_PER_WEEK, NODE_KINDS, GridSpec


class GridValidator:
    """Checks a GridSpec against the structural and parameter invariants of the model"""

    def __init__(self, spec: GridSpec):
        self.spec = spec
        self.errors: List[GridValidationError] = []
        self.warnings: List[str] = []

    def validate(self) -> bool:
        """Main validation method"""
        self.errors = []
        self.warnings = []

        self._validate_system()
        self._validate_nodes()
        self._validate_generators()
        self._validate_loads()
        self._validate_branches()

        # Topology checks need sane node ids first
        if not self.errors:
            self._validate_connectivity()

        return len(self.errors) == 0

    def _add_error(self, field: str, message: str):
        self.errors.append(GridValidationError(field, message))

    def _validate_system(self):
        if not (math.isfinite(self.spec.base_mva) and self.spec.base_mva > 0):
            self._add_error("base_mva", f"must be positive, got {self.spec.base_mva}")
        if not (math.isfinite(self.spec.f_s) and self.spec.f_s > 0):
            self._add_error("f_s_hz", f"must be positive, got {self.spec.f_s}")

    def _validate_nodes(self):
        seen = set()
        for i, node in enumerate(self.spec.nodes):
            if node.id in seen:
                self._add_error(f"nodes[{i}].id", f"duplicate node id '{node.id}'")
            seen.add(node.id)
            if node.kind not in NODE_KINDS:
                self._add_error(f"nodes[{i}].kind", f"'{node.kind}' is not one of {', '.join(NODE_KINDS)}")

        references = [n.id for n in self.spec.nodes if n.kind == "reference"]
        if len(references) != 1:
            self._add_error("nodes", f"exactly one reference node required, found {len(references)}")

    def _validate_generators(self):
        kinds = {n.id: n.kind for n in self.spec.nodes}
        counts = Counter(g.node for g in self.spec.generators)

        for i, gen in enumerate(self.spec.generators):
            where = f"generators[{i}]"
            if gen.node not in kinds:
                self._add_error(f"{where}.node", f"unknown node '{gen.node}'")
            elif kinds[gen.node] not in ("generator", "reference"):
                self._add_error(f"{where}.node", f"node '{gen.node}' is a {kinds[gen.node]} node")
            elif counts[gen.node] > 1:
                self._add_error(f"{where}.node", f"node '{gen.node}' has more than one generator entry")

            if not gen.inertia > 0:
                self._add_error(f"{where}.inertia_pu_s2_per_rad", f"must be positive, got {gen.inertia}")
            for key, value in (
                ("damping_pu_s_per_rad", gen.damping),
                ("k_p_pu_s_per_rad", gen.k_p),
                ("k_i_pu_per_rad", gen.k_i),
            ):
                if not (math.isfinite(value) and value >= 0):
                    self._add_error(f"{where}.{key}", f"must be non-negative, got {value}")
            if gen.rating and gen.dispatch is not None and gen.dispatch > gen.rating:
                self.warnings.append(f"{where}: dispatch {gen.dispatch} pu exceeds rating {gen.rating} pu")

        for node in self.spec.nodes:
            if node.kind in ("generator", "reference") and counts[node.id] == 0:
                self._add_error("generators", f"{node.kind} node '{node.id}' has no generator entry")

    def _validate_loads(self):
        kinds = {n.id: n.kind for n in self.spec.nodes}
        counts = Counter(ld.node for ld in self.spec.loads)

        for i, load in enumerate(self.spec.loads):
            where = f"loads[{i}]"
            if load.node not in kinds:
                self._add_error(f"{where}.node", f"unknown node '{load.node}'")
            elif kinds[load.node] != "load":
                self._add_error(f"{where}.node", f"node '{load.node}' is a {kinds[load.node]} node")
            elif counts[load.node] > 1:
                self._add_error(f"{where}.node", f"node '{load.node}' has more than one load entry")

            if not (math.isfinite(load.damping) and load.damping > 0):
                self._add_error(f"{where}.damping_pu_s_per_rad", f"must be positive, got {load.damping}")
            if not (math.isfinite(load.evcs_max) and load.evcs_max >= 0):
                self._add_error(f"{where}.evcs.max", f"must be non-negative, got {load.evcs_max}")
            if load.evcs_mean and len(load.evcs_mean) != HOURS_PER_WEEK:
                self._add_error(f"{where}.evcs.profile", f"expected {HOURS_PER_WEEK} hours")
            if any(not (math.isfinite(s) and s >= 0) for s in load.evcs_stdev):
                self._add_error(f"{where}.evcs.profile", "stdev values must be non-negative")

        for node in self.spec.nodes:
            if node.kind == "load" and counts[node.id] == 0:
                self._add_error("loads", f"load node '{node.id}' has no load entry")

    def _validate_branches(self):
        ids = {n.id for n in self.spec.nodes}
        for i, branch in enumerate(self.spec.branches):
            where = f"branches[{i}]"
            for key, node in (("from", branch.from_node), ("to", branch.to_node)):
                if node not in ids:
                    self._add_error(f"{where}.{key}", f"unknown node '{node}'")
            if branch.from_node == branch.to_node:
                self._add_error(f"{where}.to", f"branch connects '{branch.from_node}' to itself")
            if not math.isfinite(branch.susceptance) or branch.susceptance == 0:
                self._add_error(f"{where}.susceptance_pu", f"must be finite and nonzero, got {branch.susceptance}")
            elif branch.susceptance < 0:
                self.warnings.append(f"{where}: negative susceptance (series compensation?)")

    def _validate_connectivity(self):
        graph = nx.Graph()
        graph.add_nodes_from(n.id for n in self.spec.nodes)
        graph.add_edges_from((b.from_node, b.to_node) for b in self.spec.branches)
        if graph.number_of_nodes() and not nx.is_connected(graph):
            islands = sorted(sorted(c) for c in nx.connected_components(graph))
            self._add_error("branches", f"grid is not connected: islands {islands}")
