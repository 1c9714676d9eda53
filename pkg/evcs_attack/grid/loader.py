"""
Reader and writer for grid spec JSON files (with optional CSV tables for branches and loads)
"""

import json
import logging
import math
import numbers
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import pandas as pd

from evcs_attack.errors import GridParseError, GridValidationError
from evcs_attack.grid.spec import (
    DEFAULT_LOAD_DAMPING_FRACTION,
    HOURS_PER_WEEK,
    Branch,
    GeneratorParams,
    GridSpec,
    LoadParams,
    NodeRecord,
)
from evcs_attack.grid.validator import GridValidator

logger = logging.getLogger(__name__)

# Multipliers that bring a suffixed key to MW; per-unit keys are divided by nothing
_POWER_SUFFIXES = {"_pu": None, "_mw": 1.0, "_kw": 1e-3}

BRANCH_COLUMNS = ["from", "to", "susceptance_pu"]
LOAD_COLUMNS = ["node", "p_mw", "damping_pu_s_per_rad", "evcs_max_kw"]


class GridLoader:
    """Turns a grid spec document into a GridSpec, converting MW/kW quantities to per-unit"""

    def __init__(self):
        self.base_mva = 1.0
        self.source: Optional[Path] = None

    def load_file(self, path: Union[str, Path]) -> GridSpec:
        path = Path(path)
        if not path.exists():
            raise GridParseError("file not found", path)
        try:
            with open(path, "r", encoding="utf-8") as f:
                document = json.load(f)
        except json.JSONDecodeError as e:
            raise GridParseError(f"invalid JSON at line {e.lineno}: {e.msg}", path) from e
        self.source = path
        return self.load_document(document)

    def load_document(self, document: Dict[str, Any]) -> GridSpec:
        if not isinstance(document, dict):
            raise GridParseError("top level must be an object", self.source)

        for key in ("base_mva", "f_s_hz", "nodes", "branches", "generators", "loads"):
            if key not in document:
                raise GridParseError(f"missing top-level key '{key}'", self.source)

        self.base_mva = _number(document, "base_mva", "base_mva")
        nodes = tuple(self._parse_node(rec, i) for i, rec in enumerate(_records(document["nodes"], "nodes")))
        generators = tuple(
            self._parse_generator(rec, i) for i, rec in enumerate(_records(document["generators"], "generators"))
        )

        evcs_by_node = document.get("evcs", {})
        load_records = self._table(document["loads"], "loads", LOAD_COLUMNS)
        loads = tuple(self._parse_load(rec, i, evcs_by_node) for i, rec in enumerate(load_records))

        branch_records = self._table(document["branches"], "branches", BRANCH_COLUMNS)
        branches = tuple(self._parse_branch(rec, i) for i, rec in enumerate(branch_records))

        spec = GridSpec(
            base_mva=self.base_mva,
            f_s=_number(document, "f_s_hz", "f_s_hz"),
            nodes=nodes,
            generators=generators,
            loads=loads,
            branches=branches,
            name=str(document.get("name", "")),
        )
        logger.debug(
            "Parsed grid %r: %d nodes, %d branches, %d generators, %d loads",
            spec.name,
            len(nodes),
            len(branches),
            len(generators),
            len(loads),
        )
        return spec

    def _table(self, value: Any, where: str, columns: List[str]) -> List[Dict[str, Any]]:
        """Inline list of records, or a CSV file path relative to the spec file"""
        if isinstance(value, list):
            return _records(value, where)
        if not isinstance(value, str):
            raise GridParseError(f"'{where}' must be a list or a CSV path", self.source)

        base_dir = self.source.parent if self.source else Path.cwd()
        csv_path = base_dir / value
        if not csv_path.exists():
            raise GridParseError(f"'{where}' table not found: {csv_path}", self.source)
        try:
            frame = pd.read_csv(csv_path, dtype={columns[0]: str})
        except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise GridParseError(f"unreadable CSV for '{where}': {e}", csv_path) from e

        if columns[0] not in frame.columns:
            raise GridParseError(f"CSV for '{where}' must start with columns {columns}", csv_path)
        logger.debug("Read %d %s rows from %s", len(frame), where, csv_path)
        records = frame.to_dict(orient="records")
        # Empty cells come back as NaN; treat them as absent
        return [{k: v for k, v in rec.items() if not (isinstance(v, float) and math.isnan(v))} for rec in records]

    def _parse_node(self, rec: Dict[str, Any], i: int) -> NodeRecord:
        where = f"nodes[{i}]"
        return NodeRecord(
            id=_text(rec, "id", where),
            kind=_text(rec, "kind", where),
            base_kv=float(rec.get("base_kv", 0.0)),
        )

    def _parse_generator(self, rec: Dict[str, Any], i: int) -> GeneratorParams:
        where = f"generators[{i}]"
        return GeneratorParams(
            node=_text(rec, "node", where),
            inertia=_number(rec, "inertia_pu_s2_per_rad", where),
            damping=_number(rec, "damping_pu_s_per_rad", where),
            k_p=_number(rec, "k_p_pu_s_per_rad", where),
            k_i=_number(rec, "k_i_pu_per_rad", where),
            rating=self._power(rec, "rating", where, default=0.0),
            dispatch=self._power(rec, "dispatch", where, default=None),
        )

    def _parse_load(self, rec: Dict[str, Any], i: int, evcs_by_node: Dict[str, Any]) -> LoadParams:
        where = f"loads[{i}]"
        node = _text(rec, "node", where)
        p_bar = self._power(rec, "p", where)
        if "damping_pu_s_per_rad" in rec:
            damping = _number(rec, "damping_pu_s_per_rad", where)
        else:
            damping = DEFAULT_LOAD_DAMPING_FRACTION * p_bar

        evcs = rec.get("evcs", evcs_by_node.get(node, {}))
        evcs_where = f"{where}.evcs" if "evcs" in rec else f"evcs.{node}"
        mean, stdev = self._profile(evcs.get("profile", []), evcs_where)
        evcs_max = self._power(evcs, "max", evcs_where, default=None)
        if evcs_max is None:
            evcs_max = self._power(rec, "evcs_max", where, default=None)
        if evcs_max is None:
            evcs_max = max(mean, default=0.0)

        return LoadParams(
            node=node,
            p_bar=p_bar,
            damping=damping,
            evcs_mean=mean,
            evcs_stdev=stdev,
            evcs_max=evcs_max,
        )

    def _profile(self, days: Any, where: str):
        """Flatten 7 daily arrays of 24 {mean, stdev} records into hour-of-week tuples"""
        if not days:
            return (), ()
        if not isinstance(days, list) or not all(isinstance(d, list) for d in days):
            raise GridParseError(f"{where}.profile must be a list of daily lists", self.source)

        mean: List[float] = []
        stdev: List[float] = []
        for d, day in enumerate(days):
            for h, slot in enumerate(day):
                slot_where = f"{where}.profile[{d}][{h}]"
                mean.append(self._power(slot, "mean", slot_where))
                stdev.append(self._power(slot, "stdev", slot_where, default=0.0))

        if len(mean) != HOURS_PER_WEEK:
            raise GridValidationError(f"{where}.profile", f"expected 7 x 24 hourly records, got {len(mean)}")
        return tuple(mean), tuple(stdev)

    def _parse_branch(self, rec: Dict[str, Any], i: int) -> Branch:
        where = f"branches[{i}]"
        if "susceptance_pu" in rec:
            b = _number(rec, "susceptance_pu", where)
        elif "reactance_pu" in rec:
            x = _number(rec, "reactance_pu", where)
            if x == 0:
                raise GridValidationError(f"{where}.reactance_pu", "reactance must be nonzero")
            b = 1.0 / x
        else:
            raise GridParseError(f"{where} needs 'susceptance_pu' or 'reactance_pu'", self.source)
        return Branch(from_node=_text(rec, "from", where), to_node=_text(rec, "to", where), susceptance=b)

    def _power(self, rec: Dict[str, Any], stem: str, where: str, default: Any = ...) -> Any:
        """Read `<stem>_pu`, `<stem>_mw` or `<stem>_kw` and return per-unit"""
        for suffix, to_mw in _POWER_SUFFIXES.items():
            key = stem + suffix
            if key in rec:
                value = _number(rec, key, where)
                return value if to_mw is None else value * to_mw / self.base_mva
        if default is ...:
            raise GridParseError(f"{where} is missing '{stem}_mw' (or _kw/_pu)", self.source)
        return default


def load_grid_spec(path: Union[str, Path]) -> GridSpec:
    """Parse and validate a grid spec file; raises the first validation error found"""
    spec = GridLoader().load_file(path)
    validator = GridValidator(spec)
    if not validator.validate():
        for error in validator.errors[1:]:
            logger.warning("Additional grid error: %s", error)
        raise validator.errors[0]
    for warning in validator.warnings:
        logger.warning("%s: %s", Path(path).name, warning)
    logger.info("Loaded grid %r from %s", spec.name, path)
    return spec


def dump_grid_spec(spec: GridSpec, path: Union[str, Path]) -> Path:
    """Write the canonical per-unit form of `spec`"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    document = {
        "name": spec.name,
        "base_mva": spec.base_mva,
        "f_s_hz": spec.f_s,
        "nodes": [{"id": n.id, "kind": n.kind, "base_kv": n.base_kv} for n in spec.nodes],
        "branches": [
            {"from": b.from_node, "to": b.to_node, "susceptance_pu": b.susceptance} for b in spec.branches
        ],
        "generators": [_generator_record(g) for g in spec.generators],
        "loads": [_load_record(ld) for ld in spec.loads],
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(document, f, indent=2)
        f.write("\n")
    return path


def _generator_record(gen: GeneratorParams) -> Dict[str, Any]:
    record = {
        "node": gen.node,
        "inertia_pu_s2_per_rad": gen.inertia,
        "damping_pu_s_per_rad": gen.damping,
        "k_p_pu_s_per_rad": gen.k_p,
        "k_i_pu_per_rad": gen.k_i,
        "rating_pu": gen.rating,
    }
    if gen.dispatch is not None:
        record["dispatch_pu"] = gen.dispatch
    return record


def _load_record(load: LoadParams) -> Dict[str, Any]:
    profile = []
    for day in range(len(load.evcs_mean) // 24):
        hours = range(day * 24, day * 24 + 24)
        profile.append([{"mean_pu": load.evcs_mean[h], "stdev_pu": load.evcs_stdev[h]} for h in hours])
    return {
        "node": load.node,
        "p_pu": load.p_bar,
        "damping_pu_s_per_rad": load.damping,
        "evcs": {"max_pu": load.evcs_max, "profile": profile},
    }


def _records(value: Any, where: str) -> List[Dict[str, Any]]:
    if not isinstance(value, list) or not all(isinstance(r, dict) for r in value):
        raise GridParseError(f"'{where}' must be a list of objects")
    return value


def _text(rec: Dict[str, Any], key: str, where: str) -> str:
    if key not in rec:
        raise GridParseError(f"{where} is missing '{key}'")
    return str(rec[key])


def _number(rec: Dict[str, Any], key: str, where: str) -> float:
    if key not in rec:
        raise GridParseError(f"{where} is missing '{key}'")
    value = rec[key]
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise GridValidationError(f"{where}.{key}" if where != key else key, f"expected a number, got {value!r}")
    return float(value)
