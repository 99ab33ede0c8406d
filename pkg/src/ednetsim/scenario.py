"""Scenario files: every input of a study in one structured text file.

A scenario bundles the ED list with arrival volumes (annual counts or
per-minute rates), visit-time distributions, the inter-ED transport
matrix, the active diversion policy, objective weights, replication
defaults, and optionally observed waits (for calibration) and a starting
resource plan.  Validation errors name the offending key path so a bad
file can be fixed without reading this module.
"""

import os
from dataclasses import dataclass

import numpy as np
import yaml

from .distributions import (
    SLOTS_PER_DAY,
    ArrivalProcess,
    LosDistribution,
    rate_from_annual_count,
)
from .engine import ReplicationSpec
from .network import RED, YELLOW, PolicySpec, validate_transfer_matrix
from .objective import ObjectiveSpec

PAPER_ED_COUNT = 6


class ScenarioError(ValueError):
    """A scenario file failed validation; the message names the key path."""


def _require(mapping, key, path):
    if not isinstance(mapping, dict):
        raise ScenarioError(f"{path}: expected a mapping, got {type(mapping).__name__}")
    if key not in mapping:
        raise ScenarioError(f"{path}.{key}: required key is missing")
    return mapping[key]


def _numbers(value, count, path, minimum=None):
    if not isinstance(value, (list, tuple)) or len(value) != count:
        raise ScenarioError(f"{path}: expected a list of {count} numbers")
    out = []
    for k, v in enumerate(value):
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise ScenarioError(f"{path}[{k}]: expected a number, got {v!r}")
        if minimum is not None and v < minimum:
            raise ScenarioError(f"{path}[{k}]: value {v} below minimum {minimum}")
        out.append(float(v))
    return out


def _arrival_process(node, path):
    if node is None:
        return None
    if not isinstance(node, dict):
        raise ScenarioError(f"{path}: expected a mapping with 'counts' or 'rates'")
    has_counts = "counts" in node
    has_rates = "rates" in node
    if has_counts == has_rates:
        raise ScenarioError(f"{path}: give exactly one of 'counts' or 'rates'")
    if has_counts:
        counts = _numbers(node["counts"], SLOTS_PER_DAY, f"{path}.counts", minimum=0.0)
        rates = [rate_from_annual_count(c) for c in counts]
    else:
        rates = _numbers(node["rates"], SLOTS_PER_DAY, f"{path}.rates", minimum=0.0)
    try:
        return ArrivalProcess(rates)
    except ValueError as exc:
        raise ScenarioError(f"{path}: {exc}") from None


def _los_distribution(node, path):
    if not isinstance(node, dict) or "family" not in node:
        raise ScenarioError(f"{path}: expected a mapping with a 'family' key")
    params = {k: v for k, v in node.items() if k != "family"}
    try:
        return LosDistribution(node["family"], params)
    except ValueError as exc:
        raise ScenarioError(f"{path}: {exc}") from None


def _los_slots(node, path):
    """One distribution per slot; a single mapping applies to all slots."""
    if isinstance(node, list):
        if len(node) != SLOTS_PER_DAY:
            raise ScenarioError(f"{path}: per-slot list needs {SLOTS_PER_DAY} entries")
        return [_los_distribution(item, f"{path}[{k}]") for k, item in enumerate(node)]
    dist = _los_distribution(node, path)
    return [dist] * SLOTS_PER_DAY


def _real_waits(node, path):
    waits = np.zeros((SLOTS_PER_DAY, 2))
    waits[:, YELLOW] = _numbers(
        _require(node, "yellow", path), SLOTS_PER_DAY, f"{path}.yellow", minimum=0.0
    )
    waits[:, RED] = _numbers(
        _require(node, "red", path), SLOTS_PER_DAY, f"{path}.red", minimum=0.0
    )
    return waits


@dataclass
class Scenario:
    """Fully validated study inputs; see parse_scenario."""

    name: str
    mode: str
    ed_names: list
    arrivals: list          # [ed][tag] -> ArrivalProcess | None
    los: list               # [ed][tag][slot] -> LosDistribution
    transfer: np.ndarray
    policy: PolicySpec
    objective_spec: ObjectiveSpec
    replication: ReplicationSpec
    plan_bounds: tuple = (2, 10)
    real_waits: np.ndarray | None = None      # (n_eds, 3 slots, 2 tags)
    starting_plan: np.ndarray | None = None   # (n_eds, 3 slots) ints

    @property
    def n_eds(self):
        return len(self.ed_names)

    def isolate(self, ed):
        """A single-ED copy of this scenario, decoupled from the network."""
        if not 0 <= ed < self.n_eds:
            raise ValueError(f"ED index {ed} out of range [0, {self.n_eds})")
        return Scenario(
            name=f"{self.name}:{self.ed_names[ed]}",
            mode="generic",
            ed_names=[self.ed_names[ed]],
            arrivals=[self.arrivals[ed]],
            los=[self.los[ed]],
            transfer=np.zeros((1, 1)),
            policy=PolicySpec("P1"),
            objective_spec=self.objective_spec,
            replication=self.replication,
            plan_bounds=self.plan_bounds,
            real_waits=None if self.real_waits is None else self.real_waits[ed : ed + 1],
            starting_plan=None
            if self.starting_plan is None
            else self.starting_plan[ed : ed + 1],
        )


def scenario_from_dict(data, name="inline"):
    """Validate a parsed scenario mapping into a Scenario."""
    if not isinstance(data, dict):
        raise ScenarioError("scenario: top level must be a mapping")
    name = str(data.get("name", name))
    mode = str(data.get("mode", "generic"))
    if mode not in ("paper", "generic"):
        raise ScenarioError(f"mode: expected 'paper' or 'generic', got {mode!r}")

    eds = _require(data, "eds", "scenario")
    if not isinstance(eds, list) or not eds:
        raise ScenarioError("eds: expected a non-empty list")
    if mode == "paper" and len(eds) != PAPER_ED_COUNT:
        raise ScenarioError(
            f"eds: paper mode requires exactly {PAPER_ED_COUNT} EDs, got {len(eds)}"
        )

    ed_names, arrivals, los, real_rows = [], [], [], []
    for i, ed in enumerate(eds):
        path = f"eds[{i}]"
        if not isinstance(ed, dict):
            raise ScenarioError(f"{path}: expected a mapping")
        ed_names.append(str(ed.get("name", f"ED{i + 1}")))

        arr_node = ed.get("arrivals") or {}
        if not isinstance(arr_node, dict):
            raise ScenarioError(f"{path}.arrivals: expected a mapping")
        for key in arr_node:
            if key not in ("yellow", "red"):
                raise ScenarioError(f"{path}.arrivals.{key}: unknown tag")
        arrivals.append(
            (
                _arrival_process(arr_node.get("yellow"), f"{path}.arrivals.yellow"),
                _arrival_process(arr_node.get("red"), f"{path}.arrivals.red"),
            )
        )

        los_node = _require(ed, "los", path)
        los.append(
            (
                _los_slots(_require(los_node, "yellow", f"{path}.los"), f"{path}.los.yellow"),
                _los_slots(_require(los_node, "red", f"{path}.los"), f"{path}.los.red"),
            )
        )

        real_rows.append(
            None
            if "real_waits" not in ed
            else _real_waits(ed["real_waits"], f"{path}.real_waits")
        )

    n = len(eds)
    if n == 1:
        transfer = np.zeros((1, 1))
        if "transfer_minutes" in data:
            transfer = np.asarray(data["transfer_minutes"], dtype=float)
    else:
        transfer = np.asarray(_require(data, "transfer_minutes", "scenario"), dtype=float)
    try:
        transfer = validate_transfer_matrix(transfer)
    except ValueError as exc:
        raise ScenarioError(f"transfer_minutes: {exc}") from None
    if transfer.shape[0] != n:
        raise ScenarioError(
            f"transfer_minutes: matrix is {transfer.shape[0]}x{transfer.shape[1]} "
            f"but the scenario has {n} EDs"
        )

    pol_node = data.get("policy") or {"id": "P1"}
    if isinstance(pol_node, str):
        pol_node = {"id": pol_node}
    if not isinstance(pol_node, dict) or "id" not in pol_node:
        raise ScenarioError("policy: expected a policy id or a mapping with 'id'")
    thresholds = pol_node.get("p3_thresholds")
    if thresholds is not None:
        thresholds = [
            int(v) for v in _numbers(thresholds, n, "policy.p3_thresholds", minimum=1)
        ]
    try:
        policy = PolicySpec(
            id=str(pol_node["id"]),
            p3_thresholds=thresholds,
            cascade=bool(pol_node.get("cascade", False)),
        )
    except ValueError as exc:
        raise ScenarioError(f"policy.id: {exc}") from None

    obj_node = data.get("objective") or {}
    try:
        objective_spec = ObjectiveSpec(
            weights=tuple(
                _numbers(obj_node["weights"], 3, "objective.weights")
                if "weights" in obj_node
                else ObjectiveSpec.weights
            ),
            nva_limits=tuple(
                _numbers(obj_node["nva_limits"], 2, "objective.nva_limits", minimum=0.0)
                if "nva_limits" in obj_node
                else ObjectiveSpec.nva_limits
            ),
        )
    except ValueError as exc:
        raise ScenarioError(f"objective: {exc}") from None

    rep_node = data.get("replication") or {}
    if "horizon_minutes" in rep_node and "horizon_days" in rep_node:
        raise ScenarioError("replication: give horizon_minutes or horizon_days, not both")
    if "warmup_minutes" in rep_node and "warmup_hours" in rep_node:
        raise ScenarioError("replication: give warmup_minutes or warmup_hours, not both")
    defaults = ReplicationSpec()
    horizon = defaults.horizon
    if "horizon_minutes" in rep_node:
        horizon = float(rep_node["horizon_minutes"])
    elif "horizon_days" in rep_node:
        horizon = float(rep_node["horizon_days"]) * 1440.0
    warmup = defaults.warmup
    if "warmup_minutes" in rep_node:
        warmup = float(rep_node["warmup_minutes"])
    elif "warmup_hours" in rep_node:
        warmup = float(rep_node["warmup_hours"]) * 60.0
    try:
        replication = ReplicationSpec(
            horizon=horizon, warmup=warmup, seed=int(rep_node.get("seed", defaults.seed))
        )
    except ValueError as exc:
        raise ScenarioError(f"replication: {exc}") from None

    bounds_node = data.get("plan_bounds", [2, 10])
    bounds = _numbers(bounds_node, 2, "plan_bounds", minimum=1)
    if bounds != [int(b) for b in bounds] or bounds[0] > bounds[1]:
        raise ScenarioError(f"plan_bounds: expected integer [low, high], got {bounds_node}")
    plan_bounds = (int(bounds[0]), int(bounds[1]))

    with_waits = [i for i, row in enumerate(real_rows) if row is not None]
    if with_waits and len(with_waits) != n:
        missing = ", ".join(ed_names[i] for i in range(n) if real_rows[i] is None)
        raise ScenarioError(f"eds: real_waits present for some EDs but missing for {missing}")
    real_waits = np.stack(real_rows) if with_waits else None

    starting_plan = None
    if "starting_plan" in data:
        rows = data["starting_plan"]
        if not isinstance(rows, list) or len(rows) != n:
            raise ScenarioError(f"starting_plan: expected {n} rows of {SLOTS_PER_DAY} counts")
        plan = []
        for i, row in enumerate(rows):
            values = _numbers(row, SLOTS_PER_DAY, f"starting_plan[{i}]", minimum=plan_bounds[0])
            if any(v != int(v) for v in values):
                raise ScenarioError(f"starting_plan[{i}]: counts must be integers")
            if any(v > plan_bounds[1] for v in values):
                raise ScenarioError(
                    f"starting_plan[{i}]: count above plan_bounds max {plan_bounds[1]}"
                )
            plan.append([int(v) for v in values])
        starting_plan = np.array(plan, dtype=int)

    return Scenario(
        name=name,
        mode=mode,
        ed_names=ed_names,
        arrivals=arrivals,
        los=los,
        transfer=transfer,
        policy=policy,
        objective_spec=objective_spec,
        replication=replication,
        plan_bounds=plan_bounds,
        real_waits=real_waits,
        starting_plan=starting_plan,
    )


def parse_scenario(path):
    """Load and validate a scenario file."""
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ScenarioError(f"scenario file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ScenarioError(f"{path}: not well-formed: {exc}") from None
    return scenario_from_dict(data, name=os.path.splitext(os.path.basename(str(path)))[0])
