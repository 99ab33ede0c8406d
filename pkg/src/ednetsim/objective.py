"""Cost function and constraints for sizing the network's resources.

The decision variable is an integer matrix of sanitary-resource counts,
one row per ED and one column per daily slot.  The cost adds the staffed
resource-minutes to penalty-weighted mean non-value-added (NVA) times;
service-quality constraints cap the mean NVA time per ED at 40 minutes
for yellow patients and 20 for red ones.  All NVA terms are estimated by
averaging independent simulation replications that share seeds across
candidate plans (common random numbers).
"""

from dataclasses import dataclass, field

import numpy as np

from .distributions import SLOT_MINUTES, SLOTS_PER_DAY, MeanCI, summarize
from .engine import ReplicationSpec
from .network import RED, YELLOW, PolicySpec
from .simulate import run_replication


@dataclass(frozen=True)
class ObjectiveSpec:
    """Weights and thresholds of the allocation problem.

    weights: (resource-minutes, yellow NVA, red NVA) cost coefficients.
    nva_limits: mean-NVA caps in minutes, (yellow, red), per ED.
    """

    weights: tuple = (1.0, 300.0, 600.0)
    nva_limits: tuple = (40.0, 20.0)

    def __post_init__(self):
        if len(self.weights) != 3:
            raise ValueError("expected three cost weights")
        if len(self.nva_limits) != 2:
            raise ValueError("expected NVA limits for (yellow, red)")


@dataclass(frozen=True)
class ResourcePlan:
    """Integer resource counts, rows = EDs, columns = daily slots."""

    counts: tuple

    def __post_init__(self):
        rows = []
        for row in self.counts:
            row = tuple(int(v) for v in row)
            if len(row) != SLOTS_PER_DAY:
                raise ValueError(f"each plan row needs {SLOTS_PER_DAY} slot counts")
            rows.append(row)
        object.__setattr__(self, "counts", tuple(rows))

    @classmethod
    def from_array(cls, array):
        return cls(tuple(tuple(int(v) for v in row) for row in np.asarray(array)))

    @property
    def n_eds(self):
        return len(self.counts)

    @property
    def total(self):
        return sum(sum(row) for row in self.counts)

    def as_array(self):
        return np.array(self.counts, dtype=int)

    def flat(self):
        return tuple(v for row in self.counts for v in row)

    @classmethod
    def from_flat(cls, values, n_eds):
        values = tuple(int(v) for v in values)
        if len(values) != n_eds * SLOTS_PER_DAY:
            raise ValueError(
                f"expected {n_eds * SLOTS_PER_DAY} entries, got {len(values)}"
            )
        return cls(
            tuple(
                values[i * SLOTS_PER_DAY : (i + 1) * SLOTS_PER_DAY]
                for i in range(n_eds)
            )
        )


def objective_value(plan, mean_nva, spec=None):
    """Weighted cost of a plan given per-(ED, tag) mean NVA minutes."""
    if spec is None:
        spec = ObjectiveSpec()
    plan = ResourcePlan.from_array(plan) if not isinstance(plan, ResourcePlan) else plan
    mean_nva = np.asarray(mean_nva, dtype=float)
    w_res, w_yellow, w_red = spec.weights
    return (
        w_res * SLOT_MINUTES * plan.total
        + w_yellow * mean_nva[:, YELLOW].sum()
        + w_red * mean_nva[:, RED].sum()
    )


def constraint_violations(mean_nva, spec=None):
    """Per-(ED, tag) excess of mean NVA over its cap; zero when satisfied."""
    if spec is None:
        spec = ObjectiveSpec()
    mean_nva = np.asarray(mean_nva, dtype=float)
    limits = np.array([spec.nva_limits[0], spec.nva_limits[1]], dtype=float)
    return np.maximum(0.0, mean_nva - limits)


@dataclass
class SimSummary:
    """Sample-average estimate of one plan under one policy."""

    plan: ResourcePlan
    policy_id: str
    replications: int
    seed_base: int
    rep_means: np.ndarray          # (R, n_eds, 2) per-replication mean NVA
    mean_nva: np.ndarray           # (n_eds, 2) averaged over replications
    half_width: np.ndarray         # (n_eds, 2) 95% CI half-widths (NaN when R < 2)
    objective: float
    violations: np.ndarray         # (n_eds, 2)
    redirects: np.ndarray          # (n_eds,) mean diverted patients per replication

    @property
    def total_violation(self):
        return float(self.violations.sum())

    def nva_ci(self, ed, tag):
        return MeanCI(
            mean=float(self.mean_nva[ed, tag]),
            half_width=float(self.half_width[ed, tag]),
            n=self.replications,
        )


def saa_evaluate(
    scenario,
    plan,
    policy,
    replications=30,
    base_spec=None,
    objective_spec=None,
):
    """Estimate cost and constraints of a plan by averaging replications.

    Replication k uses seed base_spec.seed + k + 1, so two plans evaluated
    with the same base share every random stream.
    """
    if replications < 1:
        raise ValueError("need at least one replication")
    if base_spec is None:
        base_spec = ReplicationSpec()
    if objective_spec is None:
        objective_spec = ObjectiveSpec()
    policy = PolicySpec.coerce(policy)
    if not isinstance(plan, ResourcePlan):
        plan = ResourcePlan.from_array(plan)
    n = scenario.n_eds

    rep_means = np.zeros((replications, n, 2))
    redirects = np.zeros((replications, n))
    for k in range(replications):
        spec = ReplicationSpec(
            horizon=base_spec.horizon,
            warmup=base_spec.warmup,
            seed=base_spec.seed + k + 1,
        )
        out = run_replication(scenario, plan.as_array(), policy, spec)
        for i in range(n):
            rep_means[k, i, YELLOW] = out.mean_nva(i, YELLOW)
            rep_means[k, i, RED] = out.mean_nva(i, RED)
        redirects[k] = out.redirects_out

    mean_nva = rep_means.mean(axis=0)
    half_width = np.full((n, 2), np.nan)
    if replications >= 2:
        for i in range(n):
            for tag in (YELLOW, RED):
                half_width[i, tag] = summarize(rep_means[:, i, tag]).half_width

    return SimSummary(
        plan=plan,
        policy_id=policy.id,
        replications=replications,
        seed_base=base_spec.seed,
        rep_means=rep_means,
        mean_nva=mean_nva,
        half_width=half_width,
        objective=objective_value(plan, mean_nva, objective_spec),
        violations=constraint_violations(mean_nva, objective_spec),
        redirects=redirects.mean(axis=0),
    )


def make_allocation_problem(
    scenario,
    policy,
    replications=30,
    base_spec=None,
    objective_spec=None,
):
    """Adapt the SAA estimate to the integer solver's calling convention.

    Returns (evaluate, n_vars) where evaluate maps a flat integer vector
    to (objective, per-(ED, tag) violation vector).  The SimSummary of
    each evaluated point is kept on evaluate.summaries for reporting.
    """
    n = scenario.n_eds
    summaries = {}

    def evaluate(x):
        plan = ResourcePlan.from_flat(x, n)
        summary = saa_evaluate(
            scenario,
            plan,
            policy,
            replications=replications,
            base_spec=base_spec,
            objective_spec=objective_spec,
        )
        summaries[plan.flat()] = summary
        return summary.objective, summary.violations.reshape(-1)

    evaluate.summaries = summaries
    return evaluate, n * SLOTS_PER_DAY
