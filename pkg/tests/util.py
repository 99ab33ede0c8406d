"""Scenario builders shared across the test suite."""

import numpy as np

from ednetsim import scenario_from_dict


def exp_los(mean):
    return {"family": "exponential", "mean": mean}


def single_ed_scenario(
    rates_yellow=(0.1, 0.1, 0.1),
    rates_red=None,
    los_mean=30.0,
    plan_bounds=(1, 20),
    extra=None,
):
    """One isolated ED with exponential visit times."""
    ed = {"name": "A", "arrivals": {}, "los": {"yellow": exp_los(los_mean), "red": exp_los(los_mean)}}
    if rates_yellow is not None:
        ed["arrivals"]["yellow"] = {"rates": list(rates_yellow)}
    if rates_red is not None:
        ed["arrivals"]["red"] = {"rates": list(rates_red)}
    data = {"eds": [ed], "plan_bounds": list(plan_bounds)}
    if extra:
        data.update(extra)
    return scenario_from_dict(data)


def network_scenario(
    n=3,
    rates_yellow=(0.05, 0.05, 0.05),
    rates_red=(0.01, 0.01, 0.01),
    los_mean=60.0,
    policy="P1",
    transfer=None,
    plan_bounds=(1, 20),
    extra=None,
):
    """A small symmetric network; transfer times default to 10+5|i-j| minutes."""
    eds = []
    for i in range(n):
        eds.append(
            {
                "name": f"ED{i + 1}",
                "arrivals": {
                    "yellow": {"rates": list(rates_yellow)},
                    "red": {"rates": list(rates_red)},
                },
                "los": {"yellow": exp_los(los_mean), "red": exp_los(los_mean)},
            }
        )
    if transfer is None:
        transfer = [
            [0.0 if i == j else 10.0 + 5.0 * abs(i - j) for j in range(n)]
            for i in range(n)
        ]
    data = {
        "eds": eds,
        "transfer_minutes": transfer,
        "policy": policy,
        "plan_bounds": list(plan_bounds),
    }
    if extra:
        data.update(extra)
    return scenario_from_dict(data)


def plan_for(scenario, value):
    """Constant capacity plan of one value everywhere."""
    return np.full((scenario.n_eds, 3), int(value), dtype=int)


def asymmetric_pair_scenario(transfer=12.0):
    """An overloaded ED next to a mostly idle one; diversion fires often.

    Meant to run with plan [[1,1,1],[4,4,4]].
    """
    return scenario_from_dict(
        {
            "eds": [
                {
                    "name": "busy",
                    "arrivals": {"yellow": {"rates": [0.2, 0.2, 0.2]}},
                    "los": {"yellow": exp_los(60.0), "red": exp_los(60.0)},
                },
                {
                    "name": "idle",
                    "arrivals": {"yellow": {"rates": [0.002, 0.002, 0.002]}},
                    "los": {"yellow": exp_los(60.0), "red": exp_los(60.0)},
                },
            ],
            "transfer_minutes": [[0.0, transfer], [transfer, 0.0]],
            "plan_bounds": [1, 20],
        }
    )
