"""Python access to the clarklab core library.

Matrices come back as complex NumPy arrays. Reports from ``validate`` and
``verify`` are returned as dictionaries.
"""

import json as _json

from . import _core
from ._core import (
    ClarklabError,
    Scenario,
    cauchy_F,
    delta_sq,
    dilation,
    lft,
    load_scenario,
    parse_scenario,
    perturbed_operator,
    phi_direct,
    phi_star,
    random_scenario,
    scenario_s1,
    scenario_s2,
    scenario_s3,
    suite_names,
    theta,
    theta0,
)

__all__ = [
    "ClarklabError",
    "Scenario",
    "cauchy_F",
    "delta_sq",
    "dilation",
    "lft",
    "load_scenario",
    "parse_scenario",
    "perturbed_operator",
    "phi_direct",
    "phi_star",
    "random_scenario",
    "scenario_s1",
    "scenario_s2",
    "scenario_s3",
    "suite_names",
    "theta",
    "theta0",
    "validate",
    "verify",
]


def validate(scenario):
    """Measure checks as a report dictionary."""
    return _json.loads(_core.validate(scenario))


def verify(scenario, suite="all", seed=1):
    """Run a verification suite and return the report dictionary (no timestamp)."""
    return _json.loads(_core.verify(scenario, suite, seed))
