import logging
from dataclasses import dataclass

import numpy as np
import polars as pl

from .bundle import bracket_table_check
from .contact import contact_form_check
from .reconstruction import connection_axioms_check, equivariance_check, hessian_blocks
from .reduction import invariance_check
from .samplers import draw_states
from .scenarios import Scenario

logger = logging.getLogger(__name__)

SAMPLE_COUNT = 20

# residual tolerances per check family
INVARIANCE_TOLERANCE = 1e-9
BRACKET_TOLERANCE = 1e-8
CONTACT_TOLERANCE = 1e-8
AXIOM_TOLERANCE = 1e-9
EQUIVARIANCE_TOLERANCE = 1e-8


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        # NaN residuals fail
        return bool(self.residual <= self.tolerance)


@dataclass(frozen=True)
class InvariantReport:
    scenario: str
    seed: int
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def failures(self) -> list[CheckResult]:
        return [check for check in self.checks if not check.passed]

    def to_frame(self) -> pl.DataFrame:
        return pl.DataFrame(
            {
                "check": [c.name for c in self.checks],
                "residual": [c.residual for c in self.checks],
                "tolerance": [c.tolerance for c in self.checks],
                "passed": [c.passed for c in self.checks],
            },
            schema={"check": pl.String, "residual": pl.Float64, "tolerance": pl.Float64, "passed": pl.Boolean},
        )

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "scenario": self.scenario,
            "seed": self.seed,
            "passed": self.passed,
            "checks": [
                {"name": c.name, "residual": c.residual, "tolerance": c.tolerance, "passed": c.passed}
                for c in self.checks
            ],
        }


def _worst(results: list[dict[str, float]]) -> dict[str, float]:
    names = results[0].keys() if results else ()
    return {name: max(r[name] for r in results) for name in names}


def run_checks(scenario: Scenario, *, seed: int = 42, samples: int = SAMPLE_COUNT) -> InvariantReport:
    """Every structural identity of the scenario, each maximised over ``samples`` seeded random states."""
    rng = np.random.default_rng(seed)
    chart, lagrangian = scenario.chart, scenario.lagrangian
    states = draw_states(rng=rng, scenario=scenario, count=samples)
    checks: list[CheckResult] = []

    checks.append(CheckResult(
        name="G-invariance of L",
        residual=invariance_check(lagrangian, chart, states),
        tolerance=INVARIANCE_TOLERANCE,
    ))

    brackets = _worst([bracket_table_check(chart, state.q) for state in states])
    checks.extend(CheckResult(name=name, residual=r, tolerance=BRACKET_TOLERANCE) for name, r in brackets.items())

    contact = _worst([contact_form_check(lagrangian, state.q, state.u, state.s) for state in states])
    checks.extend(CheckResult(name=name, residual=r, tolerance=CONTACT_TOLERANCE) for name, r in contact.items())

    if chart.fiber_dim:
        hessian_blocks(lagrangian, chart, scenario.default_initial)
        checks.append(CheckResult(name="G-regular at default state", residual=0.0, tolerance=0.0))

        axioms = _worst([connection_axioms_check(lagrangian, chart, st.q, st.u, st.s) for st in states])
        checks.extend(CheckResult(name=name, residual=r, tolerance=AXIOM_TOLERANCE) for name, r in axioms.items())

        checks.append(CheckResult(
            name="E_a^C(B^d_i) = B^b_i C^d_ab",
            residual=max(equivariance_check(lagrangian, chart, st.q, st.u, st.s) for st in states),
            tolerance=EQUIVARIANCE_TOLERANCE,
        ))

    for check in checks:
        logger.debug("%s: residual %.3e (tolerance %.1e)", check.name, check.residual, check.tolerance)
    report = InvariantReport(scenario=str(scenario.name), seed=seed, checks=tuple(checks))
    logger.info("Invariant report for %s: %d/%d passed", scenario.name, len(checks) - len(report.failures()), len(checks))
    return report
