"""Experiment orchestration: reference instance, unquantized baseline,
quantization-level sweeps, invariant auditing, and CSV emission.

The harness is the observer side of the simulator: it computes centroid
and deviation diagnostics from global state for auditing only, keeping a
deliberate separation between what nodes know and what the analyst
measures.
"""

from __future__ import annotations

import math
import random
import statistics
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional, Sequence

from .graph import generate_random_strongly_connected
from .optimizer import (
    ConfigError,
    OptRunConfig,
    TheoryConstants,
    compute_theta_and_floor,
    quadratic_cost,
    quadratic_optimum,
    quagd_run,
    step_size_interval,
    young_delta_interval,
)
from .quantizer import QuantizationLevel
from .rng import mix64
from .trace import RunTrace, StepRecord, residual_error  # noqa: F401  (public API)

# Sub-seed domains derived from the master seed.
_GRAPH_TAG = 1
_COST_TAG = 2
_INIT_TAG = 3


def reference_instance(
    n: int = 20,
    edge_prob: float = 0.2,
    seed: int = 0,
    delta="0.01",
    max_outer: int = 60,
    alpha: Optional[float] = None,
    d_bound: Optional[int] = None,
) -> OptRunConfig:
    """The documented desk-scale reference configuration: a random strongly
    connected digraph, unit quadratics with centers uniform in [0, 10], and
    initial estimates uniform in [0, 10]."""
    graph = generate_random_strongly_connected(n, edge_prob, mix64(seed, _GRAPH_TAG))
    cost_rng = random.Random(mix64(seed, _COST_TAG))
    costs = [quadratic_cost(1.0, cost_rng.uniform(0.0, 10.0)) for _ in range(n)]
    init_rng = random.Random(mix64(seed, _INIT_TAG))
    x0 = [init_rng.uniform(0.0, 10.0) for _ in range(n)]
    return OptRunConfig(
        graph=graph,
        costs=costs,
        delta=QuantizationLevel(delta),
        x0=x0,
        max_outer=max_outer,
        master_seed=seed,
        alpha=alpha,
        d_bound=d_bound,
    )


def default_theory(cfg: OptRunConfig, delta=None) -> TheoryConstants:
    """Theory constants for a config at its effective step size, with the
    auxiliary parameter at half its admissible upper bound."""
    n = cfg.graph.n
    alpha = Fraction(cfg.effective_alpha())
    _, upper = young_delta_interval(alpha, cfg.L, cfg.mu, n)
    if delta is None:
        delta = cfg.delta
    return compute_theta_and_floor(alpha, upper / 2, cfg.L, cfg.mu, n, delta)


def centralized_baseline(cfg: OptRunConfig) -> RunTrace:
    """Unquantized exact-averaging reference: the scalar recursion
    x <- (1/n) sum_i (x - alpha * grad f_i(x)) from the mean initial value."""
    cfg.validate()
    n = cfg.graph.n
    alpha = cfg.effective_alpha()
    x_star = quadratic_optimum(cfg.costs)

    def _residual(est):
        return residual_error(est, cfg.x0, x_star) if x_star is not None else None

    x = sum(cfg.x0) / n
    trace = RunTrace(x0=list(cfg.x0), delta=Fraction(0), x_star=x_star)
    trace.steps.append(StepRecord(k=0, estimates=[x] * n, residual=_residual([x] * n)))
    for k in range(cfg.max_outer):
        x = x - (alpha / n) * sum(c.gradient(x) for c in cfg.costs)
        trace.steps.append(
            StepRecord(k=k + 1, estimates=[x] * n, residual=_residual([x] * n))
        )
    return trace


# --- Sweeps ---


@dataclass
class SweepEntry:
    delta: Fraction
    trace: Optional[RunTrace] = None
    plateau: Optional[float] = None
    iters_to_plateau: Optional[int] = None
    theory_floor: Optional[float] = None
    error: Optional[str] = None

    @property
    def quantization_dominated(self) -> bool:
        """True when the residual saturates immediately: the quantization
        grid is coarser than the initial distance to the optimum."""
        return self.iters_to_plateau == 0


@dataclass
class SweepReport:
    entries: list[SweepEntry] = field(default_factory=list)
    master_seed: int = 0

    @property
    def all_failed(self) -> bool:
        return all(e.error is not None for e in self.entries)


def plateau_level(residuals: Sequence[float]) -> float:
    """Median residual over the final 20% of iterations; medians resist the
    bounded oscillation a quantized fixed point exhibits."""
    tail = max(1, math.ceil(0.2 * len(residuals)))
    return statistics.median(residuals[-tail:])


def iterations_to_plateau(residuals: Sequence[float], plateau: float) -> int:
    """First iteration whose residual is within 2x of the plateau level."""
    for k, r in enumerate(residuals):
        if r <= 2 * plateau:
            return k
    return len(residuals) - 1


def delta_sweep(cfg: OptRunConfig, deltas: Sequence) -> SweepReport:
    """Run the outer loop once per quantization level with a shared master
    seed; per-level failures are recorded without aborting the sweep."""
    levels = [QuantizationLevel(d) for d in deltas]
    if len({lv.delta for lv in levels}) != len(levels):
        raise ConfigError("quantization levels must be distinct")
    x_star = quadratic_optimum(cfg.costs)
    if x_star is None:
        raise ConfigError(
            "sweep needs the closed-form optimum; all costs must be quadratic"
        )
    report = SweepReport(master_seed=cfg.master_seed)
    for level in levels:
        entry = SweepEntry(delta=level.delta)
        try:
            cfg_d = replace(cfg, delta=level)
            trace = quagd_run(cfg_d, x_star=x_star)
            residuals = [s.residual for s in trace.steps]
            entry.trace = trace
            entry.plateau = plateau_level(residuals)
            entry.iters_to_plateau = iterations_to_plateau(residuals, entry.plateau)
            entry.theory_floor = float(default_theory(cfg_d).asymptotic_bound)
        except Exception as exc:  # recorded, not raised
            entry.error = f"{type(exc).__name__}: {exc}"
        report.entries.append(entry)
    return report


# --- Invariant auditing ---


@dataclass
class Violation:
    kind: str
    step: int
    detail: str


@dataclass
class AuditReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not self.violations


def audit_invariants(trace: RunTrace) -> AuditReport:
    """Check every recorded outer step against the protocol contracts:
    exact mass conservation, the one-level averaging accuracy bound,
    node agreement, and the 2*delta / 4*delta observer bounds."""
    report = AuditReport()
    delta = float(trace.delta)
    # strict bounds in exact arithmetic; tiny slack absorbs float roundoff
    slack = 1e-9 * delta + 1e-15
    for step in trace.steps[1:]:
        if not step.conservation_ok:
            report.violations.append(
                Violation("conservation", step.k, "mass total changed during consensus")
            )
        if not step.accuracy_ok:
            report.violations.append(
                Violation(
                    "accuracy", step.k, "output further than delta from quantized mean"
                )
            )
        if not step.agreement_ok:
            report.violations.append(
                Violation("agreement", step.k, "nodes returned different values")
            )
        if step.centroid_err is not None and step.centroid_err > 2 * delta + slack:
            report.violations.append(
                Violation(
                    "centroid_bound",
                    step.k,
                    f"|mean estimate - mean stepped value| = {step.centroid_err} "
                    f"> 2*delta = {2 * delta}",
                )
            )
        if step.max_node_dev is not None and step.max_node_dev > 4 * delta + slack:
            report.violations.append(
                Violation(
                    "deviation_bound",
                    step.k,
                    f"max node deviation {step.max_node_dev} > 4*delta = {4 * delta}",
                )
            )
    return report


# --- CSV emission ---

TRACE_CSV_HEADER = "k,residual,inner_rounds,centroid_err,max_node_dev"
SWEEP_CSV_HEADER = "delta,plateau,iters_to_plateau,theory_floor"


def _cell(value) -> str:
    return "" if value is None else repr(value) if isinstance(value, float) else str(value)


def write_trace_csv(trace: RunTrace, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(TRACE_CSV_HEADER + "\n")
        for s in trace.steps:
            fh.write(
                f"{s.k},{_cell(s.residual)},{s.inner_rounds},"
                f"{_cell(s.centroid_err)},{_cell(s.max_node_dev)}\n"
            )


def write_sweep_csv(report: SweepReport, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(SWEEP_CSV_HEADER + "\n")
        for e in report.entries:
            fh.write(
                f"{_cell(float(e.delta))},{_cell(e.plateau)},"
                f"{_cell(e.iters_to_plateau)},{_cell(e.theory_floor)}\n"
            )
