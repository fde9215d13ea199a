"""
The iteration engine: ``X_0 = I``, ``X_{a+1} = F(X_a)``, joins at limit stages.

Two kinds of domains are supported. Finite-only domains (lattices, Kripke
valuations, counters) are iterated concretely by :func:`run_finite`.
:class:`OrdinalStepOperator` is genuinely transfinite: an inflationary,
piecewise-additive map on ordinals whose omega-limits have the closed form
``v + d*w``, so :func:`run_transfinite` can take limit stages exactly.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import Any, ClassVar, Generic, TypeVar

from fixpoint_lab.config import DEFAULT_CONFIG, LabConfig
from fixpoint_lab.errors import MalformedRegionsError
from fixpoint_lab.lattice import FiniteLattice, MonotoneOp, check_total
from fixpoint_lab.logging import get_logger, log_warning
from fixpoint_lab.ordinal import (
    OMEGA,
    ONE,
    ZERO,
    Ordering,
    Ordinal,
    add,
    compare,
    format_ordinal,
    from_int,
    is_zero,
    mul_by_omega,
    parse_ordinal,
    pred,
    succ,
)

LOGGER = get_logger(__name__)

V = TypeVar("V")


class IterationDomain(ABC, Generic[V]):
    """A deterministic step function with a starting value."""

    transfinite: ClassVar[bool] = False
    """True when the domain can compute omega-limits in closed form."""

    @property
    @abstractmethod
    def initial(self) -> V: ...

    @abstractmethod
    def step(self, value: V) -> V: ...

    def equal(self, a: V, b: V) -> bool:
        return a == b

    def describe(self, value: V) -> Any:
        """JSON-friendly rendering of a value, used in traces."""
        return str(value)


class LatticeDomain(IterationDomain[int]):
    """Kleene iteration of a lattice operator from bottom, or from top when ``dual``."""

    def __init__(self, lattice: FiniteLattice, op: MonotoneOp, dual: bool = False) -> None:
        check_total(lattice, op)
        self.lattice = lattice
        self.op = op
        self.dual = dual

    @property
    def initial(self) -> int:
        return self.lattice.top if self.dual else self.lattice.bottom

    def step(self, value: int) -> int:
        return self.op(value)

    def describe(self, value: int) -> str:
        return self.lattice.name(value)


class CounterDomain(IterationDomain[int]):
    """``n -> n + 1`` on the naturals; it has no fixed point."""

    @property
    def initial(self) -> int:
        return 0

    def step(self, value: int) -> int:
        return value + 1

    def describe(self, value: int) -> int:
        return value


@dataclass(frozen=True)
class Region:
    """Ordinals in ``[lower, upper)`` are advanced by ``increment``; ``upper=None`` is unbounded."""

    lower: Ordinal
    upper: Ordinal | None
    increment: Ordinal

    def contains(self, value: Ordinal) -> bool:
        if compare(value, self.lower) is Ordering.LT:
            return False
        return self.upper is None or compare(value, self.upper) is Ordering.LT


@dataclass(frozen=True)
class OrdinalStepOperator(IterationDomain[Ordinal]):
    """
    ``F(g) = g + increment(region of g)`` over a partition of the ordinals.

    The map is inflationary by construction. Construction rejects region lists
    that do not partition ``[0, oo)`` and maps that are not order-preserving on
    the sampled points around every region boundary.
    """

    regions: tuple[Region, ...]
    start: Ordinal = ZERO

    transfinite: ClassVar[bool] = True

    def __post_init__(self) -> None:
        _check_partition(self.regions)
        violation = self.monotone_violation()
        if violation is not None:
            low, high = violation
            raise MalformedRegionsError(
                f"operator is not monotone: {low} <= {high} but "
                f"F({low}) = {self.step(low)} > F({high}) = {self.step(high)}"
            )

    @property
    def initial(self) -> Ordinal:
        return self.start

    @property
    def potentially_divergent(self) -> bool:
        return not any(is_zero(region.increment) for region in self.regions)

    def region_of(self, value: Ordinal) -> Region:
        for region in self.regions:
            if region.contains(value):
                return region
        raise MalformedRegionsError(f"no region contains {value}")

    def step(self, value: Ordinal) -> Ordinal:
        return add(value, self.region_of(value).increment)

    def omega_limit(self, value: Ordinal) -> Ordinal:
        """Join of ``value + d*n`` over all naturals ``n``, for the increment ``d`` at ``value``."""
        return add(value, mul_by_omega(self.region_of(value).increment))

    def describe(self, value: Ordinal) -> str:
        return format_ordinal(value)

    def sample_points(self) -> list[Ordinal]:
        points: set[Ordinal] = set()
        for region in self.regions:
            candidates = [
                region.lower,
                add(region.lower, ONE),
                add(region.lower, from_int(2)),
                add(region.lower, OMEGA),
                add(region.lower, add(OMEGA, ONE)),
            ]
            if region.upper is not None and pred(region.upper) is not None:
                candidates.append(pred(region.upper))
            points.update(c for c in candidates if region.contains(c))
        return sorted(points)

    def monotone_violation(self) -> tuple[Ordinal, Ordinal] | None:
        points = self.sample_points()
        images = [self.step(p) for p in points]
        for i, low in enumerate(points):
            for j in range(i + 1, len(points)):
                if compare(images[i], images[j]) is Ordering.GT:
                    return low, points[j]
        return None


def _check_partition(regions: Sequence[Region]) -> None:
    if not regions:
        raise MalformedRegionsError("at least one region is required")
    if not is_zero(regions[0].lower):
        raise MalformedRegionsError(f"region 0 must start at 0, not {regions[0].lower}")
    for i, region in enumerate(regions):
        last = i == len(regions) - 1
        if region.upper is None:
            if not last:
                raise MalformedRegionsError(f"region {i} is unbounded but is not the last region")
            continue
        if last:
            raise MalformedRegionsError(f"the last region ({i}) must be unbounded")
        if compare(region.lower, region.upper) is not Ordering.LT:
            raise MalformedRegionsError(
                f"region {i} is empty: lower bound {region.lower} is not below {region.upper}"
            )
        following = regions[i + 1].lower
        order = compare(following, region.upper)
        if order is Ordering.LT:
            raise MalformedRegionsError(
                f"region {i + 1} overlaps region {i}: it starts at {following}, "
                f"below {region.upper}"
            )
        if order is Ordering.GT:
            raise MalformedRegionsError(
                f"gap between region {i} and region {i + 1}: [{region.upper}, {following})"
            )


@dataclass(frozen=True)
class Budget:
    max_finite_steps: int
    max_limit_jumps: int

    @classmethod
    def from_config(cls, config: LabConfig = DEFAULT_CONFIG) -> Budget:
        return cls(config.budget_steps, config.budget_jumps)


@dataclass(frozen=True)
class TraceStage:
    stage: Ordinal
    value: Any
    limit: bool = False


@dataclass(frozen=True)
class Diverged:
    """Budget exhaustion: the run was stopped without reaching a fixed point."""

    reason: str
    steps: int
    jumps: int
    last_stage: Ordinal
    last_value: Any


@dataclass(frozen=True)
class TransfiniteTrace:
    stages: tuple[TraceStage, ...]
    theta: Ordinal | None = None
    fixed_value: Any = None
    diverged: Diverged | None = None

    @property
    def converged(self) -> bool:
        return self.theta is not None

    def limit_stages(self) -> list[Ordinal]:
        return [entry.stage for entry in self.stages if entry.limit]


class _Recorder:
    """Keeps every stage up to ``limit`` entries, then only limit stages and the last one."""

    def __init__(self, limit: int, stage: Ordinal, value: Any) -> None:
        self.limit = limit
        self.entries = [TraceStage(stage, value)]

    def record(self, stage: Ordinal, value: Any, limit: bool = False) -> None:
        if limit or len(self.entries) < self.limit:
            self.entries.append(TraceStage(stage, value, limit))

    def close(self, stage: Ordinal, value: Any) -> tuple[TraceStage, ...]:
        if self.entries[-1].stage != stage:
            self.entries.append(TraceStage(stage, value))
        return tuple(self.entries)


def run_transfinite(
    op: OrdinalStepOperator,
    budget: Budget | None = None,
    config: LabConfig = DEFAULT_CONFIG,
) -> TransfiniteTrace:
    """
    Iterate an ordinal step operator through successor and limit stages.

    While the increment ``d`` at the current value ``v`` stays in force for the
    whole omega-chain ``v + d*n`` (the chain never reaches the region's upper
    bound), the run jumps to the chain's join ``v + d*w`` and the stage advances
    by ``w``. Otherwise the successor steps are taken one at a time.

    Args:
        op: the operator and its start value
        budget: finite-step and limit-jump allowances (defaults from config)
        config: supplies default budgets and ``record_limit``

    Returns:
        A trace with ``theta`` set, or with ``diverged`` set when a budget ran out
    """
    budget = budget or Budget.from_config(config)
    if op.potentially_divergent:
        log_warning(
            LOGGER,
            "No region has increment 0; the run may only end by budget exhaustion",
            "potential_divergence",
            location=None,
        )
    stage, value = ZERO, op.start
    recorder = _Recorder(config.record_limit, stage, value)
    steps = jumps = 0
    while True:
        region = op.region_of(value)
        delta = region.increment
        if is_zero(delta):
            LOGGER.info(
                f"closure ordinal {stage} reached with value {value}",
                type="fixlab",
                subtype="engine",
            )
            return TransfiniteTrace(recorder.close(stage, value), theta=stage, fixed_value=value)

        limit_value = op.omega_limit(value)
        if region.upper is None or compare(limit_value, region.upper) is not Ordering.GT:
            if jumps >= budget.max_limit_jumps:
                return _diverged(recorder, "limit-jump budget exhausted", steps, jumps, stage, value)
            jumps += 1
            stage = add(stage, OMEGA)
            value = limit_value
            LOGGER.debug(f"limit stage {stage}: value {value}")
            recorder.record(stage, value, limit=True)
            continue

        if steps >= budget.max_finite_steps:
            return _diverged(recorder, "finite-step budget exhausted", steps, jumps, stage, value)
        steps += 1
        stage = succ(stage)
        value = add(value, delta)
        recorder.record(stage, value)


def _diverged(
    recorder: _Recorder, reason: str, steps: int, jumps: int, stage: Any, value: Any
) -> TransfiniteTrace:
    LOGGER.info(
        f"{reason} after {steps} steps and {jumps} limit jumps at stage {stage}",
        type="fixlab",
        subtype="budget_exhausted",
    )
    return TransfiniteTrace(
        recorder.close(stage, value),
        diverged=Diverged(reason, steps, jumps, stage, value),
    )


def run_finite(
    domain: IterationDomain[V], budget: int, config: LabConfig = DEFAULT_CONFIG
) -> TransfiniteTrace:
    """
    Iterate ``domain.step`` from ``domain.initial`` until the value repeats.

    No limit stages are taken. Stage ``n`` holds the ``n``-th iterate; ``theta`` is
    the least ``n`` whose iterate is fixed. More than ``budget`` successor steps
    yield a diverged trace.
    """
    value = domain.initial
    recorder = _Recorder(config.record_limit, ZERO, value)
    n = 0
    while True:
        successor = domain.step(value)
        if domain.equal(successor, value):
            stage = from_int(n)
            return TransfiniteTrace(recorder.close(stage, value), theta=stage, fixed_value=value)
        if n >= budget:
            return _diverged(recorder, "finite-step budget exhausted", n, 0, from_int(n), value)
        n += 1
        value = successor
        recorder.record(from_int(n), value)


def verify_fixed(domain: IterationDomain[V], trace: TransfiniteTrace) -> bool:
    """
    Re-check a converged trace against its domain.

    The stage at ``theta`` must hold the fixed value, the fixed value must be
    fixed by ``step``, stages must strictly increase, and no earlier recorded
    stage may already be fixed.
    """
    if trace.theta is None:
        return False
    stages = [entry.stage for entry in trace.stages]
    if any(compare(a, b) is not Ordering.LT for a, b in zip(stages, stages[1:], strict=False)):
        LOGGER.debug("trace stages are not strictly increasing")
        return False
    at_theta = [entry for entry in trace.stages if entry.stage == trace.theta]
    if not at_theta or not domain.equal(at_theta[0].value, trace.fixed_value):
        LOGGER.debug(f"no recorded stage {trace.theta} holding the fixed value")
        return False
    if not domain.equal(domain.step(trace.fixed_value), trace.fixed_value):
        LOGGER.debug("the reported fixed value is not fixed")
        return False
    for entry in trace.stages:
        if compare(entry.stage, trace.theta) is Ordering.LT and domain.equal(
            domain.step(entry.value), entry.value
        ):
            LOGGER.debug(f"stage {entry.stage} is already fixed, before theta {trace.theta}")
            return False
    return True


def trace_to_dict(trace: TransfiniteTrace, describe: Callable[[Any], Any]) -> dict[str, Any]:
    data: dict[str, Any] = {
        "stages": [
            {"stage": format_ordinal(entry.stage), "value": describe(entry.value), "limit": entry.limit}
            for entry in trace.stages
        ],
        "theta": None if trace.theta is None else format_ordinal(trace.theta),
        "fixedValue": None if trace.theta is None else describe(trace.fixed_value),
    }
    if trace.diverged is not None:
        data["diverged"] = {
            "reason": trace.diverged.reason,
            "steps": trace.diverged.steps,
            "jumps": trace.diverged.jumps,
            "lastStage": format_ordinal(trace.diverged.last_stage),
            "lastValue": describe(trace.diverged.last_value),
        }
    return data


def trace_from_dict(data: dict[str, Any], parse_value: Callable[[Any], Any]) -> TransfiniteTrace:
    """Rebuild a trace from :func:`trace_to_dict` output (without divergence details)."""
    stages = tuple(
        TraceStage(parse_ordinal(entry["stage"]), parse_value(entry["value"]), bool(entry["limit"]))
        for entry in data["stages"]
    )
    theta = data.get("theta")
    if theta is None:
        return TransfiniteTrace(stages)
    return TransfiniteTrace(
        stages, theta=parse_ordinal(theta), fixed_value=parse_value(data["fixedValue"])
    )
