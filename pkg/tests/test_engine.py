"""Tests for finite and transfinite iteration."""

from dataclasses import replace

from hypothesis import given, settings, strategies as st
import pytest

from fixpoint_lab.config import LabConfig
from fixpoint_lab.engine import (
    Budget,
    CounterDomain,
    LatticeDomain,
    OrdinalStepOperator,
    Region,
    run_finite,
    run_transfinite,
    trace_from_dict,
    trace_to_dict,
    verify_fixed,
)
from fixpoint_lab.errors import MalformedRegionsError
from fixpoint_lab.generators import random_monotone_op, random_region_operator, random_sublattice
from fixpoint_lab.lattice import MonotoneOp, kleene_chain, make_powerset
from fixpoint_lab.ordinal import ZERO, Ordering, compare, format_ordinal, parse_ordinal

w = parse_ordinal


def operator(*regions: tuple[str, str | None, str], start: str = "0") -> OrdinalStepOperator:
    return OrdinalStepOperator(
        tuple(Region(w(lo), None if hi is None else w(hi), w(inc)) for lo, hi, inc in regions),
        w(start),
    )


OMEGA_TWO = operator(("0", "w*2", "1"), ("w*2", None, "0"))


def test_identity_operator_is_fixed_at_zero() -> None:
    trace = run_transfinite(operator(("0", None, "0")))
    assert trace.theta == ZERO
    assert trace.fixed_value == ZERO


def test_omega_two() -> None:
    trace = run_transfinite(OMEGA_TWO, Budget(1000, 16))
    assert format_ordinal(trace.theta) == "w*2"
    assert format_ordinal(trace.fixed_value) == "w*2"
    assert [format_ordinal(s) for s in trace.limit_stages()] == ["w", "w*2"]
    assert verify_fixed(OMEGA_TWO, trace)
    assert trace_to_dict(trace, OMEGA_TWO.describe) == {
        "stages": [
            {"stage": "0", "value": "0", "limit": False},
            {"stage": "w", "value": "w", "limit": True},
            {"stage": "w*2", "value": "w*2", "limit": True},
        ],
        "theta": "w*2",
        "fixedValue": "w*2",
    }


def test_increment_two_jumps_to_omega() -> None:
    trace = run_transfinite(operator(("0", "w", "2"), ("w", None, "0")))
    assert format_ordinal(trace.theta) == "w"
    assert format_ordinal(trace.fixed_value) == "w"


def test_finite_boundary_is_stepped() -> None:
    op = operator(("0", "5", "1"), ("5", None, "0"))
    trace = run_transfinite(op)
    assert trace.theta == w("5")
    assert [format_ordinal(entry.stage) for entry in trace.stages] == ["0", "1", "2", "3", "4", "5"]
    assert not trace.limit_stages()


def test_start_value() -> None:
    trace = run_transfinite(operator(("0", "w*3", "1"), ("w*3", None, "0"), start="w+4"))
    assert format_ordinal(trace.theta) == "w*2"
    assert format_ordinal(trace.fixed_value) == "w*3"


def test_budgets_produce_divergence() -> None:
    stepped = run_transfinite(operator(("0", "5", "1"), ("5", None, "0")), Budget(3, 16))
    assert stepped.theta is None
    assert stepped.diverged.reason == "finite-step budget exhausted"
    assert stepped.diverged.steps == 3

    endless = run_transfinite(operator(("0", None, "1")), Budget(1000, 4))
    assert endless.theta is None
    assert endless.diverged.jumps == 4
    assert format_ordinal(endless.diverged.last_stage) == "w*4"


def test_raising_budget_keeps_theta() -> None:
    small = run_transfinite(OMEGA_TWO, Budget(0, 1))
    assert small.diverged is not None
    large = run_transfinite(OMEGA_TWO, Budget(0, 2))
    assert format_ordinal(large.theta) == "w*2"
    assert run_transfinite(OMEGA_TWO, Budget(50, 50)).theta == large.theta


def test_record_limit() -> None:
    op = operator(("0", "100", "1"), ("100", None, "0"))
    trace = run_transfinite(op, config=LabConfig(record_limit=4))
    assert [format_ordinal(entry.stage) for entry in trace.stages] == ["0", "1", "2", "3", "100"]
    assert verify_fixed(op, trace)


@pytest.mark.parametrize(
    ("regions", "message"),
    [
        ((("0", "w", "1"), ("5", None, "0")), "overlaps"),
        ((("0", "5", "1"), ("w", None, "0")), "gap"),
        ((("1", None, "0"),), "must start at 0"),
        ((("0", None, "1"), ("w", None, "0")), "unbounded but is not the last"),
        ((("0", "w", "1"),), "must be unbounded"),
        ((("0", "0", "1"), ("0", None, "0")), "empty"),
        ((("0", "5", "3"), ("5", None, "0")), "not monotone"),
    ],
)
def test_malformed_regions(regions, message: str) -> None:
    with pytest.raises(MalformedRegionsError, match=message):
        operator(*regions)


def test_run_finite_examples() -> None:
    diamond = make_powerset(["a", "b"])
    identity = LatticeDomain(diamond, MonotoneOp.identity(diamond))
    assert run_finite(identity, 10).theta == ZERO

    with_a = MonotoneOp.from_function(diamond, lambda s: diamond.join(s, 1))
    trace = run_finite(LatticeDomain(diamond, with_a), 10)
    assert trace.theta == w("1")
    assert diamond.name(trace.fixed_value) == "{a}"

    counter = run_finite(CounterDomain(), 10)
    assert counter.theta is None
    assert counter.diverged.steps == 10


def test_verify_fixed_rejects_tampering() -> None:
    diamond = make_powerset(["a", "b"])
    domain = LatticeDomain(diamond, MonotoneOp.from_function(diamond, lambda s: diamond.join(s, 1)))
    trace = run_finite(domain, 10)
    assert verify_fixed(domain, trace)
    assert not verify_fixed(domain, replace(trace, theta=ZERO))
    assert not verify_fixed(domain, replace(trace, fixed_value=0))

    omega_trace = run_transfinite(OMEGA_TWO)
    assert not verify_fixed(OMEGA_TWO, replace(omega_trace, theta=w("w")))
    assert not verify_fixed(OMEGA_TWO, replace(omega_trace, theta=None))


def test_trace_dict_round_trip() -> None:
    trace = run_transfinite(OMEGA_TWO)
    rebuilt = trace_from_dict(trace_to_dict(trace, OMEGA_TWO.describe), parse_ordinal)
    assert rebuilt.theta == trace.theta
    assert rebuilt.stages == trace.stages
    assert verify_fixed(OMEGA_TWO, rebuilt)


@settings(max_examples=100, deadline=None)
@given(st.randoms(use_true_random=False))
def test_lattice_domain_follows_kleene_chain(rng) -> None:
    lattice = random_sublattice(rng)
    op = random_monotone_op(rng, lattice)
    trace = run_finite(LatticeDomain(lattice, op), lattice.size)
    assert [entry.value for entry in trace.stages] == kleene_chain(lattice, op)


@settings(max_examples=100, deadline=None)
@given(st.randoms(use_true_random=False))
def test_transfinite_runs_are_increasing(rng) -> None:
    _, op = random_region_operator(rng)
    trace = run_transfinite(op, Budget(1000, 16))
    assert trace.theta is not None
    stages = [entry.stage for entry in trace.stages]
    values = [entry.value for entry in trace.stages]
    assert all(compare(a, b) is Ordering.LT for a, b in zip(stages, stages[1:], strict=False))
    assert all(compare(a, b) is Ordering.LT for a, b in zip(values, values[1:], strict=False))
    assert verify_fixed(op, trace)
