"""
Scenario documents: parsing, validation and printing.

A scenario is a JSON object with a ``kind``, an optional ``id`` and
``budget`` (``{"steps": n, "jumps": m}``), and a kind-specific body. Parsing
validates the body by building the module objects it describes and keeps a
normalized copy of the body, so printing a parsed scenario and parsing it
again yields the same scenario.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
import json
from pathlib import Path
from typing import Any, Literal, get_args

from fixpoint_lab.engine import OrdinalStepOperator, Region
from fixpoint_lab.errors import (
    FixlabError,
    GameSpecError,
    LatticeError,
    MalformedRegionsError,
    OrdinalError,
    ScenarioError,
)
from fixpoint_lab.fincat import PolyFunctor, Summand
from fixpoint_lab.game import ReflectiveGameSpec, StageGame
from fixpoint_lab.kripke import SentenceSystem, parse_system, system_to_dict
from fixpoint_lab.lattice import (
    FiniteLattice,
    MonotoneOp,
    format_subset,
    make_chain,
    make_powerset,
)
from fixpoint_lab.logging import get_logger
from fixpoint_lab.ordinal import Ordinal, format_ordinal, parse_ordinal

LOGGER = get_logger(__name__)

ScenarioKind = Literal[
    "lattice-lfp",
    "ordinal-transfinite",
    "initial-algebra",
    "kripke",
    "reflective-game",
    "correspondence",
]
KINDS: tuple[str, ...] = get_args(ScenarioKind)

LatticeMode = Literal["lfp", "gfp", "all-fixed-points"]
LATTICE_MODES: tuple[str, ...] = get_args(LatticeMode)


@dataclass(frozen=True)
class LatticeProblem:
    lattice: FiniteLattice
    op: MonotoneOp
    mode: str = "lfp"


@dataclass(frozen=True)
class FunctorProblem:
    functor: PolyFunctor


@dataclass(frozen=True)
class Scenario:
    kind: str
    body: dict[str, Any]
    id: str = "scenario"
    budget: dict[str, int] = field(default_factory=dict)

    @cached_property
    def problem(self) -> Any:
        """The module objects described by the body."""
        return _BUILDERS[self.kind](self.body)[1]


def _expect(condition: bool, path: str, expectation: str) -> None:
    if not condition:
        raise ScenarioError(path, expectation)


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _string_list(data: Any, path: str, nonempty: bool = True) -> list[str]:
    _expect(
        isinstance(data, list) and all(isinstance(item, str) for item in data),
        path,
        "a list of strings",
    )
    _expect(not nonempty or bool(data), path, "a nonempty list")
    _expect(len(set(data)) == len(data), path, "distinct entries")
    return list(data)


def _object(data: Any, path: str) -> dict[str, Any]:
    _expect(isinstance(data, dict), path, "an object")
    return data


# lattice-lfp / correspondence


def _lattice(data: Any, path: str) -> tuple[dict[str, Any], FiniteLattice]:
    data = _object(data, path)
    try:
        if set(data) == {"universe"}:
            universe = sorted(_string_list(data["universe"], f"{path}.universe", nonempty=False))
            return {"universe": universe}, make_powerset(universe)
        if set(data) == {"chain"}:
            _expect(_is_int(data["chain"]) and data["chain"] >= 1, f"{path}.chain", "a positive integer")
            return {"chain": data["chain"]}, make_chain(data["chain"])
    except ScenarioError:
        raise
    except FixlabError as e:
        raise ScenarioError(path, str(e))
    raise ScenarioError(path, 'exactly one of "universe" or "chain"')


def _element_name(lattice: FiniteLattice, data: Any, path: str, powerset: bool) -> str:
    """Canonical name of an element given as a name, or (powersets only) as atoms."""
    if powerset and isinstance(data, list):
        _expect(all(isinstance(atom, str) for atom in data), path, "a list of atoms")
        data = format_subset(data)
    elif powerset and isinstance(data, str) and not data.startswith("{"):
        data = format_subset(atom.strip() for atom in data.split(",") if atom.strip())
    _expect(isinstance(data, str), path, "an element name")
    try:
        lattice.index_of_name(data)
    except LatticeError:
        raise ScenarioError(path, f"an element of the lattice, got {data!r}")
    return data


def _operator(
    lattice: FiniteLattice, data: Any, path: str, powerset: bool
) -> tuple[dict[str, str], MonotoneOp]:
    data = _object(data, path)
    table: dict[str, str] = {}
    for key, value in data.items():
        name = _element_name(lattice, key, f"{path}[{key!r}]", powerset)
        _expect(name not in table, f"{path}[{key!r}]", "each element at most once")
        table[name] = _element_name(lattice, value, f"{path}.{key}", powerset)
    missing = [name for name in lattice.names if name not in table]
    _expect(not missing, path, f"a total operator, missing {missing[0] if missing else ''}")
    normalized = {name: table[name] for name in lattice.names}
    op = MonotoneOp(tuple(lattice.index_of_name(normalized[name]) for name in lattice.names))
    return normalized, op


def _lattice_problem(data: dict[str, Any]) -> tuple[dict[str, Any], LatticeProblem]:
    if "lattice" not in data and "universe" in data:
        # shorthand: a powerset universe given at the top level
        data = dict(data)
        data["lattice"] = {"universe": data.pop("universe")}
    _expect("universe" not in data, "$.universe", "either a top-level universe or a lattice object")
    lattice_body, lattice = _lattice(data.get("lattice"), "$.lattice")
    powerset = "universe" in lattice_body
    op_body, op = _operator(lattice, data.get("op"), "$.op", powerset)
    mode = data.get("mode", "lfp")
    _expect(mode in LATTICE_MODES, "$.mode", f"one of {', '.join(LATTICE_MODES)}")
    return {"lattice": lattice_body, "op": op_body, "mode": mode}, LatticeProblem(lattice, op, mode)


def _correspondence_problem(data: dict[str, Any]) -> tuple[dict[str, Any], LatticeProblem]:
    body, problem = _lattice_problem({**data, "mode": "lfp"})
    del body["mode"]
    return body, problem


# ordinal-transfinite


def _ordinal(data: Any, path: str) -> Ordinal:
    _expect(isinstance(data, str) or _is_int(data), path, "an ordinal in CNF grammar")
    try:
        return parse_ordinal(str(data))
    except OrdinalError as e:
        raise ScenarioError(path, str(e))


def _region_body(region: Region) -> dict[str, str]:
    """Printed form of a region; an unbounded region has no ``hi`` key."""
    body = {"lo": format_ordinal(region.lower)}
    if region.upper is not None:
        body["hi"] = format_ordinal(region.upper)
    body["inc"] = format_ordinal(region.increment)
    return body


def _ordinal_problem(data: dict[str, Any]) -> tuple[dict[str, Any], OrdinalStepOperator]:
    regions_data = data.get("regions")
    _expect(isinstance(regions_data, list) and bool(regions_data), "$.regions", "a nonempty list")
    regions = []
    for i, region in enumerate(regions_data):
        path = f"$.regions[{i}]"
        region = _object(region, path)
        upper = region.get("hi")
        if upper is not None:
            upper = _ordinal(upper, f"{path}.hi")
        regions.append(
            Region(_ordinal(region.get("lo"), f"{path}.lo"), upper, _ordinal(region.get("inc"), f"{path}.inc"))
        )
    start = _ordinal(data.get("start", "0"), "$.start")
    try:
        op = OrdinalStepOperator(tuple(regions), start)
    except MalformedRegionsError as e:
        raise ScenarioError("$.regions", str(e))
    body = {"regions": [_region_body(r) for r in regions], "start": format_ordinal(start)}
    return body, op


# initial-algebra


def _functor_problem(data: dict[str, Any]) -> tuple[dict[str, Any], FunctorProblem]:
    summands_data = data.get("summands")
    _expect(isinstance(summands_data, list) and bool(summands_data), "$.summands", "a nonempty list")
    summands = []
    for i, summand in enumerate(summands_data):
        path = f"$.summands[{i}]"
        summand = _object(summand, path)
        labels = _string_list(summand.get("labels"), f"{path}.labels")
        arity = summand.get("arity")
        _expect(_is_int(arity) and arity >= 0, f"{path}.arity", "a non-negative integer")
        summands.append(Summand(tuple(labels), arity))
    functor = PolyFunctor(tuple(summands))
    body = {"summands": [{"labels": list(s.labels), "arity": s.arity} for s in summands]}
    return body, FunctorProblem(functor)


# kripke


def _kripke_problem(data: dict[str, Any]) -> tuple[dict[str, Any], SentenceSystem]:
    system = parse_system(data.get("sentences"), "$.sentences")
    return {"sentences": system_to_dict(system)}, system


# reflective-game


def _payoff(data: Any, path: str) -> Fraction:
    _expect(_is_int(data) or isinstance(data, str), path, 'an integer or a rational like "1/2"')
    try:
        return Fraction(data)
    except (ValueError, ZeroDivisionError):
        raise ScenarioError(path, f'an integer or a rational like "1/2", got {data!r}')


def format_payoff(value: Fraction) -> int | str:
    return value.numerator if value.denominator == 1 else str(value)


def _table(
    data: Any, path: str, shape: tuple[int, int], cell: Callable[[Any, str], Any]
) -> tuple[tuple[Any, ...], ...]:
    _expect(isinstance(data, list) and len(data) == shape[0], path, f"{shape[0]} rows")
    rows = []
    for s, row in enumerate(data):
        _expect(isinstance(row, list) and len(row) == shape[1], f"{path}[{s}]", f"{shape[1]} entries")
        rows.append(tuple(cell(value, f"{path}[{s}][{t}]") for t, value in enumerate(row)))
    return tuple(rows)


def _label(data: Any, path: str) -> str:
    _expect(isinstance(data, str) and bool(data), path, "an outcome label")
    return data


def _stage(data: Any, path: str) -> StageGame:
    data = _object(data, path)
    actions_t = _string_list(data.get("actionsT"), f"{path}.actionsT")
    actions_m = _string_list(data.get("actionsM"), f"{path}.actionsM")
    shape = (len(actions_t), len(actions_m))
    return StageGame(
        tuple(actions_t),
        tuple(actions_m),
        _table(data.get("payoffT"), f"{path}.payoffT", shape, _payoff),
        _table(data.get("payoffM"), f"{path}.payoffM", shape, _payoff),
        _table(data.get("outcomes"), f"{path}.outcomes", shape, _label),
    )


def _stage_to_dict(game: StageGame) -> dict[str, Any]:
    return {
        "actionsT": list(game.actions_t),
        "actionsM": list(game.actions_m),
        "payoffT": [[format_payoff(v) for v in row] for row in game.payoff_t],
        "payoffM": [[format_payoff(v) for v in row] for row in game.payoff_m],
        "outcomes": [list(row) for row in game.outcomes],
    }


def _promotion_rule(
    data: Any, path: str, game: StageGame, following: StageGame
) -> tuple[dict[str, Any], dict[str, frozenset[tuple[int, int]]]]:
    data = _object(data, path)
    body: dict[str, Any] = {}
    rule: dict[str, frozenset[tuple[int, int]]] = {}
    for label in sorted(game.labels):
        _expect(label in data, f"{path}.{label}", "admissible profiles for this outcome label")
    for label, entry in data.items():
        entry_path = f"{path}.{label}"
        _expect(label in game.labels, entry_path, "an outcome label of the previous stage")
        if entry == "*":
            body[label] = "*"
            rule[label] = frozenset(following.profiles)
            continue
        _expect(isinstance(entry, list) and bool(entry), entry_path, 'a nonempty list of [actionT, actionM] pairs or "*"')
        profiles = set()
        for k, pair in enumerate(entry):
            pair_path = f"{entry_path}[{k}]"
            _expect(
                isinstance(pair, list)
                and len(pair) == 2
                and pair[0] in following.actions_t
                and pair[1] in following.actions_m,
                pair_path,
                "an [actionT, actionM] pair of the next stage",
            )
            profiles.add((following.actions_t.index(pair[0]), following.actions_m.index(pair[1])))
        body[label] = [list(following.render(p)) for p in sorted(profiles)]
        rule[label] = frozenset(profiles)
    return body, rule


def _game_problem(data: dict[str, Any]) -> tuple[dict[str, Any], ReflectiveGameSpec]:
    stages_data = data.get("stages")
    _expect(isinstance(stages_data, list) and bool(stages_data), "$.stages", "a nonempty list")
    stages = [_stage(stage, f"$.stages[{i}]") for i, stage in enumerate(stages_data)]
    promotion_data = data.get("promotion", [])
    if isinstance(promotion_data, dict):
        # keyed by the index of the stage the rule leaves
        keys = [str(i) for i in range(len(stages) - 1)]
        _expect(sorted(promotion_data) == sorted(keys), "$.promotion", f"rules keyed {keys}")
        promotion_data = [promotion_data[key] for key in keys]
    _expect(
        isinstance(promotion_data, list) and len(promotion_data) == len(stages) - 1,
        "$.promotion",
        f"a list of {len(stages) - 1} promotion rules",
    )
    promotion_body, promotion = [], []
    for i, entry in enumerate(promotion_data):
        body, rule = _promotion_rule(entry, f"$.promotion[{i}]", stages[i], stages[i + 1])
        promotion_body.append(body)
        promotion.append(rule)
    win = _string_list(data.get("win"), "$.win", nonempty=False)
    try:
        spec = ReflectiveGameSpec(tuple(stages), tuple(promotion), frozenset(win))
    except GameSpecError as e:
        raise ScenarioError("$", str(e))
    body = {
        "stages": [_stage_to_dict(game) for game in stages],
        "promotion": promotion_body,
        "win": sorted(win),
    }
    return body, spec


_BUILDERS = {
    "lattice-lfp": _lattice_problem,
    "ordinal-transfinite": _ordinal_problem,
    "initial-algebra": _functor_problem,
    "kripke": _kripke_problem,
    "reflective-game": _game_problem,
    "correspondence": _correspondence_problem,
}

_COMMON_KEYS = {"kind", "id", "budget"}


def _budget(data: Any) -> dict[str, int]:
    if data is None:
        return {}
    if _is_int(data):
        _expect(data >= 0, "$.budget", "a non-negative integer")
        return {"steps": data}
    data = _object(data, "$.budget")
    for key, value in data.items():
        _expect(key in ("steps", "jumps"), f"$.budget.{key}", '"steps" or "jumps"')
        _expect(_is_int(value) and value >= 0, f"$.budget.{key}", "a non-negative integer")
    return {key: data[key] for key in ("steps", "jumps") if key in data}


def scenario_from_dict(data: Any, default_id: str = "scenario") -> Scenario:
    """
    Validate a decoded scenario document.

    Raises:
        ScenarioError: naming the JSON path and expectation of the first violation
    """
    data = _object(data, "$")
    kind = data.get("kind")
    _expect(isinstance(kind, str), "$.kind", f"one of {', '.join(KINDS)}")
    _expect(kind in KINDS, "$.kind", f"one of {', '.join(KINDS)}, got unknown kind {kind!r}")
    scenario_id = data.get("id", default_id)
    _expect(isinstance(scenario_id, str) and bool(scenario_id), "$.id", "a nonempty string")
    budget = _budget(data.get("budget"))
    payload = {key: value for key, value in data.items() if key not in _COMMON_KEYS}
    try:
        body, problem = _BUILDERS[kind](payload)
    except ScenarioError:
        raise
    except FixlabError as e:
        raise ScenarioError("$", f"a valid {kind} scenario: {e}")
    scenario = Scenario(kind, body, scenario_id, budget)
    scenario.__dict__["problem"] = problem
    return scenario


def parse_scenario(raw: bytes | str, default_id: str = "scenario") -> Scenario:
    """Parse a UTF-8 JSON scenario document."""
    if isinstance(raw, bytes):
        try:
            raw = raw.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ScenarioError("$", f"UTF-8 text ({e})")
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as e:
        raise ScenarioError("$", f"well-formed JSON ({e.msg} at line {e.lineno} column {e.colno})")
    return scenario_from_dict(data, default_id)


def load_scenario(path: Path) -> Scenario:
    """Read a scenario file; its id defaults to the file stem."""
    LOGGER.debug(f"loading scenario {path}")
    return parse_scenario(Path(path).read_bytes(), default_id=Path(path).stem)


def scenario_to_dict(scenario: Scenario) -> dict[str, Any]:
    data: dict[str, Any] = {"kind": scenario.kind, "id": scenario.id}
    if scenario.budget:
        data["budget"] = dict(scenario.budget)
    data.update(scenario.body)
    return data


def print_scenario(scenario: Scenario) -> str:
    return json.dumps(scenario_to_dict(scenario), indent=2, ensure_ascii=False) + "\n"
