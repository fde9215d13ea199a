"""
Kripke-style truth valuations for finite self-referential sentence systems.

Sentences are built from classical atoms, truth ascriptions ``Tr(name)`` and
the connectives not/and/or, evaluated with the strong Kleene tables. The jump
operator re-evaluates every sentence against the current partial valuation;
iterating it from the all-unknown valuation yields the minimal fixed point.
"""

from __future__ import annotations

from collections.abc import Iterator, Mapping
from dataclasses import dataclass
from enum import Enum
from itertools import product
from typing import Any

from fixpoint_lab.config import DEFAULT_CONFIG, LabConfig
from fixpoint_lab.engine import IterationDomain, run_finite
from fixpoint_lab.errors import CapExceededError, KripkeError, ScenarioError
from fixpoint_lab.logging import get_logger

LOGGER = get_logger(__name__)


class TruthValue(Enum):
    T = "T"
    F = "F"
    U = "U"

    @classmethod
    def from_bool(cls, value: bool) -> TruthValue:
        return cls.T if value else cls.F

    def __invert__(self) -> TruthValue:
        if self is TruthValue.U:
            return TruthValue.U
        return TruthValue.F if self is TruthValue.T else TruthValue.T

    def __and__(self, other: TruthValue) -> TruthValue:
        if TruthValue.F in (self, other):
            return TruthValue.F
        if TruthValue.U in (self, other):
            return TruthValue.U
        return TruthValue.T

    def __or__(self, other: TruthValue) -> TruthValue:
        if TruthValue.T in (self, other):
            return TruthValue.T
        if TruthValue.U in (self, other):
            return TruthValue.U
        return TruthValue.F

    def info_leq(self, other: TruthValue) -> bool:
        """Information order: ``U`` below both ``T`` and ``F``."""
        return self is TruthValue.U or self is other


@dataclass(frozen=True)
class Atom:
    truth: bool


@dataclass(frozen=True)
class Tr:
    name: str


@dataclass(frozen=True)
class Not:
    body: Sentence


@dataclass(frozen=True)
class And:
    left: Sentence
    right: Sentence


@dataclass(frozen=True)
class Or:
    left: Sentence
    right: Sentence


Sentence = Atom | Tr | Not | And | Or

Valuation = dict[str, TruthValue]


def references(sentence: Sentence) -> Iterator[str]:
    """Names read by ``Tr`` nodes, in left-to-right order."""
    match sentence:
        case Tr(name):
            yield name
        case Not(body):
            yield from references(body)
        case And(left, right) | Or(left, right):
            yield from references(left)
            yield from references(right)


@dataclass(frozen=True)
class SentenceSystem:
    """Named sentences; every ``Tr`` reference must resolve to a name."""

    sentences: tuple[tuple[str, Sentence], ...]

    def __post_init__(self) -> None:
        names = [name for name, _ in self.sentences]
        if len(set(names)) != len(names):
            raise KripkeError("sentence names must be unique")
        defined = set(names)
        for name, body in self.sentences:
            for ref in references(body):
                if ref not in defined:
                    raise KripkeError(f"sentence {name} refers to undefined sentence {ref}")

    @classmethod
    def of(cls, sentences: Mapping[str, Sentence]) -> SentenceSystem:
        return cls(tuple(sentences.items()))

    @property
    def names(self) -> list[str]:
        return [name for name, _ in self.sentences]

    def __len__(self) -> int:
        return len(self.sentences)


def evaluate(sentence: Sentence, valuation: Mapping[str, TruthValue]) -> TruthValue:
    match sentence:
        case Atom(truth):
            return TruthValue.from_bool(truth)
        case Tr(name):
            return valuation[name]
        case Not(body):
            return ~evaluate(body, valuation)
        case And(left, right):
            return evaluate(left, valuation) & evaluate(right, valuation)
        case Or(left, right):
            return evaluate(left, valuation) | evaluate(right, valuation)
    raise KripkeError(f"not a sentence: {sentence!r}")


def all_unknown(system: SentenceSystem) -> Valuation:
    return dict.fromkeys(system.names, TruthValue.U)


def jump(system: SentenceSystem, valuation: Mapping[str, TruthValue]) -> Valuation:
    """Re-evaluate every sentence body against ``valuation``."""
    missing = [name for name in system.names if name not in valuation]
    if missing:
        raise KripkeError(f"valuation is not total, missing {missing[0]}")
    return {name: evaluate(body, valuation) for name, body in system.sentences}


def info_leq(v: Mapping[str, TruthValue], w: Mapping[str, TruthValue]) -> bool:
    return all(v[name].info_leq(w[name]) for name in v)


def format_valuation(valuation: Mapping[str, TruthValue]) -> dict[str, str]:
    return {name: value.value for name, value in valuation.items()}


class KripkeJumpDomain(IterationDomain[Valuation]):
    """The jump operator as an engine domain, starting from all-unknown."""

    def __init__(self, system: SentenceSystem) -> None:
        self.system = system

    @property
    def initial(self) -> Valuation:
        return all_unknown(self.system)

    def step(self, value: Valuation) -> Valuation:
        return jump(self.system, value)

    def describe(self, value: Valuation) -> dict[str, str]:
        return format_valuation(value)


def minimal_fixed_point(
    system: SentenceSystem, config: LabConfig = DEFAULT_CONFIG
) -> tuple[Valuation, int]:
    """
    Iterate the jump from all-unknown until the valuation stops changing.

    Each productive step settles at least one more sentence, so the stage
    never exceeds the number of sentences.

    Returns:
        The minimal fixed point and the least stage at which it is reached
    """
    trace = run_finite(KripkeJumpDomain(system), budget=len(system), config=config)
    if trace.theta is None:
        raise KripkeError("jump iteration did not stabilize within the sentence count")
    stage = trace.theta.to_int()
    LOGGER.debug(f"minimal fixed point reached at stage {stage}")
    return trace.fixed_value, stage


class Grounding(Enum):
    GROUNDED_TRUE = "groundedTrue"
    GROUNDED_FALSE = "groundedFalse"
    UNGROUNDED = "ungrounded"


_GROUNDING = {
    TruthValue.T: Grounding.GROUNDED_TRUE,
    TruthValue.F: Grounding.GROUNDED_FALSE,
    TruthValue.U: Grounding.UNGROUNDED,
}


def classify(system: SentenceSystem, config: LabConfig = DEFAULT_CONFIG) -> dict[str, Grounding]:
    valuation, _ = minimal_fixed_point(system, config)
    return {name: _GROUNDING[value] for name, value in valuation.items()}


def all_valuations(
    system: SentenceSystem, config: LabConfig = DEFAULT_CONFIG
) -> Iterator[Valuation]:
    count = 3 ** len(system)
    if count > config.lattice_cap:
        raise CapExceededError("valuation space", count, config.lattice_cap)
    names = system.names
    for values in product(TruthValue, repeat=len(names)):
        yield dict(zip(names, values, strict=True))


def fixed_points(system: SentenceSystem, config: LabConfig = DEFAULT_CONFIG) -> list[Valuation]:
    """Every valuation fixed by the jump, by exhaustive enumeration."""
    return [v for v in all_valuations(system, config) if jump(system, v) == v]


def jump_monotone_violation(
    system: SentenceSystem, config: LabConfig = DEFAULT_CONFIG
) -> tuple[Valuation, Valuation] | None:
    """First pair ``v <= w`` with ``jump(v) </= jump(w)`` over all valuation pairs."""
    valuations = list(all_valuations(system, config))
    jumps = [jump(system, v) for v in valuations]
    for (v, jv), (w, jw) in product(zip(valuations, jumps, strict=True), repeat=2):
        if info_leq(v, w) and not info_leq(jv, jw):
            return v, w
    return None


def grounded_chain(depth: int) -> SentenceSystem:
    """``S1 := true`` and ``Sk := Tr(S(k-1))``, grounded at stage ``depth``."""
    if depth < 1:
        raise KripkeError(f"a grounded chain needs depth >= 1, got {depth}")
    sentences: dict[str, Sentence] = {"S1": Atom(True)}
    for k in range(2, depth + 1):
        sentences[f"S{k}"] = Tr(f"S{k - 1}")
    return SentenceSystem.of(sentences)


def liar() -> SentenceSystem:
    return SentenceSystem.of({"L": Not(Tr("L"))})


def truth_teller() -> SentenceSystem:
    return SentenceSystem.of({"K": Tr("K")})


def parse_sentence(data: Any, path: str = "$") -> Sentence:
    """
    Read a sentence from its JSON form.

    Nodes are one-key objects: ``{"atom": true}``, ``{"tr": "L"}``,
    ``{"not": node}``, ``{"and": [node, node]}`` and ``{"or": [node, node]}``.

    Raises:
        ScenarioError: naming the path of the first malformed node
    """
    if not isinstance(data, dict) or len(data) != 1:
        raise ScenarioError(path, "a sentence node with exactly one of atom|tr|not|and|or")
    ((tag, body),) = data.items()
    if tag == "atom":
        if not isinstance(body, bool):
            raise ScenarioError(f"{path}.atom", "a boolean")
        return Atom(body)
    if tag == "tr":
        if not isinstance(body, str) or not body:
            raise ScenarioError(f"{path}.tr", "a sentence name")
        return Tr(body)
    if tag == "not":
        return Not(parse_sentence(body, f"{path}.not"))
    if tag in ("and", "or"):
        if not isinstance(body, list) or len(body) != 2:
            raise ScenarioError(f"{path}.{tag}", "a list of two sentence nodes")
        left = parse_sentence(body[0], f"{path}.{tag}[0]")
        right = parse_sentence(body[1], f"{path}.{tag}[1]")
        return And(left, right) if tag == "and" else Or(left, right)
    raise ScenarioError(path, f"one of atom|tr|not|and|or, got {tag!r}")


def sentence_to_dict(sentence: Sentence) -> dict[str, Any]:
    match sentence:
        case Atom(truth):
            return {"atom": truth}
        case Tr(name):
            return {"tr": name}
        case Not(body):
            return {"not": sentence_to_dict(body)}
        case And(left, right):
            return {"and": [sentence_to_dict(left), sentence_to_dict(right)]}
        case Or(left, right):
            return {"or": [sentence_to_dict(left), sentence_to_dict(right)]}
    raise KripkeError(f"not a sentence: {sentence!r}")


def parse_system(data: Any, path: str = "$.sentences") -> SentenceSystem:
    if not isinstance(data, dict) or not data:
        raise ScenarioError(path, "a nonempty object mapping names to sentence nodes")
    sentences = {name: parse_sentence(node, f"{path}.{name}") for name, node in data.items()}
    defined = set(sentences)
    for name, body in sentences.items():
        for ref in references(body):
            if ref not in defined:
                raise ScenarioError(f"{path}.{name}", f"references to defined sentences, got {ref!r}")
    return SentenceSystem.of(sentences)


def system_to_dict(system: SentenceSystem) -> dict[str, Any]:
    return {name: sentence_to_dict(body) for name, body in system.sentences}
