"""
Seeded instance generators for the property suites and tests.

Every generator takes a :class:`random.Random`; algorithms never draw random
numbers themselves.
"""

from __future__ import annotations

from fractions import Fraction
from random import Random

from fixpoint_lab.engine import OrdinalStepOperator, Region
from fixpoint_lab.fincat import Algebra, FinSetObj, PolyFunctor, Summand, apply_functor
from fixpoint_lab.game import ReflectiveGameSpec, StageGame
from fixpoint_lab.kripke import And, Atom, Not, Or, Sentence, SentenceSystem, Tr
from fixpoint_lab.lattice import FiniteLattice, MonotoneOp, format_subset
from fixpoint_lab.ordinal import Ordinal, from_int, omega_power

ATOMS = "abcdef"

Pair = tuple[int, int]
"""``(a, b)`` standing for ``w*a + b``, an ordinal below ``w^2``."""


def random_ordinal(rng: Random, depth: int = 2, max_terms: int = 3) -> Ordinal:
    """A CNF ordinal whose exponents are nested at most ``depth`` deep."""
    if depth == 0:
        return from_int(rng.randint(0, 5))
    exponents: set[Ordinal] = set()
    for _ in range(rng.randint(0, max_terms)):
        exponents.add(random_ordinal(rng, depth - 1, max_terms=2))
    terms = tuple((e, rng.randint(1, 5)) for e in sorted(exponents, reverse=True))
    return Ordinal(terms)


def pair_to_ordinal(pair: Pair) -> Ordinal:
    a, b = pair
    result = from_int(b)
    if a:
        result = omega_power(from_int(1), a) + result
    return result


def pair_add(x: Pair, y: Pair) -> Pair:
    """Ordinal addition below ``w^2``: a finite part is absorbed by a following ``w``."""
    if y[0] == 0:
        return x[0], x[1] + y[1]
    return x[0] + y[0], y[1]


def random_sublattice(rng: Random, max_atoms: int = 6) -> FiniteLattice:
    """
    A random sublattice of a powerset over at most ``max_atoms`` atoms.

    A few random subsets together with the empty and full set are closed under
    union and intersection, so the result has at most ``2**max_atoms`` elements.
    """
    atoms = ATOMS[: rng.randint(1, max_atoms)]
    family = {frozenset(), frozenset(atoms)}
    for _ in range(rng.randint(0, 5)):
        family.add(frozenset(a for a in atoms if rng.random() < 0.5))
    changed = True
    while changed:
        changed = False
        for x in list(family):
            for y in list(family):
                for z in (x | y, x & y):
                    if z not in family:
                        family.add(z)
                        changed = True
    labels = sorted(family, key=lambda s: (len(s), sorted(s)))
    return FiniteLattice.from_order(
        labels, lambda x, y: x <= y, names=[format_subset(s) for s in labels]
    )


def random_monotone_op(rng: Random, lattice: FiniteLattice) -> MonotoneOp:
    """``f(x) = join of g(y) over y <= x`` for a random map ``g``, which is monotone."""
    g = [rng.choice(lattice.elements) for _ in lattice.elements]
    return MonotoneOp.from_function(
        lattice,
        lambda x: lattice.join_all(g[y] for y in lattice.elements if lattice.leq(y, x)),
    )


def random_region_operator(
    rng: Random,
) -> tuple[list[tuple[Pair, Pair | None, int]], OrdinalStepOperator]:
    """
    A monotone step operator below ``w^2`` with finite increments.

    The first region may be split at a finite bound with non-decreasing
    increments; later boundaries are multiples of ``w``; the unbounded last
    region is fixed and starts at a multiple of ``w``.

    Returns:
        The regions in pair encoding and the operator they describe
    """
    bounds: list[Pair] = [(0, 0)]
    increments: list[int] = []
    first = rng.randint(0, 3)
    increments.append(first)
    if first and rng.random() < 0.5:
        bounds.append((0, rng.randint(1, 6)))
        increments.append(rng.randint(first, 3))
    limits = sorted(rng.sample(range(1, 5), k=rng.randint(0, 3)))
    for k in limits:
        bounds.append((k, 0))
        increments.append(rng.randint(0, 3))
    # the fixed region starts at a multiple of w so a finite split stays monotone
    bounds.append(((limits[-1] if limits else 0) + 1, 0))
    increments.append(0)
    regions = [
        (lo, bounds[i + 1] if i + 1 < len(bounds) else None, inc)
        for i, (lo, inc) in enumerate(zip(bounds, increments, strict=True))
    ]
    op = OrdinalStepOperator(
        tuple(
            Region(
                pair_to_ordinal(lo),
                None if hi is None else pair_to_ordinal(hi),
                from_int(inc),
            )
            for lo, hi, inc in regions
        )
    )
    return regions, op


def random_sentence(rng: Random, names: list[str], depth: int = 2) -> Sentence:
    if depth == 0 or rng.random() < 0.3:
        if rng.random() < 0.4:
            return Atom(rng.random() < 0.5)
        return Tr(rng.choice(names))
    shape = rng.choice(("not", "and", "or"))
    if shape == "not":
        return Not(random_sentence(rng, names, depth - 1))
    left = random_sentence(rng, names, depth - 1)
    right = random_sentence(rng, names, depth - 1)
    return And(left, right) if shape == "and" else Or(left, right)


def random_system(rng: Random, max_sentences: int = 3, classical: bool = False) -> SentenceSystem:
    names = [f"P{i}" for i in range(rng.randint(1, max_sentences))]
    sentences: dict[str, Sentence] = {}
    for name in names:
        body = random_sentence(rng, names)
        if classical:
            body = _strip_truth(rng, body)
        sentences[name] = body
    return SentenceSystem.of(sentences)


def _strip_truth(rng: Random, sentence: Sentence) -> Sentence:
    match sentence:
        case Tr():
            return Atom(rng.random() < 0.5)
        case Not(body):
            return Not(_strip_truth(rng, body))
        case And(left, right):
            return And(_strip_truth(rng, left), _strip_truth(rng, right))
        case Or(left, right):
            return Or(_strip_truth(rng, left), _strip_truth(rng, right))
    return sentence


def random_functor(rng: Random, shape: str) -> PolyFunctor:
    """
    A random polynomial functor.

    ``constant`` functors have only arity-0 summands (at most 8 labels in
    total) and converge at stage 1 to a non-empty carrier. ``recursive`` ones
    have only positive arities, so ``F(0)`` is empty and so is their initial
    algebra. ``mixed`` ones have both and never converge.
    """
    if shape == "mixed":
        return PolyFunctor(
            (Summand(("base",), 0), Summand(tuple(f"step{k}" for k in range(rng.randint(1, 2))), 1))
        )
    summands = []
    used = 0
    for i in range(rng.randint(1, 3)):
        count = rng.randint(1, 3)
        if shape == "constant" and used + count > 8:
            break
        used += count
        arity = 0 if shape == "constant" else rng.randint(1, 3)
        summands.append(Summand(tuple(f"c{i}_{k}" for k in range(count)), arity))
    return PolyFunctor(tuple(summands))


def random_algebra(rng: Random, functor: PolyFunctor, size: int) -> Algebra:
    carrier = FinSetObj(tuple(f"y{i}" for i in range(size)))
    structure = {t: rng.choice(carrier.elements) for t in apply_functor(functor, carrier)}
    return Algebra(carrier, structure)


def coordination_stage(labels: tuple[str, str], miss: str) -> StageGame:
    """2x2 common-payoff game scoring 1 on the diagonal, labelled per diagonal entry."""
    one, zero = Fraction(1), Fraction(0)
    payoff = ((one, zero), (zero, one))
    outcomes = ((labels[0], miss), (miss, labels[1]))
    return StageGame(("x", "y"), ("x", "y"), payoff, payoff, outcomes)


def hypothesis_counterexample() -> ReflectiveGameSpec:
    """
    Three coordination stages whose winners do not persist.

    Stage 0 ties between ``p`` and ``q``. After ``p`` only the ``s`` profile
    is admissible, after ``q`` only ``t``; after ``s`` only ``r``, after ``t``
    only ``r2``. ``p`` wins but is followed by the losing ``s``, and the two
    equilibrium paths end in different winning labels.
    """
    stages = (
        coordination_stage(("p", "q"), "z0"),
        coordination_stage(("s", "t"), "z1"),
        coordination_stage(("r", "r2"), "z2"),
    )
    every = [frozenset(stage.profiles) for stage in stages]
    promotion = (
        {"p": frozenset({(0, 0)}), "q": frozenset({(1, 1)}), "z0": every[1]},
        {"s": frozenset({(0, 0)}), "t": frozenset({(1, 1)}), "z1": every[2]},
    )
    return ReflectiveGameSpec(stages, promotion, frozenset({"p", "r", "r2"}))


def dominated_stage_spec() -> ReflectiveGameSpec:
    """Two stages where every admissible profile of stage 1 is strictly dominated."""
    one, zero = Fraction(1), Fraction(0)
    first = StageGame(("go",), ("go",), ((one,),), ((one,),), (("start",),))
    payoff = ((zero, zero), (one, one))
    second = StageGame(("low", "high"), ("a", "b"), payoff, payoff, (("lost", "lost"), ("won", "won")))
    promotion = ({"start": frozenset({(0, 0), (0, 1)})},)
    return ReflectiveGameSpec((first, second), promotion, frozenset({"won"}))

