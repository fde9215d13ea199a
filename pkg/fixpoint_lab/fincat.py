"""
Polynomial endofunctors on finite sets and their initial algebras.

A functor ``F(X) = A_1 x X^n1 + ... + A_k x X^nk`` is applied to a finite set
by enumerating tagged tuples :class:`Term` ``(i, a, x_1..x_ni)``. The initial
algebra is found by iterating ``F`` from the empty set along the canonical
connecting maps until one of them is a bijection.
"""

from __future__ import annotations

from collections.abc import Hashable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from itertools import product
from typing import NamedTuple

from fixpoint_lab.config import DEFAULT_CONFIG, LabConfig
from fixpoint_lab.errors import (
    BoundsExceededError,
    CapExceededError,
    FunctorError,
    LatticeError,
)
from fixpoint_lab.lattice import FiniteLattice, MonotoneOp, require_monotone
from fixpoint_lab.logging import get_logger

LOGGER = get_logger(__name__)


class Term(NamedTuple):
    """Element ``(summand, label, args)`` of ``F(X)``."""

    summand: int
    label: str
    args: tuple[Hashable, ...] = ()


def render(element: Hashable) -> str:
    """Render a tagged tree as ``label`` or ``label(arg, ...)``."""
    if isinstance(element, Term):
        if not element.args:
            return element.label
        return f"{element.label}({', '.join(render(arg) for arg in element.args)})"
    return str(element)


@dataclass(frozen=True)
class FinSetObj:
    elements: tuple[Hashable, ...] = ()

    def __post_init__(self) -> None:
        if len(set(self.elements)) != len(self.elements):
            raise FunctorError("finite set elements must be distinct")

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[Hashable]:
        return iter(self.elements)

    def as_set(self) -> frozenset[Hashable]:
        return frozenset(self.elements)


@dataclass(frozen=True)
class Summand:
    labels: tuple[str, ...]
    arity: int


@dataclass(frozen=True)
class PolyFunctor:
    summands: tuple[Summand, ...]

    def __post_init__(self) -> None:
        if not self.summands:
            raise FunctorError("a polynomial functor needs at least one summand")
        for i, summand in enumerate(self.summands):
            if not summand.labels:
                raise FunctorError(f"summand {i} has an empty label set")
            if len(set(summand.labels)) != len(summand.labels):
                raise FunctorError(f"summand {i} repeats a label")
            if summand.arity < 0:
                raise FunctorError(f"summand {i} has negative arity {summand.arity}")

    @classmethod
    def of(cls, *summands: tuple[Sequence[str], int]) -> PolyFunctor:
        """Shorthand: ``PolyFunctor.of((["nil"], 0), (["cons"], 1))``."""
        return cls(tuple(Summand(tuple(labels), arity) for labels, arity in summands))

    def application_size(self, n: int) -> int:
        return sum(len(s.labels) * n**s.arity for s in self.summands)

    def describe(self) -> str:
        parts = []
        for s in self.summands:
            labels = "{" + ",".join(s.labels) + "}"
            parts.append(labels if s.arity == 0 else f"{labels}xX^{s.arity}")
        return " + ".join(parts)


def _check_arity(functor: PolyFunctor, config: LabConfig) -> None:
    for i, summand in enumerate(functor.summands):
        if summand.arity > config.functor_arity_cap:
            raise CapExceededError(f"arity of summand {i}", summand.arity, config.functor_arity_cap)


@dataclass(frozen=True, eq=False)
class Algebra:
    """A carrier with a structure map ``F(carrier) -> carrier``."""

    carrier: FinSetObj
    structure: Mapping[Hashable, Hashable] = field(default_factory=dict)


@dataclass(frozen=True)
class DivergenceReport:
    """The chain did not stabilize within the budget; ``growth`` holds ``|X_0|..|X_budget|``."""

    budget: int
    growth: tuple[int, ...]


@dataclass(frozen=True)
class CounterexampleReport:
    """Homomorphism search did not find exactly one homomorphism."""

    found: int
    candidates: int
    examples: tuple[dict[Hashable, Hashable], ...]


def apply_functor(
    functor: PolyFunctor, obj: FinSetObj, config: LabConfig = DEFAULT_CONFIG
) -> FinSetObj:
    _check_arity(functor, config)
    size = functor.application_size(len(obj))
    if size > config.functor_size_cap:
        raise CapExceededError("functor application", size, config.functor_size_cap)
    return FinSetObj(
        tuple(
            Term(i, label, args)
            for i, summand in enumerate(functor.summands)
            for label in summand.labels
            for args in product(obj.elements, repeat=summand.arity)
        )
    )


def apply_functor_map(
    functor: PolyFunctor, fn: Mapping[Hashable, Hashable], config: LabConfig = DEFAULT_CONFIG
) -> dict[Hashable, Hashable]:
    """Lift a total map ``X -> Y`` (its keys are ``X``) to ``F(X) -> F(Y)``."""
    domain = apply_functor(functor, FinSetObj(tuple(fn)), config)
    return {
        term: Term(term.summand, term.label, tuple(fn[arg] for arg in term.args))
        for term in domain
    }


def is_bijection(fn: Mapping[Hashable, Hashable], source: FinSetObj, target: FinSetObj) -> bool:
    if set(fn) != source.as_set():
        return False
    images = list(fn.values())
    return len(set(images)) == len(images) and set(images) == target.as_set()


def validate_algebra(
    functor: PolyFunctor, algebra: Algebra, config: LabConfig = DEFAULT_CONFIG
) -> None:
    """Raise unless the structure map is total on ``F(carrier)`` and lands in the carrier."""
    domain = apply_functor(functor, algebra.carrier, config)
    if set(algebra.structure) != domain.as_set():
        raise FunctorError("structure map domain is not F(carrier)")
    carrier = algebra.carrier.as_set()
    for source, image in algebra.structure.items():
        if image not in carrier:
            raise FunctorError(f"structure map sends {render(source)} outside the carrier")


@dataclass
class InitialChain:
    """
    The chain ``X_0 = {} -> X_1 = F(X_0) -> ...`` with its connecting maps.

    ``connecting[n]`` is the map ``X_n -> X_{n+1}``; ``theta`` is the least
    ``n`` at which it is a bijection, if one was found.
    """

    functor: PolyFunctor
    carriers: list[FinSetObj]
    connecting: list[dict[Hashable, Hashable]]
    theta: int | None = None

    @property
    def growth(self) -> tuple[int, ...]:
        return tuple(len(carrier) for carrier in self.carriers)

    def bonding(self, m: int, n: int) -> dict[Hashable, Hashable]:
        """The composite connecting map ``X_m -> X_n`` for ``m <= n``."""
        if not 0 <= m <= n < len(self.carriers):
            raise FunctorError(f"no bonding map from stage {m} to stage {n}")
        composite = {x: x for x in self.carriers[m]}
        for k in range(m, n):
            step = self.connecting[k]
            composite = {x: step[y] for x, y in composite.items()}
        return composite


def build_initial_chain(
    functor: PolyFunctor, budget: int, config: LabConfig = DEFAULT_CONFIG
) -> InitialChain:
    """Compute ``X_0..X_budget`` (or fewer, if a connecting map is a bijection)."""
    chain = InitialChain(functor, [FinSetObj()], [])
    for n in range(budget):
        following = apply_functor(functor, chain.carriers[n], config)
        if n == 0:
            step: dict[Hashable, Hashable] = {}
        else:
            step = apply_functor_map(functor, chain.connecting[n - 1], config)
        chain.carriers.append(following)
        chain.connecting.append(step)
        LOGGER.debug(f"stage {n + 1}: |X| = {len(following)}")
        if is_bijection(step, chain.carriers[n], following):
            chain.theta = n
            break
    return chain


def initial_algebra(
    functor: PolyFunctor, budget: int | None = None, config: LabConfig = DEFAULT_CONFIG
) -> tuple[Algebra, int] | DivergenceReport:
    """
    Initial algebra of a polynomial functor by iteration from the empty set.

    Args:
        functor: the polynomial functor
        budget: number of functor applications allowed (config default)
        config: caps and default budget

    Returns:
        ``(algebra, theta)`` where the algebra's structure map inverts the
        bijective connecting map ``X_theta -> X_theta+1``, or a divergence
        report with the sizes ``|X_0|..|X_budget|``
    """
    budget = config.initial_algebra_budget if budget is None else budget
    chain = build_initial_chain(functor, budget, config)
    if chain.theta is None:
        LOGGER.info(
            f"initial algebra of {functor.describe()} not reached within {budget} steps",
            type="fixlab",
            subtype="budget_exhausted",
        )
        return DivergenceReport(budget, chain.growth)
    theta = chain.theta
    structure = {image: x for x, image in chain.connecting[theta].items()}
    return Algebra(chain.carriers[theta], structure), theta


def check_transordinal_structure(chain: InitialChain) -> bool:
    """
    Check the chain's bonding maps form a transordinal structure.

    Identity maps at equal stages, composition of bonding maps, and from
    ``theta`` onwards every bonding map out of ``X_theta`` is a bijection.
    """
    stages = range(len(chain.carriers))
    bonds = {(m, n): chain.bonding(m, n) for m in stages for n in stages if m <= n}
    for m in stages:
        if any(x != y for x, y in bonds[m, m].items()):
            return False
    for m in stages:
        for n in stages[m:]:
            for p in stages[n:]:
                outer, first, second = bonds[m, p], bonds[m, n], bonds[n, p]
                if any(outer[x] != second[first[x]] for x in chain.carriers[m]):
                    LOGGER.debug(f"bonding maps do not compose at {m} <= {n} <= {p}")
                    return False
    if chain.theta is not None:
        theta = chain.theta
        for n in stages[theta:]:
            if not is_bijection(bonds[theta, n], chain.carriers[theta], chain.carriers[n]):
                return False
    return True


def lambek_check(
    functor: PolyFunctor, algebra: Algebra, config: LabConfig = DEFAULT_CONFIG
) -> bool:
    """True iff the structure map is a bijection ``F(carrier) -> carrier``."""
    domain = apply_functor(functor, algebra.carrier, config)
    return is_bijection(dict(algebra.structure), domain, algebra.carrier)


def unique_homomorphism(
    functor: PolyFunctor,
    init: Algebra,
    target: Algebra,
    config: LabConfig = DEFAULT_CONFIG,
) -> dict[Hashable, Hashable] | CounterexampleReport:
    """
    Exhaustively search all maps ``init -> target`` for F-algebra homomorphisms.

    A map ``m`` is a homomorphism when ``m(xi(t)) = psi(F(m)(t))`` for every
    ``t`` in ``F(init)``. Candidates are enumerated in carrier order; each
    equation is checked as soon as every element it mentions is assigned, so
    partial assignments that already fail are not extended.

    Returns:
        The homomorphism if exactly one exists, otherwise a report of how many
        were found

    Raises:
        BoundsExceededError: if either carrier is beyond the exhaustive bounds
    """
    if len(target.carrier) > config.homomorphism_target_bound:
        raise BoundsExceededError(
            f"target carrier has {len(target.carrier)} elements, bound is "
            f"{config.homomorphism_target_bound}"
        )
    if len(init.carrier) > config.homomorphism_source_bound:
        raise BoundsExceededError(
            f"source carrier has {len(init.carrier)} elements, bound is "
            f"{config.homomorphism_source_bound}"
        )
    validate_algebra(functor, init, config)
    validate_algebra(functor, target, config)

    order = list(init.carrier)
    position = {x: i for i, x in enumerate(order)}
    due: list[list[tuple[Term, Hashable]]] = [[] for _ in order]
    for term, image in init.structure.items():
        involved = [image, *term.args]
        due[max(position[x] for x in involved)].append((term, image))

    found: list[dict[Hashable, Hashable]] = []
    count = 0
    assignment: dict[Hashable, Hashable] = {}

    def holds(term: Term, image: Hashable) -> bool:
        lifted = Term(term.summand, term.label, tuple(assignment[arg] for arg in term.args))
        return assignment[image] == target.structure[lifted]

    def extend(k: int) -> None:
        nonlocal count
        if k == len(order):
            count += 1
            if len(found) < 2:
                found.append(dict(assignment))
            return
        for candidate in target.carrier:
            assignment[order[k]] = candidate
            if all(holds(term, image) for term, image in due[k]):
                extend(k + 1)
        assignment.pop(order[k], None)

    extend(0)
    candidates = len(target.carrier) ** len(order)
    if count == 1:
        return found[0]
    LOGGER.debug(f"{count} homomorphisms found among {candidates} candidate maps")
    return CounterexampleReport(count, candidates, tuple(found))


def poset_as_category_lfp(lattice: FiniteLattice, op: MonotoneOp) -> int:
    """
    Run the initial-algebra chain in the lattice viewed as a category.

    The initial object is bottom, a morphism ``a -> b`` exists iff ``a <= b``,
    and the colimit of the chain so far is its join. The chain stops at the
    first object isomorphic (equal) to its image.
    """
    require_monotone(lattice, op)
    obj = lattice.bottom
    while True:
        image = op(obj)
        if image == obj:
            return obj
        if not lattice.leq(obj, image):
            raise LatticeError(
                f"no morphism {lattice.name(obj)} -> {lattice.name(image)} in the chain"
            )
        obj = lattice.join(obj, image)
