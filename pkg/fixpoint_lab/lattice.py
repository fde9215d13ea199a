"""
Finite complete lattices and monotone operators given as explicit tables.

Elements are dense integer ids ``0..n-1``; each lattice keeps a label per id
(a frozenset for powersets, an int for chains, a pair for products) and a
display name used in scenario files and reports.
"""

from __future__ import annotations

from collections.abc import Callable, Hashable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from itertools import product

from fixpoint_lab.config import DEFAULT_CONFIG, LabConfig
from fixpoint_lab.errors import CapExceededError, LatticeError, NotMonotoneError
from fixpoint_lab.logging import get_logger

LOGGER = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class FiniteLattice:
    """An explicit finite lattice with order, join and meet tables."""

    labels: tuple[Hashable, ...]
    names: tuple[str, ...]
    leq_table: tuple[tuple[bool, ...], ...]
    join_table: tuple[tuple[int, ...], ...]
    meet_table: tuple[tuple[int, ...], ...]
    bottom: int
    top: int
    _index: dict[Hashable, int] = field(init=False, repr=False)
    _name_index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_index", {label: i for i, label in enumerate(self.labels)})
        object.__setattr__(self, "_name_index", {name: i for i, name in enumerate(self.names)})
        if len(self._index) != len(self.labels):
            raise LatticeError("lattice labels must be distinct")

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def elements(self) -> range:
        return range(len(self.labels))

    def leq(self, a: int, b: int) -> bool:
        return self.leq_table[a][b]

    def join(self, a: int, b: int) -> int:
        return self.join_table[a][b]

    def meet(self, a: int, b: int) -> int:
        return self.meet_table[a][b]

    def join_all(self, items: Iterable[int]) -> int:
        result = self.bottom
        for item in items:
            result = self.join_table[result][item]
        return result

    def index(self, label: Hashable) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise LatticeError(f"{label!r} is not an element of the lattice")

    def name(self, element: int) -> str:
        return self.names[element]

    def index_of_name(self, name: str) -> int:
        try:
            return self._name_index[name]
        except KeyError:
            raise LatticeError(f"'{name}' does not name an element of the lattice")

    @classmethod
    def from_order(
        cls,
        labels: Sequence[Hashable],
        leq: Callable[[Hashable, Hashable], bool],
        names: Sequence[str] | None = None,
        config: LabConfig = DEFAULT_CONFIG,
    ) -> FiniteLattice:
        """
        Build a lattice from its order relation, computing joins and meets.

        Args:
            labels: the elements
            leq: the order relation on labels
            names: display names (defaults to ``str(label)``)
            config: supplies ``lattice_cap``

        Returns:
            The validated lattice

        Raises:
            LatticeError: if ``leq`` is not a partial order or some pair lacks
                a least upper or greatest lower bound
        """
        n = len(labels)
        if n == 0:
            raise LatticeError("a lattice needs at least one element")
        if n > config.lattice_cap:
            raise CapExceededError("lattice", n, config.lattice_cap)
        table = tuple(tuple(bool(leq(a, b)) for b in labels) for a in labels)
        _check_partial_order(table)
        up_count = [sum(row) for row in table]
        down_count = [sum(table[a][b] for a in range(n)) for b in range(n)]

        def bound(a: int, b: int, upper: bool) -> int:
            if upper:
                candidates = [c for c in range(n) if table[a][c] and table[b][c]]
                # the least upper bound has the largest up-set among upper bounds
                best = max(candidates, key=lambda c: up_count[c], default=None)
                ok = best is not None and all(table[best][c] for c in candidates)
            else:
                candidates = [c for c in range(n) if table[c][a] and table[c][b]]
                best = max(candidates, key=lambda c: down_count[c], default=None)
                ok = best is not None and all(table[c][best] for c in candidates)
            if not ok:
                kind = "least upper" if upper else "greatest lower"
                raise LatticeError(f"{labels[a]!r} and {labels[b]!r} have no {kind} bound")
            return best

        join = tuple(tuple(bound(a, b, True) for b in range(n)) for a in range(n))
        meet = tuple(tuple(bound(a, b, False) for b in range(n)) for a in range(n))
        bottom = meet[0][0]
        top = join[0][0]
        for x in range(n):
            bottom = meet[bottom][x]
            top = join[top][x]
        return cls(
            labels=tuple(labels),
            names=tuple(names) if names is not None else tuple(str(x) for x in labels),
            leq_table=table,
            join_table=join,
            meet_table=meet,
            bottom=bottom,
            top=top,
        )


def _check_partial_order(table: tuple[tuple[bool, ...], ...]) -> None:
    n = len(table)
    for a in range(n):
        if not table[a][a]:
            raise LatticeError(f"order is not reflexive at element {a}")
        for b in range(n):
            if a != b and table[a][b] and table[b][a]:
                raise LatticeError(f"order is not antisymmetric at elements {a} and {b}")
            if table[a][b]:
                for c in range(n):
                    if table[b][c] and not table[a][c]:
                        raise LatticeError(
                            f"order is not transitive at elements {a}, {b}, {c}"
                        )


def format_subset(atoms: Iterable[str]) -> str:
    return "{" + ",".join(sorted(atoms)) + "}"


def make_powerset(universe: Sequence[str], config: LabConfig = DEFAULT_CONFIG) -> FiniteLattice:
    """
    Lattice of all subsets of ``universe`` ordered by inclusion.

    Atoms are sorted, and the id of a subset is its bitmask over the sorted
    atoms, so join and meet are bitwise or/and.
    """
    atoms = sorted(universe)
    if len(set(atoms)) != len(atoms):
        raise LatticeError(f"universe atoms must be distinct, got {list(universe)}")
    if len(atoms) > config.powerset_cap:
        raise CapExceededError("powerset universe", len(atoms), config.powerset_cap)
    n = 1 << len(atoms)
    if n > config.lattice_cap:
        raise CapExceededError("lattice", n, config.lattice_cap)
    labels = tuple(
        frozenset(atom for bit, atom in enumerate(atoms) if mask >> bit & 1) for mask in range(n)
    )
    return FiniteLattice(
        labels=labels,
        names=tuple(format_subset(label) for label in labels),
        leq_table=tuple(tuple(a & b == a for b in range(n)) for a in range(n)),
        join_table=tuple(tuple(a | b for b in range(n)) for a in range(n)),
        meet_table=tuple(tuple(a & b for b in range(n)) for a in range(n)),
        bottom=0,
        top=n - 1,
    )


def make_chain(n: int, config: LabConfig = DEFAULT_CONFIG) -> FiniteLattice:
    """The chain ``0 < 1 < ... < n-1``."""
    if n < 1:
        raise LatticeError(f"a chain needs at least one element, got {n}")
    if n > config.lattice_cap:
        raise CapExceededError("lattice", n, config.lattice_cap)
    return FiniteLattice(
        labels=tuple(range(n)),
        names=tuple(str(i) for i in range(n)),
        leq_table=tuple(tuple(a <= b for b in range(n)) for a in range(n)),
        join_table=tuple(tuple(max(a, b) for b in range(n)) for a in range(n)),
        meet_table=tuple(tuple(min(a, b) for b in range(n)) for a in range(n)),
        bottom=0,
        top=n - 1,
    )


def make_product(
    first: FiniteLattice, second: FiniteLattice, config: LabConfig = DEFAULT_CONFIG
) -> FiniteLattice:
    """Componentwise product; the id of ``(a, b)`` is ``a * |second| + b``."""
    m = second.size
    n = first.size * m
    if n > config.lattice_cap:
        raise CapExceededError("lattice", n, config.lattice_cap)
    pairs = [(a, b) for a in first.elements for b in second.elements]

    def table(op: Callable[[int, int], int], other: Callable[[int, int], int]):
        return tuple(
            tuple(op(a1, a2) * m + other(b1, b2) for (a2, b2) in pairs) for (a1, b1) in pairs
        )

    return FiniteLattice(
        labels=tuple((first.labels[a], second.labels[b]) for a, b in pairs),
        names=tuple(f"({first.names[a]},{second.names[b]})" for a, b in pairs),
        leq_table=tuple(
            tuple(first.leq(a1, a2) and second.leq(b1, b2) for (a2, b2) in pairs)
            for (a1, b1) in pairs
        ),
        join_table=table(first.join, second.join),
        meet_table=table(first.meet, second.meet),
        bottom=first.bottom * m + second.bottom,
        top=first.top * m + second.top,
    )


def order_dual(lattice: FiniteLattice) -> FiniteLattice:
    """The same elements with the order reversed."""
    n = lattice.size
    return FiniteLattice(
        labels=lattice.labels,
        names=lattice.names,
        leq_table=tuple(tuple(lattice.leq(b, a) for b in range(n)) for a in range(n)),
        join_table=lattice.meet_table,
        meet_table=lattice.join_table,
        bottom=lattice.top,
        top=lattice.bottom,
    )


def height(lattice: FiniteLattice) -> int:
    """Number of covering steps in a longest chain from bottom to top."""
    n = lattice.size
    below = [sum(lattice.leq(a, b) for a in range(n)) for b in range(n)]
    longest = [0] * n
    for x in sorted(range(n), key=lambda e: below[e]):
        for y in range(n):
            if y != x and lattice.leq(y, x):
                longest[x] = max(longest[x], longest[y] + 1)
    return longest[lattice.top]


@dataclass
class MonotoneOp:
    """An operator given by its function table over lattice ids."""

    table: tuple[int, ...]
    verified: bool = field(default=False, compare=False)
    """Set only by :func:`check_monotone`."""

    def __call__(self, element: int) -> int:
        return self.table[element]

    @classmethod
    def identity(cls, lattice: FiniteLattice) -> MonotoneOp:
        return cls(tuple(lattice.elements))

    @classmethod
    def constant(cls, lattice: FiniteLattice, value: int) -> MonotoneOp:
        return cls((value,) * lattice.size)

    @classmethod
    def from_function(cls, lattice: FiniteLattice, fn: Callable[[int], int]) -> MonotoneOp:
        return cls(tuple(fn(x) for x in lattice.elements))

    @classmethod
    def from_labels(
        cls, lattice: FiniteLattice, mapping: Mapping[Hashable, Hashable]
    ) -> MonotoneOp:
        """Build the table from a label-to-label mapping that must be total."""
        missing = [label for label in lattice.labels if label not in mapping]
        if missing:
            raise LatticeError(f"operator is not total, missing {missing[0]!r}")
        return cls(tuple(lattice.index(mapping[label]) for label in lattice.labels))


def check_total(lattice: FiniteLattice, op: MonotoneOp) -> None:
    if len(op.table) != lattice.size or any(
        not 0 <= value < lattice.size for value in op.table
    ):
        raise LatticeError("operator table is not a total map over the lattice elements")


def monotone_violation(lattice: FiniteLattice, op: MonotoneOp) -> tuple[int, int] | None:
    """Return the first pair ``a <= b`` with ``op(a) </= op(b)``, if any."""
    check_total(lattice, op)
    for a, b in product(lattice.elements, repeat=2):
        if lattice.leq(a, b) and not lattice.leq(op(a), op(b)):
            return a, b
    return None


def check_monotone(lattice: FiniteLattice, op: MonotoneOp) -> bool:
    violation = monotone_violation(lattice, op)
    if violation is not None:
        a, b = violation
        LOGGER.debug(
            f"not monotone: {lattice.name(a)} <= {lattice.name(b)} but "
            f"{lattice.name(op(a))} </= {lattice.name(op(b))}"
        )
    op.verified = violation is None
    return op.verified


def require_monotone(lattice: FiniteLattice, op: MonotoneOp) -> None:
    if not op.verified and not check_monotone(lattice, op):
        raise NotMonotoneError("operator is not monotone")


def _iterate(lattice: FiniteLattice, op: MonotoneOp, start: int) -> list[int]:
    chain = [start]
    while len(chain) <= lattice.size:
        successor = op(chain[-1])
        if successor == chain[-1]:
            return chain
        chain.append(successor)
    raise LatticeError("iteration did not stabilize; the operator is not monotone")


def kleene_chain(lattice: FiniteLattice, op: MonotoneOp) -> list[int]:
    """The iterates ``bottom, f(bottom), ...`` up to and including the first fixed one."""
    require_monotone(lattice, op)
    return _iterate(lattice, op, lattice.bottom)


def lfp(lattice: FiniteLattice, op: MonotoneOp) -> tuple[int, int]:
    """Least fixed point by Kleene iteration, with its closure stage."""
    chain = kleene_chain(lattice, op)
    return chain[-1], len(chain) - 1


def gfp(lattice: FiniteLattice, op: MonotoneOp) -> tuple[int, int]:
    """Greatest fixed point by iteration downwards from top, with its closure stage."""
    require_monotone(lattice, op)
    chain = _iterate(lattice, op, lattice.top)
    return chain[-1], len(chain) - 1


def fixed_points(lattice: FiniteLattice, op: MonotoneOp) -> frozenset[int]:
    check_total(lattice, op)
    return frozenset(x for x in lattice.elements if op(x) == x)


def fixed_point_lattice(lattice: FiniteLattice, op: MonotoneOp) -> FiniteLattice:
    """
    The fixed points of a monotone operator under the induced order.

    Joins in this lattice are generally not the joins of the ambient lattice;
    construction validates that every pair still has both bounds.
    """
    require_monotone(lattice, op)
    points = sorted(fixed_points(lattice, op))
    return FiniteLattice.from_order(
        [lattice.labels[p] for p in points],
        lambda a, b: lattice.leq(lattice.index(a), lattice.index(b)),
        names=[lattice.names[p] for p in points],
    )
