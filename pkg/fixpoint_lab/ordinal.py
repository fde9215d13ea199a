"""
Ordinals below epsilon-zero in Cantor normal form.

An ordinal is stored as a decreasing sequence of ``(exponent, coefficient)``
terms, ``w^e1*c1 + ... + w^ek*ck``, where every exponent is itself an ordinal.
Only the arithmetic the iteration engine consumes is provided: comparison,
addition, successor/predecessor, finite suprema and right multiplication by
``w``.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass
from enum import Enum
from functools import total_ordering
import re

from fixpoint_lab.errors import OrdinalError, OrdinalOverflowError, OrdinalSyntaxError

COEFFICIENT_MAX = 2**63 - 1
"""Largest coefficient accepted; sums beyond it raise instead of wrapping."""


class Ordering(Enum):
    LT = -1
    EQ = 0
    GT = 1


def _checked(coefficient: int) -> int:
    if coefficient > COEFFICIENT_MAX:
        raise OrdinalOverflowError(
            f"coefficient {coefficient} exceeds the machine-natural bound {COEFFICIENT_MAX}"
        )
    return coefficient


@total_ordering
@dataclass(frozen=True)
class Ordinal:
    """An ordinal below epsilon-zero; the empty term tuple is 0."""

    terms: tuple[tuple[Ordinal, int], ...] = ()

    def __post_init__(self) -> None:
        previous: Ordinal | None = None
        for exponent, coefficient in self.terms:
            if not isinstance(exponent, Ordinal):
                raise OrdinalError(f"exponent {exponent!r} is not an Ordinal")
            if not isinstance(coefficient, int) or coefficient < 1:
                raise OrdinalError(f"coefficient {coefficient!r} must be a positive integer")
            _checked(coefficient)
            if previous is not None and compare(exponent, previous) is not Ordering.LT:
                raise OrdinalError(
                    f"exponents must strictly decrease, got {previous} before {exponent}"
                )
            previous = exponent

    def __lt__(self, other: object) -> bool:
        if not isinstance(other, Ordinal):
            return NotImplemented
        return compare(self, other) is Ordering.LT

    def __add__(self, other: Ordinal | int) -> Ordinal:
        if isinstance(other, int):
            other = from_int(other)
        if not isinstance(other, Ordinal):
            return NotImplemented
        return add(self, other)

    def __radd__(self, other: int) -> Ordinal:
        if isinstance(other, int):
            return add(from_int(other), self)
        return NotImplemented

    def __str__(self) -> str:
        return format_ordinal(self)

    def __repr__(self) -> str:
        return f"Ordinal('{format_ordinal(self)}')"

    @property
    def is_natural(self) -> bool:
        return all(exponent == ZERO for exponent, _ in self.terms)

    def to_int(self) -> int:
        """Return the value of a finite ordinal as a Python integer."""
        if not self.is_natural:
            raise OrdinalError(f"{self} is not a natural number")
        return self.terms[0][1] if self.terms else 0

    @property
    def leading_exponent(self) -> Ordinal:
        if not self.terms:
            raise OrdinalError("0 has no leading exponent")
        return self.terms[0][0]


ZERO = Ordinal()
ONE = Ordinal(((ZERO, 1),))


def from_int(n: int) -> Ordinal:
    if n < 0:
        raise OrdinalError(f"negative integer {n} is not an ordinal")
    return ZERO if n == 0 else Ordinal(((ZERO, _checked(n)),))


def omega_power(exponent: Ordinal, coefficient: int = 1) -> Ordinal:
    """Return ``w^exponent * coefficient``."""
    return Ordinal(((exponent, coefficient),))


OMEGA = omega_power(ONE)


def compare(a: Ordinal, b: Ordinal) -> Ordering:
    """Lexicographic comparison of the CNF term lists."""
    for (exp_a, coeff_a), (exp_b, coeff_b) in zip(a.terms, b.terms, strict=False):
        order = compare(exp_a, exp_b)
        if order is not Ordering.EQ:
            return order
        if coeff_a != coeff_b:
            return Ordering.LT if coeff_a < coeff_b else Ordering.GT
    if len(a.terms) == len(b.terms):
        return Ordering.EQ
    return Ordering.LT if len(a.terms) < len(b.terms) else Ordering.GT


def add(a: Ordinal, b: Ordinal) -> Ordinal:
    """Ordinal sum ``a + b``: terms of ``a`` below the leading exponent of ``b`` vanish."""
    if not b.terms:
        return a
    lead_exponent, lead_coefficient = b.terms[0]
    kept: list[tuple[Ordinal, int]] = []
    for exponent, coefficient in a.terms:
        order = compare(exponent, lead_exponent)
        if order is Ordering.GT:
            kept.append((exponent, coefficient))
        elif order is Ordering.EQ:
            kept.append((exponent, _checked(coefficient + lead_coefficient)))
            return Ordinal((*kept, *b.terms[1:]))
        else:
            break
    return Ordinal((*kept, *b.terms))


def succ(a: Ordinal) -> Ordinal:
    return add(a, ONE)


def pred(a: Ordinal) -> Ordinal | None:
    """Immediate predecessor, or ``None`` for 0 and limit ordinals."""
    if not a.terms or a.terms[-1][0] != ZERO:
        return None
    coefficient = a.terms[-1][1]
    if coefficient == 1:
        return Ordinal(a.terms[:-1])
    return Ordinal((*a.terms[:-1], (ZERO, coefficient - 1)))


def is_zero(a: Ordinal) -> bool:
    return not a.terms


def is_limit(a: Ordinal) -> bool:
    return bool(a.terms) and a.terms[-1][0] != ZERO


def mul_by_omega(d: Ordinal) -> Ordinal:
    """Return ``d * w``, which is ``w^(e+1)`` for ``d > 0`` with leading exponent ``e``."""
    if not d.terms:
        return ZERO
    return omega_power(succ(d.leading_exponent))


def sup(values: Iterable[Ordinal]) -> Ordinal:
    """Supremum of a finite nonempty collection, which is its maximum."""
    values = list(values)
    if not values:
        raise OrdinalError("sup of an empty list is undefined")
    best = values[0]
    for value in values[1:]:
        if compare(value, best) is Ordering.GT:
            best = value
    return best


def format_ordinal(a: Ordinal) -> str:
    """Render ``a`` in the ``w^2*3+w*2+5`` grammar."""
    if not a.terms:
        return "0"
    parts = []
    for exponent, coefficient in a.terms:
        if exponent == ZERO:
            parts.append(str(coefficient))
            continue
        base = "w" if exponent == ONE else f"w^{_format_exponent(exponent)}"
        parts.append(base if coefficient == 1 else f"{base}*{coefficient}")
    return "+".join(parts)


def _format_exponent(exponent: Ordinal) -> str:
    if exponent.is_natural or exponent == OMEGA:
        return format_ordinal(exponent)
    return f"({format_ordinal(exponent)})"


_TOKEN = re.compile(r"\s*(?:(\d+)|(.))")


class _Parser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.tokens: list[str] = []
        for match in _TOKEN.finditer(text):
            number, symbol = match.groups()
            token = number if number is not None else symbol
            if token.isspace():
                continue
            self.tokens.append(token)
        self.pos = 0

    def error(self, expectation: str) -> OrdinalSyntaxError:
        found = self.tokens[self.pos] if self.pos < len(self.tokens) else "end of input"
        return OrdinalSyntaxError(f"in {self.text!r}: expected {expectation}, found {found!r}")

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, token: str | None = None) -> str:
        current = self.peek()
        if current is None or (token is not None and current != token):
            raise self.error(repr(token) if token else "a token")
        self.pos += 1
        return current

    def natural(self) -> int:
        current = self.peek()
        if current is None or not current.isdigit():
            raise self.error("a natural number")
        self.pos += 1
        return int(current)

    def ordinal(self) -> Ordinal:
        if self.peek() == "0" and self.pos + 1 >= len(self.tokens):
            self.pos += 1
            return ZERO
        if self.peek() == "0" and self.tokens[self.pos + 1] == ")":
            self.pos += 1
            return ZERO
        terms = [self.term()]
        while self.peek() == "+":
            self.take("+")
            terms.append(self.term())
        for (previous, _), (exponent, _) in zip(terms, terms[1:], strict=False):
            if compare(exponent, previous) is not Ordering.LT:
                raise OrdinalSyntaxError(
                    f"in {self.text!r}: terms are not in Cantor normal form "
                    f"(exponent {exponent} follows {previous})"
                )
        return Ordinal(tuple(terms))

    def term(self) -> tuple[Ordinal, int]:
        if self.peek() == "w":
            self.take("w")
            exponent = ONE
            if self.peek() == "^":
                self.take("^")
                exponent = self.exponent()
            coefficient = 1
            if self.peek() == "*":
                self.take("*")
                coefficient = self.natural()
            if exponent == ZERO:
                raise OrdinalSyntaxError(f"in {self.text!r}: write w^0 terms as plain naturals")
        else:
            exponent, coefficient = ZERO, self.natural()
        if coefficient < 1:
            raise OrdinalSyntaxError(f"in {self.text!r}: coefficients must be at least 1")
        return exponent, _checked(coefficient)

    def exponent(self) -> Ordinal:
        current = self.peek()
        if current == "(":
            self.take("(")
            value = self.ordinal()
            self.take(")")
            return value
        if current == "w":
            self.take("w")
            return OMEGA
        return from_int(self.natural())


def parse_ordinal(text: str) -> Ordinal:
    """
    Parse the textual CNF grammar ``term ("+" term)*``.

    Args:
        text: e.g. ``"0"``, ``"w"``, ``"w^2*3+w*2+5"``, ``"w^(w+1)"``

    Returns:
        The parsed ordinal

    Raises:
        OrdinalSyntaxError: if the text is malformed or not in normal form
    """
    parser = _Parser(text)
    if not parser.tokens:
        raise OrdinalSyntaxError("empty ordinal text")
    value = parser.ordinal()
    if parser.peek() is not None:
        raise parser.error("'+' or end of input")
    return value
