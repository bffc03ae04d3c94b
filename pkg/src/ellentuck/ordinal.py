"""Ordinals below epsilon_0 in Cantor normal form.

Only what rank bookkeeping needs is provided: comparison, the
zero/successor/limit split, predecessor and successor, and a fixed
fundamental sequence for limits.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum, IntEnum
from functools import total_ordering


class Ordering(IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


class Kind(Enum):
    ZERO = "zero"
    SUCCESSOR = "successor"
    LIMIT = "limit"


@total_ordering
@dataclass(frozen=True)
class Ordinal:
    """A Cantor normal form: terms are (exponent, coefficient), exponents strictly decreasing."""

    terms: tuple[tuple["Ordinal", int], ...] = ()

    def __post_init__(self) -> None:
        prev = None
        for exp, coeff in self.terms:
            if not isinstance(exp, Ordinal) or not isinstance(coeff, int):
                raise TypeError("terms must be (Ordinal, int) pairs")
            if coeff < 1:
                raise ValueError("coefficients must be positive")
            if prev is not None and not exp < prev:
                raise ValueError("exponents must strictly decrease")
            prev = exp

    @staticmethod
    def of(n: int) -> "Ordinal":
        if n < 0:
            raise ValueError("natural numbers only")
        return ZERO if n == 0 else Ordinal(((ZERO, n),))

    @staticmethod
    def omega_pow(exp: "Ordinal | int", coeff: int = 1) -> "Ordinal":
        if isinstance(exp, int):
            exp = Ordinal.of(exp)
        return Ordinal(((exp, coeff),))

    def is_zero(self) -> bool:
        return not self.terms

    def is_finite(self) -> bool:
        return all(e.is_zero() for e, _ in self.terms)

    def finite_value(self) -> int:
        if not self.is_finite():
            raise ValueError(f"{self} is not finite")
        return self.terms[0][1] if self.terms else 0

    def __lt__(self, other: "Ordinal") -> bool:
        return ord_cmp(self, other) is Ordering.LESS

    def __str__(self) -> str:
        return format_ordinal(self)

    def __repr__(self) -> str:
        return f"Ordinal({format_ordinal(self)!r})"


ZERO = Ordinal(())
ONE = Ordinal(((ZERO, 1),))
OMEGA = Ordinal(((ONE, 1),))


def ord_cmp(a: Ordinal, b: Ordinal) -> Ordering:
    """Lexicographic comparison of the term lists, exponents compared recursively."""
    for (ea, ca), (eb, cb) in zip(a.terms, b.terms):
        c = ord_cmp(ea, eb)
        if c is not Ordering.EQUAL:
            return c
        if ca != cb:
            return Ordering.LESS if ca < cb else Ordering.GREATER
    if len(a.terms) == len(b.terms):
        return Ordering.EQUAL
    return Ordering.LESS if len(a.terms) < len(b.terms) else Ordering.GREATER


def ord_kind(a: Ordinal) -> tuple[Kind, Ordinal | None]:
    """Return (kind, predecessor); the predecessor is only set for successors."""
    if a.is_zero():
        return Kind.ZERO, None
    exp, coeff = a.terms[-1]
    if exp.is_zero():
        head = a.terms[:-1]
        return Kind.SUCCESSOR, Ordinal(head + (((ZERO, coeff - 1),) if coeff > 1 else ()))
    return Kind.LIMIT, None


def successor(a: Ordinal) -> Ordinal:
    if a.terms and a.terms[-1][0].is_zero():
        return Ordinal(a.terms[:-1] + ((ZERO, a.terms[-1][1] + 1),))
    return Ordinal(a.terms + ((ZERO, 1),))


def predecessor(a: Ordinal) -> Ordinal:
    kind, pred = ord_kind(a)
    if kind is not Kind.SUCCESSOR:
        raise ValueError(f"{a} has no predecessor")
    return pred


def _omega_power_term(exp: Ordinal, n: int) -> tuple[tuple[Ordinal, int], ...]:
    """Terms of the n-th element of the fundamental sequence of omega^exp."""
    kind, pred = ord_kind(exp)
    if kind is Kind.SUCCESSOR:
        if pred.is_zero():
            # omega[n] = n
            return ((ZERO, n),) if n > 0 else ()
        return ((pred, n + 1),)
    return ((fundamental_seq(exp, n), 1),)


def fundamental_seq(a: Ordinal, n: int) -> Ordinal:
    """n-th member of the canonical increasing sequence converging to the limit ``a``."""
    if n < 0:
        raise ValueError("index must be a natural number")
    kind, _ = ord_kind(a)
    if kind is not Kind.LIMIT:
        raise ValueError(f"{a} is not a limit ordinal")
    exp, coeff = a.terms[-1]
    head = a.terms[:-1]
    if coeff > 1:
        head = head + ((exp, coeff - 1),)
    tail = _omega_power_term(exp, n)
    # merging is only needed when the expanded term repeats the last head exponent
    if head and tail and ord_cmp(head[-1][0], tail[0][0]) is Ordering.EQUAL:
        merged = head[:-1] + ((head[-1][0], head[-1][1] + tail[0][1]),) + tail[1:]
        return Ordinal(merged)
    return Ordinal(head + tail)


def format_ordinal(a: Ordinal) -> str:
    if a.is_zero():
        return "0"
    parts = []
    for exp, coeff in a.terms:
        if exp.is_zero():
            parts.append(str(coeff))
            continue
        if exp == ONE:
            base = "w"
        elif exp.is_finite():
            base = f"w^{exp.finite_value()}"
        else:
            base = f"w^({format_ordinal(exp)})"
        parts.append(base if coeff == 1 else f"{base}*{coeff}")
    return " + ".join(parts)


_TOKEN = re.compile(r"\s*(\d+|w|\^|\*|\+|\(|\))")


def _tokenize(text: str) -> list[str]:
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"cannot parse ordinal near {text[pos:]!r}")
        out.append(m.group(1))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens: list[str]):
        self.toks = tokens
        self.i = 0

    def peek(self) -> str | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expected: str | None = None) -> str:
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise ValueError(f"expected {expected or 'token'}, found {tok!r}")
        self.i += 1
        return tok

    def ordinal(self) -> Ordinal:
        terms = [self.term()]
        while self.peek() == "+":
            self.take("+")
            terms.append(self.term())
        terms = [t for t in terms if t is not None]
        return Ordinal(tuple(terms))

    def term(self) -> tuple[Ordinal, int] | None:
        tok = self.peek()
        if tok is not None and tok.isdigit():
            n = int(self.take())
            return (ZERO, n) if n > 0 else None
        self.take("w")
        exp = ONE
        if self.peek() == "^":
            self.take("^")
            if self.peek() == "(":
                self.take("(")
                exp = self.ordinal()
                self.take(")")
            elif self.peek() == "w":
                self.take("w")
                exp = OMEGA
            else:
                exp = Ordinal.of(int(self.take()))
        coeff = 1
        if self.peek() == "*":
            self.take("*")
            coeff = int(self.take())
        if coeff == 0:
            return None
        if exp.is_zero():
            return (ZERO, coeff)
        return (exp, coeff)


def parse_ordinal(text: str | int) -> Ordinal:
    """Parse ``0``, ``5``, ``w``, ``w^2*3 + w + 4``, ``w^(w+1)``. Terms must be in CNF order."""
    if isinstance(text, int):
        return Ordinal.of(text)
    p = _Parser(_tokenize(text))
    result = p.ordinal()
    if p.peek() is not None:
        raise ValueError(f"trailing input in ordinal {text!r}")
    return result
