"""
Nominal values for nominal_ua
Atoms, unit, pairs, tagged values and name-abstractions, with the
permutation action, support, freshness and alpha-equivalence.
"""

import itertools
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, List, Optional, Sequence, Union

from lark import Lark, Transformer, UnexpectedInput, v_args

from names import EMPTY, Name, NameSet, Permutation, least_fresh, name

# Module logger
logger = logging.getLogger(__name__)


class NominalValue:
    """Common base of the five value forms"""

    @property
    def support(self) -> NameSet:
        raise NotImplementedError

    def act(self, p: Permutation) -> "NominalValue":
        raise NotImplementedError

    @property
    def size(self) -> int:
        raise NotImplementedError


@dataclass(frozen=True)
class Atom(NominalValue):
    name: Name

    @cached_property
    def support(self) -> NameSet:
        return frozenset({self.name})

    def act(self, p: Permutation) -> "Atom":
        return Atom(p(self.name))

    @property
    def size(self) -> int:
        return 1

    def __str__(self) -> str:
        return str(self.name)


@dataclass(frozen=True)
class Unit(NominalValue):
    @property
    def support(self) -> NameSet:
        return EMPTY

    def act(self, p: Permutation) -> "Unit":
        return self

    @property
    def size(self) -> int:
        return 1

    def __str__(self) -> str:
        return "()"


@dataclass(frozen=True)
class Pair(NominalValue):
    left: NominalValue
    right: NominalValue

    @cached_property
    def support(self) -> NameSet:
        return self.left.support | self.right.support

    def act(self, p: Permutation) -> "Pair":
        return Pair(self.left.act(p), self.right.act(p))

    @cached_property
    def size(self) -> int:
        return 1 + self.left.size + self.right.size

    def __str__(self) -> str:
        return f"({self.left}, {self.right})"


@dataclass(frozen=True)
class Tag(NominalValue):
    label: str
    value: NominalValue

    @cached_property
    def support(self) -> NameSet:
        return self.value.support

    def act(self, p: Permutation) -> "Tag":
        return Tag(self.label, self.value.act(p))

    @cached_property
    def size(self) -> int:
        return 1 + self.value.size

    def __str__(self) -> str:
        return f"{self.label}:{self.value}"


@dataclass(frozen=True)
class Abs(NominalValue):
    """
    Name-abstraction [a]v

    The stored bound name is always the least name outside
    support(v) minus {a}, so two abstractions are alpha-equivalent exactly
    when they are equal as dataclasses.
    """

    bound: Name
    body: NominalValue

    def __post_init__(self):
        free = self.body.support - {self.bound}
        canonical = least_fresh(free)
        if canonical != self.bound:
            object.__setattr__(self, "body", self.body.act(Permutation.swap(self.bound, canonical)))
            object.__setattr__(self, "bound", canonical)

    @cached_property
    def support(self) -> NameSet:
        return self.body.support - {self.bound}

    def act(self, p: Permutation) -> "Abs":
        return Abs(p(self.bound), self.body.act(p))

    @cached_property
    def size(self) -> int:
        return 1 + self.body.size

    def concrete(self, fresh: Name) -> NominalValue:
        """The body with the bound name replaced by `fresh` (which must not be free here)"""
        if fresh in self.support:
            raise ValueError(f"{fresh} is not fresh for {self}")
        return self.body.act(Permutation.swap(self.bound, fresh))

    def __str__(self) -> str:
        return f"[{self.bound}]{self.body}"


def atom(a: Union[Name, str, int]) -> Atom:
    return Atom(name(a))


def act(p: Permutation, v: NominalValue) -> NominalValue:
    return v.act(p)


def support(v: NominalValue) -> NameSet:
    return v.support


def is_fresh(a: Name, v: NominalValue) -> bool:
    return a not in v.support


def alpha_eq(v: NominalValue, w: NominalValue) -> bool:
    return v == w


def make_abstraction(a: Name, v: NominalValue) -> Abs:
    return Abs(name(a), v)


def value_size(v: NominalValue) -> int:
    return v.size


def freshest(names: Iterable[Name]) -> Name:
    """Least name outside `names`"""
    return least_fresh(names)


def fresh_witness_equivalent(a: Name, x: NominalValue, b: Name, y: NominalValue,
                             witness: Optional[Name] = None) -> bool:
    """
    Decide (a, x) ~ (b, y) by the fresh-name definition

    Args:
        a, x: First abstraction data
        b, y: Second abstraction data
        witness: Fresh name to test with; least admissible name if omitted

    Returns:
        True iff (a c)x equals (b c)y for the witness c
    """
    avoid = x.support | y.support | {a, b}
    c = least_fresh(avoid) if witness is None else witness
    if c in avoid:
        raise ValueError(f"Witness {c} is not fresh")
    return x.act(Permutation.swap(a, c)) == y.act(Permutation.swap(b, c))


def is_supported_by(names: Iterable[Name], v: NominalValue, window: Iterable[Name]) -> bool:
    """True iff every transposition of window names outside `names` fixes v"""
    outside = sorted(set(window) - set(names))
    return all(v.act(Permutation.swap(x, y)) == v for x, y in itertools.combinations(outside, 2))


def enumerate_values(names: Sequence[Name], max_size: int,
                     labels: Sequence[str] = (), include_unit: bool = True) -> List[NominalValue]:
    """
    All values of size at most max_size built from the given names

    Abstractions bind names from `names`; values are returned deduplicated
    (alpha-equivalent ones coincide) ordered by size then text.
    """
    by_size = {}
    for size in range(1, max_size + 1):
        found = set()
        if size == 1:
            found.update(Atom(n) for n in names)
            if include_unit:
                found.add(Unit())
        else:
            for body in by_size[size - 1]:
                found.update(Tag(label, body) for label in labels)
                found.update(Abs(n, body) for n in names)
            for left_size in range(1, size - 1):
                for left in by_size[left_size]:
                    for right in by_size[size - 1 - left_size]:
                        found.add(Pair(left, right))
        by_size[size] = found
    result = [v for size in sorted(by_size) for v in sorted(by_size[size], key=str)]
    logger.debug(f"Enumerated {len(result)} value(s) up to size {max_size}")
    return result


_VALUE_GRAMMAR = r"""
    ?value: IDENT ":" value            -> tag
          | IDENT                      -> atom
          | "(" ")"                    -> unit
          | "(" value "," value ")"    -> pair
          | "(" value ")"
          | "[" IDENT "]" value        -> abstraction

    IDENT: /[A-Za-z_][A-Za-z0-9_]*/

    %import common.WS
    %ignore WS
"""


class _ValueBuilder(Transformer):
    @v_args(inline=True)
    def tag(self, label, value):
        return Tag(str(label), value)

    @v_args(inline=True)
    def atom(self, token):
        return Atom(Name.parse(str(token)))

    def unit(self, _):
        return Unit()

    @v_args(inline=True)
    def pair(self, left, right):
        return Pair(left, right)

    @v_args(inline=True)
    def abstraction(self, bound, body):
        return Abs(Name.parse(str(bound)), body)


_value_parser = Lark(_VALUE_GRAMMAR, start="value", parser="lalr")


def parse_value(text: str) -> NominalValue:
    """Parse the textual value syntax: a, (), (v, w), label:v, [a]v"""
    try:
        return _ValueBuilder().transform(_value_parser.parse(text))
    except UnexpectedInput as e:
        raise ValueError(f"Invalid value {text!r} at column {e.column}") from e
    except Exception as e:
        # Transformer wraps errors raised in callbacks
        raise ValueError(f"Invalid value {text!r}: {e}") from e


def format_value(v: NominalValue) -> str:
    return str(v)
