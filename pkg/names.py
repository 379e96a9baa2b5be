"""
Names, finite name sets, permutations and injections for nominal_ua

Names are drawn from a countable, totally ordered alphabet a0, a1, ...
The first 26 are displayed as a..z. Injections between finite name sets
are factored into the weakening / renaming generators of [I, Set].
"""

import itertools
import logging
import re
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Tuple, Union

from errors import InjectionError

# Module logger
logger = logging.getLogger(__name__)

_ALIAS = re.compile(r"^[a-z]$")
_INDEXED = re.compile(r"^a(\d+)$")


@dataclass(frozen=True, order=True)
class Name:
    """An atom; ordered by its position in the canonical enumeration"""

    index: int

    def __post_init__(self):
        if self.index < 0:
            raise ValueError(f"Name index must be non-negative, got {self.index}")

    def __str__(self) -> str:
        if self.index < 26:
            return chr(ord("a") + self.index)
        return f"a{self.index}"

    def __repr__(self) -> str:
        return f"Name({self})"

    @staticmethod
    def parse(text: str) -> "Name":
        """
        Parse a name from its ASCII form

        Args:
            text: 'a'..'z' or 'a<digits>'

        Returns:
            The corresponding Name
        """
        text = text.strip()
        match = _INDEXED.match(text)
        if match:
            return Name(int(match.group(1)))
        if _ALIAS.match(text):
            return Name(ord(text) - ord("a"))
        raise ValueError(f"Not a name: {text!r}")

    @staticmethod
    def is_name(text: str) -> bool:
        return bool(_INDEXED.match(text) or _ALIAS.match(text))


NameSet = FrozenSet[Name]
NameLike = Union[Name, str, int]

EMPTY: NameSet = frozenset()


def name(value: NameLike) -> Name:
    """Coerce a Name, its string form or its index into a Name"""
    if isinstance(value, Name):
        return value
    if isinstance(value, int):
        return Name(value)
    return Name.parse(value)


def name_set(*values: Union[NameLike, Iterable[NameLike]]) -> NameSet:
    """
    Build a name set

    name_set('a', 'b') and name_set(['a', 'b']) are the same set.
    """
    result = set()
    for value in values:
        if isinstance(value, (Name, int)) or isinstance(value, str):
            result.add(name(value))
        else:
            result.update(name(v) for v in value)
    return frozenset(result)


def format_name_set(names: Iterable[Name]) -> str:
    """Sorted comma list in braces, e.g. {a,b}"""
    return "{" + ",".join(str(n) for n in sorted(names)) + "}"


def parse_name_set(text: str) -> NameSet:
    """Inverse of format_name_set"""
    text = text.strip()
    if not (text.startswith("{") and text.endswith("}")):
        raise ValueError(f"Not a name set: {text!r}")
    inner = text[1:-1].strip()
    if not inner:
        return EMPTY
    return frozenset(Name.parse(part) for part in inner.split(","))


def canonical_names(count: int) -> Tuple[Name, ...]:
    """The first `count` names of the canonical enumeration"""
    return tuple(Name(i) for i in range(count))


def least_fresh(avoid: Iterable[Name], pool: Optional[Iterable[Name]] = None) -> Optional[Name]:
    """
    Least name not in `avoid`

    Args:
        avoid: Names that may not be returned
        pool: If given, the answer must come from this pool

    Returns:
        The least admissible name, or None if the pool is exhausted
    """
    avoid = set(avoid)
    if pool is not None:
        for candidate in sorted(pool):
            if candidate not in avoid:
                return candidate
        return None
    index = 0
    while Name(index) in avoid:
        index += 1
    return Name(index)


def subsets(names: Iterable[Name]) -> List[NameSet]:
    """All subsets, ordered by size then alphabetically"""
    pool = sorted(names)
    result = []
    for size in range(len(pool) + 1):
        for combo in itertools.combinations(pool, size):
            result.append(frozenset(combo))
    return result


def sort_key(names: NameSet) -> Tuple[int, Tuple[Name, ...]]:
    """Deterministic ordering of sorts: by size, then alphabet"""
    return (len(names), tuple(sorted(names)))


class Permutation:
    """Finitely supported bijection on names, stored sparsely (moved names only)"""

    __slots__ = ("_mapping",)

    def __init__(self, mapping: Optional[Mapping[Name, Name]] = None):
        moved = {a: b for a, b in (mapping or {}).items() if a != b}
        if set(moved.keys()) != set(moved.values()):
            raise ValueError(f"Not a permutation of its support: {moved}")
        self._mapping: Dict[Name, Name] = moved

    @classmethod
    def identity(cls) -> "Permutation":
        return cls()

    @classmethod
    def from_mapping(cls, mapping: Mapping[NameLike, NameLike]) -> "Permutation":
        return cls({name(a): name(b) for a, b in mapping.items()})

    @classmethod
    def swap(cls, a: NameLike, b: NameLike) -> "Permutation":
        a, b = name(a), name(b)
        return cls({a: b, b: a})

    @classmethod
    def cycle(cls, *names: NameLike) -> "Permutation":
        """The cycle n0 -> n1 -> ... -> n0"""
        ns = [name(n) for n in names]
        return cls({ns[i]: ns[(i + 1) % len(ns)] for i in range(len(ns))})

    def __call__(self, a: Name) -> Name:
        return self._mapping.get(a, a)

    @property
    def support(self) -> NameSet:
        return frozenset(self._mapping)

    def items(self) -> List[Tuple[Name, Name]]:
        return sorted(self._mapping.items())

    def is_identity(self) -> bool:
        return not self._mapping

    def compose(self, other: "Permutation") -> "Permutation":
        """self after other"""
        domain = self.support | other.support
        return Permutation({x: self(other(x)) for x in domain})

    def inverse(self) -> "Permutation":
        return Permutation({b: a for a, b in self._mapping.items()})

    def image(self, names: Iterable[Name]) -> NameSet:
        return frozenset(self(n) for n in names)

    def fixes(self, names: Iterable[Name]) -> bool:
        return all(self(n) == n for n in names)

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and self._mapping == other._mapping

    def __hash__(self) -> int:
        return hash(frozenset(self._mapping.items()))

    def cycles(self) -> List[Tuple[Name, ...]]:
        seen = set()
        result = []
        for start in sorted(self._mapping):
            if start in seen:
                continue
            cycle = [start]
            seen.add(start)
            current = self(start)
            while current != start:
                cycle.append(current)
                seen.add(current)
                current = self(current)
            result.append(tuple(cycle))
        return result

    def __str__(self) -> str:
        if not self._mapping:
            return "id"
        return "".join("(" + " ".join(str(n) for n in c) + ")" for c in self.cycles())

    def __repr__(self) -> str:
        return f"Permutation({self})"


def perm_apply(p: Permutation, a: Name) -> Name:
    return p(a)


def perm_compose(p: Permutation, q: Permutation) -> Permutation:
    """Apply q first, then p"""
    return p.compose(q)


def perm_inverse(p: Permutation) -> Permutation:
    return p.inverse()


def permutations_of(names: Iterable[Name]) -> Iterator[Permutation]:
    """Every permutation moving only the given names"""
    pool = sorted(names)
    for image in itertools.permutations(pool):
        yield Permutation(dict(zip(pool, image)))


@dataclass(frozen=True)
class Injection:
    """Injective map between finite name sets (a morphism of I)"""

    source: NameSet
    target: NameSet
    pairs: Tuple[Tuple[Name, Name], ...]

    def __post_init__(self):
        mapping = dict(self.pairs)
        if len(mapping) != len(self.pairs):
            raise InjectionError("Duplicate source names in injection data")
        if frozenset(mapping) != self.source:
            raise InjectionError(
                f"Injection domain {format_name_set(mapping)} differs from source {format_name_set(self.source)}")
        if len(set(mapping.values())) != len(mapping):
            raise InjectionError(f"Map is not injective: {self._describe(mapping)}")
        if not set(mapping.values()) <= self.target:
            raise InjectionError(
                f"Image of {self._describe(mapping)} is not inside target {format_name_set(self.target)}")

    @staticmethod
    def _describe(mapping: Mapping[Name, Name]) -> str:
        return "{" + ", ".join(f"{a}->{b}" for a, b in sorted(mapping.items())) + "}"

    @classmethod
    def create(cls, source: Iterable[NameLike], target: Iterable[NameLike],
               mapping: Mapping[NameLike, NameLike]) -> "Injection":
        pairs = tuple(sorted((name(a), name(b)) for a, b in mapping.items()))
        return cls(name_set(source), name_set(target), pairs)

    @classmethod
    def identity(cls, names: NameSet) -> "Injection":
        return cls(names, names, tuple((n, n) for n in sorted(names)))

    @classmethod
    def inclusion(cls, source: NameSet, target: NameSet) -> "Injection":
        return cls(source, target, tuple((n, n) for n in sorted(source)))

    @property
    def mapping(self) -> Dict[Name, Name]:
        return dict(self.pairs)

    def __call__(self, a: Name) -> Name:
        return self.mapping[a]

    def image(self, names: Iterable[Name]) -> NameSet:
        mapping = self.mapping
        return frozenset(mapping[n] for n in names)

    def __str__(self) -> str:
        return (f"{format_name_set(self.source)}->{format_name_set(self.target)} "
                f"{self._describe(self.mapping)}")


def injection_compose(v: Injection, u: Injection) -> Injection:
    """v after u"""
    if u.target != v.source:
        raise InjectionError(f"Cannot compose: {u} does not land in the source of {v}")
    vm = v.mapping
    return Injection(u.source, v.target, tuple((a, vm[b]) for a, b in u.pairs))


def enumerate_injections(universe: Iterable[Name]) -> Iterator[Injection]:
    """Every injection between subsets of a finite universe"""
    sets = subsets(universe)
    for source in sets:
        src = sorted(source)
        for target in sets:
            if len(target) < len(source):
                continue
            for image in itertools.permutations(sorted(target), len(src)):
                yield Injection(source, target, tuple(zip(src, image)))


WEAKEN = "weaken"
RENAME = "rename"


@dataclass(frozen=True)
class GeneratorStep:
    """
    A generator of I

    weaken:  w_{S,a} : S -> S+{a}          (a not in S)
    rename:  (b/a)_S : S+{a} -> S+{b}      (a != b, a, b not in S)
    """

    kind: str
    sort: NameSet
    a: Name
    b: Optional[Name] = None

    def __post_init__(self):
        if self.kind == WEAKEN:
            if self.a in self.sort:
                raise InjectionError(f"w_{{{format_name_set(self.sort)},{self.a}}}: {self.a} already in sort")
        elif self.kind == RENAME:
            if self.b is None or self.a == self.b:
                raise InjectionError("Renaming needs two distinct names")
            if self.a in self.sort or self.b in self.sort:
                raise InjectionError(
                    f"({self.b}/{self.a})_{format_name_set(self.sort)}: names must be outside the sort")
        else:
            raise InjectionError(f"Unknown generator kind {self.kind!r}")

    @classmethod
    def weaken(cls, sort: NameSet, a: Name) -> "GeneratorStep":
        return cls(WEAKEN, frozenset(sort), a)

    @classmethod
    def rename(cls, sort: NameSet, a: Name, b: Name) -> "GeneratorStep":
        return cls(RENAME, frozenset(sort), a, b)

    @property
    def source(self) -> NameSet:
        return self.sort if self.kind == WEAKEN else self.sort | {self.a}

    @property
    def target(self) -> NameSet:
        return self.sort | {self.a} if self.kind == WEAKEN else self.sort | {self.b}

    def apply(self, n: Name) -> Name:
        if self.kind == RENAME and n == self.a:
            return self.b
        return n

    def __str__(self) -> str:
        if self.kind == WEAKEN:
            return f"w_({format_name_set(self.sort)},{self.a})"
        return f"({self.b}/{self.a})_{format_name_set(self.sort)}"


def apply_steps(steps: Iterable[GeneratorStep], n: Name) -> Name:
    for step in steps:
        n = step.apply(n)
    return n


def injection_factor(u: Injection, universe: Optional[Iterable[Name]] = None) -> List[GeneratorStep]:
    """
    Factor an injection into weakenings and renamings

    Renamings come first, least moved source name first; names caught in
    a cycle are parked on a temporary name outside the image and the
    current sort. Weakenings for the names of the target outside the image
    follow in alphabet order.

    Args:
        u: The injection to factor
        universe: If given, temporary names are drawn from it

    Returns:
        Steps whose composite, first step first, equals u
    """
    steps: List[GeneratorStep] = []
    current = set(u.source)
    position = {x: x for x in u.source}
    pending = sorted(x for x in u.source if u(x) != x)
    goals = set(u.mapping.values())
    pool = None if universe is None else frozenset(universe)

    while pending:
        moved = False
        for x in pending:
            goal = u(x)
            if goal not in current:
                here = position[x]
                steps.append(GeneratorStep.rename(frozenset(current - {here}), here, goal))
                current.discard(here)
                current.add(goal)
                position[x] = goal
                pending.remove(x)
                moved = True
                break
        if moved:
            continue
        # Every pending goal is occupied: break the cycle through a temporary name
        x = pending[0]
        here = position[x]
        temp = least_fresh(goals | current, pool)
        if temp is None:
            raise InjectionError(f"No temporary name available in the universe to factor {u}")
        steps.append(GeneratorStep.rename(frozenset(current - {here}), here, temp))
        current.discard(here)
        current.add(temp)
        position[x] = temp

    for extra in sorted(u.target - current):
        steps.append(GeneratorStep.weaken(frozenset(current), extra))
        current.add(extra)

    logger.debug(f"Factored {u} into {len(steps)} step(s)")
    return steps
