"""
Truncated presheaves for nominal_ua
Finite restrictions of functors I -> Set to the subsets of a bounded name
universe, stored as carrier / weakening / renaming tables, with the
validator for the six generator equations, the abstraction functor delta,
and the embedding of nominal value collections.
"""

import itertools
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

from errors import ClosureError, HeadroomError, PresheafDomainError, PresheafStructureError
from names import (GeneratorStep, Injection, Name, NameSet, Permutation, RENAME, format_name_set,
                   injection_factor, least_fresh, name, parse_name_set, sort_key, subsets)
from nominal import NominalValue
from workers import run_parallel

# Module logger
logger = logging.getLogger(__name__)

Element = Hashable
WkKey = Tuple[NameSet, Name]
RenKey = Tuple[NameSet, Name, Name]


def element_label(x: Element) -> str:
    """Stable text form of a carrier element (tuples print as (x, y))"""
    if isinstance(x, tuple):
        return "(" + ", ".join(element_label(item) for item in x) + ")"
    return str(x)


def wk_keys(universe: NameSet) -> List[WkKey]:
    return [(s, a) for s in subsets(universe) for a in sorted(universe - s)]


def ren_keys(universe: NameSet) -> List[RenKey]:
    return [(s, a, b) for s in subsets(universe) for a in sorted(universe - s)
            for b in sorted(universe - s) if a != b]


def _describe_wk(key: WkKey) -> str:
    return f"w_({format_name_set(key[0])},{key[1]})"


def _describe_ren(key: RenKey) -> str:
    return f"({key[2]}/{key[1]})_{format_name_set(key[0])}"


class TruncatedPresheaf:
    """
    A functor I -> Set restricted to the subsets of a finite universe

    Carriers are stored for every subset. wk[(S, a)] is w_{S,a} :
    X(S) -> X(S+a); ren[(S, a, b)] is (b/a)_S : X(S+a) -> X(S+b).
    """

    def __init__(self, universe: Iterable[Name], carrier: Mapping[NameSet, Iterable[Element]],
                 wk: Mapping[WkKey, Mapping[Element, Element]],
                 ren: Mapping[RenKey, Mapping[Element, Element]], label: str = ""):
        self.universe: NameSet = frozenset(universe)
        self.label = label
        self._carrier: Dict[NameSet, Tuple[Element, ...]] = {}
        self._members: Dict[NameSet, frozenset] = {}
        for sort, elements in carrier.items():
            items = tuple(dict.fromkeys(elements))
            self._carrier[frozenset(sort)] = items
            self._members[frozenset(sort)] = frozenset(items)
        self.wk: Dict[WkKey, Dict[Element, Element]] = {k: dict(v) for k, v in wk.items()}
        self.ren: Dict[RenKey, Dict[Element, Element]] = {k: dict(v) for k, v in ren.items()}
        self._check_structure()

    @classmethod
    def from_functions(cls, universe: Iterable[Name], carrier: Callable[[NameSet], Iterable[Element]],
                       weaken: Callable[[NameSet, Name, Element], Element],
                       rename: Callable[[NameSet, Name, Name, Element], Element],
                       label: str = "") -> "TruncatedPresheaf":
        """Tabulate a presheaf given pointwise descriptions of its structure"""
        universe = frozenset(universe)
        carriers = {s: list(carrier(s)) for s in subsets(universe)}
        wk = {(s, a): {x: weaken(s, a, x) for x in carriers[s]} for s, a in wk_keys(universe)}
        ren = {(s, a, b): {x: rename(s, a, b, x) for x in carriers[s | {a}]}
               for s, a, b in ren_keys(universe)}
        return cls(universe, carriers, wk, ren, label)

    def _check_structure(self) -> None:
        for sort in self._carrier:
            if not sort <= self.universe:
                raise PresheafStructureError(
                    f"Carrier sort {format_name_set(sort)} lies outside universe {format_name_set(self.universe)}")
        for sort in subsets(self.universe):
            if sort not in self._carrier:
                raise PresheafStructureError(f"Missing carrier for sort {format_name_set(sort)}")
        for key in wk_keys(self.universe):
            sort, a = key
            self._check_table(self.wk, key, _describe_wk(key), sort, sort | {a})
        for key in ren_keys(self.universe):
            sort, a, b = key
            self._check_table(self.ren, key, _describe_ren(key), sort | {a}, sort | {b})

    def _check_table(self, tables, key, description: str, source: NameSet, target: NameSet) -> None:
        table = tables.get(key)
        if table is None:
            raise PresheafStructureError(f"Missing table for {description}")
        for x in self._carrier[source]:
            if x not in table:
                raise PresheafStructureError(f"{description} undefined on {element_label(x)}")
            if table[x] not in self._members[target]:
                raise PresheafStructureError(
                    f"{description} maps {element_label(x)} to {element_label(table[x])}, "
                    f"outside the carrier of {format_name_set(target)}")

    def sorts(self) -> List[NameSet]:
        return subsets(self.universe)

    def elements(self, sort: Iterable[Name]) -> Tuple[Element, ...]:
        sort = frozenset(sort)
        if sort not in self._carrier:
            raise PresheafDomainError(f"Sort {format_name_set(sort)} is outside universe "
                                      f"{format_name_set(self.universe)}")
        return self._carrier[sort]

    def contains(self, sort: Iterable[Name], x: Element) -> bool:
        return x in self._members.get(frozenset(sort), ())

    def _require(self, sort: NameSet, x: Element) -> None:
        if not self.contains(sort, x):
            raise PresheafDomainError(f"{element_label(x)} is not in the carrier of {format_name_set(sort)}")

    def weaken(self, sort: NameSet, a: Name, x: Element) -> Element:
        """w_{S,a}(x)"""
        self._require(sort, x)
        return self.wk[(frozenset(sort), a)][x]

    def rename(self, sort: NameSet, a: Name, b: Name, x: Element) -> Element:
        """(b/a)_S(x), for x in X(S+a)"""
        self._require(frozenset(sort) | {a}, x)
        return self.ren[(frozenset(sort), a, b)][x]

    def apply_step(self, step: GeneratorStep, x: Element) -> Element:
        if step.kind == RENAME:
            return self.rename(step.sort, step.a, step.b, x)
        return self.weaken(step.sort, step.a, x)

    def total_size(self) -> int:
        return sum(len(items) for items in self._carrier.values())

    def _edited(self, tables: str, key, x: Element, y: Element) -> "TruncatedPresheaf":
        wk = {k: dict(v) for k, v in self.wk.items()}
        ren = {k: dict(v) for k, v in self.ren.items()}
        (wk if tables == "wk" else ren)[key][x] = y
        return TruncatedPresheaf(self.universe, self._carrier, wk, ren, self.label)

    def with_weakening(self, sort: Iterable[Name], a: Name, x: Element, y: Element) -> "TruncatedPresheaf":
        """Copy with the single entry w_{S,a}(x) := y"""
        return self._edited("wk", (frozenset(sort), a), x, y)

    def with_renaming(self, sort: Iterable[Name], a: Name, b: Name, x: Element, y: Element) -> "TruncatedPresheaf":
        """Copy with the single entry (b/a)_S(x) := y"""
        return self._edited("ren", (frozenset(sort), a, b), x, y)

    def __eq__(self, other) -> bool:
        return (isinstance(other, TruncatedPresheaf) and self.universe == other.universe
                and self._members == other._members and self.wk == other.wk and self.ren == other.ren)

    def __repr__(self) -> str:
        return (f"TruncatedPresheaf({self.label or 'unnamed'}, universe={format_name_set(self.universe)}, "
                f"elements={self.total_size()})")


# Generator equations; scheme id, name, printed form
SCHEMES: Tuple[Tuple[int, str, str], ...] = (
    (1, "ren-involution", "(a/b)_S(b/a)_S(x) = x"),
    (2, "ren-commute", "(b/a)_{S+d}(d/c)_{S+a}(x) = (d/c)_{S+b}(b/a)_{S+c}(x)"),
    (3, "ren-compose", "(c/b)_S(b/a)_S(x) = (c/a)_S(x)"),
    (4, "ren-weaken-commute", "(b/a)_{S+c}w_{S+a,c}(x) = w_{S+b,c}(b/a)_S(x)"),
    (5, "ren-after-weaken", "(b/a)_S w_{S,a}(x) = w_{S,b}(x)"),
    (6, "weaken-commute", "w_{S+b,a}w_{S,b}(x) = w_{S+a,b}w_{S,a}(x)"),
)


@dataclass(frozen=True)
class Violation:
    """One failing instance of a generator equation"""

    scheme: int
    equation: str
    sort: NameSet
    names: Tuple[Name, ...]
    element: Element
    lhs: Element
    rhs: Element

    def describe(self) -> str:
        names = ", ".join(f"{letter}={n}" for letter, n in zip("abcd", self.names))
        return (f"[{self.scheme}] {self.equation} fails at S={format_name_set(self.sort)}, {names}, "
                f"x={element_label(self.element)}: {element_label(self.lhs)} != {element_label(self.rhs)}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "scheme": self.scheme,
            "equation": self.equation,
            "sort": format_name_set(self.sort),
            "names": [str(n) for n in self.names],
            "element": element_label(self.element),
            "lhs": element_label(self.lhs),
            "rhs": element_label(self.rhs),
        }


@dataclass
class ValidationReport:
    subject: str
    violations: List[Violation] = field(default_factory=list)
    instances_checked: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def schemes_violated(self) -> List[int]:
        return sorted({v.scheme for v in self.violations})

    def format_text(self) -> str:
        if self.ok:
            return f"{self.subject}: OK ({self.instances_checked} instances checked)"
        lines = [f"{self.subject}: {len(self.violations)} violation(s)"]
        lines.extend("  " + v.describe() for v in self.violations)
        return "\n".join(lines)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "subject": self.subject,
            "ok": self.ok,
            "instances_checked": self.instances_checked,
            "violations": [v.to_dict() for v in self.violations],
        }


def _check_scheme(X: TruncatedPresheaf, scheme: int) -> Tuple[List[Violation], int]:
    equation = SCHEMES[scheme - 1][2]
    violations = []
    checked = 0
    wk = lambda s, a, x: X.wk[(s, a)][x]
    ren = lambda s, a, b, x: X.ren[(s, a, b)][x]

    def record(sort, names, x, lhs, rhs):
        if lhs != rhs:
            violations.append(Violation(scheme, equation, sort, tuple(names), x, lhs, rhs))

    for s in X.sorts():
        free = sorted(X.universe - s)
        if scheme == 1:
            for a in free:
                for b in free:
                    if a == b:
                        continue
                    for x in X.elements(s | {a}):
                        checked += 1
                        record(s, (a, b), x, ren(s, b, a, ren(s, a, b, x)), x)
        elif scheme == 2:
            for a in free:
                for b in free:
                    for c in free:
                        for d in free:
                            if len({a, b, c, d}) < 4:
                                continue
                            for x in X.elements(s | {a, c}):
                                checked += 1
                                lhs = ren(s | {d}, a, b, ren(s | {a}, c, d, x))
                                rhs = ren(s | {b}, c, d, ren(s | {c}, a, b, x))
                                record(s, (a, b, c, d), x, lhs, rhs)
        elif scheme == 3:
            for a in free:
                for b in free:
                    for c in free:
                        if len({a, b, c}) < 3:
                            continue
                        for x in X.elements(s | {a}):
                            checked += 1
                            record(s, (a, b, c), x, ren(s, b, c, ren(s, a, b, x)), ren(s, a, c, x))
        elif scheme == 4:
            for a in free:
                for b in free:
                    for c in free:
                        if len({a, b, c}) < 3:
                            continue
                        for x in X.elements(s | {a}):
                            checked += 1
                            lhs = ren(s | {c}, a, b, wk(s | {a}, c, x))
                            rhs = wk(s | {b}, c, ren(s, a, b, x))
                            record(s, (a, b, c), x, lhs, rhs)
        elif scheme == 5:
            for a in free:
                for b in free:
                    if a == b:
                        continue
                    for x in X.elements(s):
                        checked += 1
                        record(s, (a, b), x, ren(s, a, b, wk(s, a, x)), wk(s, b, x))
        elif scheme == 6:
            for a in free:
                for b in free:
                    if a == b:
                        continue
                    for x in X.elements(s):
                        checked += 1
                        lhs = wk(s | {b}, a, wk(s, b, x))
                        rhs = wk(s | {a}, b, wk(s, a, x))
                        record(s, (a, b), x, lhs, rhs)
    return violations, checked


def validate_presheaf(X: TruncatedPresheaf, use_threads: bool = False, max_workers: int = 4) -> ValidationReport:
    """
    Check all six generator equations on every instance inside the universe

    Args:
        X: Presheaf to check
        use_threads: Check the schemes on worker threads
        max_workers: Thread count when threaded

    Returns:
        Report listing every violated instance, empty iff X is a functor restriction
    """
    logger.info(f"[VALIDATE]  Checking {X!r}")
    results = run_parallel(lambda scheme: _check_scheme(X, scheme), [s[0] for s in SCHEMES],
                           use_threads, max_workers, label="VALIDATE")
    report = ValidationReport(X.label or "presheaf")
    for violations, checked in results:
        report.violations.extend(violations)
        report.instances_checked += checked
    logger.info(f"[VALIDATE]  {report.instances_checked} instance(s), {len(report.violations)} violation(s)")
    return report


def apply_steps_to_element(X: TruncatedPresheaf, steps: Sequence[GeneratorStep], x: Element) -> Element:
    for step in steps:
        x = X.apply_step(step, x)
    return x


def apply_injection(X: TruncatedPresheaf, u: Injection, x: Element) -> Element:
    """
    X(u)(x), computed along the canonical factorization of u

    Raises:
        PresheafDomainError: x is not in the carrier of u's source
    """
    if not (u.source <= X.universe and u.target <= X.universe):
        raise PresheafDomainError(f"Injection {u} leaves universe {format_name_set(X.universe)}")
    if not X.contains(u.source, x):
        raise PresheafDomainError(f"{element_label(x)} is not in the carrier of {format_name_set(u.source)}")
    return apply_steps_to_element(X, injection_factor(u, X.universe), x)


def _headroom(X: TruncatedPresheaf, sort: NameSet) -> Name:
    fresh = least_fresh(sort, X.universe)
    if fresh is None:
        raise HeadroomError(f"No fresh name in universe {format_name_set(X.universe)} for sort "
                            f"{format_name_set(sort)}", sort)
    return fresh


class DeltaPresheaf(TruncatedPresheaf):
    """
    delta X, with delta X(S) = X(S + a_S) for a_S the least universe name outside S

    Elements are those of the underlying carriers. The weakening and
    renaming maps move the bound name out of the way before acting.
    """

    def __init__(self, base: TruncatedPresheaf, universe: Optional[Iterable[Name]] = None):
        self.base = base
        if universe is None:
            universe = base.universe - {max(base.universe)} if base.universe else frozenset()
        universe = frozenset(universe)
        if not universe <= base.universe:
            raise HeadroomError(f"Output universe {format_name_set(universe)} is not inside "
                                f"{format_name_set(base.universe)}", universe)
        self.fresh: Dict[NameSet, Name] = {s: _headroom(base, s) for s in subsets(universe)}

        carrier = {s: base.elements(s | {self.fresh[s]}) for s in subsets(universe)}
        wk = {(s, b): {x: self._weaken(s, b, x) for x in carrier[s]} for s, b in wk_keys(universe)}
        ren = {(s, b, d): {x: self._rename(s, b, d, x) for x in carrier[s | {b}]}
               for s, b, d in ren_keys(universe)}
        super().__init__(universe, carrier, wk, ren, f"delta({base.label or 'presheaf'})")

    def _rebind(self, sort: NameSet, old: Name, new: Name, x: Element) -> Element:
        return x if old == new else self.base.ren[(sort, old, new)][x]

    def _weaken(self, s: NameSet, b: Name, x: Element) -> Element:
        c = self.fresh[s | {b}]
        y = self._rebind(s, self.fresh[s], c, x)
        return self.base.wk[(s | {c}, b)][y]

    def _rename(self, s: NameSet, b: Name, d: Name, x: Element) -> Element:
        e = _headroom(self.base, s | {b, d})
        y = self._rebind(s | {b}, self.fresh[s | {b}], e, x)
        y = self.base.ren[(s | {e}, b, d)][y]
        return self._rebind(s | {d}, e, self.fresh[s | {d}], y)

    def abstract_element(self, sort: Iterable[Name], a: Name, x: Element) -> Element:
        """The image of x in X(S + a) under X(S + a) = delta X(S)"""
        sort = frozenset(sort)
        if a in sort:
            raise PresheafDomainError(f"{a} is not fresh for {format_name_set(sort)}")
        if not self.base.contains(sort | {a}, x):
            raise PresheafDomainError(f"{element_label(x)} is not in the carrier of {format_name_set(sort | {a})}")
        return self._rebind(sort, a, self.fresh[sort], x)

    def concrete_element(self, sort: Iterable[Name], e: Element, a: Name) -> Element:
        """Inverse of abstract_element"""
        sort = frozenset(sort)
        if a in sort:
            raise PresheafDomainError(f"{a} is not fresh for {format_name_set(sort)}")
        self._require(sort, e)
        return self._rebind(sort, self.fresh[sort], a, e)


def delta(X: TruncatedPresheaf, universe: Optional[Iterable[Name]] = None) -> DeltaPresheaf:
    """The abstraction functor applied to X (default output universe: X's minus its largest name)"""
    return DeltaPresheaf(X, universe)


def nominal_to_presheaf(values: Iterable[NominalValue], universe: Iterable[Name],
                        label: str = "") -> TruncatedPresheaf:
    """
    The presheaf S |-> {v : supp(v) inside S} of a finite value collection

    Raises:
        ClosureError: a value's support leaves the universe, or the collection
            is not closed under a transposition of universe names
    """
    universe = frozenset(universe)
    pool = set(values)
    for v in sorted(pool, key=str):
        if not v.support <= universe:
            raise ClosureError(f"Support of {v} leaves universe {format_name_set(universe)}", v)
        for a in sorted(universe):
            for b in sorted(universe):
                if a < b:
                    p = Permutation.swap(a, b)
                    if v.act(p) not in pool:
                        raise ClosureError(f"Collection is not closed under {p}: missing image of {v}", v, p)

    ordered = sorted(pool, key=lambda v: (v.size, str(v)))
    return TruncatedPresheaf.from_functions(
        universe,
        lambda s: [v for v in ordered if v.support <= s],
        lambda s, a, x: x,
        lambda s, a, b, x: x.act(Permutation.swap(a, b)),
        label,
    )


def representable(universe: Iterable[Name], base: Iterable[Name] = ()) -> TruncatedPresheaf:
    """Truncation of I(B, -): injections from B into each sort"""
    universe = frozenset(universe)
    base = frozenset(base)
    if not base <= universe:
        raise PresheafDomainError(f"Base {format_name_set(base)} is outside universe {format_name_set(universe)}")
    src = sorted(base)

    def injections(s: NameSet) -> List[Injection]:
        return [Injection(base, s, tuple(zip(src, image))) for image in itertools.permutations(sorted(s), len(src))]

    def rename(s: NameSet, a: Name, b: Name, u: Injection) -> Injection:
        return Injection(base, s | {b}, tuple((x, b if y == a else y) for x, y in u.pairs))

    return TruncatedPresheaf.from_functions(
        universe, injections,
        lambda s, a, u: Injection(base, s | {a}, u.pairs),
        rename,
        f"I({format_name_set(base)}, -)",
    )


def presheaf_to_dict(X: TruncatedPresheaf) -> Dict[str, Any]:
    """JSON-compatible form; elements are written by element_label"""
    for sort in X.sorts():
        labels = [element_label(x) for x in X.elements(sort)]
        if len(set(labels)) != len(labels):
            raise PresheafStructureError(f"Element labels collide in sort {format_name_set(sort)}")
    lbl = element_label
    return {
        "universe": [str(n) for n in sorted(X.universe)],
        "carrier": {format_name_set(s): [lbl(x) for x in X.elements(s)] for s in sorted(X.sorts(), key=sort_key)},
        "wk": {f"{format_name_set(s)};{a}": {lbl(x): lbl(y) for x, y in X.wk[(s, a)].items()}
               for s, a in wk_keys(X.universe)},
        "ren": {f"{format_name_set(s)};{a};{b}": {lbl(x): lbl(y) for x, y in X.ren[(s, a, b)].items()}
                for s, a, b in ren_keys(X.universe)},
    }


def _parse_key(key: str) -> Tuple[NameSet, List[Name]]:
    parts = key.split(";")
    return parse_name_set(parts[0]), [name(p) for p in parts[1:]]


def presheaf_from_dict(data: Mapping[str, Any], label: str = "") -> TruncatedPresheaf:
    """Inverse of presheaf_to_dict; elements are the labels themselves"""
    try:
        universe = frozenset(name(n) for n in data["universe"])
        carrier = {parse_name_set(k): list(v) for k, v in data["carrier"].items()}
        wk = {}
        for key, table in data.get("wk", {}).items():
            sort, (a,) = _parse_key(key)
            wk[(sort, a)] = dict(table)
        ren = {}
        for key, table in data.get("ren", {}).items():
            sort, (a, b) = _parse_key(key)
            ren[(sort, a, b)] = dict(table)
    except (KeyError, ValueError, TypeError) as e:
        raise PresheafStructureError(f"Malformed presheaf data: {e}") from e
    return TruncatedPresheaf(universe, carrier, wk, ren, label)


def save_presheaf(X: TruncatedPresheaf, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    temp_file = path.with_suffix(path.suffix + ".tmp")
    with open(temp_file, "w") as f:
        json.dump(presheaf_to_dict(X), f, indent=2)
    temp_file.replace(path)
    logger.info(f"Saved {X!r} to {path}")


def load_presheaf(path: Path) -> TruncatedPresheaf:
    path = Path(path)
    with open(path, "r") as f:
        data = json.load(f)
    return presheaf_from_dict(data, label=path.stem)
