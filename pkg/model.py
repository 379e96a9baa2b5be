"""
Finite algebras for nominal_ua
Algebras over a uniform signature with a truncated presheaf as carrier:
evaluation, exhaustive satisfaction checking, abstraction (delta A),
the abstraction/translation agreement check, and the HSP constructions.
"""

import itertools
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from errors import (AlgebraError, EquivarianceError, HomomorphismError, InvariantBreach, PresheafStructureError,
                    ScopeError)
from names import Name, NameSet, format_name_set, least_fresh
from presheaf import (DeltaPresheaf, Element, TruncatedPresheaf, delta, element_label, presheaf_from_dict,
                      presheaf_to_dict, ren_keys, validate_presheaf, wk_keys)
from theory import (App, Rename, UAImplication, UniformEquation, UniformSignature, UniformTerm,
                    Var, Weaken, subterms)
from theory_parser import signature_from_lines, signature_lines
from translation import gen_equivariance_equations, translate_by_name
from workers import run_parallel

# Module logger
logger = logging.getLogger(__name__)

Interp = Dict[str, Dict[Tuple[Element, ...], Element]]


class FiniteAlgebra:
    """
    A truncated presheaf with interpretations of the signature's symbols

    Interpretation tables may be partial; a term whose evaluation hits an
    undefined entry has no value and the valuation producing it is skipped.
    With verify=True the carrier is validated and E_Op is checked.
    """

    def __init__(self, carrier: TruncatedPresheaf, signature: UniformSignature, interp: Mapping[str, Mapping],
                 label: str = "", verify: bool = True, use_threads: bool = False, max_workers: int = 4):
        if carrier.universe != signature.universe:
            raise AlgebraError(f"Carrier universe {format_name_set(carrier.universe)} differs from signature "
                               f"universe {format_name_set(signature.universe)}")
        self.carrier = carrier
        self.signature = signature
        self.label = label or carrier.label or "algebra"
        self.use_threads = use_threads
        self.max_workers = max_workers
        self.interp: Interp = {}
        for name, table in interp.items():
            if name not in signature.symbols:
                raise AlgebraError(f"Interpretation given for unknown symbol {name}")
            self.interp[name] = {tuple(args): result for args, result in table.items()}
        self._check_tables()
        if verify:
            self.verify()

    def _check_tables(self) -> None:
        for f in self.signature.ordered_symbols():
            if f.name not in self.interp:
                raise AlgebraError(f"No interpretation for {f.name}")
            for args, result in self.interp[f.name].items():
                if len(args) != f.arity:
                    raise AlgebraError(f"{f.name} entry {element_label(args)} has the wrong number of arguments")
                for i, (x, s) in enumerate(zip(args, f.arg_sorts)):
                    if not self.carrier.contains(s, x):
                        raise AlgebraError(f"{f.name} argument {i + 1} = {element_label(x)} is not in "
                                           f"the carrier of {format_name_set(s)}")
                if not self.carrier.contains(f.result_sort, result):
                    raise AlgebraError(f"{f.name}{element_label(args)} = {element_label(result)} is not in "
                                       f"the carrier of {format_name_set(f.result_sort)}")

    def verify(self) -> None:
        """
        Raises:
            PresheafStructureError: the carrier violates a generator equation
            EquivarianceError: an E_Op equation fails
        """
        report = validate_presheaf(self.carrier, self.use_threads, self.max_workers)
        if not report.ok:
            raise PresheafStructureError(f"Carrier of {self.label} is not a presheaf: "
                                         f"{report.violations[0].describe()}")
        for result in check_equivariance(self):
            if not result.holds:
                raise EquivarianceError(f"{self.label} violates {result.equation_id} ({result.origin}): "
                                        f"{result.describe()}", result.equation_id, result.witness)

    @property
    def universe(self) -> NameSet:
        return self.carrier.universe

    def apply(self, symbol: str, args: Sequence[Element]) -> Optional[Element]:
        return self.interp[symbol].get(tuple(args))

    def is_total(self) -> bool:
        for f in self.signature.ordered_symbols():
            needed = 1
            for s in f.arg_sorts:
                needed *= len(self.carrier.elements(s))
            if len(self.interp[f.name]) != needed:
                return False
        return True

    def evaluate(self, t: UniformTerm, valuation: Mapping[str, Element]) -> Optional[Element]:
        """Value of t, or None if an interpretation entry is undefined"""
        if isinstance(t, Var):
            return valuation[t.name]
        if isinstance(t, App):
            args = []
            for arg in t.args:
                value = self.evaluate(arg, valuation)
                if value is None:
                    return None
                args.append(value)
            return self.apply(t.symbol.name, args)
        if isinstance(t, Weaken):
            x = self.evaluate(t.term, valuation)
            return None if x is None else self.carrier.weaken(t.term.sort, t.name, x)
        if isinstance(t, Rename):
            x = self.evaluate(t.term, valuation)
            return None if x is None else self.carrier.rename(t.term.sort - {t.old}, t.old, t.new, x)
        raise AlgebraError(f"Cannot evaluate {t!r}")

    def __repr__(self) -> str:
        return f"FiniteAlgebra({self.label}, {self.carrier!r})"


@dataclass
class SatisfactionResult:
    equation_id: str
    holds: bool
    witness: Optional[Dict[str, Element]] = None
    lhs_value: Optional[Element] = None
    rhs_value: Optional[Element] = None
    valuations: int = 0
    skipped: int = 0
    origin: str = ""

    def describe(self) -> str:
        if self.holds:
            return f"{self.equation_id}: holds ({self.valuations} valuation(s), {self.skipped} skipped)"
        witness = ", ".join(f"{v} := {element_label(x)}" for v, x in sorted((self.witness or {}).items()))
        return (f"{self.equation_id}: fails at {witness or 'the empty valuation'}: "
                f"{element_label(self.lhs_value)} != {element_label(self.rhs_value)}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "equation": self.equation_id,
            "status": "holds" if self.holds else "fails",
            "witness": None if self.witness is None else {v: element_label(x) for v, x in sorted(self.witness.items())},
            "lhs": None if self.lhs_value is None else element_label(self.lhs_value),
            "rhs": None if self.rhs_value is None else element_label(self.rhs_value),
            "valuations": self.valuations,
            "skipped": self.skipped,
        }


def _collect_variables(terms: Iterable[UniformTerm]) -> Dict[str, NameSet]:
    found: Dict[str, NameSet] = {}
    for t in terms:
        for sub in subterms(t):
            if isinstance(sub, Var):
                found.setdefault(sub.name, sub.sort)
    return found


def _check_scope(A: FiniteAlgebra, sorts: Iterable[NameSet], what: str) -> None:
    for s in sorts:
        if not s <= A.universe:
            raise ScopeError(f"{what} uses sort {format_name_set(s)} outside universe {format_name_set(A.universe)}")


def _valuation_space(A: FiniteAlgebra, variables: Dict[str, NameSet]) -> Tuple[List[str], List[Tuple[Element, ...]]]:
    names = sorted(variables)
    return names, [A.carrier.elements(variables[v]) for v in names]


def satisfies(A: FiniteAlgebra, eq, use_threads: Optional[bool] = None) -> SatisfactionResult:
    """
    Exhaustively check eq in A

    Valuations are enumerated in lexicographic order (variables by name,
    elements in carrier order), so a reported counterexample is the least.

    Raises:
        ScopeError: a sort of eq lies outside A's universe
    """
    variables = _collect_variables((eq.lhs, eq.rhs))
    _check_scope(A, [eq.sort] + list(variables.values()), eq.id or "equation")
    names, pools = _valuation_space(A, variables)

    def check_chunk(head: Tuple[Element, ...]) -> SatisfactionResult:
        result = SatisfactionResult(eq.id, True, origin=getattr(eq, "origin", ""))
        for rest in itertools.product(*pools[len(head):]):
            valuation = dict(zip(names, head + rest))
            result.valuations += 1
            lhs = A.evaluate(eq.lhs, valuation)
            rhs = A.evaluate(eq.rhs, valuation)
            if lhs is None or rhs is None:
                result.skipped += 1
                continue
            if lhs != rhs:
                result.holds = False
                result.witness, result.lhs_value, result.rhs_value = valuation, lhs, rhs
                return result
        return result

    heads = [(x,) for x in pools[0]] if pools else [()]
    threaded = A.use_threads if use_threads is None else use_threads
    chunks = run_parallel(check_chunk, heads, threaded, A.max_workers, label="SATISFY")
    total = SatisfactionResult(eq.id, True, origin=getattr(eq, "origin", ""))
    for chunk in chunks:
        total.valuations += chunk.valuations
        total.skipped += chunk.skipped
        if not chunk.holds:
            total.holds = False
            total.witness, total.lhs_value, total.rhs_value = chunk.witness, chunk.lhs_value, chunk.rhs_value
            break
    logger.debug(f"[SATISFY]  {A.label}: {total.describe()}")
    return total


def satisfies_all(A: FiniteAlgebra, equations: Iterable) -> List[SatisfactionResult]:
    return [satisfies(A, eq) for eq in equations]


def satisfies_implication(A: FiniteAlgebra, imp: UAImplication) -> SatisfactionResult:
    """Every valuation making all premises hold (and defined) makes the conclusion hold"""
    components = list(imp.premises) + [imp.conclusion]
    variables = _collect_variables(t for eq in components for t in (eq.lhs, eq.rhs))
    _check_scope(A, [eq.sort for eq in components] + list(variables.values()), imp.id)
    names, pools = _valuation_space(A, variables)
    result = SatisfactionResult(imp.id, True, origin=imp.origin)
    for values in itertools.product(*pools):
        valuation = dict(zip(names, values))
        result.valuations += 1
        premises_hold = True
        for premise in imp.premises:
            lhs, rhs = A.evaluate(premise.lhs, valuation), A.evaluate(premise.rhs, valuation)
            if lhs is None or rhs is None or lhs != rhs:
                premises_hold = False
                break
        if not premises_hold:
            continue
        lhs, rhs = A.evaluate(imp.conclusion.lhs, valuation), A.evaluate(imp.conclusion.rhs, valuation)
        if lhs is None or rhs is None:
            result.skipped += 1
            continue
        if lhs != rhs:
            result.holds = False
            result.witness, result.lhs_value, result.rhs_value = valuation, lhs, rhs
            return result
    return result


def check_equivariance(A: FiniteAlgebra) -> List[SatisfactionResult]:
    """Satisfaction of every E_Op equation of A's signature"""
    equations = gen_equivariance_equations(A.signature)
    return run_parallel(lambda eq: satisfies(A, eq, use_threads=False), equations, A.use_threads,
                        A.max_workers, label="EOP")


# ---------------------------------------------------------------------------
# Abstraction
# ---------------------------------------------------------------------------

def abstract_algebra(A: FiniteAlgebra, pick: Optional[Callable[[NameSet, List[Name]], Name]] = None,
                     verify: bool = True) -> FiniteAlgebra:
    """
    delta A: f([a]x_1, .., [a]x_n) = [a](w_a . f)(x_1, .., x_n) for a fresh a

    Args:
        A: Algebra with at least one name of headroom
        pick: Chooses the fresh a for f in Op(S) among the universe names
            outside S; the least one by default
        verify: Validate the result

    Raises:
        HeadroomError: the universe has no room for delta
    """
    D: DeltaPresheaf = delta(A.carrier)
    sig = A.signature.restrict(D.universe)
    interp: Interp = {}
    logger.info(f"[ABSTRACT]  Building delta({A.label}) over {format_name_set(D.universe)}")
    for f in sig.ordered_symbols():
        candidates = sorted(A.universe - f.index)
        a = pick(f.index, candidates) if pick else candidates[0]
        g = A.signature.weaken_symbol(a, f)
        table = {}
        for args in itertools.product(*(D.elements(s) for s in f.arg_sorts)):
            concrete = [D.concrete_element(s, e, a) for s, e in zip(f.arg_sorts, args)]
            value = A.apply(g.name, concrete)
            if value is not None:
                table[args] = D.abstract_element(f.result_sort, a, value)
        interp[f.name] = table
    return FiniteAlgebra(D, sig, interp, f"delta({A.label})", verify, A.use_threads, A.max_workers)


def _names_in(eq) -> set:
    found = set(eq.sort)
    for side in (eq.lhs, eq.rhs):
        for sub in subterms(side):
            found |= sub.sort
            if isinstance(sub, App):
                found |= sub.symbol.index
    return found


@dataclass
class AbstractionCheck:
    equation_id: str
    name: Name
    in_abstraction: SatisfactionResult
    translated: SatisfactionResult

    @property
    def agrees(self) -> bool:
        return self.in_abstraction.holds == self.translated.holds

    def describe(self) -> str:
        verdict = lambda r: "holds" if r.holds else "fails"
        return (f"{self.equation_id}: delta A {verdict(self.in_abstraction)}, A |= tr_{self.name} "
                f"{verdict(self.translated)} -> {'agree' if self.agrees else 'DISAGREE'}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "equation": self.equation_id,
            "name": str(self.name),
            "abstraction": self.in_abstraction.to_dict(),
            "translation": self.translated.to_dict(),
            "agrees": self.agrees,
        }


def check_abstraction_equivalence(A: FiniteAlgebra, eq: UniformEquation,
                                  abstraction: Optional[FiniteAlgebra] = None) -> AbstractionCheck:
    """
    Compare delta A |= eq with A |= tr_c(eq) for the least name c of A's
    universe that occurs nowhere in eq

    Raises:
        InvariantBreach: the two verdicts differ
        ScopeError: no such c, or eq does not fit inside delta A
    """
    c = least_fresh(_names_in(eq), A.universe)
    if c is None:
        raise ScopeError(f"No name of {format_name_set(A.universe)} is unused by {eq.id}")
    dA = abstraction or abstract_algebra(A)
    outside = _names_in(eq) - dA.universe
    if outside:
        raise ScopeError(f"{eq.id} uses {format_name_set(outside)}, outside the universe of {dA.label}")
    in_abstraction = satisfies(dA, eq)
    translated = satisfies(A, translate_by_name(A.signature, eq, c))
    check = AbstractionCheck(eq.id, c, in_abstraction, translated)
    logger.info(f"[ABSTRACT]  {check.describe()}")
    if not check.agrees:
        witness = in_abstraction.witness or translated.witness
        raise InvariantBreach(f"Abstraction and translation disagree on {eq.id}: {check.describe()}", witness)
    return check


# ---------------------------------------------------------------------------
# HSP constructions
# ---------------------------------------------------------------------------

def terminal_algebra(sig: UniformSignature) -> FiniteAlgebra:
    """One element * in every sort"""
    star = "*"
    carrier = TruncatedPresheaf.from_functions(sig.universe, lambda s: [star], lambda s, a, x: x,
                                               lambda s, a, b, x: x, "terminal")
    interp = {f.name: {tuple(star for _ in f.arg_sorts): star} for f in sig.ordered_symbols()}
    return FiniteAlgebra(carrier, sig, interp, "terminal")


def _same_signature(A: FiniteAlgebra, B: FiniteAlgebra) -> None:
    if not A.signature.same_symbols(B.signature):
        raise AlgebraError(f"{A.label} and {B.label} have different signatures")


def product_algebra(A: FiniteAlgebra, B: FiniteAlgebra, verify: bool = True) -> FiniteAlgebra:
    """Sortwise cartesian product with componentwise structure"""
    _same_signature(A, B)
    carrier = TruncatedPresheaf.from_functions(
        A.universe,
        lambda s: list(itertools.product(A.carrier.elements(s), B.carrier.elements(s))),
        lambda s, a, x: (A.carrier.wk[(s, a)][x[0]], B.carrier.wk[(s, a)][x[1]]),
        lambda s, a, b, x: (A.carrier.ren[(s, a, b)][x[0]], B.carrier.ren[(s, a, b)][x[1]]),
        f"{A.label} x {B.label}",
    )
    interp: Interp = {}
    for f in A.signature.ordered_symbols():
        table = {}
        for xs, x in A.interp[f.name].items():
            for ys, y in B.interp[f.name].items():
                table[tuple(zip(xs, ys))] = (x, y)
        interp[f.name] = table
    return FiniteAlgebra(carrier, A.signature, interp, carrier.label, verify, A.use_threads, A.max_workers)


def _restrict(A: FiniteAlgebra, keep: Mapping[NameSet, set], label: str, verify: bool) -> FiniteAlgebra:
    carrier = TruncatedPresheaf(
        A.universe,
        {s: [x for x in A.carrier.elements(s) if x in keep[s]] for s in A.carrier.sorts()},
        {(s, a): {x: y for x, y in A.carrier.wk[(s, a)].items() if x in keep[s]} for s, a in wk_keys(A.universe)},
        {(s, a, b): {x: y for x, y in A.carrier.ren[(s, a, b)].items() if x in keep[s | {a}]}
         for s, a, b in ren_keys(A.universe)},
        label,
    )
    interp = {}
    for f in A.signature.ordered_symbols():
        interp[f.name] = {args: y for args, y in A.interp[f.name].items()
                          if all(x in keep[s] for x, s in zip(args, f.arg_sorts))}
    return FiniteAlgebra(carrier, A.signature, interp, label, verify, A.use_threads, A.max_workers)


def subalgebra_generated(A: FiniteAlgebra, seed: Mapping[NameSet, Iterable[Element]],
                         verify: bool = True) -> FiniteAlgebra:
    """Least sub-structure containing the seed, closed under the operations and the presheaf maps"""
    closure: Dict[NameSet, set] = {s: set() for s in A.carrier.sorts()}
    for s, xs in seed.items():
        for x in xs:
            if not A.carrier.contains(s, x):
                raise AlgebraError(f"Seed element {element_label(x)} is not in the carrier of {format_name_set(s)}")
            closure[frozenset(s)].add(x)

    changed = True
    while changed:
        changed = False

        def add(sort: NameSet, y: Element) -> None:
            nonlocal changed
            if y not in closure[sort]:
                closure[sort].add(y)
                changed = True

        for s, a in wk_keys(A.universe):
            for x in list(closure[s]):
                add(s | {a}, A.carrier.wk[(s, a)][x])
        for s, a, b in ren_keys(A.universe):
            for x in list(closure[s | {a}]):
                add(s | {b}, A.carrier.ren[(s, a, b)][x])
        for f in A.signature.ordered_symbols():
            for args, y in A.interp[f.name].items():
                if all(x in closure[s] for x, s in zip(args, f.arg_sorts)):
                    add(f.result_sort, y)

    logger.debug(f"Subalgebra of {A.label}: {sum(len(v) for v in closure.values())} element(s)")
    return _restrict(A, closure, f"sub({A.label})", verify)


def check_homomorphism(A: FiniteAlgebra, B: FiniteAlgebra, h: Mapping[NameSet, Mapping[Element, Element]]) -> None:
    """
    Raises:
        HomomorphismError: with the first instance where h does not commute
    """
    _same_signature(A, B)
    for s in A.carrier.sorts():
        for x in A.carrier.elements(s):
            if x not in h.get(s, {}) or not B.carrier.contains(s, h[s][x]):
                raise HomomorphismError(f"h is not a map {format_name_set(s)} -> {format_name_set(s)} at "
                                        f"{element_label(x)}", (format_name_set(s), x))
    for s, a in wk_keys(A.universe):
        for x in A.carrier.elements(s):
            if h[s | {a}][A.carrier.wk[(s, a)][x]] != B.carrier.wk[(s, a)][h[s][x]]:
                raise HomomorphismError(f"h does not commute with w_({format_name_set(s)},{a}) at "
                                        f"{element_label(x)}", ("wk", s, a, x))
    for s, a, b in ren_keys(A.universe):
        for x in A.carrier.elements(s | {a}):
            if h[s | {b}][A.carrier.ren[(s, a, b)][x]] != B.carrier.ren[(s, a, b)][h[s | {a}][x]]:
                raise HomomorphismError(f"h does not commute with ({b}/{a})_{format_name_set(s)} at "
                                        f"{element_label(x)}", ("ren", s, a, b, x))
    for f in A.signature.ordered_symbols():
        for args, y in A.interp[f.name].items():
            image = tuple(h[s][x] for x, s in zip(args, f.arg_sorts))
            if B.apply(f.name, image) != h[f.result_sort][y]:
                raise HomomorphismError(f"h does not commute with {f.name} at {element_label(args)}",
                                        (f.name, args))


def hom_image(A: FiniteAlgebra, B: FiniteAlgebra, h: Mapping[NameSet, Mapping[Element, Element]],
              verify: bool = True) -> FiniteAlgebra:
    """The image of A under a homomorphism h : A -> B, as a substructure of B"""
    check_homomorphism(A, B, h)
    keep = {s: {h[s][x] for x in A.carrier.elements(s)} for s in A.carrier.sorts()}
    image = _restrict(B, keep, f"h({A.label})", verify=False)
    interp = {}
    for f in A.signature.ordered_symbols():
        interp[f.name] = {tuple(h[s][x] for x, s in zip(args, f.arg_sorts)): h[f.result_sort][y]
                          for args, y in A.interp[f.name].items()}
    return FiniteAlgebra(image.carrier, A.signature, interp, image.label, verify, A.use_threads, A.max_workers)


def collapse_map(A: FiniteAlgebra, B: FiniteAlgebra) -> Dict[NameSet, Dict[Element, Element]]:
    """Every element to the single element of each sort of B (B terminal)"""
    return {s: {x: B.carrier.elements(s)[0] for x in A.carrier.elements(s)} for s in A.carrier.sorts()}


def isomorphic_by(A: FiniteAlgebra, B: FiniteAlgebra, maps: Mapping[NameSet, Mapping[Element, Element]]) -> bool:
    """True iff maps is a sortwise bijection and a homomorphism"""
    for s in A.carrier.sorts():
        image = [maps.get(s, {}).get(x) for x in A.carrier.elements(s)]
        if len(set(image)) != len(image) or set(image) != set(B.carrier.elements(s)):
            return False
    try:
        check_homomorphism(A, B, maps)
    except HomomorphismError:
        return False
    return all(len(A.interp[f]) == len(B.interp[f]) for f in A.interp)


# ---------------------------------------------------------------------------
# Algebra files
# ---------------------------------------------------------------------------

def algebra_to_dict(A: FiniteAlgebra) -> Dict[str, Any]:
    data = presheaf_to_dict(A.carrier)
    data["signature"] = signature_lines(A.signature)
    data["interp"] = {
        f.name: [[[element_label(x) for x in args], element_label(y)] for args, y in A.interp[f.name].items()]
        for f in A.signature.ordered_symbols()
    }
    return data


def algebra_from_dict(data: Mapping[str, Any], label: str = "", verify: bool = True) -> FiniteAlgebra:
    carrier = presheaf_from_dict(data, label)
    try:
        sig = signature_from_lines(carrier.universe, list(data["signature"]))
        interp = {name: {tuple(args): y for args, y in entries} for name, entries in data["interp"].items()}
    except (KeyError, TypeError, ValueError) as e:
        raise AlgebraError(f"Malformed algebra data: {e}") from e
    return FiniteAlgebra(carrier, sig, interp, label, verify)


def save_algebra(A: FiniteAlgebra, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    temp_file = path.with_suffix(path.suffix + ".tmp")
    with open(temp_file, "w") as f:
        json.dump(algebra_to_dict(A), f, indent=2)
    temp_file.replace(path)
    logger.info(f"Saved {A!r} to {path}")


def load_algebra(path: Path, verify: bool = True) -> FiniteAlgebra:
    path = Path(path)
    with open(path, "r") as f:
        data = json.load(f)
    return algebra_from_dict(data, label=path.stem, verify=verify)
