"""
Lambda-calculus demo for nominal_ua
Lambda terms as nominal values, depth-bounded enumeration of their
alpha-classes (checked against a de Bruijn count), the truncated initial
algebra for the var / app / lam signature, eta-normalisation, and the eta
pipeline from the nominal judgment to model checking.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Tuple

from model import FiniteAlgebra, SatisfactionResult, satisfies_all
from names import EMPTY, Name, NameSet, canonical_names, format_name_set, least_fresh, name, subsets
from nominal import Abs, Atom, NominalValue, Pair, Tag
from presheaf import nominal_to_presheaf, validate_presheaf
from theory import FamilyDecl, NAbs, NApp, NAtom, NominalJudgment, NVar, UAEquation, UniformSignature
from translation import frontend_nominal_judgment, translate_family

# Module logger
logger = logging.getLogger(__name__)

VAR, APP, LAM = "var", "app", "lam"


def var(a) -> Tag:
    return Tag(VAR, Atom(name(a)))


def app(t: NominalValue, u: NominalValue) -> Tag:
    return Tag(APP, Pair(t, u))


def lam(a, body: NominalValue) -> Tag:
    return Tag(LAM, Abs(name(a), body))


def is_lambda_term(v: NominalValue) -> bool:
    if not isinstance(v, Tag):
        return False
    if v.label == VAR:
        return isinstance(v.value, Atom)
    if v.label == APP:
        return isinstance(v.value, Pair) and is_lambda_term(v.value.left) and is_lambda_term(v.value.right)
    if v.label == LAM:
        return isinstance(v.value, Abs) and is_lambda_term(v.value.body)
    return False


def depth(t: NominalValue) -> int:
    """Constructor depth: a variable has depth 1"""
    if t.label == VAR:
        return 1
    if t.label == APP:
        return 1 + max(depth(t.value.left), depth(t.value.right))
    return 1 + depth(t.value.body)


def pretty(t: NominalValue) -> str:
    """Conventional notation: b, (t u), \\a.t"""
    if t.label == VAR:
        return str(t.value.name)
    if t.label == APP:
        return f"({pretty(t.value.left)} {pretty(t.value.right)})"
    return f"\\{t.value.bound}.{pretty(t.value.body)}"


@lru_cache(maxsize=None)
def enumerate_terms(names: FrozenSet[Name], d: int) -> FrozenSet[NominalValue]:
    """Alpha-classes of lambda terms with free names in `names` and depth at most d"""
    if d <= 0:
        return frozenset()
    smaller = enumerate_terms(names, d - 1)
    result = {var(a) for a in names}
    result.update(app(t, u) for t in smaller for u in smaller)
    bound = least_fresh(names)
    result.update(lam(bound, t) for t in enumerate_terms(names | {bound}, d - 1))
    return frozenset(result)


def count_alpha_classes(names: Iterable[Name], d: int) -> int:
    return len(enumerate_terms(frozenset(names), d))


def sorted_terms(terms: Iterable[NominalValue]) -> List[NominalValue]:
    return sorted(terms, key=lambda t: (depth(t), str(t)))


# De Bruijn oracle: nameless terms ("var", i) / ("app", t, u) / ("lam", t)

def enumerate_de_bruijn(free: int, d: int) -> List[Tuple]:
    """Nameless terms over indices 0..free-1 with depth at most d"""
    if d <= 0:
        return []
    smaller = enumerate_de_bruijn(free, d - 1)
    terms: List[Tuple] = [("var", i) for i in range(free)]
    terms.extend(("app", t, u) for t in smaller for u in smaller)
    terms.extend(("lam", t) for t in enumerate_de_bruijn(free + 1, d - 1))
    return terms


@lru_cache(maxsize=None)
def de_bruijn_count(free: int, d: int) -> int:
    """c(n, d) = n + c(n, d-1)^2 + c(n+1, d-1), c(n, 0) = 0"""
    if d <= 0:
        return 0
    return free + de_bruijn_count(free, d - 1) ** 2 + de_bruijn_count(free + 1, d - 1)


# Eta

def _eta_redex(t: NominalValue) -> Optional[NominalValue]:
    if t.label != LAM:
        return None
    body = t.value.body
    if body.label != APP:
        return None
    fn, arg = body.value.left, body.value.right
    if arg == var(t.value.bound) and t.value.bound not in fn.support:
        return fn
    return None


def eta_normalize(t: NominalValue) -> NominalValue:
    """Contract lam a. (u a) to u (a fresh for u), innermost first"""
    if t.label == APP:
        t = app(eta_normalize(t.value.left), eta_normalize(t.value.right))
    elif t.label == LAM:
        t = lam(t.value.bound, eta_normalize(t.value.body))
    contracted = _eta_redex(t)
    return t if contracted is None else contracted


def is_eta_normal(t: NominalValue) -> bool:
    return eta_normalize(t) == t


# Signature and models

def lambda_families() -> Tuple[FamilyDecl, ...]:
    return (
        FamilyDecl(VAR, ("x",), (), ("x",)),
        FamilyDecl(APP, (), ((), ()), ()),
        FamilyDecl(LAM, ("x",), (("x",),), ()),
    )


def lambda_signature(universe: Optional[Iterable[Name]] = None) -> UniformSignature:
    """var[a]_S : S+a, app_S : S, S -> S, lam[a]_S : S+a -> S, inside {a,b,c} unless a universe is given"""
    if universe is None:
        universe = canonical_names(3)
    return UniformSignature(frozenset(universe), lambda_families(), atoms=VAR, binder=LAM)


def eta_judgment() -> NominalJudgment:
    """a # X |- [a]app(X, a) = X"""
    a = Name(0)
    return NominalJudgment("eta", (("X", EMPTY),), ((a, "X"),),
                           NAbs(a, NApp(APP, (NVar("X"), NAtom(a)))), NVar("X"))


def build_lambda_model(universe: Iterable[Name], d: int, eta: bool = False,
                       verify: bool = True, use_threads: bool = False, max_workers: int = 4) -> FiniteAlgebra:
    """
    The depth-d truncation of the initial algebra (or of its eta-quotient)

    Carriers are alpha-classes with free names in the sort. app and lam are
    defined where the result stays within depth d; in the eta-quotient the
    carriers hold eta-normal forms and lam normalises its result.
    """
    universe = frozenset(universe)
    terms = enumerate_terms(universe, d)
    if eta:
        terms = frozenset(t for t in terms if is_eta_normal(t))
    label = f"lambda{'-eta' if eta else ''}(U={format_name_set(universe)}, d={d})"
    carrier = nominal_to_presheaf(terms, universe, label)
    sig = lambda_signature(universe)

    interp: Dict[str, Dict[Tuple, Any]] = {}
    for f in sig.ordered_symbols():
        table = {}
        if f.family == VAR:
            table[()] = var(f.params[0])
        elif f.family == APP:
            args = [t for t in carrier.elements(f.base) if depth(t) < d]
            for t in args:
                for u in args:
                    table[(t, u)] = app(t, u)
        else:
            a = f.params[0]
            for t in carrier.elements(f.base | {a}):
                if depth(t) < d:
                    result = lam(a, t)
                    table[(t,)] = eta_normalize(result) if eta else result
        interp[f.name] = table

    logger.info(f"[LAMBDA]  Built {label}: {carrier.total_size()} element(s) over {len(carrier.sorts())} sort(s)")
    return FiniteAlgebra(carrier, sig, interp, label, verify, use_threads, max_workers)


@dataclass
class EtaReport:
    universe: NameSet
    depth: int
    equations: List[UAEquation] = field(default_factory=list)
    plain: List[SatisfactionResult] = field(default_factory=list)
    quotient: List[SatisfactionResult] = field(default_factory=list)

    @property
    def quotient_satisfies_all(self) -> bool:
        return all(r.holds for r in self.quotient)

    @property
    def plain_violates_some(self) -> bool:
        return any(not r.holds for r in self.plain)


def eta_pipeline(universe: Iterable[Name], d: int, plain: Optional[FiniteAlgebra] = None,
                 quotient: Optional[FiniteAlgebra] = None) -> EtaReport:
    """
    Elaborate the eta judgment, generate its translations inside the
    universe, and check them in the plain and the eta-quotient models
    """
    universe = frozenset(universe)
    sig = lambda_signature(universe)
    uniform = frontend_nominal_judgment(sig, eta_judgment())
    equations = translate_family(sig, uniform)
    plain = plain or build_lambda_model(universe, d)
    quotient = quotient or build_lambda_model(universe, d, eta=True)
    report = EtaReport(universe, d, equations)
    report.plain = satisfies_all(plain, equations)
    report.quotient = satisfies_all(quotient, equations)
    logger.info(f"[LAMBDA]  eta: {len(equations)} translation(s); quotient satisfies all: "
                f"{report.quotient_satisfies_all}; plain violates some: {report.plain_violates_some}")
    return report


def demo_report(universe: Iterable[Name], d: int) -> Dict[str, Any]:
    """Counts, validator verdicts and eta results, in a stable order"""
    universe = frozenset(universe)
    plain = build_lambda_model(universe, d)
    quotient = build_lambda_model(universe, d, eta=True)
    counts = []
    for s in subsets(universe):
        counts.append({
            "sort": format_name_set(s),
            "classes": count_alpha_classes(s, d),
            "de_bruijn": de_bruijn_count(len(s), d),
            "eta_normal": len(quotient.carrier.elements(s)),
        })
    eta = eta_pipeline(universe, d, plain, quotient)
    return {
        "universe": format_name_set(universe),
        "depth": d,
        "counts": counts,
        "validator": {
            "plain": validate_presheaf(plain.carrier).ok,
            "eta": validate_presheaf(quotient.carrier).ok,
        },
        "eta": [
            {"equation": str(eq), "id": eq.id, "plain": p.holds, "quotient": q.holds}
            for eq, p, q in zip(eta.equations, eta.plain, eta.quotient)
        ],
    }


def format_demo_report(report: Dict[str, Any]) -> str:
    lines = [f"lambda demo: universe {report['universe']}, depth {report['depth']}", "", "alpha-classes per sort:"]
    for row in report["counts"]:
        lines.append(f"  {row['sort']:<10} classes={row['classes']:<6} de-bruijn={row['de_bruijn']:<6} "
                     f"eta-normal={row['eta_normal']}")
    lines.append("")
    lines.append(f"presheaf validation: plain={'OK' if report['validator']['plain'] else 'FAIL'} "
                 f"eta={'OK' if report['validator']['eta'] else 'FAIL'}")
    lines.append("")
    lines.append("eta translations:")
    for row in report["eta"]:
        verdict = lambda ok: "holds" if ok else "fails"
        lines.append(f"  {row['id']:<10} plain={verdict(row['plain']):<6} quotient={verdict(row['quotient'])}")
        lines.append(f"    {row['equation']}")
    return "\n".join(lines)
