"""
Translation compiler for nominal_ua
Translations of uniform equations by fresh names (tr_a) and by finite
name sets, canonical forms of generator chains, the equivariance
equations E_Op of a uniform signature, translations of implications and
the elaboration of nominal judgments into uniform equations.
"""

import logging
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from errors import FrontendError, SignatureError, SortError, TranslationError
from names import Name, NameSet, Permutation, format_name_set, least_fresh, subsets
from theory import (App, NAbs, NApp, NAtom, NVar, NominalJudgment, NominalTerm, Rename, UAEquation,
                    UAImplication, UniformEquation, UniformImplication, UniformSignature, UniformTerm,
                    Var, Weaken, freshness_set, typecheck_equation, weaken_all)

# Module logger
logger = logging.getLogger(__name__)


def primed(var: str, a: Name) -> str:
    """X'b'c: the root followed by every adjoined name, sorted"""
    root, *adjoined = var.split("'")
    names = sorted({Name.parse(n) for n in adjoined} | {a})
    return root + "".join(f"'{n}" for n in names)


def translate_term(sig: UniformSignature, t: UniformTerm, a: Name, fresh: Mapping[str, NameSet]) -> UniformTerm:
    """
    tr_a(t) given the freshness sets of the enclosing equation

    Raises:
        TranslationError: the translation reaches a subterm whose sort contains a
    """
    if a in t.sort:
        raise TranslationError(f"Cannot translate {t} by {a}: {a} is in its sort {format_name_set(t.sort)}")
    if isinstance(t, App):
        if a in t.symbol.index:
            return Weaken(a, t)
        g = sig.weaken_symbol(a, t.symbol)
        return App(g, tuple(translate_term(sig, arg, a, fresh) for arg in t.args))
    if isinstance(t, Weaken):
        return Weaken(t.name, translate_term(sig, t.term, a, fresh))
    if isinstance(t, Rename):
        if t.old == a:
            return Weaken(a, t)
        return Rename(t.new, t.old, translate_term(sig, t.term, a, fresh))
    if isinstance(t, Var):
        if a in fresh.get(t.name, frozenset()):
            return Weaken(a, t)
        return Var(primed(t.name, a), t.sort | {a})
    raise TranslationError(f"Not a uniform term: {t!r}")


def translate_by_name(sig: UniformSignature, eq: UniformEquation, a: Name) -> UniformEquation:
    """
    Translate u = v : T by a name a outside T

    Returns:
        tr_a(u) = tr_a(v) : T + a
    """
    if a in eq.sort:
        raise TranslationError(f"{a} is in the sort {format_name_set(eq.sort)} of {eq.id or 'the equation'}")
    fresh = {var: freshness_set(eq, var) for var in eq.variable_sorts()}
    return UniformEquation(
        f"{eq.id}-{a}" if eq.id else str(a),
        translate_term(sig, eq.lhs, a, fresh),
        translate_term(sig, eq.rhs, a, fresh),
        eq.sort | {a},
    )


def translate_by_set(sig: UniformSignature, eq: UniformEquation, names: Iterable[Name],
                     order: Optional[Sequence[Name]] = None) -> UAEquation:
    """
    Translate by every name of a set, the least name first

    Args:
        sig: Signature providing the symbol action
        eq: Uniform equation
        names: Set disjoint from the equation's sort
        order: Explicit iteration order (a permutation of names)

    Returns:
        The grounded many-sorted equation
    """
    names = frozenset(names)
    if names & eq.sort:
        raise TranslationError(f"{format_name_set(names & eq.sort)} overlaps the sort of {eq.id or 'the equation'}")
    sequence = sorted(names) if order is None else list(order)
    if frozenset(sequence) != names or len(sequence) != len(names):
        raise TranslationError("Iteration order must list each name exactly once")
    current = eq
    for a in sequence:
        current = translate_by_name(sig, current, a)
    logger.debug(f"[TRANSLATE]  {eq.id} by {format_name_set(names)}: {current}")
    suffix = "".join(f"-{n}" for n in sorted(names))
    return UAEquation(f"{eq.id}{suffix}", current.lhs, current.rhs, current.sort, origin=eq.id)


def translate_family(sig: UniformSignature, eq: UniformEquation) -> List[UAEquation]:
    """All translations of eq by subsets of the universe outside its sort"""
    result = []
    for names in subsets(sig.universe - eq.sort):
        try:
            result.append(translate_by_set(sig, eq, names))
        except SignatureError as e:
            logger.debug(f"[TRANSLATE]  {eq.id} by {format_name_set(names)} leaves the universe: {e}")
    return result


# ---------------------------------------------------------------------------
# Canonical forms
# ---------------------------------------------------------------------------

def _rewrite(t: UniformTerm) -> Optional[UniformTerm]:
    """One root rewrite step, or None"""
    if isinstance(t, Weaken) and isinstance(t.term, Weaken) and t.name < t.term.name:
        return Weaken(t.term.name, Weaken(t.name, t.term.term))
    if isinstance(t, Rename):
        inner = t.term
        if isinstance(inner, Weaken):
            if inner.name == t.old:
                return Weaken(t.new, inner.term)
            return Weaken(inner.name, Rename(t.new, t.old, inner.term))
        if isinstance(inner, Rename) and inner.new == t.old:
            if t.new == inner.old:
                return inner.term
            return Rename(t.new, inner.old, inner.term)
    return None


def canonical_form(t: UniformTerm) -> UniformTerm:
    """
    Normal form modulo the generator equations on term syntax

    Weakening chains are sorted (least name innermost), weakenings are
    pushed above renamings, a renaming of a just-weakened name becomes a
    weakening, and consecutive renamings are composed.
    """
    if isinstance(t, App):
        t = App(t.symbol, tuple(canonical_form(arg) for arg in t.args))
    elif isinstance(t, Weaken):
        t = Weaken(t.name, canonical_form(t.term))
    elif isinstance(t, Rename):
        t = Rename(t.new, t.old, canonical_form(t.term))
    rewritten = _rewrite(t)
    return t if rewritten is None else canonical_form(rewritten)


def canonical_equation(eq):
    return type(eq)(eq.id, canonical_form(eq.lhs), canonical_form(eq.rhs), eq.sort)


def equations_equivalent(e1, e2) -> bool:
    """Equal after canonicalisation, ignoring ids"""
    c1, c2 = canonical_equation(e1), canonical_equation(e2)
    return (c1.lhs, c1.rhs, c1.sort) == (c2.lhs, c2.rhs, c2.sort)


# ---------------------------------------------------------------------------
# Equivariance equations
# ---------------------------------------------------------------------------

def gen_equivariance_equations(sig: UniformSignature) -> List[UAEquation]:
    """
    E_Op of the signature inside its universe

    For f in Op(S) with arity S_1..S_n -> S_0: for every a outside S,
    (w_a . f)(w_a x_1, ..) = w_a f(x_1, ..); for every b in S and a outside
    S, ((a/b) . f)(<a/b> x_1, ..) = <a/b> f(x_1, ..) where <a/b> renames at
    positions whose sort contains b and is the identity elsewhere.

    Raises:
        SignatureError: a needed action entry is missing
    """
    equations: List[UAEquation] = []

    def emit(lhs: UniformTerm, rhs: UniformTerm, origin: str) -> None:
        equations.append(UAEquation(f"eop-{len(equations) + 1}", lhs, rhs, rhs.sort, origin))

    for f in sig.ordered_symbols():
        xs = tuple(Var(f"X{i + 1}", s) for i, s in enumerate(f.arg_sorts))
        applied = App(f, xs)
        outside = sorted(sig.universe - f.index)
        for a in outside:
            g = sig.weaken_symbol(a, f)
            emit(App(g, tuple(Weaken(a, x) for x in xs)), Weaken(a, applied), f"w_{a} . {f.name}")
        for b in sorted(f.index):
            for a in outside:
                g = sig.rename_symbol(b, a, f)
                args = tuple(Rename(a, b, x) if b in x.sort else x for x in xs)
                rhs = Rename(a, b, applied) if b in f.result_sort else applied
                emit(App(g, args), rhs, f"({a}/{b}) . {f.name}")

    logger.info(f"[EOP]  Generated {len(equations)} equivariance equation(s)")
    return equations


# ---------------------------------------------------------------------------
# Implications
# ---------------------------------------------------------------------------

def implication_freshness(imp: UniformImplication) -> Dict[str, NameSet]:
    """Per variable, the union of its freshness sets over all components"""
    result: Dict[str, Set[Name]] = {}
    for eq in imp.components:
        for var in eq.variable_sorts():
            result.setdefault(var, set()).update(freshness_set(eq, var))
    return {var: frozenset(names) for var, names in result.items()}


def _translate_component(sig: UniformSignature, eq: UniformEquation, a: Name,
                         fresh: Mapping[str, NameSet]) -> UniformEquation:
    return UniformEquation(eq.id, translate_term(sig, eq.lhs, a, fresh),
                           translate_term(sig, eq.rhs, a, fresh), eq.sort | {a})


def translate_implication(sig: UniformSignature, imp: UniformImplication, names: Iterable[Name]) -> UAImplication:
    """Translate every component by the names, using the unioned freshness sets"""
    names = frozenset(names)
    if names & imp.sort:
        raise TranslationError(f"{format_name_set(names & imp.sort)} overlaps the sort of {imp.id}")
    current = imp
    for a in sorted(names):
        fresh = implication_freshness(current)
        current = UniformImplication(
            current.id,
            tuple(_translate_component(sig, p, a, fresh) for p in current.premises),
            _translate_component(sig, current.conclusion, a, fresh),
        )
    suffix = "".join(f"-{n}" for n in sorted(names))
    ground = lambda eq: UAEquation(f"{eq.id}{suffix}", eq.lhs, eq.rhs, eq.sort, origin=imp.id)
    return UAImplication(f"{imp.id}{suffix}", tuple(ground(p) for p in current.premises),
                         ground(current.conclusion), origin=imp.id)


# ---------------------------------------------------------------------------
# Nominal judgments
# ---------------------------------------------------------------------------

def _nominal_atoms(t: NominalTerm, bound: bool) -> Set[Name]:
    """Free atoms (bound=False) or binder names (bound=True)"""
    if isinstance(t, NAtom):
        return set() if bound else {t.name}
    if isinstance(t, NAbs):
        inner = _nominal_atoms(t.body, bound)
        return inner | {t.name} if bound else inner - {t.name}
    if isinstance(t, NApp):
        result: Set[Name] = set()
        for arg in t.args:
            result |= _nominal_atoms(arg, bound)
        return result
    return set()


def _nominal_vars(t: NominalTerm) -> Set[str]:
    if isinstance(t, NVar):
        return {t.name}
    if isinstance(t, NAbs):
        return _nominal_vars(t.body)
    if isinstance(t, NApp):
        return set().union(*(_nominal_vars(a) for a in t.args)) if t.args else set()
    return set()


def _swap_nominal(t: NominalTerm, p: Permutation) -> NominalTerm:
    if isinstance(t, NAtom):
        return NAtom(p(t.name))
    if isinstance(t, NAbs):
        return NAbs(p(t.name), _swap_nominal(t.body, p))
    if isinstance(t, NApp):
        return NApp(t.symbol, tuple(_swap_nominal(a, p) for a in t.args))
    return t


class _Elaborator:
    def __init__(self, sig: UniformSignature, judgment: NominalJudgment):
        if sig.atoms is None or sig.binder is None:
            raise FrontendError("Signature declares no atoms/binder families")
        self.sig = sig
        self.judgment = judgment
        self.sorts = judgment.sorts
        self.fresh_for: Dict[str, Set[Name]] = {}
        for a, var in judgment.freshness:
            self.fresh_for.setdefault(var, set()).add(a)

    def term(self, t: NominalTerm, position: NameSet) -> UniformTerm:
        if isinstance(t, NVar):
            if t.name not in self.sorts:
                raise FrontendError(f"Variable {t.name} has no declared sort")
            t_x = self.sorts[t.name]
            if not t_x <= position:
                raise FrontendError(f"{t.name} : {format_name_set(t_x)} used where only "
                                    f"{format_name_set(position)} is in scope")
            return weaken_all(position - t_x, Var(t.name, t_x))
        if isinstance(t, NAtom):
            if t.name not in position:
                raise FrontendError(f"Atom {t.name} is not in scope")
            return App(self._instance(self.sig.atoms, (t.name,), position - {t.name}))
        if isinstance(t, NAbs):
            if t.name in position:
                t = self._alpha_rename(t, position)
            body = self.term(t.body, position | {t.name})
            return App(self._instance(self.sig.binder, (t.name,), position), (body,))
        if isinstance(t, NApp):
            family = self.sig.families.get(t.symbol)
            if family is None:
                raise FrontendError(f"Unknown operation {t.symbol}")
            if family.params or any(family.arg_params) or family.result_params:
                raise FrontendError(f"{t.symbol} is not a plain operation (use the atoms/binder forms)")
            if len(t.args) != len(family.arg_params):
                raise FrontendError(f"{t.symbol} expects {len(family.arg_params)} argument(s)")
            symbol = self._instance(t.symbol, (), position)
            return App(symbol, tuple(self.term(arg, position) for arg in t.args))
        raise FrontendError(f"Not a nominal term: {t!r}")

    def _instance(self, family: str, params: Tuple[Name, ...], base: NameSet):
        try:
            return self.sig.family_instance(family, params, base)
        except SignatureError as e:
            raise FrontendError(str(e)) from e

    def _alpha_rename(self, t: NAbs, position: NameSet) -> NAbs:
        for var in _nominal_vars(t.body):
            if t.name not in self.fresh_for.get(var, set()):
                raise FrontendError(f"Cannot rename binder {t.name} over {var} without {t.name} # {var}")
        avoid = set(position) | _nominal_atoms(t.body, False) | _nominal_atoms(t.body, True)
        for var in _nominal_vars(t.body):
            avoid |= self.sorts.get(var, set())
        c = least_fresh(avoid, self.sig.universe)
        if c is None:
            raise FrontendError(f"No name left in the universe to rename binder {t.name}")
        return NAbs(c, _swap_nominal(t.body, Permutation.swap(t.name, c)))


def frontend_nominal_judgment(sig: UniformSignature, judgment: NominalJudgment) -> UniformEquation:
    """
    Elaborate a # X, ... |- lhs = rhs into a uniform equation

    Variables are weakened up to the names in scope at each occurrence, so
    every name in scope and outside T_X lands in Fr(X). A constraint a # X
    whose name is never in scope at X adds a to the sort of the equation.

    Raises:
        FrontendError: contradictory or unsatisfiable context
    """
    sorts = judgment.sorts
    used = _nominal_vars(judgment.lhs) | _nominal_vars(judgment.rhs)
    undeclared = sorted(used - set(sorts))
    if undeclared:
        raise FrontendError(f"Variable(s) {', '.join(undeclared)} have no declared sort")
    for a, var in judgment.freshness:
        if var not in sorts:
            raise FrontendError(f"Freshness constraint {a} # {var} names an undeclared variable")
        if a in sorts[var]:
            raise FrontendError(f"Contradictory context: {a} # {var} but {a} is in the sort of {var}")

    sort = set(_nominal_atoms(judgment.lhs, False) | _nominal_atoms(judgment.rhs, False))
    for var in used:
        sort |= sorts[var]
    elaborator = _Elaborator(sig, judgment)

    def build(eq_sort: NameSet) -> UniformEquation:
        return UniformEquation(judgment.id, elaborator.term(judgment.lhs, eq_sort),
                               elaborator.term(judgment.rhs, eq_sort), eq_sort)

    eq = build(frozenset(sort))
    bound = _nominal_atoms(judgment.lhs, True) | _nominal_atoms(judgment.rhs, True)
    extra = set()
    for a, var in judgment.freshness:
        if var in used and a not in freshness_set(eq, var):
            if a in bound:
                raise FrontendError(f"{a} # {var}: {a} is bound in the equation but never in scope at {var}")
            extra.add(a)
    if extra:
        eq = build(frozenset(sort | extra))
    try:
        typecheck_equation(sig, eq)
    except SortError as e:
        raise FrontendError(f"Elaborated equation is ill-sorted: {e}") from e
    logger.debug(f"[FRONTEND]  {judgment.id}: {eq}")
    return eq
