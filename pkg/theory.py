"""
Uniform signatures, terms and equations for nominal_ua
Operation symbols organised as a presheaf over a bounded universe (either
declared explicitly or expanded from schematic families), well-sorted
uniform terms, equations, implications, nominal judgments, freshness sets,
and the signature checker.
"""

import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

from errors import SignatureError, SortError
from names import (EMPTY, Injection, Name, NameSet, format_name_set, sort_key, subsets)
from presheaf import TruncatedPresheaf, validate_presheaf

# Module logger
logger = logging.getLogger(__name__)

WEAKEN = "w"
RENAME = "r"

# (kind, a, b, symbol name): w_a . f is (WEAKEN, a, None, f); (b/a) . f is (RENAME, a, b, f)
ActionKey = Tuple[str, Name, Optional[Name], str]


def symbol_name(base_name: str, params: Sequence[Name], sort: NameSet) -> str:
    """Instance name such as app_{a}, lam[a]_{b} or var[a]_{}"""
    inner = "[" + ",".join(str(p) for p in params) + "]" if params else ""
    return f"{base_name}{inner}_{format_name_set(sort)}"


@dataclass(frozen=True)
class OpSymbol:
    """
    An operation symbol f in Op(index) of arity arg_sorts -> result_sort

    Family instances remember the family, the parameter names and the
    base sort S they were expanded at.
    """

    name: str
    index: NameSet
    arg_sorts: Tuple[NameSet, ...]
    result_sort: NameSet
    family: Optional[str] = None
    params: Tuple[Name, ...] = ()
    base: NameSet = EMPTY

    @property
    def arity(self) -> int:
        return len(self.arg_sorts)

    def describe(self) -> str:
        args = ", ".join(format_name_set(s) for s in self.arg_sorts)
        return f"{self.name} : {args} -> {format_name_set(self.result_sort)} @ {format_name_set(self.index)}"

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class FamilyDecl:
    """
    Schematic symbol declaration: family f[x, y] : S+x, S -> S

    arg_params[i] lists the parameters added to S in argument i,
    result_params those added to the result sort.
    """

    name: str
    params: Tuple[str, ...]
    arg_params: Tuple[Tuple[str, ...], ...]
    result_params: Tuple[str, ...]

    def __post_init__(self):
        if len(set(self.params)) != len(self.params):
            raise SignatureError(f"Family {self.name} repeats a parameter")
        for used in list(self.arg_params) + [self.result_params]:
            unknown = set(used) - set(self.params)
            if unknown:
                raise SignatureError(f"Family {self.name} uses undeclared parameter(s) {sorted(unknown)}")

    def instance(self, params: Sequence[Name], base: NameSet) -> OpSymbol:
        if len(params) != len(self.params) or len(set(params)) != len(params):
            raise SignatureError(f"Family {self.name} needs {len(self.params)} distinct parameter name(s)")
        if set(params) & base:
            raise SignatureError(f"Parameters of {self.name} must lie outside the base sort")
        assign = dict(zip(self.params, params))
        lift = lambda used: base | frozenset(assign[p] for p in used)
        return OpSymbol(
            name=symbol_name(self.name, params, base),
            index=base | frozenset(params),
            arg_sorts=tuple(lift(used) for used in self.arg_params),
            result_sort=lift(self.result_params),
            family=self.name,
            params=tuple(params),
            base=base,
        )

    def instances(self, universe: NameSet) -> Iterator[OpSymbol]:
        for base in subsets(universe):
            for params in itertools.permutations(sorted(universe - base), len(self.params)):
                yield self.instance(params, base)


@dataclass(frozen=True)
class ActionDecl:
    """Explicit presheaf action entry: kind WEAKEN (w_a . f = g) or RENAME ((b/a) . f = g)"""

    kind: str
    a: Name
    b: Optional[Name]
    source: str
    target: str

    @property
    def key(self) -> ActionKey:
        return (self.kind, self.a, self.b, self.source)


def describe_generator(kind: str, a: Name, b: Optional[Name]) -> str:
    return f"w_{a}" if kind == WEAKEN else f"({b}/{a})"


class UniformSignature:
    """
    A presheaf of operation symbols inside a universe

    `action` maps every generator applicable to a symbol to the resulting
    symbol's name; family instances get their action entries generated,
    explicit symbols take them from explicit ActionDecl lines.
    """

    def __init__(self, universe: NameSet, families: Sequence[FamilyDecl] = (),
                 ops: Sequence[OpSymbol] = (), actions: Sequence[ActionDecl] = (),
                 atoms: Optional[str] = None, binder: Optional[str] = None):
        self.universe = frozenset(universe)
        self.families: Dict[str, FamilyDecl] = {}
        self.symbols: Dict[str, OpSymbol] = {}
        self.action: Dict[ActionKey, str] = {}
        self.atoms = atoms
        self.binder = binder
        self.declared_ops: Tuple[OpSymbol, ...] = tuple(ops)
        self.declared_actions: Tuple[ActionDecl, ...] = tuple(actions)

        for family in families:
            if family.name in self.families:
                raise SignatureError(f"Family {family.name} declared twice")
            self.families[family.name] = family
            for symbol in family.instances(self.universe):
                self._add_symbol(symbol)
        for symbol in ops:
            if not symbol.index <= self.universe:
                raise SignatureError(f"Symbol {symbol.name} is indexed outside the universe")
            self._add_symbol(symbol)
        self._generate_family_actions()
        for decl in actions:
            for ref in (decl.source, decl.target):
                if ref not in self.symbols:
                    raise SignatureError(f"Action {describe_generator(decl.kind, decl.a, decl.b)} . "
                                         f"{decl.source} = {decl.target} references unknown symbol {ref}")
            self.action[decl.key] = decl.target

        for role, family in (("atoms", atoms), ("binder", binder)):
            if family is not None and family not in self.families:
                raise SignatureError(f"{role} family {family} is not declared")
        logger.debug(f"Signature over {format_name_set(self.universe)}: {len(self.symbols)} symbol(s), "
                     f"{len(self.action)} action entr(ies)")

    def _add_symbol(self, symbol: OpSymbol) -> None:
        if symbol.name in self.symbols:
            raise SignatureError(f"Symbol {symbol.name} declared twice")
        self.symbols[symbol.name] = symbol

    def _generate_family_actions(self) -> None:
        for symbol in self.symbols.values():
            if symbol.family is None:
                continue
            family = self.families[symbol.family]
            outside = sorted(self.universe - symbol.index)
            for c in outside:
                self.action[(WEAKEN, c, None, symbol.name)] = family.instance(symbol.params, symbol.base | {c}).name
            for c in sorted(symbol.index):
                for d in outside:
                    if c in symbol.base:
                        target = family.instance(symbol.params, (symbol.base - {c}) | {d})
                    else:
                        params = tuple(d if p == c else p for p in symbol.params)
                        target = family.instance(params, symbol.base)
                    self.action[(RENAME, c, d, symbol.name)] = target.name

    def symbol(self, name: str) -> OpSymbol:
        if name not in self.symbols:
            raise SignatureError(f"Unknown symbol {name}")
        return self.symbols[name]

    def ordered_symbols(self) -> List[OpSymbol]:
        return sorted(self.symbols.values(), key=lambda f: (sort_key(f.index), f.name))

    def symbols_at(self, index: NameSet) -> List[OpSymbol]:
        return [f for f in self.ordered_symbols() if f.index == index]

    def _act(self, key: ActionKey) -> OpSymbol:
        if key not in self.action:
            kind, a, b, name = key
            raise SignatureError(f"No action entry for {describe_generator(kind, a, b)} . {name}")
        return self.symbols[self.action[key]]

    def weaken_symbol(self, a: Name, f: OpSymbol) -> OpSymbol:
        """w_a . f"""
        return self._act((WEAKEN, a, None, f.name))

    def rename_symbol(self, a: Name, b: Name, f: OpSymbol) -> OpSymbol:
        """(b/a) . f"""
        return self._act((RENAME, a, b, f.name))

    def family_instance(self, family: str, params: Sequence[Name], base: NameSet) -> OpSymbol:
        if family not in self.families:
            raise SignatureError(f"Unknown family {family}")
        name = symbol_name(family, params, base)
        if name not in self.symbols:
            raise SignatureError(f"{name} lies outside universe {format_name_set(self.universe)}")
        return self.symbols[name]

    def restrict(self, universe: NameSet) -> "UniformSignature":
        """The same signature truncated to a smaller universe"""
        universe = frozenset(universe)
        if not universe <= self.universe:
            raise SignatureError(f"{format_name_set(universe)} is not inside {format_name_set(self.universe)}")
        inside = lambda name: self.symbols[name].index <= universe
        ops = [op for op in self.declared_ops if op.index <= universe]
        actions = [d for d in self.declared_actions if inside(d.source) and inside(d.target)]
        return UniformSignature(universe, tuple(self.families.values()), ops, actions, self.atoms, self.binder)

    def same_symbols(self, other: "UniformSignature") -> bool:
        return self.universe == other.universe and self.symbols == other.symbols and self.action == other.action

    def __repr__(self) -> str:
        return f"UniformSignature({format_name_set(self.universe)}, {len(self.symbols)} symbols)"


# ---------------------------------------------------------------------------
# Uniform terms
# ---------------------------------------------------------------------------

class UniformTerm:
    """Base of Var / App / Weaken / Rename; `sort` is computed structurally"""

    sort: NameSet

    def children(self) -> Tuple["UniformTerm", ...]:
        return ()


@dataclass(frozen=True)
class Var(UniformTerm):
    name: str
    sort: NameSet

    def __str__(self) -> str:
        return f"{self.name}_{format_name_set(self.sort)}"


@dataclass(frozen=True)
class App(UniformTerm):
    symbol: OpSymbol
    args: Tuple[UniformTerm, ...] = ()

    @property
    def sort(self) -> NameSet:
        return self.symbol.result_sort

    def children(self) -> Tuple[UniformTerm, ...]:
        return self.args

    def __str__(self) -> str:
        if not self.args:
            return self.symbol.name
        return f"{self.symbol.name}(" + ", ".join(str(t) for t in self.args) + ")"


@dataclass(frozen=True)
class Weaken(UniformTerm):
    """w_a t"""

    name: Name
    term: UniformTerm

    @cached_property
    def sort(self) -> NameSet:
        return self.term.sort | {self.name}

    def children(self) -> Tuple[UniformTerm, ...]:
        return (self.term,)

    def __str__(self) -> str:
        return f"w_{self.name} {self.term}"


@dataclass(frozen=True)
class Rename(UniformTerm):
    """(new/old) t"""

    new: Name
    old: Name
    term: UniformTerm

    @cached_property
    def sort(self) -> NameSet:
        return (self.term.sort - {self.old}) | {self.new}

    def children(self) -> Tuple[UniformTerm, ...]:
        return (self.term,)

    def __str__(self) -> str:
        return f"({self.new}/{self.old}) {self.term}"


def weaken_all(names: Sequence[Name], t: UniformTerm) -> UniformTerm:
    """Wrap t in weakenings, the least name innermost"""
    for n in sorted(names):
        t = Weaken(n, t)
    return t


def subterms(t: UniformTerm) -> Iterator[UniformTerm]:
    yield t
    for child in t.children():
        yield from subterms(child)


def variables(t: UniformTerm) -> Dict[str, NameSet]:
    """Variable name -> sort; conflicting sorts raise SortError"""
    found: Dict[str, NameSet] = {}
    for sub in subterms(t):
        if isinstance(sub, Var):
            if found.setdefault(sub.name, sub.sort) != sub.sort:
                raise SortError(f"Variable {sub.name} used at sorts {format_name_set(found[sub.name])} "
                                f"and {format_name_set(sub.sort)}")
    return found


def contains_var(t: UniformTerm, name: str) -> bool:
    return any(isinstance(sub, Var) and sub.name == name for sub in subterms(t))


def typecheck_term(sig: UniformSignature, t: UniformTerm, path: str = "") -> NameSet:
    """
    Check t against the uniform term rules

    Returns:
        The sort of t

    Raises:
        SortError: with the path of the offending subterm
    """
    here = path or "root"
    if isinstance(t, Var):
        if not t.sort <= sig.universe:
            raise SortError(f"Variable {t.name} has sort outside the universe", here)
        return t.sort
    if isinstance(t, App):
        f = t.symbol
        if sig.symbols.get(f.name) != f:
            raise SortError(f"Symbol {f.name} is not in the signature", here)
        if len(t.args) != f.arity:
            raise SortError(f"{f.name} expects {f.arity} argument(s), got {len(t.args)}", here)
        for i, (arg, expected) in enumerate(zip(t.args, f.arg_sorts)):
            actual = typecheck_term(sig, arg, f"{here}/{f.name}.{i + 1}")
            if actual != expected:
                raise SortError(f"Argument {i + 1} of {f.name} has sort {format_name_set(actual)}, "
                                f"expected {format_name_set(expected)}", here)
        return f.result_sort
    if isinstance(t, Weaken):
        inner = typecheck_term(sig, t.term, f"{here}/w_{t.name}")
        if t.name in inner:
            raise SortError(f"w_{t.name} applied to a term whose sort {format_name_set(inner)} contains {t.name}", here)
        return inner | {t.name}
    if isinstance(t, Rename):
        inner = typecheck_term(sig, t.term, f"{here}/({t.new}/{t.old})")
        if t.old == t.new:
            raise SortError(f"Renaming ({t.new}/{t.old}) needs distinct names", here)
        if t.old not in inner:
            raise SortError(f"Renaming ({t.new}/{t.old}) applied to a term of sort {format_name_set(inner)} "
                            f"without {t.old}", here)
        if t.new in inner - {t.old}:
            raise SortError(f"Renaming ({t.new}/{t.old}) would capture {t.new}", here)
        return (inner - {t.old}) | {t.new}
    raise SortError(f"Not a uniform term: {t!r}", here)


# ---------------------------------------------------------------------------
# Equations, implications, judgments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UniformEquation:
    id: str
    lhs: UniformTerm
    rhs: UniformTerm
    sort: NameSet

    def variable_sorts(self) -> Dict[str, NameSet]:
        found = variables(self.lhs)
        for name, sort in variables(self.rhs).items():
            if found.setdefault(name, sort) != sort:
                raise SortError(f"Variable {name} has different sorts on the two sides of {self.id}")
        return found

    def __str__(self) -> str:
        return f"{self.lhs} = {self.rhs} : {format_name_set(self.sort)}"


@dataclass(frozen=True)
class UAEquation:
    """A many-sorted equation over the generators and the signature's symbols"""

    id: str
    lhs: UniformTerm
    rhs: UniformTerm
    sort: NameSet
    origin: str = ""

    def variable_sorts(self) -> Dict[str, NameSet]:
        return UniformEquation(self.id, self.lhs, self.rhs, self.sort).variable_sorts()

    def __str__(self) -> str:
        return f"{self.lhs} = {self.rhs} : {format_name_set(self.sort)}"


@dataclass(frozen=True)
class UniformImplication:
    id: str
    premises: Tuple[UniformEquation, ...]
    conclusion: UniformEquation

    @property
    def sort(self) -> NameSet:
        result = self.conclusion.sort
        for premise in self.premises:
            result = result | premise.sort
        return result

    @property
    def components(self) -> Tuple[UniformEquation, ...]:
        return self.premises + (self.conclusion,)

    def variable_sorts(self) -> Dict[str, NameSet]:
        found: Dict[str, NameSet] = {}
        for eq in self.components:
            for name, sort in eq.variable_sorts().items():
                if found.setdefault(name, sort) != sort:
                    raise SortError(f"Variable {name} has different sorts across implication {self.id}")
        return found


@dataclass(frozen=True)
class UAImplication:
    id: str
    premises: Tuple[UAEquation, ...]
    conclusion: UAEquation
    origin: str = ""


class NominalTerm:
    """Surface syntax of nominal judgments"""


@dataclass(frozen=True)
class NVar(NominalTerm):
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class NAtom(NominalTerm):
    name: Name

    def __str__(self) -> str:
        return str(self.name)


@dataclass(frozen=True)
class NAbs(NominalTerm):
    name: Name
    body: NominalTerm

    def __str__(self) -> str:
        return f"[{self.name}]{self.body}"


@dataclass(frozen=True)
class NApp(NominalTerm):
    symbol: str
    args: Tuple[NominalTerm, ...] = ()

    def __str__(self) -> str:
        if not self.args:
            return self.symbol
        return f"{self.symbol}(" + ", ".join(str(a) for a in self.args) + ")"


@dataclass(frozen=True)
class NominalJudgment:
    """a # X, ... |- lhs = rhs, with declared variable sorts"""

    id: str
    var_sorts: Tuple[Tuple[str, NameSet], ...]
    freshness: Tuple[Tuple[Name, str], ...]
    lhs: NominalTerm
    rhs: NominalTerm

    @property
    def sorts(self) -> Dict[str, NameSet]:
        return dict(self.var_sorts)


# ---------------------------------------------------------------------------
# Freshness sets and equation checks
# ---------------------------------------------------------------------------

def freshness_set(eq: UniformEquation, var: str) -> NameSet:
    """
    Fr_E(X): union of T minus T_X over subterms t : T containing X

    Raises:
        SortError: X does not occur in the equation
    """
    sorts = eq.variable_sorts()
    if var not in sorts:
        raise SortError(f"Variable {var} does not occur in {eq.id or 'equation'}")
    t_x = sorts[var]
    result = set()
    for side in (eq.lhs, eq.rhs):
        for sub in subterms(side):
            if contains_var(sub, var):
                result |= sub.sort - t_x
    return frozenset(result)


def freshness_sets(eq: UniformEquation) -> Dict[str, NameSet]:
    return {var: freshness_set(eq, var) for var in sorted(eq.variable_sorts())}


def typecheck_equation(sig: UniformSignature, eq) -> NameSet:
    """Both sides well-sorted at the declared sort, variables used consistently"""
    eq.variable_sorts()
    for side, term in (("lhs", eq.lhs), ("rhs", eq.rhs)):
        actual = typecheck_term(sig, term, f"{eq.id}.{side}")
        if actual != eq.sort:
            raise SortError(f"{side} of {eq.id} has sort {format_name_set(actual)}, "
                            f"declared {format_name_set(eq.sort)}", f"{eq.id}.{side}")
    return eq.sort


# ---------------------------------------------------------------------------
# Signature checking
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SignatureIssue:
    kind: str          # arity-union | missing-action | arity-transport | functoriality
    symbol: str
    detail: str

    def to_dict(self) -> Dict[str, str]:
        return {"kind": self.kind, "symbol": self.symbol, "detail": self.detail}


@dataclass
class SignatureReport:
    issues: List[SignatureIssue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def kinds(self) -> List[str]:
        return sorted({issue.kind for issue in self.issues})

    def format_text(self) -> str:
        if self.ok:
            return "signature: OK"
        lines = [f"signature: {len(self.issues)} issue(s)"]
        lines.extend(f"  [{i.kind}] {i.symbol}: {i.detail}" for i in self.issues)
        return "\n".join(lines)

    def to_dict(self) -> Dict[str, Any]:
        return {"ok": self.ok, "issues": [i.to_dict() for i in self.issues]}


def generator_injection(kind: str, a: Name, b: Optional[Name], index: NameSet) -> Injection:
    """The injection out of `index` that w_a or (b/a) denotes"""
    if kind == WEAKEN:
        return Injection.inclusion(index, index | {a})
    return Injection(index, (index - {a}) | {b}, tuple((n, b if n == a else n) for n in sorted(index)))


def transported_arity(u: Injection, f: OpSymbol) -> Tuple[Tuple[NameSet, ...], NameSet]:
    """Arity u . f must have: T minus u[S minus S_i] for each position"""
    move = lambda s: u.target - u.image(f.index - s)
    return tuple(move(s) for s in f.arg_sorts), move(f.result_sort)


def signature_presheaf(sig: UniformSignature) -> TruncatedPresheaf:
    """Op as a truncated presheaf whose elements are symbol names"""
    carrier = {s: [f.name for f in sig.symbols_at(s)] for s in subsets(sig.universe)}
    wk, ren = {}, {}
    for s in subsets(sig.universe):
        for a in sorted(sig.universe - s):
            wk[(s, a)] = {f: sig.action[(WEAKEN, a, None, f)] for f in carrier[s]}
            for b in sorted(sig.universe - s):
                if a != b:
                    ren[(s, a, b)] = {f: sig.action[(RENAME, a, b, f)] for f in carrier[s | {a}]}
    return TruncatedPresheaf(sig.universe, carrier, wk, ren, "Op")


def check_uniform_signature(sig: UniformSignature, use_threads: bool = False,
                            max_workers: int = 4) -> SignatureReport:
    """
    Check the arity-union rule, completeness of the action, arity transport
    and functoriality of the action on generators

    Raises:
        SignatureError: an action entry references an unknown symbol
    """
    report = SignatureReport()
    for key, target in sig.action.items():
        if key[3] not in sig.symbols or target not in sig.symbols:
            raise SignatureError(f"Action entry {key} -> {target} references an unknown symbol")

    for f in sig.ordered_symbols():
        union = f.result_sort.union(*f.arg_sorts)
        if union != f.index:
            report.issues.append(SignatureIssue(
                "arity-union", f.name,
                f"positions cover {format_name_set(union)} but the index is {format_name_set(f.index)}"))

    complete = True
    for f in sig.ordered_symbols():
        outside = sorted(sig.universe - f.index)
        generators = [(WEAKEN, c, None) for c in outside]
        generators += [(RENAME, c, d) for c in sorted(f.index) for d in outside]
        for kind, a, b in generators:
            key = (kind, a, b, f.name)
            if key not in sig.action:
                complete = False
                report.issues.append(SignatureIssue(
                    "missing-action", f.name, f"no entry for {describe_generator(kind, a, b)} . {f.name}"))
                continue
            g = sig.symbols[sig.action[key]]
            u = generator_injection(kind, a, b, f.index)
            args, result = transported_arity(u, f)
            gen = describe_generator(kind, a, b)
            if g.index != u.target:
                report.issues.append(SignatureIssue(
                    "arity-transport", f.name,
                    f"{gen}.{f.name} must lie in Op({format_name_set(u.target)}) but {g.name} "
                    f"is indexed by {format_name_set(g.index)}"))
            elif g.arg_sorts != args or g.result_sort != result:
                expected = ",".join(format_name_set(s) for s in args)
                declared = ",".join(format_name_set(s) for s in g.arg_sorts)
                report.issues.append(SignatureIssue(
                    "arity-transport", f.name,
                    f"{gen}.{f.name} must have argument sorts {expected} -> {format_name_set(result)} "
                    f"but {g.name} declares {declared} -> {format_name_set(g.result_sort)}"))

    if complete:
        presheaf_report = validate_presheaf(signature_presheaf(sig), use_threads, max_workers)
        for v in presheaf_report.violations:
            report.issues.append(SignatureIssue("functoriality", str(v.element), v.describe()))

    logger.info(f"[SIGNATURE]  {len(sig.symbols)} symbol(s) checked, {len(report.issues)} issue(s)")
    return report


def is_uniform(sig: UniformSignature) -> bool:
    return check_uniform_signature(sig).ok


