"""
Theory files for nominal_ua
Parser (lark, LALR) and printer for the theory language: universe,
explicit and schematic operation symbols, action entries, uniform
equations, nominal judgments and uniform implications.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, List, Optional, Tuple

from lark import Lark, Token, Transformer, UnexpectedInput, v_args

from errors import NominalUAError, SignatureError, SortError, TheoryParseError
from names import Name, NameSet, format_name_set
from theory import (RENAME, WEAKEN, ActionDecl, App, FamilyDecl, NAbs, NApp, NAtom, NVar, NominalJudgment,
                    OpSymbol, Rename, UniformEquation, UniformImplication, UniformSignature,
                    UniformTerm, Var, Weaken, symbol_name, typecheck_equation)

# Module logger
logger = logging.getLogger(__name__)

THEORY_GRAMMAR = r"""
    start: item*

    ?item: universe_decl
         | op_decl
         | family_decl
         | action_decl
         | atoms_decl
         | binder_decl
         | eq_decl
         | judgment_decl
         | implication_decl

    universe_decl: "universe" sort
    op_decl: "op" symref ":" sort_list "->" sort "@" sort
    family_decl: "family" LOWER params? ":" arity_list "->" arity
    action_decl: "action" WEAKEN LOWER "." symref "=" symref                -> weaken_action
               | "action" "(" LOWER "/" LOWER ")" "." symref "=" symref     -> rename_action
    atoms_decl: "atoms" LOWER
    binder_decl: "binder" LOWER
    eq_decl: "eq" ID ":" equation
    judgment_decl: "judgment" ID var_decls? fresh_list? "|-" nterm "=" nterm
    implication_decl: "implication" ID "{" premise* "then" equation "}"

    premise: "if" equation
    equation: term "=" term ":" sort

    sort: "{" [LOWER ("," LOWER)*] "}"
    sort_list: [sort ("," sort)*]
    params: "[" LOWER ("," LOWER)* "]"
    arity_list: [arity ("," arity)*]
    arity: "S" ("+" LOWER)*
    symref: LOWER params? "_" sort

    ?term: UPPER "_" sort                          -> var
         | WEAKEN LOWER term                       -> weaken
         | "(" LOWER "/" LOWER ")" term            -> rename
         | symref ["(" term ("," term)* ")"]       -> app

    var_decls: "[" var_decl ("," var_decl)* "]"
    var_decl: UPPER ":" sort
    fresh_list: fresh ("," fresh)*
    fresh: LOWER "#" UPPER

    ?nterm: "[" LOWER "]" nterm                    -> nabs
          | UPPER                                  -> nvar
          | LOWER                                  -> nname
          | LOWER "(" nterm ("," nterm)* ")"       -> napp

    WEAKEN.2: "w_"
    ID: /[a-z][A-Za-z0-9]*(-[A-Za-z0-9]+)*/
    LOWER: /[a-z][A-Za-z0-9]*/
    UPPER: /[A-Z][A-Za-z0-9]*('[a-z][0-9]*)*/
    COMMENT: /\/\/[^\n]*/

    %import common.WS
    %ignore WS
    %ignore COMMENT
"""

_parser = Lark(THEORY_GRAMMAR, start="start", parser="lalr", lexer="contextual", propagate_positions=True)


@dataclass
class Theory:
    """A parsed theory file"""

    universe: NameSet
    families: Tuple[FamilyDecl, ...] = ()
    ops: Tuple[OpSymbol, ...] = ()
    actions: Tuple[ActionDecl, ...] = ()
    atoms: Optional[str] = None
    binder: Optional[str] = None
    equations: Tuple[UniformEquation, ...] = ()
    judgments: Tuple[NominalJudgment, ...] = ()
    implications: Tuple[UniformImplication, ...] = ()
    source: str = field(default="", compare=False)

    @cached_property
    def signature(self) -> UniformSignature:
        return UniformSignature(self.universe, self.families, self.ops, self.actions, self.atoms, self.binder)

    def signature_at(self, universe: NameSet) -> UniformSignature:
        """
        The signature inside another universe

        Smaller universes truncate; larger ones are only available when the
        theory declares nothing but families.
        """
        universe = frozenset(universe)
        if universe == self.universe:
            return self.signature
        if universe <= self.universe:
            return self.signature.restrict(universe)
        if self.ops or self.actions:
            raise SignatureError(f"Explicit symbols of {self.source or 'the theory'} cannot be extended to "
                                 f"{format_name_set(universe)}")
        return UniformSignature(universe, self.families, (), (), self.atoms, self.binder)

    def equation(self, eq_id: str) -> UniformEquation:
        for eq in self.equations:
            if eq.id == eq_id:
                return eq
        raise KeyError(eq_id)


# Raw syntax produced by the transformer, resolved against the signature afterwards

@dataclass(frozen=True)
class _RawRef:
    name: str
    line: int
    column: int


@dataclass(frozen=True)
class _RawApp:
    ref: _RawRef
    args: Tuple[Any, ...]


@dataclass(frozen=True)
class _RawEquation:
    lhs: Any
    rhs: Any
    sort: NameSet


def _name(token: Token) -> Name:
    try:
        return Name.parse(str(token))
    except ValueError:
        raise TheoryParseError(f"{token} is not a name", token.line, token.column)


class _TheoryBuilder(Transformer):
    def start(self, items):
        return items

    def sort(self, names):
        return frozenset(_name(n) for n in names if n is not None)

    def sort_list(self, sorts):
        return tuple(s for s in sorts if s is not None)

    def params(self, tokens):
        return tuple(tokens)

    def arity(self, tokens):
        return tuple(str(t) for t in tokens)

    def arity_list(self, arities):
        return tuple(a for a in arities if a is not None)

    @v_args(meta=True)
    def symref(self, meta, children):
        base = str(children[0])
        params = tuple(_name(p) for p in children[1]) if len(children) == 3 else ()
        return _RawRef(symbol_name(base, params, children[-1]), meta.line, meta.column)

    @v_args(inline=True)
    def var(self, token, sort):
        return Var(str(token), sort)

    @v_args(inline=True)
    def weaken(self, _, a, term):
        return ("weaken", _name(a), term)

    @v_args(inline=True)
    def rename(self, new, old, term):
        return ("rename", _name(new), _name(old), term)

    def app(self, children):
        return _RawApp(children[0], tuple(c for c in children[1:] if c is not None))

    @v_args(inline=True)
    def equation(self, lhs, rhs, sort):
        return _RawEquation(lhs, rhs, sort)

    @v_args(inline=True)
    def premise(self, eq):
        return eq

    @v_args(inline=True)
    def universe_decl(self, sort):
        return ("universe", sort)

    @v_args(inline=True)
    def op_decl(self, ref, args, result, index):
        return ("op", OpSymbol(ref.name, index, args, result))

    def family_decl(self, children):
        name = str(children[0])
        params = tuple(str(p) for p in children[1]) if len(children) == 4 else ()
        args, result = children[-2], children[-1]
        return ("family", FamilyDecl(name, params, args, result))

    @v_args(inline=True)
    def weaken_action(self, _, a, source, target):
        return ("action", ActionDecl(WEAKEN, _name(a), None, source.name, target.name), source)

    @v_args(inline=True)
    def rename_action(self, new, old, source, target):
        return ("action", ActionDecl(RENAME, _name(old), _name(new), source.name, target.name), source)

    @v_args(inline=True)
    def atoms_decl(self, name):
        return ("atoms", str(name))

    @v_args(inline=True)
    def binder_decl(self, name):
        return ("binder", str(name))

    @v_args(inline=True)
    def eq_decl(self, ident, eq):
        return ("eq", str(ident), eq)

    def var_decls(self, decls):
        return tuple(decls)

    @v_args(inline=True)
    def var_decl(self, var, sort):
        return (str(var), sort)

    def fresh_list(self, items):
        return tuple(items)

    @v_args(inline=True)
    def fresh(self, a, var):
        return (_name(a), str(var))

    def judgment_decl(self, children):
        ident, rest = str(children[0]), children[1:]
        lhs, rhs = rest[-2], rest[-1]
        var_sorts, freshness = (), ()
        for part in rest[:-2]:
            if part and isinstance(part[0][0], str):
                var_sorts = part
            elif part:
                freshness = part
        return ("judgment", NominalJudgment(ident, var_sorts, freshness, lhs, rhs))

    def implication_decl(self, children):
        return ("implication", str(children[0]), tuple(children[1:-1]), children[-1])

    @v_args(inline=True)
    def nabs(self, a, body):
        return NAbs(_name(a), body)

    @v_args(inline=True)
    def nvar(self, token):
        return NVar(str(token))

    @v_args(inline=True)
    def nname(self, token):
        text = str(token)
        return NAtom(Name.parse(text)) if Name.is_name(text) else NApp(text)

    def napp(self, children):
        return NApp(str(children[0]), tuple(children[1:]))


def _resolve(sig: UniformSignature, raw) -> UniformTerm:
    if isinstance(raw, Var):
        return raw
    if isinstance(raw, _RawApp):
        if raw.ref.name not in sig.symbols:
            raise TheoryParseError(f"Unknown symbol {raw.ref.name}", raw.ref.line, raw.ref.column)
        return App(sig.symbols[raw.ref.name], tuple(_resolve(sig, a) for a in raw.args))
    if raw[0] == "weaken":
        return Weaken(raw[1], _resolve(sig, raw[2]))
    return Rename(raw[1], raw[2], _resolve(sig, raw[3]))


def _resolve_equation(sig: UniformSignature, eq_id: str, raw: _RawEquation) -> UniformEquation:
    eq = UniformEquation(eq_id, _resolve(sig, raw.lhs), _resolve(sig, raw.rhs), raw.sort)
    try:
        typecheck_equation(sig, eq)
    except SortError as e:
        raise TheoryParseError(f"Ill-sorted equation {eq_id}: {e}") from e
    return eq


def parse_theory(text: str, source: str = "") -> Theory:
    """
    Parse a theory file

    Raises:
        TheoryParseError: with line and column of the offending token
    """
    try:
        items = _TheoryBuilder().transform(_parser.parse(text))
    except UnexpectedInput as e:
        raise TheoryParseError(f"Unexpected input: {e.get_context(text).strip()}", e.line, e.column) from e
    except Exception as e:
        cause = getattr(e, "orig_exc", e)
        if isinstance(cause, TheoryParseError):
            raise cause from e
        raise TheoryParseError(str(cause)) from e

    universes = [item[1] for item in items if item[0] == "universe"]
    if len(universes) != 1:
        raise TheoryParseError(f"Expected exactly one universe declaration, found {len(universes)}")
    pick = lambda kind: [item for item in items if item[0] == kind]
    single = lambda kind: pick(kind)[-1][1] if pick(kind) else None

    theory = Theory(
        universe=universes[0],
        families=tuple(item[1] for item in pick("family")),
        ops=tuple(item[1] for item in pick("op")),
        actions=tuple(item[1] for item in pick("action")),
        atoms=single("atoms"),
        binder=single("binder"),
        source=source,
    )
    try:
        sig = theory.signature
    except NominalUAError as e:
        raise TheoryParseError(str(e)) from e

    theory.equations = tuple(_resolve_equation(sig, item[1], item[2]) for item in pick("eq"))
    theory.judgments = tuple(item[1] for item in pick("judgment"))
    implications = []
    for _, imp_id, premises, conclusion in pick("implication"):
        implications.append(UniformImplication(
            imp_id,
            tuple(_resolve_equation(sig, f"{imp_id}-p{i + 1}", p) for i, p in enumerate(premises)),
            _resolve_equation(sig, imp_id, conclusion),
        ))
    theory.implications = tuple(implications)
    logger.info(f"Parsed theory {source or '<text>'}: {len(sig.symbols)} symbol(s), "
                f"{len(theory.equations)} equation(s), {len(theory.judgments)} judgment(s), "
                f"{len(theory.implications)} implication(s)")
    return theory


def load_theory(path: Path) -> Theory:
    path = Path(path)
    with open(path, "r") as f:
        return parse_theory(f.read(), source=str(path))


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------

def format_equation_body(eq) -> str:
    return f"{eq.lhs} = {eq.rhs} : {format_name_set(eq.sort)}"


def _format_arity(params: Tuple[str, ...]) -> str:
    return "S" + "".join(f"+{p}" for p in params)


def _format_family(family: FamilyDecl) -> str:
    params = "[" + ",".join(family.params) + "]" if family.params else ""
    args = ", ".join(_format_arity(a) for a in family.arg_params)
    return f"family {family.name}{params} : {args} -> {_format_arity(family.result_params)}".replace(":  ->", ": ->")


def _format_op(symbol: OpSymbol) -> str:
    args = ", ".join(format_name_set(s) for s in symbol.arg_sorts)
    return (f"op {symbol.name} : {args} -> {format_name_set(symbol.result_sort)} "
            f"@ {format_name_set(symbol.index)}").replace(":  ->", ": ->")


def _format_action(decl: ActionDecl) -> str:
    generator = f"w_{decl.a}" if decl.kind == WEAKEN else f"({decl.b}/{decl.a})"
    return f"action {generator} . {decl.source} = {decl.target}"


def _format_judgment(j: NominalJudgment) -> str:
    parts = [f"judgment {j.id}"]
    if j.var_sorts:
        parts.append("[" + ", ".join(f"{v} : {format_name_set(s)}" for v, s in j.var_sorts) + "]")
    if j.freshness:
        parts.append(", ".join(f"{a} # {v}" for a, v in j.freshness))
    parts.append(f"|- {j.lhs} = {j.rhs}")
    return " ".join(parts)


def _format_implication(imp: UniformImplication) -> List[str]:
    lines = [f"implication {imp.id} {{"]
    lines.extend(f"  if {format_equation_body(p)}" for p in imp.premises)
    lines.append(f"  then {format_equation_body(imp.conclusion)}")
    lines.append("}")
    return lines


def format_theory(theory: Theory) -> str:
    """Theory text such that parse_theory(format_theory(t)) == t"""
    lines = [f"universe {format_name_set(theory.universe)}"]
    lines.extend(_format_family(f) for f in theory.families)
    if theory.atoms:
        lines.append(f"atoms {theory.atoms}")
    if theory.binder:
        lines.append(f"binder {theory.binder}")
    lines.extend(_format_op(op) for op in theory.ops)
    lines.extend(_format_action(a) for a in theory.actions)
    lines.extend(f"eq {eq.id} : {format_equation_body(eq)}" for eq in theory.equations)
    lines.extend(_format_judgment(j) for j in theory.judgments)
    for imp in theory.implications:
        lines.extend(_format_implication(imp))
    return "\n".join(lines) + "\n"


def format_equation(eq) -> str:
    return f"eq {eq.id} : {format_equation_body(eq)}"


def signature_lines(sig: UniformSignature) -> List[str]:
    """Declaration lines (without the universe) that rebuild sig"""
    lines = [_format_family(f) for f in sig.families.values()]
    if sig.atoms:
        lines.append(f"atoms {sig.atoms}")
    if sig.binder:
        lines.append(f"binder {sig.binder}")
    lines.extend(_format_op(op) for op in sig.declared_ops)
    lines.extend(_format_action(a) for a in sig.declared_actions)
    return lines


def signature_from_lines(universe: NameSet, lines: List[str]) -> UniformSignature:
    text = f"universe {format_name_set(universe)}\n" + "\n".join(lines) + "\n"
    return parse_theory(text, source="<signature>").signature
