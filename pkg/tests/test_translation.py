"""Tests for the translation compiler"""

import itertools

import pytest

from errors import FrontendError, TranslationError
from names import EMPTY, name, name_set
from theory import (App, NAbs, NApp, NAtom, NVar, NominalJudgment, OpSymbol, Rename, UniformEquation,
                    UniformSignature, Var, Weaken, typecheck_equation)
from theory_parser import format_equation, load_theory, parse_theory
from translation import (canonical_equation, canonical_form, equations_equivalent, frontend_nominal_judgment,
                         gen_equivariance_equations, implication_freshness, primed, translate_by_name,
                         translate_by_set, translate_family, translate_implication)

LAMBDA_HEADER = """
universe {a,b,c}
family var[x] : -> S+x
family app : S, S -> S
family lam[x] : S+x -> S
atoms var
binder lam
"""


def judgment(text):
    """Parse one judgment line against the lambda signature"""
    theory = parse_theory(LAMBDA_HEADER + text)
    return theory.signature, theory.judgments[0]


class TestTranslateByName:
    """Test cases for tr_a"""

    def test_primed_names(self):
        """Test that adjoined names are kept sorted"""
        assert primed("X", name("b")) == "X'b"
        assert primed("X'c", name("a")) == "X'a'c"

    def test_eta_by_fresh_name(self, eta_theory):
        """Test translating the eta equation by a name outside every index"""
        sig = eta_theory.signature
        eq = translate_by_name(sig, eta_theory.equation("eta"), name("b"))
        assert eq.id == "eta-b"
        assert str(eq) == "lam[a]_{b}(app_{a,b}(w_a X'b_{b}, var[a]_{b})) = X'b_{b} : {b}"
        assert typecheck_equation(sig, eq) == name_set("b")

    def test_eta_by_bound_name(self, eta_theory):
        """Test that a name in the index and in Fr(X) turns into weakenings"""
        eq = translate_by_name(eta_theory.signature, eta_theory.equation("eta"), name("a"))
        assert str(eq) == "w_a lam[a]_{}(app_{a}(w_a X_{}, var[a]_{})) = w_a X_{} : {a}"

    def test_name_inside_sort(self, eta_theory):
        """Test that tr_a needs a outside the equation sort"""
        eq = translate_by_name(eta_theory.signature, eta_theory.equation("eta"), name("b"))
        with pytest.raises(TranslationError):
            translate_by_name(eta_theory.signature, eq, name("b"))


class TestTranslateBySet:
    """Test cases for translations by name sets"""

    def test_family_ids(self, eta_theory):
        """Test that every subset of the universe gives one equation"""
        family = translate_family(eta_theory.signature, eta_theory.equation("eta"))
        ids = [eq.id for eq in family]
        assert ids == ["eta", "eta-a", "eta-b", "eta-c", "eta-a-b", "eta-a-c", "eta-b-c", "eta-a-b-c"]
        assert all(eq.origin == "eta" for eq in family)

    def test_empty_set_is_identity(self, eta_theory):
        """Test that translating by the empty set keeps the equation"""
        eq = eta_theory.equation("eta")
        result = translate_by_set(eta_theory.signature, eq, [])
        assert (result.lhs, result.rhs, result.sort) == (eq.lhs, eq.rhs, eq.sort)

    def test_order_irrelevance(self, eta_theory):
        """Test that every iteration order gives an equivalent equation"""
        sig, eq = eta_theory.signature, eta_theory.equation("eta")
        names = [name("a"), name("b"), name("c")]
        reference = translate_by_set(sig, eq, names)
        for order in ([name("c"), name("b"), name("a")], [name("b"), name("a"), name("c")]):
            assert equations_equivalent(translate_by_set(sig, eq, names, order=order), reference)

    def test_bad_order(self, eta_theory):
        """Test that an order must list the set exactly"""
        with pytest.raises(TranslationError):
            translate_by_set(eta_theory.signature, eta_theory.equation("eta"), [name("a")],
                             order=[name("a"), name("b")])

    def test_order_irrelevance_generated(self):
        """Test every order of every set of at most three names on generated equations"""
        theory = parse_theory(LAMBDA_HEADER.replace("{a,b,c}", "{a,b,c,d}") +
                              "eq alpha : lam[b]_{}((b/a) X_{a}) = lam[a]_{}(X_{a}) : {}")
        sig = theory.signature
        eop = gen_equivariance_equations(sig)
        renamings = [eq for eq in eop if eq.origin.startswith("(") and "lam" in eq.origin]
        weakenings = [eq for eq in eop if eq.origin.startswith("w_")]
        equations = [theory.equation("alpha")] + renamings[:13] + weakenings[:6]
        assert len(equations) == 20
        for eq in equations:
            room = sorted(sig.universe - eq.sort)
            for k in range(4):
                for names in itertools.combinations(room, k):
                    reference = translate_by_set(sig, eq, names)
                    for order in itertools.permutations(names):
                        translated = translate_by_set(sig, eq, names, order=order)
                        assert equations_equivalent(translated, reference), f"{eq.id} in order {order}"

    def test_eta_family_members(self, eta_theory):
        """Test the translations of eta by the sets avoiding a"""
        sig, eta = eta_theory.signature, eta_theory.equation("eta")
        expected = {
            (): "lam[a]_{}(app_{a}(w_a X_{}, var[a]_{})) = X_{} : {}",
            ("b",): "lam[a]_{b}(app_{a,b}(w_a X'b_{b}, var[a]_{b})) = X'b_{b} : {b}",
            ("c",): "lam[a]_{c}(app_{a,c}(w_a X'c_{c}, var[a]_{c})) = X'c_{c} : {c}",
            ("b", "c"): "lam[a]_{b,c}(app_{a,b,c}(w_a X'b'c_{b,c}, var[a]_{b,c})) = X'b'c_{b,c} : {b,c}",
        }
        for names, text in expected.items():
            eq = canonical_equation(translate_by_set(sig, eta, [name(n) for n in names]))
            assert str(eq) == text

    def test_overlap_with_sort(self, eta_theory):
        """Test that the set must be disjoint from the sort"""
        sig = eta_theory.signature
        eq = translate_by_set(sig, eta_theory.equation("eta"), [name("b")])
        with pytest.raises(TranslationError):
            translate_by_set(sig, UniformEquation(eq.id, eq.lhs, eq.rhs, eq.sort), [name("b"), name("c")])

    def test_missing_action_is_skipped(self):
        """Test that translations needing an absent action entry are left out"""
        c = OpSymbol("c_{}", EMPTY, (), EMPTY)
        sig = UniformSignature(name_set("a"), ops=[c])
        eq = UniformEquation("c", App(c), App(c), EMPTY)
        assert [e.id for e in translate_family(sig, eq)] == ["c"]


class TestCanonicalForm:
    """Test cases for normal forms of generator chains"""

    def test_weakenings_sorted(self):
        """Test that weakening chains put the least name innermost"""
        x = Var("X", EMPTY)
        assert canonical_form(Weaken(name("a"), Weaken(name("b"), x))) == Weaken(name("b"), Weaken(name("a"), x))

    def test_rename_after_weaken(self):
        """Test that renaming a just-weakened name is a weakening"""
        x = Var("X", EMPTY)
        assert canonical_form(Rename(name("b"), name("a"), Weaken(name("a"), x))) == Weaken(name("b"), x)

    def test_weaken_moves_outward(self):
        """Test that weakenings are pushed above renamings"""
        x = Var("X", name_set("a"))
        t = Rename(name("b"), name("a"), Weaken(name("c"), x))
        assert canonical_form(t) == Weaken(name("c"), Rename(name("b"), name("a"), x))

    def test_renamings_compose(self):
        """Test (c/b)(b/a) = (c/a) and (a/b)(b/a) = id"""
        x = Var("X", name_set("a"))
        assert canonical_form(Rename(name("c"), name("b"), Rename(name("b"), name("a"), x))) == \
            Rename(name("c"), name("a"), x)
        assert canonical_form(Rename(name("a"), name("b"), Rename(name("b"), name("a"), x))) == x


class TestEquivarianceEquations:
    """Test cases for E_Op"""

    def test_count_and_ids(self, lambda_sig_ab):
        """Test one equation per fresh weakening and per renaming"""
        equations = gen_equivariance_equations(lambda_sig_ab)
        assert len(equations) == 14
        assert [eq.id for eq in equations[:3]] == ["eop-1", "eop-2", "eop-3"]
        assert equations[0].origin == "w_a . app_{}"

    def test_weakening_equation(self, lambda_sig_ab):
        """Test the equation generated for w_a . app_{}"""
        eq = gen_equivariance_equations(lambda_sig_ab)[0]
        assert str(eq) == "app_{a}(w_a X1_{}, w_a X2_{}) = w_a app_{}(X1_{}, X2_{}) : {a}"

    def test_alpha_equation(self, lambda_sig_ab):
        """Test that renaming the bound name of lam is an alpha-equivalence"""
        equations = gen_equivariance_equations(lambda_sig_ab)
        eq = next(e for e in equations if e.origin == "(b/a) . lam[a]_{}")
        assert format_equation(eq).endswith("lam[b]_{}((b/a) X1_{a}) = lam[a]_{}(X1_{a}) : {}")

    def test_all_well_sorted(self, lambda_sig_ab):
        """Test that every generated equation typechecks at its sort"""
        for eq in gen_equivariance_equations(lambda_sig_ab):
            assert typecheck_equation(lambda_sig_ab, eq) == eq.sort


class TestImplications:
    """Test cases for translated implications"""

    def test_translate_app_left(self, lambda_theory):
        """Test translating every component by the same name"""
        imp = lambda_theory.implications[0]
        assert implication_freshness(imp) == {"X": EMPTY, "Y": EMPTY, "Z": EMPTY}
        result = translate_implication(lambda_theory.signature, imp, [name("a")])
        assert result.id == "appLeft-a"
        assert result.origin == "appLeft"
        assert [p.id for p in result.premises] == ["appLeft-p1-a"]
        assert str(result.premises[0]) == "app_{a}(X'a_{a}, Y'a_{a}) = app_{a}(Z'a_{a}, Y'a_{a}) : {a}"
        assert str(result.conclusion) == "X'a_{a} = Z'a_{a} : {a}"


class TestFrontend:
    """Test cases for the nominal judgment front-end"""

    def test_eta_elaboration(self, eta_theory):
        """Test that the nominal eta judgment elaborates to the uniform eta equation"""
        eq = frontend_nominal_judgment(eta_theory.signature, eta_theory.judgments[0])
        expected = eta_theory.equation("eta")
        assert (eq.lhs, eq.rhs, eq.sort) == (expected.lhs, expected.rhs, expected.sort)

    def test_constraint_extends_sort(self):
        """Test that a freshness constraint never in scope adds its name to the sort"""
        sig, j = judgment("judgment triv [X : {}] a # X |- X = X")
        eq = frontend_nominal_judgment(sig, j)
        assert str(eq) == "w_a X_{} = w_a X_{} : {a}"

    def test_binder_renamed_away_from_free_name(self):
        """Test that a binder clashing with a name in scope is renamed"""
        sig, j = judgment("judgment clash [X : {}] a # X |- app([a]app(X, a), a) = app([a]app(X, a), a)")
        eq = frontend_nominal_judgment(sig, j)
        assert eq.sort == name_set("a")
        assert "lam[b]_{a}(app_{a,b}(w_b w_a X_{}, var[b]_{a}))" in str(eq.lhs)

    def test_rename_needs_freshness(self):
        """Test that renaming a binder over X requires the binder to be fresh for X"""
        sig, j = judgment("judgment clash [X : {}] |- app([a]app(X, a), a) = app([a]app(X, a), a)")
        with pytest.raises(FrontendError):
            frontend_nominal_judgment(sig, j)

    def test_contradictory_context(self):
        """Test a # X with a in the sort of X"""
        sig, j = judgment("judgment bad [X : {a}] a # X |- X = X")
        with pytest.raises(FrontendError):
            frontend_nominal_judgment(sig, j)

    def test_undeclared_variable(self):
        """Test that constraints and occurrences need declared sorts"""
        sig, j = judgment("judgment bad [X : {}] a # Y |- X = X")
        with pytest.raises(FrontendError):
            frontend_nominal_judgment(sig, j)
        sig, j = judgment("judgment bad |- Y = Y")
        with pytest.raises(FrontendError):
            frontend_nominal_judgment(sig, j)

    def test_no_atoms_family(self, theories_dir):
        """Test that the front-end needs atoms and binder families"""
        sig = load_theory(theories_dir / "delta.theory").signature
        j = NominalJudgment("x", (("X", EMPTY),), (), NAbs(name("a"), NVar("X")), NAbs(name("a"), NVar("X")))
        with pytest.raises(FrontendError):
            frontend_nominal_judgment(sig, j)

    def test_unknown_operation(self, eta_theory):
        """Test that applications must name a plain family"""
        lhs = NApp("pair", (NAtom(name("a")), NAtom(name("a"))))
        j = NominalJudgment("x", (), (), lhs, lhs)
        with pytest.raises(FrontendError):
            frontend_nominal_judgment(eta_theory.signature, j)
        lhs = NApp("lam", (NAtom(name("a")),))
        with pytest.raises(FrontendError):
            frontend_nominal_judgment(eta_theory.signature, NominalJudgment("x", (), (), lhs, lhs))
