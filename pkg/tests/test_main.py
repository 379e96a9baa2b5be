"""Integration tests for main.py"""

import json
import re

import pytest

from config import Config
from main import EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, build_parser, find_equation, main, parse_names, UsageError
from names import format_name_set, name_set
from theory_parser import load_theory, parse_theory, signature_lines
from translation import gen_equivariance_equations, translate_family

pytestmark = pytest.mark.integration


@pytest.fixture(autouse=True)
def isolated_config(config_dir, mocker):
    """Keep the CLI away from the real ~/.nominal_ua"""
    mocker.patch.object(Config, 'CONFIG_DIR', config_dir)


@pytest.fixture
def run(temp_dir):
    """Run the CLI with the log file inside the temporary directory"""
    def _run(*argv):
        return main(["--log-file", str(temp_dir / "nominal_ua.log"), *[str(a) for a in argv]])
    return _run


@pytest.fixture
def depth2_model(run, temp_dir, capsys):
    """Plain depth-2 lambda model over {a,b}, written by lambda-demo"""
    path = temp_dir / "lambda.json"
    assert run("lambda-demo", "--universe", 2, "--depth", 2, "--write-model", path) == EXIT_OK
    capsys.readouterr()
    return path


def reparse(theory, universe, output):
    """Parse printed equations under the signature they were printed from"""
    header = [f"universe {format_name_set(universe)}", *signature_lines(theory.signature_at(universe))]
    return {eq.id: eq for eq in parse_theory("\n".join(header) + "\n" + output).equations}


class TestArguments:
    """Test cases for argument handling"""

    def test_no_command(self, capsys):
        """Test that running without a subcommand is a usage error"""
        assert main([]) == EXIT_USAGE
        assert "usage:" in capsys.readouterr().err

    def test_missing_argument(self):
        """Test that argparse errors map to the usage exit code"""
        assert main(["translate"]) == EXIT_USAGE

    def test_parse_names(self):
        """Test both spellings of a name list"""
        assert parse_names("b,c") == name_set("b", "c")
        assert parse_names("{b}") == name_set("b")
        with pytest.raises(UsageError):
            parse_names("B")

    def test_parser_defaults(self):
        """Test the global options"""
        args = build_parser().parse_args(["gen-eop", "x.theory"])
        assert args.console_level == "WARNING"
        assert args.universe is None
        assert args.format is None

    def test_log_file_written(self, run, theories_dir, temp_dir):
        """Test that the log file receives tagged records with their module"""
        run("check-signature", theories_dir / "eta.theory")
        text = (temp_dir / "nominal_ua.log").read_text()
        assert "[SESSION]  Log file" in text
        assert re.search(r"^\S+ \S+ INFO +theory +\[SIGNATURE\]  ", text, re.MULTILINE)

    def test_console_format(self, run, theories_dir, capsys):
        """Test that stderr lines name the program and level"""
        run("--console-level", "INFO", "check-signature", theories_dir / "eta.theory")
        assert "nominal_ua INFO: [SIGNATURE]" in capsys.readouterr().err


class TestCheckSignature:
    """Test cases for check-signature"""

    def test_uniform(self, run, theories_dir, capsys):
        """Test a uniform signature"""
        assert run("check-signature", theories_dir / "lambda.theory") == EXIT_OK
        assert capsys.readouterr().out.strip() == "signature: OK"

    def test_non_uniform(self, run, theories_dir, capsys):
        """Test that the non-uniform example is rejected with its issue kind"""
        assert run("check-signature", theories_dir / "non_uniform.theory") == EXIT_VALIDATION
        assert "arity-transport" in capsys.readouterr().out

    def test_structured(self, run, theories_dir, capsys):
        """Test the JSON report"""
        assert run("check-signature", theories_dir / "non_uniform.theory", "--format", "structured") == \
            EXIT_VALIDATION
        data = json.loads(capsys.readouterr().out)
        assert data["universe"] == "{a,b}"
        assert data["ok"] is False

    def test_parse_error(self, run, temp_dir, capsys):
        """Test that a malformed theory is a usage error"""
        path = temp_dir / "bad.theory"
        path.write_text("universe {a}\nfamily app : S S -> S\n")
        assert run("check-signature", path) == EXIT_USAGE
        assert "error:" in capsys.readouterr().err

    def test_missing_file(self, run, temp_dir):
        """Test that a missing theory file is a usage error"""
        assert run("check-signature", temp_dir / "absent.theory") == EXIT_USAGE


class TestTranslate:
    """Test cases for translate"""

    def test_by_names(self, run, theories_dir, capsys):
        """Test translating eta by b"""
        assert run("translate", theories_dir / "eta.theory", "--eq", "eta", "--names", "b") == EXIT_OK
        assert capsys.readouterr().out.strip() == \
            "eq eta-b : lam[a]_{b}(app_{a,b}(w_a X'b_{b}, var[a]_{b})) = X'b_{b} : {b}"

    def test_family_structured(self, run, theories_dir, capsys):
        """Test that every admissible name set is translated"""
        assert run("translate", theories_dir / "eta.theory", "--eq", "etaNominal", "--format", "structured") == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["source"] == "etaNominal"
        assert len(data["equations"]) == 8
        assert data["equations"][-1]["id"] == "etaNominal-a-b-c"

    def test_implication(self, run, theories_dir, capsys):
        """Test that implications print premises as comments"""
        assert run("translate", theories_dir / "lambda.theory", "--eq", "appLeft", "--names", "a") == EXIT_OK
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "// appLeft-a"
        assert lines[1].startswith("// if eq appLeft-p1-a : app_{a}(")
        assert lines[2] == "eq appLeft-a : X'a_{a} = Z'a_{a} : {a}"

    def test_unknown_equation(self, run, theories_dir):
        """Test that an unknown id is a usage error"""
        assert run("translate", theories_dir / "eta.theory", "--eq", "beta") == EXIT_USAGE

    def test_name_outside_universe(self, run, theories_dir, capsys):
        """Test that translating out of the universe is a validation failure"""
        assert run("translate", theories_dir / "eta.theory", "--eq", "eta", "--names", "z") == EXIT_VALIDATION
        assert "validation failed" in capsys.readouterr().err

    def test_family_output_parses(self, run, theories_dir, capsys):
        """Test that printed translations read back as the same equations"""
        theory = load_theory(theories_dir / "eta.theory")
        for eq_id in ("eta", "etaNominal"):
            assert run("translate", theories_dir / "eta.theory", "--eq", eq_id) == EXIT_OK
            parsed = reparse(theory, theory.universe, capsys.readouterr().out)
            expected = translate_family(theory.signature, find_equation(theory, theory.signature, eq_id))
            assert list(parsed) == [eq.id for eq in expected]
            for eq in expected:
                assert (parsed[eq.id].lhs, parsed[eq.id].rhs, parsed[eq.id].sort) == (eq.lhs, eq.rhs, eq.sort)


class TestGenEop:
    """Test cases for gen-eop"""

    def test_lambda_two_names(self, run, theories_dir, capsys):
        """Test E_Op of the lambda signature inside {a,b}"""
        assert run("gen-eop", theories_dir / "lambda.theory", "--universe", 2) == EXIT_OK
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 14
        assert lines[0] == "eq eop-1 : app_{a}(w_a X1_{}, w_a X2_{}) = w_a app_{}(X1_{}, X2_{}) : {a}  // w_a . app_{}"

    def test_universe_too_large(self, run, theories_dir):
        """Test the max_universe_size bound"""
        assert run("gen-eop", theories_dir / "lambda.theory", "--universe", 7) == EXIT_USAGE

    def test_explicit_symbols_cannot_grow(self, run, theories_dir):
        """Test that explicit signatures are not extended"""
        assert run("gen-eop", theories_dir / "non_uniform.theory", "--universe", 3) == EXIT_VALIDATION

    def test_output_parses(self, run, theories_dir, capsys):
        """Test that printed E_Op reads back as the generated equations"""
        theory = load_theory(theories_dir / "lambda.theory")
        universe = name_set("a", "b")
        assert run("gen-eop", theories_dir / "lambda.theory", "--universe", 2) == EXIT_OK
        parsed = reparse(theory, universe, capsys.readouterr().out)
        expected = gen_equivariance_equations(theory.signature_at(universe))
        assert list(parsed) == [eq.id for eq in expected]
        for eq in expected:
            assert (parsed[eq.id].lhs, parsed[eq.id].rhs, parsed[eq.id].sort) == (eq.lhs, eq.rhs, eq.sort)


class TestLambdaDemo:
    """Test cases for lambda-demo"""

    def test_text_report(self, run, capsys):
        """Test the default text report"""
        assert run("lambda-demo", "--universe", 2, "--depth", 2) == EXIT_OK
        out = capsys.readouterr().out
        assert out.startswith("lambda demo: universe {a,b}, depth 2")
        assert "presheaf validation: plain=OK eta=OK" in out

    def test_structured_report(self, run, capsys):
        """Test the JSON report"""
        assert run("lambda-demo", "--universe", 1, "--depth", 3, "--format", "structured") == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert [row["classes"] for row in data["counts"]] == [5, 26]
        assert all(row["quotient"] for row in data["eta"])

    def test_depth_from_config(self, run, config_dir, capsys):
        """Test that the config supplies defaults"""
        (config_dir / "config.json").write_text(json.dumps({"universe_size": 1, "lambda_depth": 2}))
        assert run("lambda-demo") == EXIT_OK
        assert "universe {a}, depth 2" in capsys.readouterr().out


class TestModels:
    """Test cases for check-model and abstract-model"""

    def test_check_model_ok(self, run, depth2_model, theories_dir, capsys):
        """Test that the depth-2 model satisfies the eta theory"""
        assert run("check-model", theories_dir / "eta.theory", depth2_model) == EXIT_OK
        out = capsys.readouterr().out
        assert out.startswith("model lambda (universe {a,b})")
        assert out.strip().endswith("result: OK")

    def test_check_model_with_implication(self, run, depth2_model, theories_dir):
        """Test checking translated implications"""
        assert run("check-model", theories_dir / "lambda.theory", depth2_model, "--no-threads") == EXIT_OK

    def test_check_model_fails(self, run, temp_dir, theories_dir, capsys):
        """Test that the plain depth-3 model violates the eta theory"""
        path = temp_dir / "plain.json"
        run("lambda-demo", "--universe", 2, "--depth", 3, "--write-model", path)
        capsys.readouterr()
        assert run("check-model", theories_dir / "eta.theory", path) == EXIT_VALIDATION
        assert "result: FAIL" in capsys.readouterr().out

    def test_check_model_quotient(self, run, temp_dir, theories_dir, capsys):
        """Test that the eta-quotient satisfies the eta theory"""
        path = temp_dir / "quotient.json"
        run("lambda-demo", "--universe", 2, "--depth", 3, "--write-model", path, "--eta")
        capsys.readouterr()
        assert run("check-model", theories_dir / "eta.theory", path) == EXIT_OK

    def test_signature_mismatch(self, run, depth2_model, theories_dir, capsys):
        """Test a model over another signature"""
        assert run("check-model", theories_dir / "non_uniform.theory", depth2_model) == EXIT_VALIDATION
        assert "signature differs" in capsys.readouterr().out

    def test_universe_mismatch(self, run, depth2_model, theories_dir):
        """Test that --universe must match the model"""
        assert run("check-model", theories_dir / "eta.theory", depth2_model, "--universe", 3) == EXIT_USAGE

    def test_abstract_model(self, run, depth2_model, theories_dir, temp_dir, capsys):
        """Test writing delta A and comparing it with the translations"""
        output = temp_dir / "delta.json"
        assert run("abstract-model", depth2_model, "-o", output, "--theory", theories_dir / "eta.theory") == EXIT_OK
        out = capsys.readouterr().out
        assert out.startswith("delta(lambda): universe {a}")
        assert "eta: delta A holds, A |= tr_b holds -> agree" in out
        assert output.exists()

        assert run("check-model", theories_dir / "eta.theory", output) == EXIT_OK
