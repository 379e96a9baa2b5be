"""Pytest configuration and shared fixtures"""

import pytest
import tempfile
import shutil
import logging
import sys
from pathlib import Path

from names import name_set
from nominal import Atom
from presheaf import nominal_to_presheaf
from lambda_demo import build_lambda_model, lambda_signature
from theory_parser import load_theory

THEORIES = Path(__file__).resolve().parent.parent / "theories"


@pytest.fixture(scope="function", autouse=True)
def reset_logging():
    """Send every record to stdout and caplog at DEBUG; drop handlers left by setup_logging"""
    root = logging.getLogger()
    for handler in root.handlers[:]:
        root.removeHandler(handler)
    stdout = logging.StreamHandler(sys.stdout)
    stdout.setFormatter(logging.Formatter('%(message)s'))
    root.addHandler(stdout)
    root.setLevel(logging.DEBUG)

    # Module loggers inherit the root level
    for logger_name in list(logging.root.manager.loggerDict):
        module_logger = logging.getLogger(logger_name)
        module_logger.setLevel(logging.NOTSET)
        module_logger.handlers = []
        module_logger.propagate = True

    yield

    # setup_logging opens a log file under temp_dir
    for handler in root.handlers[:]:
        handler.close()
        root.removeHandler(handler)


@pytest.fixture
def temp_dir():
    """Create a temporary directory for tests"""
    temp_path = tempfile.mkdtemp()
    yield Path(temp_path)
    shutil.rmtree(temp_path)


@pytest.fixture
def config_dir(temp_dir):
    """Create a temporary config directory"""
    config_path = temp_dir / ".nominal_ua"
    config_path.mkdir(parents=True, exist_ok=True)
    return config_path


@pytest.fixture
def universe_ab():
    return name_set("a", "b")


@pytest.fixture
def universe_abc():
    return name_set("a", "b", "c")


@pytest.fixture
def universe_abcd():
    return name_set("a", "b", "c", "d")


@pytest.fixture
def atoms_presheaf(universe_abcd):
    """The names presheaf S |-> S over {a,b,c,d}"""
    return nominal_to_presheaf([Atom(n) for n in universe_abcd], universe_abcd, "atoms")


@pytest.fixture
def theories_dir():
    """Directory holding the worked theory files"""
    return THEORIES


@pytest.fixture
def eta_theory():
    return load_theory(THEORIES / "eta.theory")


@pytest.fixture
def lambda_theory():
    return load_theory(THEORIES / "lambda.theory")


@pytest.fixture
def lambda_sig_ab(universe_ab):
    return lambda_signature(universe_ab)


@pytest.fixture(scope="session")
def small_lambda():
    """Depth-2 lambda model over {a,b}: 1 + 4 + 4 + 9 elements"""
    return build_lambda_model(name_set("a", "b"), 2)


@pytest.fixture(scope="session")
def lambda_ab3():
    """Depth-3 lambda model over {a,b}"""
    return build_lambda_model(name_set("a", "b"), 3)


@pytest.fixture(scope="session")
def lambda_eta_ab3():
    """Depth-3 eta-quotient over {a,b}"""
    return build_lambda_model(name_set("a", "b"), 3, eta=True)
