from pathlib import Path

import pytest

from acast_mc.formula import desugar_formula, parse_formula
from acast_mc.semantics import expand
from acast_mc.specdsl import desugar, parse_spec

FIXTURES = Path(__file__).parent / "fixtures"


def load(text):
    return desugar(parse_spec(text))


def core(text):
    return desugar_formula(parse_formula(text))


def tiny_source():
    return (FIXTURES / "tiny.mdl").read_text()


def tiny_prime_source():
    return (FIXTURES / "tiny_prime.mdl").read_text()


@pytest.fixture
def tiny_model():
    return load(tiny_source())


@pytest.fixture
def tiny(tiny_model):
    return expand(tiny_model)


@pytest.fixture
def tiny_prime():
    return expand(load(tiny_prime_source()))


# -- acceptance reporting -------------------------------------------------------------

ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, title, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}  ({detail})")
