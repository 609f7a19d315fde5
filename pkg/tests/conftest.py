import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from linecong.congruence import Domain, LineCongruence

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

SMALL = Domain(-0.5, 0.5, -0.5, 0.5)

EXAMPLES = {
    "fold": ("2+u", "0", "0", "1"),
    "cusp": ("2+v", "u", "u", "1"),
    "swal": ("2+v", "u", "u^2", "1"),
    "disc": ("1+v", "u", "1", "1+3*v"),
    "flat": ("1+v", "u+4.5*v^2", "1", "1+3*v"),
    # integrable stand-in for the regular discriminant point (see the literal jets test)
    "reg": ("1+v", "u+v", "1", "1"),
}


def example(name: str, domain: Domain = SMALL) -> LineCongruence:
    return LineCongruence.from_shape(*EXAMPLES[name], domain=domain, name=name)


def darboux(m: float, s: float = 1.0, domain: Domain | None = None) -> LineCongruence:
    return LineCongruence.from_shape("v+1", "u-s", "u+s", "(m+1)*v+1", params={"m": m, "s": s},
                                     domain=domain or Domain(-1.5, 1.5, -10, 10), name="darboux")


# acceptance lines, keyed by criterion, printed after the run
RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS, key=str):
        terminalreporter.write_line(RESULTS[key])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
