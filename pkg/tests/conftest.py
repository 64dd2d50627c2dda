import numpy as np
import pytest

from cohtest.decompose import BandParams, BandRep, Signal, decompose

FS = 250.0
DURATION = 367.0


@pytest.fixture(scope="session")
def white_signal():
    g = np.random.default_rng(1234)
    return Signal(g.standard_normal(int(FS * DURATION)), FS)


@pytest.fixture(scope="session")
def white_rep(white_signal):
    return decompose(white_signal, BandParams())


def complex_normal(g, *shape):
    return (g.standard_normal(shape) + 1j * g.standard_normal(shape)) / np.sqrt(2)


def make_rep(coeffs, spacing=0.05):
    coeffs = np.asarray(coeffs, dtype=complex)
    if coeffs.ndim == 1:
        coeffs = coeffs[:, None]
    return BandRep(coeffs, 0.1 + spacing * np.arange(coeffs.shape[1]), 2.5)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
