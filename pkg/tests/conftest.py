import math

import numpy as np
import pytest

from peerpressure.dynamics import AgentProfile
from peerpressure.graph import build_graph, generate_erdos_renyi

_CRITERIA: dict[str, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def criterion():
    """Record one acceptance line: ``criterion(label, ok, detail)`` then assert."""

    def record(label: str, ok: bool, detail: str = ""):
        _CRITERIA[label] = (bool(ok), detail)
        assert ok, f"{label}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_CRITERIA, key=_criterion_key):
        ok, detail = _CRITERIA[label]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}")


def _criterion_key(label: str):
    head = label.split()[0].rstrip(".:")
    num = "".join(ch for ch in head if ch.isdigit())
    return (int(num) if num else 99, label)


@pytest.fixture
def two_node():
    g = build_graph(2, [(0, 1, 1.0)])
    p = AgentProfile([0.0, 1.0], [1.0, 1.0])
    return g, p


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def random_instance(rng, n=None, n_range=(5, 50)):
    """Connected G(n, p) with p just above the connectivity threshold, weights in (0, 2]."""
    if n is None:
        n = int(rng.integers(n_range[0], n_range[1] + 1))
    p_edge = min(1.0, 2.0 * math.log(n) / n)
    g = generate_erdos_renyi(n, p_edge, seed=int(rng.integers(2**32)))
    prof = AgentProfile(rng.uniform(0, 1, n), rng.uniform(0, 1, n))
    return g, prof
