"""Brute-force reference computations, written without the library's tensor code."""

from itertools import product

import numpy as np
import pytest


def points(n, m):
    return list(product(range(m), repeat=n))


def brute_marginal(probs, n, m, i):
    out = [0.0] * m
    for idx, x in enumerate(points(n, m)):
        out[x[i - 1]] += probs[idx]
    return out


def brute_prefix(probs, n, m, i):
    out = {}
    for idx, x in enumerate(points(n, m)):
        out[x[:i]] = out.get(x[:i], 0.0) + probs[idx]
    return [out[w] for w in points(i, m)]


def brute_conditional(probs, n, m, i, w):
    row = [0.0] * m
    for idx, x in enumerate(points(n, m)):
        if x[: i - 1] == tuple(w):
            row[x[i - 1]] += probs[idx]
    tot = sum(row)
    return [1.0 / m] * m if tot == 0 else [r / tot for r in row]


def brute_tv(p, q):
    return 0.5 * sum(abs(a - b) for a, b in zip(p, q))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# one line per acceptance criterion, echoed at the end of the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
