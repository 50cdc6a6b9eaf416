import itertools
import math

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

SQ2 = math.sqrt(2.0)


def rand_amp(gen, n):
    z = gen.standard_normal(n) + 1j * gen.standard_normal(n)
    return z / np.linalg.norm(z)


def digits(index, dims):
    """Big-endian digits of a flat index, written out by hand."""
    out = []
    for d in reversed(dims):
        out.append(index % d)
        index //= d
    return tuple(reversed(out))


def brute_rank_one(dims, pair, lam, omega):
    """Full matrix of |lam><omega| on ``pair`` (1-based), built entry by entry.

    ``lam`` and ``omega`` are flat amplitude arrays over (d_i, d_j). This
    avoids every helper in the package, so it serves as an oracle.
    """
    i, j = pair[0] - 1, pair[1] - 1
    dj = dims[j]
    total = math.prod(dims)
    mat = np.zeros((total, total), dtype=complex)
    for col in range(total):
        cin = digits(col, dims)
        w = np.conj(omega[cin[i] * dj + cin[j]])
        if w == 0:
            continue
        for row in range(total):
            cout = digits(row, dims)
            if all(cout[k] == cin[k] for k in range(len(dims)) if k not in (i, j)):
                mat[row, col] += lam[cout[i] * dj + cout[j]] * w
    return mat


@pytest.fixture
def gen():
    return np.random.default_rng(20240601)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
