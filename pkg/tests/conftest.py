import itertools

import numpy as np
import pytest

from ecf_toolkit import kernels


def subsets(mask):
    """All submasks of mask, brute force."""
    bits = [b for b in range(mask.bit_length()) if mask >> b & 1]
    for r in range(len(bits) + 1):
        for combo in itertools.combinations(bits, r):
            yield sum(1 << b for b in combo)


def tau_oracle(theta, m):
    """tau_L straight from the inclusion-exclusion formula, with math.fsum."""
    import math

    full = (1 << m) - 1
    out = np.zeros(1 << m)
    for L in range(1, 1 << m):
        terms = [(-1) ** (bin(i).count("1") + 1) * theta[(full ^ L) | i] for i in subsets(L)]
        out[L] = math.fsum(terms)
    return out


@pytest.fixture(params=sorted(kernels.available()))
def backend(request):
    return kernels.available()[request.param]


@pytest.fixture
def rs():
    return np.random.default_rng(12345)


ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture
def criterion():
    """record(number, title, passed, detail): one summary line per acceptance criterion."""

    def record(number, title, passed, detail):
        ACCEPTANCE[number] = (title, bool(passed), detail)
        print(f"AC{number:>2} {'PASS' if passed else 'FAIL'}  {title}: {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"AC{number:>2} {'PASS' if passed else 'FAIL'}  {title}: {detail}")
