import sys

import pytest

sys.setrecursionlimit(20000)


def memo_e1(a, h, n, q, memo):
    if (a, h, n) in memo:
        return memo[(a, h, n)]
    if n == 0:
        return 0
    if a > h:
        return a
    memo[(a, h, n)] = max(0, q * memo_e1(a + 1, h, n - 1, q, memo) + (1 - q) * memo_e1(a, h + 1, n - 1, q, memo) - q)
    return memo[(a, h, n)]


def _memo_e23(crush):
    def e(a, h, n, q, memo):
        if (a, h, n) in memo:
            return memo[(a, h, n)]
        if n == 0:
            memo[(a, h, n)] = 0
            return 0
        toss = q * e(a + 1, h, n - 1, q, memo) + (1 - q) * (e(a, h + 1, n - 1, q, memo) - q)
        if a > h:
            memo[(a, h, n)] = max(crush(h, q) + e(a - h - 1, 0, n - 1, q, memo), toss)
        else:
            memo[(a, h, n)] = max(e(0, 0, n - 1, q, memo), toss)
        return memo[(a, h, n)]

    return e


# straight ports of the published memoised recursions, used as float oracles
memo_e2 = _memo_e23(lambda h, q: (h + 1) - q)
memo_e3 = _memo_e23(lambda h, q: (1 - q) * (h + 1))
MEMO = {1: memo_e1, 2: memo_e2, 3: memo_e3}


@pytest.fixture(scope="session")
def memo_value():
    def run(variant, a, h, n, q, memo=None):
        return float(MEMO[int(variant)](a, h, n, q, {} if memo is None else memo))

    return run


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
