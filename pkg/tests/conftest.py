import numpy as np
import pytest

from swapchar import qcore

ACCEPTANCE_LINES = []


def record_criterion(number, title, passed, detail=""):
    status = "PASS" if passed else "FAIL"
    ACCEPTANCE_LINES.append(f"[{status}] criterion {number:>2}: {title}" + (f" ({detail})" if detail else ""))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_pairs(n=100, seed=2024):
    gen = np.random.default_rng(seed)
    return [(qcore.random_pure_state(gen), qcore.random_pure_state(gen)) for _ in range(n)]


@pytest.fixture(scope="session")
def pure_pairs():
    return random_pairs()


def embed(n, gate, targets):
    """Brute-force full-register matrix of ``gate`` on ``targets`` (qubit 0 = MSB)."""
    k = len(targets)
    d = 2**n
    full = np.zeros((d, d), dtype=complex)
    for col in range(d):
        bits = [(col >> (n - 1 - q)) & 1 for q in range(n)]
        sub = 0
        for t in targets:
            sub = 2 * sub + bits[t]
        for row_sub in range(2**k):
            amp = gate[row_sub, sub]
            if amp == 0:
                continue
            nb = list(bits)
            for i, t in enumerate(targets):
                nb[t] = (row_sub >> (k - 1 - i)) & 1
            row = int("".join(map(str, nb)), 2)
            full[row, col] += amp
    return full
