import sys

import numpy as np
import pytest

from errtradeoff.qcore import haar_random_state, haar_unitary, make_state, random_hermitian
from errtradeoff.scheme import build_scheme


def random_triple(dim: int, seed: int):
    """(A, B, pure state) drawn deterministically from one seed."""
    return random_hermitian(dim, 3 * seed + 1), random_hermitian(dim, 3 * seed + 2), haar_random_state(dim, 3 * seed + 3)


def random_mixed_state(dim: int, rng: np.random.Generator, rank: int | None = None):
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return make_state(rho / np.trace(rho).real)


def random_scheme(dim: int, rng: np.random.Generator, anc_dim: int = 1):
    """Commuting estimators sharing a random eigenbasis on system (x) ancilla."""
    n = dim * anc_dim
    u = haar_unitary(n, rng)
    a = (u * rng.normal(size=n)) @ u.conj().T
    b = (u * rng.normal(size=n)) @ u.conj().T
    anc = None
    if anc_dim > 1:
        v = rng.standard_normal(anc_dim) + 1j * rng.standard_normal(anc_dim)
        anc = make_state(v / np.linalg.norm(v))
    return build_scheme((a + a.conj().T) / 2, (b + b.conj().T) / 2, anc)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for num in sorted(results):
            terminalreporter.write_line(results[num])
