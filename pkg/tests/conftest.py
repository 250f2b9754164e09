"""Shared fixtures and independent oracles for the test suite."""

import numpy as np
import pytest

from minpert import AnchoredProblem, builtin

ACCEPTANCE_LINES: list[str] = []


def fd_jacobian(fun, z, h=1e-6):
    """Central-difference Jacobian of ``fun`` at ``z``; error O(h^2)."""
    z = np.asarray(z, dtype=float)
    f0 = np.asarray(fun(z))
    jac = np.empty((f0.size, z.size))
    for j in range(z.size):
        e = np.zeros_like(z)
        e[j] = h
        jac[:, j] = (np.asarray(fun(z + e)) - np.asarray(fun(z - e))) / (2 * h)
    return jac


def least_norm_oracle(k, b):
    """Minimum-norm solution of ``k z = b`` through the pseudoinverse (SVD)."""
    return np.linalg.pinv(k) @ b


def dual_oracle(k, s):
    """``sqrt(s^T (k k^T)^{-1} s)``, the 2-norm dual value in normal-equation form."""
    return float(np.sqrt(s @ np.linalg.solve(k @ k.T, s)))


def circle_mu_f(x):
    return abs(np.sqrt(x) - 1.0)


def circle_mu_linear(x):
    # K = [2, 0] at y0 = (1, 0), residual 1 - x
    return abs(1.0 - x) / 2.0


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture(scope="session")
def circle():
    return AnchoredProblem(*builtin("circle"))


@pytest.fixture(scope="session")
def linear2x3():
    return AnchoredProblem(*builtin("linear2x3"))


@pytest.fixture(scope="session")
def parabola():
    return AnchoredProblem(*builtin("parabola-underdet"))


@pytest.fixture(scope="session")
def sphere():
    return AnchoredProblem(*builtin("sphere"))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
