"""
conftest.py - shared fixtures for the symmetry test suite.

All factory helpers are defined as plain underscore-prefixed functions so
they can also be imported directly when needed. Each is then exposed as a
pytest fixture that returns the callable, allowing tests to call them with
arbitrary arguments via normal function-call syntax.
"""

from unittest.mock import MagicMock

import pytest
import sympy

from plasticity_symmetry.config import Settings
from plasticity_symmetry.engine import symexpr
from plasticity_symmetry.engine.vfield import field_is_zero, generator_from_text, instantiate
from plasticity_symmetry.schemas import CheckRecord, Report

# --- raw utility functions (still importable directly if needed) ---

def _settings(**overrides) -> Settings:
    """
    Settings with a small sample count so that suites stay quick.

    Tolerances and the seed keep their defaults unless overridden.
    """
    return Settings(**{"trials": 8, "residual_points": 20, **overrides})


def _field(text: str, potential=None):
    """Vector field of a generator written the way the command line takes it."""
    return instantiate(generator_from_text(text, potential=potential))


def _vanishes(vf, **kwargs) -> bool:
    """
    True when every coefficient of `vf` zero-tests, with rho bound to 1.

    Extra keyword arguments go to the zero test (trials, tol, seed).
    """
    params = {"rho": 1.0, **kwargs.pop("params", {})}
    return field_is_zero(vf, params=params, **{"trials": 12, **kwargs}).is_zero


def _zero(expr, **kwargs) -> bool:
    return symexpr.is_zero(sympy.sympify(expr), **{"trials": 12, **kwargs}).is_zero


def _report(passed=True, checks=None, command="check-table") -> Report:
    """
    Build a Report as the service layer would, for tests that mock it out.

    `checks` defaults to a single record whose status matches `passed`.
    """
    checks = checks if checks is not None else [CheckRecord(name="stub", passed=passed)]
    return Report(command=command, settings=_settings().model_dump(mode="json"), seed=0,
                  checks=checks, passed=passed)


def _mock_grid(rows=((1.0, 0.0, 0.5, 2.0), (0.0, 1.0, -2.0, 0.5))):
    """
    A MagicMock standing in for a FlowFieldGrid with two rows.
    """
    grid = MagicMock()
    grid.family = "R17/derived"
    grid.t = 0.1
    grid.params = {"a1": 1.0, "a2": 1.0}
    grid.rows = tuple(rows)
    return grid


# --- fixture wrappers (used by tests) ---

@pytest.fixture
def settings():
    return _settings


@pytest.fixture
def field():
    return _field


@pytest.fixture
def vanishes():
    return _vanishes


@pytest.fixture
def zero():
    return _zero


@pytest.fixture
def report():
    return _report


@pytest.fixture
def mock_grid():
    return _mock_grid
