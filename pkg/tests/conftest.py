"""Shared test configuration."""

import pytest

from atom_rates.domain import AtomSpec, Axis


@pytest.fixture
def isotropic_atom():
    return AtomSpec.isotropic(1.0)


@pytest.fixture
def x_atom():
    return AtomSpec.polarized(Axis.X, 1.0)


@pytest.fixture
def write_config(tmp_path):
    """Write a TOML run configuration and return its path."""

    def write(text: str, name: str = "run.toml"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return write
