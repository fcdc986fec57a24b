"""Shared fixtures; session scope so expensive solves are computed once."""

from __future__ import annotations

import pytest

import indefbvp as ib


@pytest.fixture(scope="session")
def g3():
    return ib.make_power(3)


@pytest.fixture(scope="session")
def g15():
    return ib.make_power(1.5)


@pytest.fixture(scope="session")
def h_sin3():
    return ib.weight_from_descriptor("sin:3")


@pytest.fixture(scope="session")
def h_sin4():
    return ib.weight_from_descriptor("sin:4")


@pytest.fixture(scope="session")
def h_sin5():
    return ib.weight_from_descriptor("sin:5")


@pytest.fixture(scope="session")
def h_h3sols():
    return ib.weight_from_descriptor("h3sols")


@pytest.fixture(scope="session")
def h_mne():
    return ib.weight_from_descriptor("moore-nehari")


@pytest.fixture(scope="session")
def sin3_sols_mu8(h_sin3, g3):
    return ib.find_all_solutions(h_sin3, g3, 8.0)


@pytest.fixture(scope="session")
def sin3_profiles(h_sin3, g3):
    return ib.enumerate_profiles(h_sin3, g3)


@pytest.fixture(scope="session")
def mne_sols(h_mne, g3):
    return ib.find_all_solutions(h_mne, g3, 0.0)
