"""Shared pytest fixtures."""

import pathlib

import pytest

import helpers

DATA = pathlib.Path(__file__).parent / "data"


@pytest.fixture
def data_dir() -> pathlib.Path:
    return DATA


@pytest.fixture
def cycle_aut():
    return helpers.cycle_automaton()


@pytest.fixture
def nine_tree():
    return helpers.nine_node_tree()


@pytest.fixture
def pair_aut():
    return helpers.path_pair_automaton()


@pytest.fixture
def seven_tree():
    return helpers.seven_node_tree()
