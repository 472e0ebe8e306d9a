import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from workbench import fixtures  # noqa: E402


@pytest.fixture
def fig4_pair():
    return fixtures.fig4_pair()


@pytest.fixture
def pair2l():
    return fixtures.pair2l()


@pytest.fixture
def fig7_tree():
    return fixtures.FIG7_TREE
