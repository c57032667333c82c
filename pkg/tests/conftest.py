import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from medecomp import dependent_mediators_dag, independent_mediators_dag


@pytest.fixture(scope="session")
def independent_dag():
    """Two covariates, two causally independent mediators."""
    return independent_mediators_dag()


@pytest.fixture(scope="session")
def dependent_dag():
    """Two covariates, three mediators with full upstream->downstream edges."""
    return dependent_mediators_dag()
