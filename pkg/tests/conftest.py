import pytest

from intersafe.params import AnalysisParams
from intersafe.synth import default_intersection


@pytest.fixture(scope="session")
def cfg():
    return default_intersection()


@pytest.fixture(scope="session")
def params():
    return AnalysisParams()
