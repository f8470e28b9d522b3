import sys
import os
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

import pytest
from backend.api import app
from backend.connection import SAMPLE_METRICS, levi_civita
from backend.fields import Chart


@pytest.fixture
def client():
    """Flask test client fixture."""
    app.config['TESTING'] = True
    with app.test_client() as client:
        yield client


@pytest.fixture
def base2():
    return Chart.base_chart(2)


@pytest.fixture
def base3():
    return Chart.base_chart(3)


@pytest.fixture
def cot1():
    return Chart.cotangent_of(Chart.base_chart(1))


@pytest.fixture
def cot2():
    return Chart.cotangent_of(Chart.base_chart(2))


@pytest.fixture
def shear():
    """Levi-Civita connection of the polynomial shear metric on R^2."""
    return levi_civita(SAMPLE_METRICS["shear"]())


@pytest.fixture
def flat2():
    return levi_civita(SAMPLE_METRICS["euclidean2"]())
