import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from affinelab.catalog import default_catalog
from affinelab.flows import IntegratorConfig


@pytest.fixture(scope="session")
def cat():
    return default_catalog()


@pytest.fixture
def cfg():
    return IntegratorConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
