import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cubeconc.dist import make_random_dense  # noqa: E402


@pytest.fixture
def random_dense():
    """Factory for seeded random dense laws."""
    return make_random_dense
