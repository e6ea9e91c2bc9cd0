import sys
from pathlib import Path

import pytest

from semvox import _kernels

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture(params=_kernels.BACKENDS)
def backend(request):
    """Run a test under each available kernel backend."""
    with _kernels.use(request.param):
        yield request.param
