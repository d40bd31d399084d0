import math
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rydberg_precession import EllipticSpec, build_packet  # noqa: E402

SQRT_HALF = 1 / math.sqrt(2)


@pytest.fixture(scope="session")
def showcase():
    """The n=50, eccentricity 0.4, Z=92 packet with an x-polarized spin."""
    return build_packet(EllipticSpec(50, 0.4, 92, SQRT_HALF, SQRT_HALF))
