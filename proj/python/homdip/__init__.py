"""Two-photon coincidence dip simulation and sample-property inversion."""

from homdip._core import *  # noqa: F401,F403
from homdip._core import __version__  # noqa: F401
