"""Passive meta-material sensor co-design toolkit.

Thin python layer over the C++ core: circuit and channel simulation,
discernibility objectives, surrogate structure optimization, dataset
synthesis, and sensing-function training.
"""

from ._metaiot import *  # noqa: F401,F403
from ._metaiot import __version__  # noqa: F401
