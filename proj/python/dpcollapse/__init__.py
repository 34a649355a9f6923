"""Diosi-Penrose collapse-time physics and tabletop-experiment simulation."""

from ._dpcollapse import *  # noqa: F401,F403
from ._dpcollapse import __doc__  # noqa: F401

__version__ = "0.1.0"
