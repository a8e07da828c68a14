"""Numerical laboratory for systems of stochastic fractional heat equations."""

from ._fracheat import *  # noqa: F401,F403
from ._fracheat import __doc__  # noqa: F401
