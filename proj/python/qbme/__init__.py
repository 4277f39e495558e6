"""Bayesian mean estimation of quantum states: python bindings."""

from ._qbme import *  # noqa: F401,F403
from ._qbme import __version__  # noqa: F401
