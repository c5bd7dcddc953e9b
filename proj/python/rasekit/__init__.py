"""Gaussian-model simulator and analysis toolkit for rephased-ASE experiments.

The heavy lifting lives in the compiled extension; this package re-exports it.
"""

from rasekit._core import *  # noqa: F401,F403
from rasekit._core import __version__  # noqa: F401
