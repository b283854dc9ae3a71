"""Discrete PMF estimation by partially coupled factorization of 3-way marginals."""

from ._pctf3d import *  # noqa: F401,F403
from ._pctf3d import __version__  # noqa: F401
