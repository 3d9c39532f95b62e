"""Dueling bandits with delayed preference feedback (C++ core)."""

from ._duelay import *  # noqa: F401,F403

__version__ = "0.1.0"
