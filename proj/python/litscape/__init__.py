"""Objective/method/dataset mining over scientific paper corpora."""

from ._litscape import *  # noqa: F401,F403
from ._litscape import __version__  # noqa: F401
