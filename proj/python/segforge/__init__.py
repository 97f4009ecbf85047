"""Content segmentation pipeline for educational maze games."""

from ._segforge import *  # noqa: F401,F403
from ._segforge import __doc__  # noqa: F401

__version__ = "0.1.0"
