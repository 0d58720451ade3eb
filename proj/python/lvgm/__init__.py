"""Latent-variable exponential-family graphical models.

Thin wrapper over the compiled extension; everything public lives in
:mod:`lvgm._lvgm`.
"""

from ._lvgm import *  # noqa: F401,F403
from ._lvgm import __doc__ as _core_doc  # noqa: F401

__version__ = "0.1.0"
