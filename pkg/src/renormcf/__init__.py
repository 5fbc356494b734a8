"""Validated continued-fraction renormalization toolkit."""

from importlib.metadata import PackageNotFoundError, version

from .cf import *  # noqa: F401,F403
from .criterion import *  # noqa: F401,F403
from .errors import *  # noqa: F401,F403
from .numerics import *  # noqa: F401,F403
from .numspec import *  # noqa: F401,F403
from .renorm import *  # noqa: F401,F403

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # pragma: no cover - source checkout without install
    __version__ = "0.0.0"
