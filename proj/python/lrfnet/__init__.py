"""Time-series extrapolation with a stationary transform, stacked linear
regression features and a fine-tune regressor."""

from ._core import *  # noqa: F401,F403
from ._core import LrfnetError, Series, train, generalize  # noqa: F401
