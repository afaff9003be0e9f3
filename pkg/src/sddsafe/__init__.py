"""Statistical-distance dissimilarity (SDD) tools for time-series forecasters.

StaDRe scores the reliability of a single data instance from its cluster
neighbours' errors and its distance to the cluster centre. StaDRo decides
whether a forecaster stays above a required performance level given how far
an instance has drifted from the training data.
"""

__version__ = "0.1.0"

from .errors import SddError  # noqa: E402,F401
