"""Version information for the gridshift toolkit."""

__version__ = "0.4.0"
