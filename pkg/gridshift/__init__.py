"""GridShift mode-seeking clustering toolkit."""

from gridshift.__version__ import __version__

__all__ = ["__version__"]
