"""Logging setup for the command-line entry point."""
import logging
import sys

LOG_FORMAT = "[%(name)s] %(message)s"


def configure_logging(level: str = "WARNING") -> None:
    """Route component loggers to stderr with bracketed tags.

    Args:
        level: Logging level name (DEBUG, INFO, WARNING, ...)
    """
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.setLevel(getattr(logging, level.upper(), logging.WARNING))

    # numpy/scipy emit floating-point RuntimeWarnings through warnings, not logging
    logging.captureWarnings(True)
