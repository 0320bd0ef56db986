"""
Logging setup for the multiloop engine.

Reports own stdout, so every handler here writes to stderr or a file.
"""

import logging
import sys

from .config import get_settings

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


class StderrHandler(logging.StreamHandler):
    """Resolves sys.stderr on every emit, so a swapped or closed stream is never cached."""

    def __init__(self) -> None:
        logging.Handler.__init__(self)

    @property
    def stream(self):  # type: ignore[override]
        return sys.stderr


def setup_logging() -> None:
    """Install the stderr handler, plus a file handler when MULTILOOP_LOG_FILE is set."""
    settings = get_settings()
    level = getattr(logging, settings.log_level.upper(), logging.INFO)
    formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)

    handlers: list[logging.Handler] = [StderrHandler()]
    if settings.log_file:
        handlers.append(logging.FileHandler(settings.log_file, mode="a", encoding="utf-8"))
    for handler in handlers:
        handler.setFormatter(formatter)

    # force: repeated CLI runs in one process (tests) must not stack handlers
    logging.basicConfig(level=level, handlers=handlers, force=True)

    # sympy is chatty at DEBUG
    logging.getLogger("sympy").setLevel(logging.WARNING)


def get_logger(name: str) -> logging.Logger:
    """Module logger, named after the calling module."""
    return logging.getLogger(name)
