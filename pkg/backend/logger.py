import logging

from rich.console import Console
from rich.logging import RichHandler

from backend.config import get_settings

_CONFIGURED = False


def get_logger(name: str) -> logging.Logger:
    """
    Return a module logger writing through rich.

    The handler is attached once to the ``backend`` logger so that every
    module shares the level from ``ORBITS_LOG_LEVEL``.
    """
    global _CONFIGURED
    if not _CONFIGURED:
        root = logging.getLogger("backend")
        root.setLevel(get_settings().log_level.upper())
        root.addHandler(RichHandler(console=Console(stderr=True), show_path=False, markup=False,
                                    rich_tracebacks=True))
        root.propagate = False
        _CONFIGURED = True
    return logging.getLogger(name)
