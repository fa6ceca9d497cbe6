# csaforge/log_config.py
"""Loguru setup shared by the command line and library users.

One handler is installed at a time. Calling :func:`configure_logging` again
with the same level and sink does nothing; a different level or sink
replaces the handler.
"""

import sys
from typing import Any

from loguru import logger

from .config import get_settings
from .exceptions import ConfigurationError

LOG_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>"
)

_state: dict[str, Any] = {}


def configure_logging(level: str | None = None, sink: Any = sys.stderr) -> int:
    """Install the csaforge handler.

    Args:
        level: Minimum level name, any case; defaults to the ``log_level`` setting.
        sink: Stream, path or callable accepted by loguru.

    Returns:
        int: The loguru handler id.

    Raises:
        ConfigurationError: ``level`` is not a loguru level name.
    """
    name = (level or get_settings().log_level).upper()
    try:
        logger.level(name)
    except ValueError as exc:
        raise ConfigurationError(f"unknown log level {name!r}") from exc
    if _state.get("key") == (name, id(sink)):
        return _state["handler"]
    logger.remove()
    handler = logger.add(
        sink,
        level=name,
        format=LOG_FORMAT,
        colorize=sink is sys.stderr,
        backtrace=True,
        diagnose=True,
    )
    _state.update(key=(name, id(sink)), handler=handler)
    logger.debug(f"logging at {name} to {getattr(sink, 'name', sink)}")
    return handler
