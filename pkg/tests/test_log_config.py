import sys
from io import StringIO

import pytest
from loguru import logger

import csaforge.log_config as log_config
from csaforge.exceptions import ConfigurationError
from csaforge.log_config import configure_logging


@pytest.fixture(autouse=True)
def reset_logger():
    """Start every test without a csaforge handler and restore stderr afterwards."""
    log_config._state.clear()
    yield
    log_config._state.clear()
    logger.remove()
    logger.add(sys.stderr, level="INFO")


def _only_handler():
    handlers = list(logger._core.handlers.values())
    assert len(handlers) == 1
    return handlers[0]


def test_default_level_from_settings():
    configure_logging()
    assert _only_handler()._levelno == logger.level("INFO").no


def test_level_from_environment(monkeypatch):
    monkeypatch.setenv("CSA_FORGE_LOG_LEVEL", "warning")
    configure_logging()
    assert _only_handler()._levelno == logger.level("WARNING").no


def test_explicit_level_any_case():
    configure_logging(level="debug")
    assert _only_handler()._levelno == logger.level("DEBUG").no


def test_replaces_existing_handlers():
    logger.remove()
    logger.add(lambda _: None, level="ERROR")
    configure_logging(level="INFO")
    assert _only_handler()._levelno == logger.level("INFO").no


def test_same_arguments_keep_handler():
    sink = StringIO()
    first = configure_logging("INFO", sink)
    assert configure_logging("info", sink) == first


def test_new_level_replaces_handler():
    sink = StringIO()
    first = configure_logging("INFO", sink)
    second = configure_logging("DEBUG", sink)
    assert second != first
    assert _only_handler()._levelno == logger.level("DEBUG").no


def test_stream_gets_plain_text():
    sink = StringIO()
    configure_logging(level="WARNING", sink=sink)
    logger.info("hidden")
    logger.warning("bound exceeded")
    output = sink.getvalue()
    assert "bound exceeded" in output
    assert "hidden" not in output
    assert "\x1b[" not in output


def test_unknown_level():
    with pytest.raises(ConfigurationError, match="LOUD"):
        configure_logging(level="loud")
