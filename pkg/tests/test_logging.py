import logging
from datetime import datetime

from utilities.logging import log_path, setup_logging


def test_log_file_lives_under_the_configured_directory(tmp_path, monkeypatch):
    monkeypatch.setenv("STLTS_LOG_DIR", str(tmp_path / "runs"))
    path = log_path(datetime(2024, 3, 5))
    assert path == tmp_path / "runs" / "stlts_20240305.log"
    assert path.parent.is_dir()


def test_named_loggers_share_the_file_handler(tmp_path, monkeypatch):
    monkeypatch.setenv("STLTS_LOG_DIR", str(tmp_path))
    first = setup_logging("Encoder", logging.DEBUG)
    second = setup_logging("Solver", logging.DEBUG)
    assert first.handlers[0] is second.handlers[0]
    assert not first.propagate

    first.debug("encoded 12 rows")
    first.handlers[0].flush()
    assert "Encoder - DEBUG - encoded 12 rows" in log_path().read_text(encoding="utf-8")


def test_repeated_setup_does_not_stack_handlers(tmp_path, monkeypatch):
    monkeypatch.setenv("STLTS_LOG_DIR", str(tmp_path))
    setup_logging("Repeat")
    logger = setup_logging("Repeat", logging.WARNING)
    assert len(logger.handlers) == 2
    assert logger.handlers[1].level == logging.WARNING
