import logging
import os
import sys
from datetime import datetime
from pathlib import Path

FILE_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
CONSOLE_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"

# one handler per log file, shared by every named logger writing to it
_file_handlers: dict[Path, logging.FileHandler] = {}


def log_path(day: datetime | None = None) -> Path:
    """Daily log file under $STLTS_LOG_DIR (default `logs/`)."""
    log_dir = Path(os.getenv("STLTS_LOG_DIR", "logs"))
    log_dir.mkdir(parents=True, exist_ok=True)
    return log_dir / f"stlts_{(day or datetime.now()).strftime('%Y%m%d')}.log"


def _file_handler(path: Path) -> logging.FileHandler:
    handler = _file_handlers.get(path)
    if handler is None:
        handler = logging.FileHandler(path, encoding="utf-8")
        handler.setFormatter(logging.Formatter(FILE_FORMAT))
        handler.setLevel(logging.DEBUG)
        _file_handlers[path] = handler
    return handler


def setup_logging(name=None, level=logging.INFO):
    """Logger writing everything at `level` to the daily file and INFO and above to stderr.

    stdout stays free for verdicts and reports. Calling it again for the same name replaces the handlers.
    """
    logger = logging.getLogger(name) if name else logging.getLogger()
    logger.setLevel(level)
    logger.handlers.clear()
    # Named loggers own their handlers
    if name:
        logger.propagate = False

    logger.addHandler(_file_handler(log_path()))

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(logging.Formatter(CONSOLE_FORMAT))
    console_handler.setLevel(max(level, logging.INFO))
    logger.addHandler(console_handler)

    return logger
