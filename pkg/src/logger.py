import os
import sys
import time
import logging
from pathlib import Path

from src.config import LOG_DIR, LOG_KEEP

logger = logging.getLogger("iwalab")

LOG_FORMAT = '%(asctime)s - %(levelname)s - [%(run)s] %(name)s - %(message)s'


class RunFilter(logging.Filter):
    """Stamps every record with the run label, e.g. 'verify-kida-p3'."""

    def __init__(self, label: str):
        super().__init__()
        self.label = label

    def filter(self, record: logging.LogRecord) -> bool:
        record.run = self.label
        return True


def _console_level(verbose: bool) -> int:
    if verbose:
        return logging.DEBUG
    level = logging.getLevelName(os.getenv("IWALAB_LOG_LEVEL", "INFO").upper())
    return level if isinstance(level, int) else logging.INFO


def _prune(log_dir: Path, keep: int) -> None:
    old = sorted(log_dir.glob("iwalab_*.log"), key=lambda f: f.stat().st_mtime, reverse=True)[max(keep, 1):]
    for f in old:
        try:
            f.unlink()
        except OSError:
            pass


def setup_logging(verbose=False, console_output=True, log_dir: Path | None = None,
                  run_label: str = "iwalab", keep: int = LOG_KEEP):
    """File log at DEBUG for every run; the console only gets records when asked for."""
    log_dir = Path(log_dir or LOG_DIR)
    os.makedirs(log_dir, exist_ok=True)
    timestamp = time.strftime("%Y%m%d_%H%M%S")
    log_file = log_dir / f"iwalab_{run_label}_{timestamp}_{os.getpid()}.log"

    # Remove existing handlers to avoid duplicates if re-configured
    root_logger = logging.getLogger()
    if root_logger.hasHandlers():
        root_logger.handlers.clear()

    handlers: list[logging.Handler] = [logging.FileHandler(log_file, encoding='utf-8')]
    handlers[0].setLevel(logging.DEBUG)

    if console_output:
        # stderr keeps JSON reports on stdout parseable
        stream_handler = logging.StreamHandler(sys.stderr)
        stream_handler.setLevel(_console_level(verbose))
        handlers.append(stream_handler)

    run_filter = RunFilter(run_label)
    for handler in handlers:
        handler.addFilter(run_filter)

    logging.basicConfig(
        level=logging.DEBUG,
        format=LOG_FORMAT,
        datefmt='%Y-%m-%d %H:%M:%S',
        handlers=handlers
    )

    # Silence noise from the numeric stack
    for logger_name in ["sympy", "numpy"]:
        logging.getLogger(logger_name).setLevel(logging.WARNING)

    _prune(log_dir, keep)
    logger.info(f"Logging initialized for {run_label}. File: {log_file}")
    return log_file
