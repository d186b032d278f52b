import logging
import os
from logging.handlers import TimedRotatingFileHandler

from core.config import settings

LOG_FILE_NAME = "logs.log"


def setup_logging(log_dir: str | None = None, debug: bool | None = None) -> logging.Logger:
    """
    Configure application-wide logging with both file and console output.

    Logging configuration:
    - Level: INFO, or DEBUG when `settings.DEBUG` (or `debug`) is set
    - Format: `YYYY-MM-DD HH:MM:SS [LEVEL] logger_name: message`
    - File handler: Rotates daily at midnight, keeps 30 backups, UTF-8 encoding
    - Console handler: Mirrors the same format to stderr

    Calling it twice does not duplicate handlers.

    :param log_dir: Directory for the rotating log file, defaults to `settings.LOG_DIR`.
    :param debug: Overrides `settings.DEBUG` when given.
    :return: The root logger instance configured with handlers.
    """
    logger = logging.getLogger()

    debug = settings.DEBUG if debug is None else debug
    logger.setLevel(logging.DEBUG if debug else logging.INFO)

    if getattr(logger, "_ser_configured", False):
        return logger

    log_dir = log_dir or settings.LOG_DIR
    os.makedirs(log_dir, exist_ok=True)

    formatter = logging.Formatter(
        "%(asctime)s [%(levelname)s] %(name)s: %(message)s", datefmt="%Y-%m-%d %H:%M:%S"
    )

    file_handler = TimedRotatingFileHandler(
        os.path.join(log_dir, LOG_FILE_NAME),
        when="midnight",
        interval=1,
        backupCount=30,
        encoding="utf-8",
    )
    file_handler.setFormatter(formatter)

    console_handler = logging.StreamHandler()
    console_handler.setFormatter(formatter)

    logger.addHandler(file_handler)
    logger.addHandler(console_handler)
    logger._ser_configured = True

    return logger
