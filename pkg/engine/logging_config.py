import sys

from loguru import logger

from engine.config import get_settings


def configure_logging(level: str | None = None) -> None:
    """
    Configure loguru for library and CLI use.

    Logs go to stderr so that stdout carries only command payloads. With
    FZ_LOG_JSON (default) each record is one JSON object including any
    `logger.bind(...)` extras.
    """
    settings = get_settings()
    logger.remove()

    log_level = (level or settings.log_level or "INFO").upper()

    logger.add(
        sys.stderr,
        level=log_level,
        serialize=settings.log_json,
        backtrace=False,
        diagnose=False,
    )
