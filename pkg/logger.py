"""Shared logger and structured trace helper."""
import logging
import sys
from typing import Any, Dict, Optional

from config.settings import LOG_LEVEL

logger = logging.getLogger("coembed")

if not logger.handlers:
    _handler = logging.StreamHandler(sys.stderr)
    _handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    logger.addHandler(_handler)
    logger.setLevel(getattr(logging, LOG_LEVEL, logging.INFO))
    logger.propagate = False


def _format_value(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


class TraceLogger:
    """Emit one structured DEBUG line per event."""

    @staticmethod
    def trace(event: str, component: str, payload: Optional[Dict[str, Any]] = None) -> None:
        if not logger.isEnabledFor(logging.DEBUG):
            return
        fields = " ".join(f"{k}={_format_value(v)}" for k, v in (payload or {}).items())
        logger.debug(f"event={event} component={component} {fields}".rstrip())
