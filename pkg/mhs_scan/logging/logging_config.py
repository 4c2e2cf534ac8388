# component_id: logging_config
# kind: runtime_module
# area: logging
# status: stable
# version: 0.1.0
# license: Apache-2.0
# purpose: Handler setup for the package logger tree.

import logging
import sys
from typing import Optional, TextIO, Union

LOGGER_NAME = "mhs_scan"
logger = logging.getLogger(LOGGER_NAME)

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"
_HANDLER_FLAG = "_mhs_scan_handler"


def configure(level: Union[int, str] = logging.WARNING, stream: Optional[TextIO] = None) -> logging.Logger:
    """Attach one stderr handler to the ``mhs_scan`` logger and set its level.

    Calling again replaces the handler instead of stacking a second one.
    """
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            raise ValueError(f"unknown log level {level!r}")
    for handler in [h for h in logger.handlers if getattr(h, _HANDLER_FLAG, False)]:
        logger.removeHandler(handler)
    handler = logging.StreamHandler(stream if stream is not None else sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    setattr(handler, _HANDLER_FLAG, True)
    logger.addHandler(handler)
    logger.setLevel(level)
    return logger


__all__ = ["LOG_FORMAT", "configure"]
