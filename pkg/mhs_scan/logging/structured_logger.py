# component_id: structured_logger
# kind: runtime_module
# area: logging
# status: stable
# version: 0.1.0
# license: Apache-2.0
# purpose: Structured record facade over event writers, used for machine-readable CLI output.

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Dict, Optional, TextIO, Union

from .event_writer import EventWriter, FanOutWriter, StreamWriter, make_jsonl_file_writer, make_stdout_writer

LOGGER_NAME = "mhs_scan.logging"
logger = logging.getLogger(LOGGER_NAME)


class StructuredLogger:
    """Thin facade: merge a record over the base context, hand it to a writer.

    The logger knows nothing about record contents. Callers keep wall-time
    values under a ``wall_time`` key so byte comparisons can mask them.
    """

    def __init__(
        self,
        writer: EventWriter,
        *,
        base_context: Optional[Dict[str, Any]] = None,
        log_errors: bool = False,
    ) -> None:
        """
        Parameters
        ----------
        writer:
            Callable conforming to :class:`EventWriter`.
        base_context:
            Mapping shallow-merged under every record.
        log_errors:
            When True, writer exceptions are logged and swallowed; otherwise
            they propagate.
        """
        self._writer = writer
        self._base_context: Dict[str, Any] = dict(base_context or {})
        self._log_errors = log_errors

    @property
    def base_context(self) -> Dict[str, Any]:
        return dict(self._base_context)

    def with_context(self, extra: Dict[str, Any]) -> "StructuredLogger":
        merged = {**self._base_context, **extra}
        return StructuredLogger(self._writer, base_context=merged, log_errors=self._log_errors)

    def log(self, record: Dict[str, Any]) -> None:
        payload: Dict[str, Any] = {**self._base_context, **record}
        if not self._log_errors:
            self._writer(payload)
            return
        try:
            self._writer(payload)
        except Exception:  # pragma: no cover
            logger.exception("StructuredLogger failed to emit record")

    def close(self) -> None:
        close = getattr(self._writer, "close", None)
        if close is not None:
            close()


def make_console_logger(
    *,
    stream: Optional[TextIO] = None,
    jsonl_path: Union[str, Path, None] = None,
    indent: Optional[int] = 2,
) -> StructuredLogger:
    """Pretty JSON on ``stream`` (stdout by default), plus a JSONL run log when given a path."""
    console = StreamWriter(stream=stream, indent=indent) if stream is not None else make_stdout_writer(indent=indent)
    if jsonl_path is None:
        return StructuredLogger(console)
    return StructuredLogger(FanOutWriter([console, make_jsonl_file_writer(jsonl_path)]))


__all__ = ["StructuredLogger", "make_console_logger"]
