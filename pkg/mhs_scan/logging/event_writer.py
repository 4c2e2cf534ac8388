# component_id: event_writer
# kind: runtime_module
# area: logging
# status: stable
# version: 0.1.0
# license: Apache-2.0
# purpose: Transport-only record writers for CLI reports and run logs.

from __future__ import annotations

import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Protocol, Sequence, TextIO, Union

import numpy as np

LOGGER_NAME = "mhs_scan.logging"
logger = logging.getLogger(LOGGER_NAME)


class EventWriter(Protocol):
    """Callable accepting one record dict. Writers never validate content."""

    def __call__(self, record: Dict[str, Any]) -> None:  # pragma: no cover - protocol
        ...


def _to_json_value(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def encode_record(record: Dict[str, Any], *, indent: Optional[int] = None) -> str:
    """Serialize with sorted keys so equal records give equal bytes."""
    return json.dumps(record, sort_keys=True, indent=indent, ensure_ascii=False, default=_to_json_value)


@dataclass
class MemoryWriter:
    """Keeps every record in ``records``; used by tests."""

    records: List[Dict[str, Any]] = field(default_factory=list)

    def __call__(self, record: Dict[str, Any]) -> None:
        self.records.append(record)

    def clear(self) -> None:
        self.records.clear()


@dataclass
class JsonlFileWriter:
    """One JSON object per line, opened lazily."""

    path: Path
    append: bool = True
    auto_flush: bool = True

    _file: Optional[TextIO] = None

    def __post_init__(self) -> None:
        self.path = Path(self.path)

    def __call__(self, record: Dict[str, Any]) -> None:
        if self._file is None:
            self._file = self.path.open("a" if self.append else "w", encoding="utf-8")
            logger.debug("opened run log %s", self.path)
        self._file.write(encode_record(record) + "\n")
        if self.auto_flush:
            self._file.flush()

    def close(self) -> None:
        if self._file is not None:
            self._file.close()
            self._file = None


@dataclass
class StreamWriter:
    """Write records to a text stream; ``indent`` switches to pretty JSON."""

    stream: TextIO = field(default_factory=lambda: sys.stdout)
    indent: Optional[int] = None
    auto_flush: bool = True

    def __call__(self, record: Dict[str, Any]) -> None:
        self.stream.write(encode_record(record, indent=self.indent) + "\n")
        if self.auto_flush and hasattr(self.stream, "flush"):
            self.stream.flush()


@dataclass
class FanOutWriter:
    """Forward each record to several writers in order."""

    writers: Sequence[Callable[[Dict[str, Any]], None]]

    def __call__(self, record: Dict[str, Any]) -> None:
        for writer in self.writers:
            writer(record)

    def close(self) -> None:
        for writer in self.writers:
            close = getattr(writer, "close", None)
            if close is not None:
                close()


def make_jsonl_file_writer(path: Union[str, Path], *, append: bool = True) -> JsonlFileWriter:
    return JsonlFileWriter(path=Path(path), append=append)


def make_stdout_writer(*, indent: Optional[int] = None) -> StreamWriter:
    return StreamWriter(stream=sys.stdout, indent=indent)


__all__ = [
    "EventWriter",
    "encode_record",
    "MemoryWriter",
    "JsonlFileWriter",
    "StreamWriter",
    "FanOutWriter",
    "make_jsonl_file_writer",
    "make_stdout_writer",
]
