# component_id: logging_pkg_init
# kind: code
# area: logging
# status: stable
# purpose: Package initialization for logging.

from .event_writer import (
    EventWriter,
    FanOutWriter,
    JsonlFileWriter,
    MemoryWriter,
    StreamWriter,
    encode_record,
    make_jsonl_file_writer,
    make_stdout_writer,
)
from .logging_config import configure
from .structured_logger import StructuredLogger, make_console_logger

__all__ = [
    "EventWriter",
    "FanOutWriter",
    "JsonlFileWriter",
    "MemoryWriter",
    "StreamWriter",
    "encode_record",
    "make_jsonl_file_writer",
    "make_stdout_writer",
    "configure",
    "StructuredLogger",
    "make_console_logger",
]
