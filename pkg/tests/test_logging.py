import io
import json
import logging

import numpy as np
import pytest

from mhs_scan.logging import (
    FanOutWriter,
    JsonlFileWriter,
    MemoryWriter,
    StreamWriter,
    StructuredLogger,
    configure,
    encode_record,
    make_console_logger,
    make_stdout_writer,
)


def test_memory_writer_collects_records():
    writer = MemoryWriter()
    writer({"a": 1})
    writer({"b": 2})
    assert writer.records == [{"a": 1}, {"b": 2}]
    writer.clear()
    assert writer.records == []


def test_context_merges_under_record():
    writer = MemoryWriter()
    log = StructuredLogger(writer, base_context={"run": "r1", "seed": 0})
    log.log({"seed": 5, "event": "x"})
    log.with_context({"head": 2}).log({"event": "y"})
    assert writer.records == [
        {"run": "r1", "seed": 5, "event": "x"},
        {"run": "r1", "seed": 0, "head": 2, "event": "y"},
    ]
    assert log.base_context == {"run": "r1", "seed": 0}


def test_writer_errors_propagate_unless_logged():
    def broken(record):
        raise RuntimeError("disk full")

    with pytest.raises(RuntimeError):
        StructuredLogger(broken).log({"a": 1})
    StructuredLogger(broken, log_errors=True).log({"a": 1})


def test_encode_record_sorts_keys_and_converts_numpy():
    record = {"z": np.float64(0.5), "a": np.arange(3), "m": np.int64(4)}
    assert encode_record(record) == '{"a": [0, 1, 2], "m": 4, "z": 0.5}'
    with pytest.raises(TypeError):
        encode_record({"bad": object()})


def test_stream_writer_pretty_output():
    stream = io.StringIO()
    StreamWriter(stream=stream, indent=2)({"b": 1, "a": [1]})
    assert json.loads(stream.getvalue()) == {"a": [1], "b": 1}
    assert stream.getvalue().startswith('{\n  "a"')


def test_jsonl_writer_appends_lines(tmp_path):
    path = tmp_path / "run.jsonl"
    writer = JsonlFileWriter(path)
    writer({"n": 1})
    writer({"n": 2})
    writer.close()
    JsonlFileWriter(path)({"n": 3})
    assert [json.loads(line)["n"] for line in path.read_text(encoding="utf-8").splitlines()] == [1, 2, 3]


def test_jsonl_writer_truncates_without_append(tmp_path):
    path = tmp_path / "run.jsonl"
    path.write_text('{"old": true}\n', encoding="utf-8")
    writer = JsonlFileWriter(path, append=False)
    writer({"new": True})
    writer.close()
    assert path.read_text(encoding="utf-8") == '{"new": true}\n'


def test_fan_out_and_console_logger(tmp_path):
    stream = io.StringIO()
    log = make_console_logger(stream=stream, jsonl_path=tmp_path / "run.jsonl", indent=None)
    log.log({"k": 1})
    log.close()
    assert stream.getvalue() == '{"k": 1}\n'
    assert (tmp_path / "run.jsonl").read_text(encoding="utf-8") == '{"k": 1}\n'

    first, second = MemoryWriter(), MemoryWriter()
    FanOutWriter([first, second])({"x": 0})
    assert first.records == second.records == [{"x": 0}]


def test_console_logger_defaults_to_stdout(capsys):
    log = make_console_logger(indent=None)
    log.log({"status": "pass"})
    assert capsys.readouterr().out == '{"status": "pass"}\n'
    assert isinstance(make_stdout_writer(indent=2), StreamWriter)


def test_configure_is_idempotent():
    stream = io.StringIO()
    logger = configure("DEBUG", stream=stream)
    configure(logging.DEBUG, stream=stream)
    assert len([h for h in logger.handlers if getattr(h, "_mhs_scan_handler", False)]) == 1
    logging.getLogger("mhs_scan.module").debug("hello")
    assert stream.getvalue() == "DEBUG mhs_scan.module: hello\n"
    configure()


def test_configure_rejects_unknown_level():
    with pytest.raises(ValueError):
        configure("LOUD")
