import logging

from rich.console import Console

from hybridsr.cli._rich import ConsoleLogHandler, print_pairs, print_table
from hybridsr.errors import ParseError, Snippet


def _console():
    return Console(record=True, width=120, color_system=None)


def test_print_table():
    console = _console()
    print_table(
        "schedule",
        ("request_id", "scale"),
        [{"request_id": "u01", "scale": 4}, {"request_id": "u02", "scale": ""}],
        console,
    )
    text = console.export_text()
    assert text.startswith("schedule")
    assert "request_id" in text
    assert "u01" in text
    assert "u02" in text


def test_print_pairs():
    console = _console()
    print_pairs({"Total utility": "1.250000", "Rejected": 0}, console)
    lines = console.export_text().splitlines()
    assert lines[0].split() == ["Total", "utility", "1.250000"]
    assert lines[1].split() == ["Rejected", "0"]


def _record(level, message, *args):
    return logging.LogRecord("hybridsr", level, __file__, 1, message, args, None)


def _emit(record):
    handler = ConsoleLogHandler()
    handler.console = _console()
    handler.emit(record)
    return handler.console.export_text()


def test_log_record():
    text = _emit(_record(logging.WARNING, "low %s", "budget"))
    assert text.split()[:3] == ["!", "low", "budget"]


def test_log_sim_error_with_plain_snippet():
    snippet = Snippet("samples.csv", ["steps,resolution,seconds", "10,512,fast"], 1, 7)
    exc = ParseError("Bad number.", snippet)
    text = _emit(_record(logging.ERROR, "Failed: %s", exc))
    assert text.split()[:4] == ["✗", "Failed:", "Bad", "number."]
    assert 'in "samples.csv", line 2, column 8' in text
    assert "10,512,fast" in text
