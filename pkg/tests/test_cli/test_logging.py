import logging

import pytest
from marshmallow import fields

import hybridsr.cli
from hybridsr.errors import ParseError, YamlSnippet
from hybridsr.schemas import DocumentSchema


@pytest.fixture
def run(runner, scenario_file, tmp_path):
    def run(*options):
        result = runner.invoke(
            hybridsr.cli.main,
            [*options, "optimize", "--scenario", scenario_file, "--out", tmp_path / "out"],
            catch_exceptions=False,
        )
        assert result.exit_code == 0, result.output

    return run


def _console_handler(run, basic_config, monkeypatch, *options, non_interactive=False):
    monkeypatch.setattr(
        hybridsr.cli._logging, "_stderr_is_non_interactive", lambda: non_interactive
    )
    run(*options)
    (log_handler,) = basic_config.call_args.kwargs["handlers"]
    return log_handler


@pytest.fixture
def console_handler(run, basic_config, monkeypatch):
    return _console_handler(run, basic_config, monkeypatch)


def _make_log_record(log_level, message, args=tuple()):
    return logging.LogRecord("hybridsr", log_level, __file__, 1, message, args, None)


def test_logger_file(run, basic_config, tmp_path):
    logfile = tmp_path / "hybridsr.log"
    run("--logger", f"file:{logfile}")
    (log_handler,) = basic_config.call_args.kwargs["handlers"]
    assert log_handler.baseFilename == str(logfile)


def test_logger_console(console_handler, capsys):
    console_handler.emit(_make_log_record(logging.INFO, "foo bar"))
    _, err = capsys.readouterr()
    assert "foo bar" in err


def test_logger_console_sim_error(console_handler, capsys):
    class C(DocumentSchema):
        policy = fields.String()

    source = C().loads("policy: greedy")
    err = ParseError("Unknown policy.", YamlSnippet.from_data(source))

    console_handler.emit(_make_log_record(logging.ERROR, "Scenario failed: %s", (err,)))
    _, err = capsys.readouterr()
    assert "Scenario failed: Unknown policy." in err
    assert 'in "<unicode string>", line 1, column 1' in err
    assert "policy: greedy" in err


def test_logger_non_interactive(run, basic_config, monkeypatch):
    handler = _console_handler(run, basic_config, monkeypatch, non_interactive=True)
    assert type(handler) is logging.StreamHandler


@pytest.mark.parametrize(
    "options, level",
    (
        ((), logging.INFO),
        (("-v",), logging.DEBUG),
        (("-vv",), logging.DEBUG),
        (("-q",), logging.WARNING),
    ),
)
def test_verbosity(run, basic_config, monkeypatch, options, level):
    handler = _console_handler(run, basic_config, monkeypatch, *options, non_interactive=True)
    assert handler.level == level


@pytest.mark.parametrize(
    "options, level",
    (
        ((), logging.INFO),
        (("-v",), logging.INFO),
        (("-vv",), logging.NOTSET),
    ),
)
def test_imaging_debug_needs_vv(run, options, level):
    run(*options)
    assert logging.getLogger("hybridsr.imaging").level == level


def test_disable_logging(run, basic_config):
    run("-qq")
    basic_config.assert_not_called()
    assert logging.root.manager.disable == logging.CRITICAL


def test_verbose_and_quiet(runner):
    result = runner.invoke(hybridsr.cli.main, ["-v", "-q", "optimize"])
    assert result.exit_code == 2
    assert "Options -v and -q are mutually exclusive." in result.output


def test_logger_bad_file(runner, tmp_path):
    badfile = tmp_path / "hybridsr.log"
    badfile.mkdir()
    result = runner.invoke(hybridsr.cli.main, ["--logger", f"file:{badfile}", "optimize"])
    assert result.exit_code == 2, result.output
    assert f"could not log to the '{badfile}'" in result.output


def test_logger_unknown(runner):
    result = runner.invoke(
        hybridsr.cli.main, ["--logger", "unknown", "optimize"], catch_exceptions=False
    )
    assert result.exit_code == 2, result.output
    assert "unknown logger 'unknown'" in result.output
