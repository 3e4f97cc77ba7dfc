"""Logging setup of the command line tool."""
import logging
import logging.handlers
import sys

import click

_LEVELS = (logging.WARNING, logging.INFO, logging.DEBUG)

# per image debug records flood the console during scenario runs
_CHATTY = ("hybridsr.imaging",)


def configure_logging(target, verbosity):
    """Route log records of all commands to a single handler.

    Verbosity 0 logs progress, each -v adds detail and each -q removes it, -qq silences logging.
    Debug records of the imaging package need -vv.

    :param str target: "console" or "file:<path>".
    :param int verbosity: Sum of -v and minus -q counters.
    :raise click.BadParameter: Unknown target or unusable log file.
    """
    if verbosity < -1:
        logging.disable()
        return
    logging.disable(logging.NOTSET)

    handler = _create_handler(target)
    handler.setLevel(_LEVELS[min(verbosity + 1, len(_LEVELS) - 1)])
    for name in _CHATTY:
        logging.getLogger(name).setLevel(logging.NOTSET if verbosity > 1 else logging.INFO)

    # commands may run several times in one process, e.g. under the test runner
    logging.basicConfig(level="NOTSET", handlers=[handler], force=True)
    logging.debug("Verbosity: %d", verbosity)


def _create_handler(target):
    if target == "console":
        if _stderr_is_non_interactive():
            handler = logging.StreamHandler()
            handler.setFormatter(
                logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
            )
            return handler
        from ._rich import ConsoleLogHandler  # rich is slow to import

        return ConsoleLogHandler()

    if target.startswith("file:"):
        filename = target[len("file:") :]  # noqa: E203
        try:
            handler = logging.handlers.WatchedFileHandler(filename, encoding="utf8")
        except OSError as exc:
            raise click.BadParameter(
                f"could not log to the {filename!r}: {exc!r}", param_hint="--logger"
            ) from exc
        handler.setFormatter(logging.Formatter("%(asctime)s - %(levelname)s - %(message)s"))
        return handler

    raise click.BadParameter(f"unknown logger {target!r}.", param_hint="--logger")


def _stderr_is_non_interactive():
    return not sys.stderr.isatty()
