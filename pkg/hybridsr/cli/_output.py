"""Result files and error reporting of commands."""
import contextlib
import csv
import io
import logging
import os
import re
import tempfile
import textwrap
from pathlib import Path

import click

from ..errors import InputNotFound, NoFeasibleConfiguration, SimError

logger = logging.getLogger(__name__)

EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4


class CommandError(click.ClickException):
    """A command failure printed as a machine-parseable line `ERROR <code>: <message>`."""

    def __init__(self, message, exit_code, snippets=()):
        """Create new class instance.

        :param str message: Error message.
        :param int exit_code: Process exit code.
        :param list[Snippet] snippets: Snippets of the input document that caused the error.
        """
        super().__init__(message)
        self.exit_code = exit_code
        self.snippets = list(snippets)

    @classmethod
    def from_error(cls, exc):
        """Create the command error for a simulator error.

        :param SimError exc: The error.
        :return CommandError:
        """
        return cls(exc.message, exit_code_for(exc), exc.snippets)

    def format_message(self):
        """Get the error line and the indented snippets."""
        lines = [f"ERROR {self.exit_code}: {self.message}"]
        lines += [textwrap.indent(s.format(), "  ") for s in self.snippets]
        return "\n".join(lines)

    def show(self, file=None):
        """Print the error to stderr."""
        click.echo(self.format_message(), file=file, err=True)


def exit_code_for(exc):
    """Map a simulator error to the process exit code.

    :param SimError exc: The error.
    :return int:
    """
    if isinstance(exc, InputNotFound):
        return EXIT_IO
    if isinstance(exc, NoFeasibleConfiguration):
        return EXIT_INFEASIBLE
    return EXIT_INPUT


@contextlib.contextmanager
def handle_errors():
    """Turn simulator errors and output failures into command errors."""
    try:
        yield
    except SimError as exc:
        logger.debug("Command failed", exc_info=True)
        raise CommandError.from_error(exc) from exc
    except OSError as exc:
        raise CommandError(f"Could not write output: {exc}", EXIT_IO) from exc


def atomic_write(path, data):
    """Write a file by renaming a complete temporary file over it.

    :param str|Path path: Destination.
    :param bytes|str data: Contents, strings are encoded as utf8.
    """
    path = Path(path)
    if isinstance(data, str):
        data = data.encode("utf8")
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise
    logger.debug("Written %s", path)


def write_csv(path, columns, rows):
    """Write rows with a header in a stable column order.

    :param str|Path path: Destination.
    :param tuple[str] columns: Column names.
    :param list[dict] rows: Rows.
    """
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    atomic_write(path, buffer.getvalue())


def safe_filename(name):
    """Make an opaque identifier usable as a file name."""
    return re.sub(r"[^A-Za-z0-9._-]", "_", name) or "_"
