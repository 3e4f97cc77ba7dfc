"""Console output built on rich: log handler, result tables and progress.

Importing rich takes a while, so commands import this module lazily.
"""
import functools
import logging

from rich.console import Console
from rich.containers import Lines
from rich.logging import RichHandler
from rich.progress import Progress as _Progress
from rich.style import Style
from rich.syntax import Syntax
from rich.table import Table
from rich.text import Text

from ..errors import SimError, YamlSnippet

STDOUT = Console()
STDERR = Console(stderr=True)
# progress bars share stderr with the log records
Progress = functools.partial(
    _Progress, console=STDERR, redirect_stdout=False, redirect_stderr=False
)

_DIM = Style(dim=True)
_RED = Style(color="red")

# glyph and style per level
_LEVELS = {
    logging.DEBUG: ("·", _DIM),
    logging.INFO: ("•", Style(color="green")),
    logging.WARNING: ("!", Style(color="yellow")),
    logging.ERROR: ("✗", _RED),
    logging.CRITICAL: ("✗", _RED + Style(bold=True)),
}


class ConsoleLogHandler(RichHandler):
    """Log handler printing a level glyph and the message, with snippets for `SimError`."""

    def __init__(self):
        """Create new class instance."""
        super().__init__(console=STDERR, show_time=False, show_path=False)
        self.setFormatter(logging.Formatter("%(message)s"))

    def get_level_text(self, record):
        """Render the level glyph of a record.

        :param LogRecord record: Logging record.
        :return Text:
        """
        glyph, style = _LEVELS.get(record.levelno, _LEVELS[logging.ERROR])
        return Text.styled(glyph, style)

    def render_message(self, record, message):
        """Render the message of a record.

        A `SimError` passed as the first argument is printed with its snippets.

        :param LogRecord record: Logging record.
        :param str message: Formatted message.
        :return ConsoleRenderable:
        """
        _, style = _LEVELS.get(record.levelno, _LEVELS[logging.ERROR])
        exc = record.args[0] if isinstance(record.args, tuple) and record.args else None
        if not isinstance(exc, SimError):
            return Text.styled(message, style)

        # the message without the snippets appended by str()
        text = record.msg % ((exc.message,) + record.args[1:])
        lines = Lines([Text.styled(text, style)])
        for snippet in exc.snippets:
            lines.extend(render_snippet(snippet))
        return lines


def render_snippet(snippet):
    """Yield the location and the highlighted source lines of a snippet."""
    yield Text(snippet.format_location(), style=_DIM)
    if isinstance(snippet, YamlSnippet):
        yield Syntax(
            snippet.code,
            "YAML",
            line_numbers=True,
            line_range=(snippet.line, snippet.line + 2),
            highlight_lines={snippet.line + 1},
        )
    else:
        yield Text(snippet.format_code())


def print_table(title, columns, rows, console=None):
    """Print rows of a result file as a summary table.

    :param str title: Table title.
    :param tuple[str] columns: Column names.
    :param list[dict] rows: Rows.
    :param Console console: Console to write, stdout by default.
    """
    output = Table(title=title, title_justify="left")
    for name in columns:
        output.add_column(name, justify="left" if name in ("request_id", "policy") else "right")
    for row in rows:
        output.add_row(*(str(row[name]) for name in columns))
    (console or STDOUT).print(output)


def print_pairs(pairs, console=None):
    """Print a two-column grid of names and values.

    :param dict pairs: Names and values.
    :param Console console: Console to write, stdout by default.
    """
    output = Table.grid(padding=(0, 4))
    output.add_column()
    output.add_column(overflow="fold", style="green")
    for k, v in pairs.items():
        output.add_row(k, str(v))
    (console or STDOUT).print(output)
