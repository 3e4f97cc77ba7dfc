"""Simulator errors and source snippets for debugging input documents."""
import pathlib
import textwrap

import yaml


class SimError(RuntimeError):
    """An error caused by invalid inputs, infeasible problems or broken input documents."""

    def __init__(self, message, *snippets):
        """Create new class instance.

        :param str message: An error message.
        :param Snippet snippets: Snippets (zero or more) of the input that caused an error.
        """
        super().__init__(message)
        self.snippets = [s for s in snippets if s]

    @property
    def message(self):
        """Get the error message including information about the cause error."""
        message = self.args[0]
        cause = self.__cause__ or self.__context__
        if cause is not None and not isinstance(cause, SimError):
            klass = cause.__class__
            return f"caused by {klass.__module__}.{klass.__qualname__}: {message}"
        return message

    def __str__(self):
        """Detailed description of an error including error cause and a snippet."""
        lines = [
            self.message,
        ]
        lines += [textwrap.indent(s.format(), "  ") for s in self.snippets]
        return "\n".join(lines)


class IndivisibleResolution(SimError):
    """A resolution is not divisible by a scale factor or grid side."""


class WeightOutOfRange(SimError):
    """A preference weight or ratio lies outside of [0, 1]."""


class InvalidCandidates(SimError):
    """Candidate sets are empty, unsorted or contain duplicates."""


class NoFeasibleConfiguration(SimError):
    """No configuration satisfies the latency budget or the residual capacity."""


class DegenerateSamples(SimError):
    """Calibration samples do not determine the fitted curve."""


class DimensionMismatch(SimError):
    """Two images or masks have incompatible shapes."""


class OverlapTooLarge(SimError):
    """Patch overlap does not fit into the patch."""


class UncoveredPixel(SimError):
    """A canvas pixel receives zero total weight while stitching."""


class PlacementOutOfBounds(SimError):
    """A patch placement does not fit into the canvas."""


class ParseError(SimError):
    """An input document or a field of it is invalid."""


class InputNotFound(SimError):
    """An input file is missing or unreadable."""


def _document_key(mark):
    # inline documents are keyed by their content, files by their name
    if mark.buffer is not None:
        return mark.buffer.rstrip("\0")
    return mark.name


class YamlSymbols:
    """Registry of YAML nodes that loaded values came from.

    Values are keyed by `id()`, so only objects that outlive loading can be traced back.
    Numbers and booleans are skipped: they are interned and their ids are shared. With the base
    loader every scalar arrives as a string, so this only concerns values built afterwards.
    """

    # document key -> {id(value): node}
    _stores = {}

    @classmethod
    def cleanup(cls, document):
        """Forget the nodes of a document.

        :param str document: File name or content of the document.
        """
        cls._stores.pop(document, None)

    @classmethod
    def add(cls, data, node):
        """Remember the node a value was loaded from.

        :param Any data: Loaded value.
        :param yaml.Node node: Its node.
        """
        if isinstance(data, (int, float, bool)):
            return
        cls._stores.setdefault(_document_key(node.start_mark), {})[id(data)] = node

    @classmethod
    def lookup(cls, data):
        """Find the node a value was loaded from.

        :param Any data: Loaded value.
        :return yaml.Node|None:
        """
        return next(
            (store[id(data)] for store in cls._stores.values() if id(data) in store), None
        )

    @classmethod
    def reference(cls, derived, original):
        """Let a value built from a loaded one point at the same node.

        Nothing happens when the original value is unknown.

        :param Any derived: Built value.
        :param Any original: Loaded value.
        """
        node = cls.lookup(original)
        if node is not None:
            cls.add(derived, node)


class Snippet:
    """Lines of a source document and a position in them."""

    def __init__(self, name, lines, line, column):
        """Create new class instance.

        :param str name: Document name.
        :param list[str] lines: Document lines.
        :param int line: Zero-based line of the position.
        :param int column: Zero-based column of the position.
        """
        self.name = name
        self._lines = lines
        self.line = line
        self.column = column

    @property
    def code(self):
        """Whole document text."""
        return "\n".join(self._lines)

    def format_location(self):
        """Describe the position with one-based numbers."""
        return f'in "{self.name}", line {self.line + 1}, column {self.column + 1}'

    def format_code(self, pointer="^^^", max_lines=1, max_chars=80):
        """Show the line of the position with its neighbors and a pointer under the column.

        :param str pointer: Pointer text.
        :param int max_lines: Neighbor lines shown above and below.
        :param int max_chars: Neighbor text longer than that is cut with an ellipsis.
        :return str:
        """
        above = "\n".join(self._lines[max(self.line - max_lines, 0) : self.line])  # noqa: E203
        below = "\n".join(self._lines[self.line + 1 : self.line + max_lines + 1])  # noqa: E203
        if len(above) > max_chars:
            above = "..." + above[-max_chars:]
        if len(below) > max_chars:
            below = below[:max_chars] + "..."
        parts = [above] if above else []
        parts += [self._lines[self.line], " " * self.column + pointer, below]
        return textwrap.dedent("\n".join(parts))

    def format(self):
        """Location line followed by the indented code."""
        return f"{self.format_location()}:\n{textwrap.indent(self.format_code(), '  ')}"

    def __str__(self):
        """Same as :meth:`format`."""
        return self.format()


class YamlSnippet(Snippet):
    """A snippet of a YAML (or JSON) document."""

    @classmethod
    def from_data(cls, data, *, key=None):
        """Build a snippet pointing at a loaded value.

        :param Any data: Loaded value, a mapping or a sequence when `key` is given.
        :param str|int|None key: Point at this key or index of the value instead.
        :return YamlSnippet|None: `None` for values unknown to :class:`~YamlSymbols`.
        """
        node = YamlSymbols.lookup(data)
        if node is None:
            return None
        if key is not None:
            node = cls._child(node, key)
        return cls.at_mark(node.start_mark)

    @staticmethod
    def _child(node, key):
        if isinstance(node, yaml.MappingNode):
            return next((v for k, v in node.value if k.value == key), node)
        if isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            return node.value[key]
        return node

    @classmethod
    def at_mark(cls, mark):
        """Build a snippet pointing at a mark.

        :param yaml.Mark mark: The mark.
        :return YamlSnippet:
        """
        if mark.buffer is not None:
            text = mark.buffer.rstrip("\0")
        else:
            text = pathlib.Path(mark.name).read_text(encoding="utf8")
        # a trailing line break gives an extra empty line, unlike splitlines
        return cls(mark.name, text.split("\n"), mark.line, mark.column)
