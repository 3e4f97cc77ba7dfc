"""Base schemas for input documents: profiles, scenarios and stitch manifests."""
import textwrap
from collections.abc import Hashable

import marshmallow
import yaml
from marshmallow import fields, post_load

from .errors import InputNotFound, ParseError, SimError, YamlSnippet, YamlSymbols

_MAP = "tag:yaml.org,2002:map"
_SEQ = "tag:yaml.org,2002:seq"
_STR = "tag:yaml.org,2002:str"


class DocumentLoader(yaml.BaseLoader):  # pylint: disable=R0901
    """YAML loader of input documents.

    Every scalar is loaded as a string, typing is left to the schemas. JSON documents go through
    the same loader, so the shipped profile may carry a `#` comment. Mappings with duplicate keys
    and tagged nodes are rejected. Loaded strings, mappings and sequences are registered in
    :class:`~YamlSymbols`.
    """

    @classmethod
    def load(cls, data):
        """Load a document.

        :param str|TextIO data: Document text or stream.
        :raise YamlParsingError: Syntax error, duplicate key or unknown tag.
        :return Any:
        """
        try:
            # BaseLoader constructs plain python objects only
            return yaml.load(data, Loader=cls)  # nosec B506
        except yaml.MarkedYAMLError as exc:
            raise YamlParsingError(exc) from exc

    def check_unique_keys(self, node):
        """Raise on a mapping node with a repeated key."""
        seen = set()
        for key_node, _ in node.value:
            key = self.construct_object(key_node)
            if not isinstance(key, Hashable):
                continue
            if key in seen:
                raise yaml.constructor.ConstructorError(
                    "While constructing a mapping",
                    node.start_mark,
                    f'found duplicate key: "{key}"',
                    key_node.start_mark,
                    None,
                )
            seen.add(key)


def _traced(construct):
    def constructor(loader, node):
        rv = construct(loader, node)
        YamlSymbols.add(rv, node)
        return rv

    return constructor


def _construct_mapping(loader, node):
    loader.check_unique_keys(node)
    return loader.construct_mapping(node)


def _unknown_tag(loader, node):
    raise yaml.constructor.ConstructorError(
        None, None, f"could not determine a constructor for the tag {node.tag!r}", node.start_mark
    )


DocumentLoader.add_constructor(_MAP, _traced(_construct_mapping))
DocumentLoader.add_constructor(_SEQ, _traced(lambda loader, node: loader.construct_sequence(node)))
DocumentLoader.add_constructor(_STR, _traced(lambda loader, node: loader.construct_scalar(node)))
DocumentLoader.add_constructor(None, _unknown_tag)


def attach_snippet(exc, data):
    """Point an error without a snippet to the loaded data it was caused by.

    :param SimError exc: The error.
    :param Any data: Loaded data fragment.
    :return SimError: The same error.
    """
    if not exc.snippets:
        snippet = YamlSnippet.from_data(data)
        if snippet:
            exc.snippets.append(snippet)
    return exc


class YamlParsingError(ParseError):
    """A syntax error in the input document with a nice formatting."""

    def __init__(self, exc):
        """Create new class instance.

        :param yaml.MarkedYAMLError exc: An original YAML error.
        """
        lines = []
        for text, mark in ((exc.context, exc.context_mark), (exc.problem, exc.problem_mark)):
            if text:
                lines.append(text)
            if mark:
                lines.append(textwrap.indent(YamlSnippet.at_mark(mark).format(), "  "))
        if exc.note:
            lines.append(exc.note)
        super().__init__("\n".join(lines))


class RenderConfig:
    """Render module of :class:`~DocumentSchema` backed by :class:`~DocumentLoader`."""

    @staticmethod
    def loads(data):
        """Deserialize a document to plain python data.

        :param str|TextIO data: JSON or YAML document.
        """
        return DocumentLoader.load(data)


class DocumentSchema(marshmallow.Schema):
    """Base schema for input documents.

    Validation errors are raised as :class:`~ParseError` pointing to the offending field.
    """

    class Meta:
        """Options object for a Schema."""

        render_module = RenderConfig()

    def handle_error(self, error, data, **kwargs):
        """Wrap ValidationError with a :class:`~ParseError` that contains user friendly snippet.

        Raise only the first error with corresponding source data from marshmallow's normalized
        error messages.

        :param ValidationError error: The ValidationError raised during deserialization.
        :param dict data: The original input data.
        :param dict kwargs: Ignored arguments.
        :raise ParseError:
        """

        def first_error(errors, source, path):
            field, messages = next(iter(errors.items()))
            if isinstance(messages, dict):
                # go deeper, an error occured in nested schema
                nested = source
                if isinstance(source, dict):
                    nested = source.get(field, source)
                elif isinstance(source, list) and isinstance(field, int) and field < len(source):
                    nested = source[field]
                return first_error(messages, nested, path + [field])
            if isinstance(messages, list):
                # several messages for one field
                messages = " ".join(messages)
            if field == marshmallow.exceptions.SCHEMA:
                # actualy not a field in schema but schema itself
                field = None
            else:
                path = path + [field]
            name = ".".join(str(p) for p in path)
            if messages == fields.Field.default_error_messages["required"]:
                messages = f"Missing required field {name!r}."
            elif messages == self.error_messages["unknown"]:
                messages = f"Unknown field {name!r}."
                # point to the field itself, not to its value
                source = field
                field = None
            elif name:
                messages = f"Invalid field {name!r}: {messages}"
            return ParseError(messages, YamlSnippet.from_data(source, key=field))

        raise first_error(error.normalized_messages(), data, []) from error

    def load_file(self, path, **kwargs):
        """Load a document file in a convenient way.

        :param str|Path path: A path to a file.
        :param dict kwargs: Keyword arguments passed to :meth`~Schema.loads`.
        """
        try:
            with open(path, encoding="utf8") as f:
                return self.loads(f, **kwargs)
        except OSError as exc:
            raise InputNotFound(f"Could not load file {path}: {exc}") from exc

    def loads(self, json_data, *args, **kwargs):
        """Deserialize a document, reporting non-mapping documents as :class:`~ParseError`."""
        try:
            return super().loads(json_data, *args, **kwargs)
        except SimError:
            raise
        except (TypeError, AttributeError) as exc:
            raise ParseError(f"Malformed document: {exc}") from exc

    @post_load(pass_original=True)
    def post_load(self, data, original_data, **kwargs):
        """Add yaml symbols for loaded data and build the resulting value.

        :param dict data: Deserialized data.
        :param dict original_data: Original data before deserialization.
        :param dict kwargs: Ignored arguments.
        """
        for name in self._declared_fields:
            if name in data and isinstance(original_data, dict) and name in original_data:
                YamlSymbols.reference(data[name], original_data[name])
        YamlSymbols.reference(data, original_data)
        try:
            value = self.make_object(data)
        except SimError as exc:
            attach_snippet(exc, original_data)
            raise
        YamlSymbols.reference(value, original_data)
        return value

    def make_object(self, data):
        """Build the value from the deserialized data.

        Domain validation errors raised here get a snippet pointing to the document.

        :param dict data: Deserialized data.
        :return Any:
        """
        return data
