"""Exception types shared across the toolkit."""

from __future__ import annotations


class DocragError(Exception):
    """Base class for all toolkit errors."""


class SchemaError(DocragError):
    """A payload failed structural validation.

    Carries the path of the first offending element, e.g.
    ``pages[0].tables[1].cells[3].row_span``.
    """

    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}")


class ChartExtractionError(DocragError):
    """Chart CSV text could not be converted to records.

    ``row`` and ``column`` are 1-based positions of the offending field.
    """

    def __init__(self, row: int, column: int, message: str):
        self.row = row
        self.column = column
        self.message = message
        super().__init__(f"row {row}, column {column}: {message}")


class ProviderError(DocragError):
    """An external provider call failed.

    ``transient`` distinguishes retryable failures (timeouts, 5xx,
    connection resets) from permanent ones (bad request, auth).
    ``prompt`` is set when an LLM call fails so the request can be
    replayed.
    """

    def __init__(self, message: str, *, transient: bool = False, prompt: str | None = None):
        self.transient = transient
        self.prompt = prompt
        super().__init__(message)


class IndexLoadError(DocragError):
    """A persisted index file is corrupt; ``byte_offset`` locates the damage."""

    def __init__(self, byte_offset: int, message: str):
        self.byte_offset = byte_offset
        self.message = message
        super().__init__(f"byte {byte_offset}: {message}")


class MissingDocumentsError(DocragError):
    """An eval dataset references documents absent from the index."""

    def __init__(self, document_ids: list[str]):
        self.document_ids = list(document_ids)
        super().__init__("documents not indexed: " + ", ".join(self.document_ids))
