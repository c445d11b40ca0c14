"""Exception hierarchy. ToolError maps to CLI exit code 1."""


class ToolError(Exception):
    """Base class for input and domain errors."""


class CorpusError(ToolError):
    """Corpus file is missing, malformed, or violates corpus invariants."""


class EmbeddingFormatError(ToolError):
    """Embedding file violates the binary layout or value constraints."""


class AlignmentError(ToolError):
    """Corpus and embedding matrix do not describe the same data."""


class ScoringError(ToolError):
    """Separability scoring cannot proceed (e.g. single-language corpus)."""


class SelectionError(ToolError):
    """Selection request is infeasible or its inputs are invalid."""


class CurriculumError(ToolError):
    """Curriculum construction cannot proceed."""


class ReportError(ToolError):
    """Report inputs are inconsistent or degenerate."""
