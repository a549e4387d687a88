"""Exception hierarchy shared across the package."""


class ChartsumError(Exception):
    """Base class for all package errors."""


# --- ingest ---------------------------------------------------------------

class SpecSyntaxError(ChartsumError):
    """Chart spec document is malformed or not valid JSON."""


class UnsupportedMark(ChartsumError):
    """Spec uses a mark type outside the supported line-chart subset."""


class MissingEncoding(ChartsumError):
    """Spec lacks a required x or y encoding."""


class ParseError(ChartsumError):
    """Data table contains a cell that cannot be parsed."""


class TimeOrderError(ChartsumError):
    """Timestamps are not strictly increasing."""


class EmptyTable(ChartsumError):
    """Data table has no rows."""


class UnboundColumn(ChartsumError):
    """Spec references a column missing from the data table."""


# --- analysis -------------------------------------------------------------

class TooShort(ChartsumError):
    """Series has fewer than two points."""


class UnknownDimension(ChartsumError):
    """Named dimension does not exist in the dataset."""


class WindowEmpty(ChartsumError):
    """Time window contains no samples."""


class TieThroughout(ChartsumError):
    """Two series are identical on the examined window."""


class SingleDimension(ChartsumError):
    """Multi-dimensional analysis requested on a single-dimension chart."""


class PeriodOutOfRange(ChartsumError):
    """Ranking period lies outside the data span."""


class Unresolvable(ChartsumError):
    """Temporal expression matches no span of the data."""


# --- oracles --------------------------------------------------------------

class UnknownStatistic(ChartsumError):
    """Numeric claim names a statistic no oracle recomputes."""


class TrendAbsent(ChartsumError):
    """No window of the data exhibits the claimed trend."""


class ClaimParseError(ChartsumError):
    """Backend output does not conform to the claim schema."""


# --- backend --------------------------------------------------------------

class BackendError(ChartsumError):
    """Base class for text-generation backend failures."""


class Timeout(BackendError):
    """Backend call timed out after retries."""


class AuthError(BackendError):
    """Backend rejected the configured credentials."""


class RateLimited(BackendError):
    """Backend rate limit persisted through all retries."""


class TemplateMissing(BackendError):
    """Mock backend has no template for the requested tag."""


# --- documents / corpus ---------------------------------------------------

class EmptyDoc(ChartsumError):
    """Summary document has no sentences."""


class EmptyInput(ChartsumError):
    """Metric input is empty."""


class ZeroSentences(ChartsumError):
    """Hallucination rate requested over zero sentences."""


class SchemaVersionMismatch(ChartsumError):
    """Serialized document carries an unsupported schema version."""


class MalformedDocument(ChartsumError):
    """Serialized document cannot be decoded."""


class LayoutError(ChartsumError):
    """Corpus directory does not follow the expected layout."""


class SchemaError(ChartsumError):
    """A corpus entry violates the benchmark schema."""


class EmptyCorpus(ChartsumError):
    """Corpus has no entries."""


# --- pipeline / service ---------------------------------------------------

class PipelineError(ChartsumError):
    """Pipeline stage failure, wrapped with the stage name."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage={stage}: {cause}")
        self.stage = stage
        self.cause = cause


class ValidationError(ChartsumError):
    """Job payload failed ingest validation."""


class NotFound(ChartsumError):
    """Unknown job id."""


class JobNotDone(ChartsumError):
    """Chat requested on a job that has not finished."""
