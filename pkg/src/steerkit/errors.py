"""Exception types shared across the package.

Every domain error derives from SteerkitError so the CLI and the HTTP
service can map failures to exit codes / structured payloads in one place.
Each class carries a stable ``code`` string used on the wire.
"""


class SteerkitError(Exception):
    code = "internal_error"

    def __init__(self, message: str, **detail):
        super().__init__(message)
        self.message = message
        self.detail = detail

    def to_payload(self) -> dict:
        return {"code": self.code, "message": self.message, "detail": self.detail}


# --- dataset ---------------------------------------------------------------

class HeaderMismatch(SteerkitError):
    code = "header_mismatch"


class NonNumericCell(SteerkitError):
    code = "non_numeric_cell"

    def __init__(self, row: int, col: str):
        super().__init__(f"non-numeric cell at row {row}, column {col!r}", row=row, col=col)


class EmptyFile(SteerkitError):
    code = "empty_file"


class UnknownFeature(SteerkitError):
    code = "unknown_feature"


class DegenerateClass(SteerkitError):
    code = "degenerate_class"


class EmptyTable(SteerkitError):
    code = "empty_table"


# --- model -----------------------------------------------------------------

class MissingFeature(SteerkitError):
    code = "missing_feature"


class ZeroBaseline(SteerkitError):
    code = "zero_baseline"


# --- quality ---------------------------------------------------------------

class TooFewRows(SteerkitError):
    code = "too_few_rows"


class SchemaMismatch(SteerkitError):
    code = "schema_mismatch"


class MissingIssueKind(SteerkitError):
    code = "missing_issue_kind"


class DuplicateIssueKind(SteerkitError):
    code = "duplicate_issue_kind"


class NotCorrectable(SteerkitError):
    code = "not_correctable"


class NothingToCorrect(SteerkitError):
    code = "nothing_to_correct"


# --- explain ---------------------------------------------------------------

class MissingPart(SteerkitError):
    code = "missing_part"


# --- steering --------------------------------------------------------------

class AllRowsFiltered(SteerkitError):
    code = "all_rows_filtered"


class InvertedRange(SteerkitError):
    code = "inverted_range"


class UnknownVersion(SteerkitError):
    code = "unknown_version"


class NothingUnsaved(SteerkitError):
    code = "nothing_unsaved"


# --- analytics -------------------------------------------------------------

class EmptyCohort(SteerkitError):
    code = "empty_cohort"


class NoSuccesses(SteerkitError):
    code = "no_successes"
