"""Exception hierarchy shared across the package.

Every error carries a stable machine-readable ``code`` so the CLI and the
HTTP service can map failures to documented exit codes / status payloads
without string-matching messages.
"""


class CryscreenError(Exception):
    """Base class for all library errors."""

    code = "error"


# --- audio decoding ---------------------------------------------------------

class MalformedHeader(CryscreenError):
    code = "malformed_header"


class UnsupportedEncoding(CryscreenError):
    code = "unsupported_encoding"


class EmptyData(CryscreenError):
    code = "empty_data"


class LengthMismatch(CryscreenError):
    code = "length_mismatch"


# --- time-domain / spectral processing --------------------------------------

class EmptyAfterTrim(CryscreenError):
    code = "empty_after_trim"


class InputTooShort(CryscreenError):
    code = "input_too_short"


class NotPowerOfTwo(CryscreenError):
    code = "not_power_of_two"


class DegenerateFilter(CryscreenError):
    code = "degenerate_filter"


class SilentSignal(CryscreenError):
    code = "silent_signal"


# --- svm ---------------------------------------------------------------------

class DimensionMismatch(CryscreenError):
    code = "dimension_mismatch"


class SingleClassInput(CryscreenError):
    code = "single_class_input"


class TooFewSamples(CryscreenError):
    code = "too_few_samples"


# --- pipeline ----------------------------------------------------------------

class TooShort(CryscreenError):
    code = "too_short"


class EmptyVerdicts(CryscreenError):
    code = "empty_verdicts"


# --- corpus / evaluation -----------------------------------------------------

class MissingClassDir(CryscreenError):
    code = "missing_class_dir"


class BadManifestRow(CryscreenError):
    code = "bad_manifest_row"

    def __init__(self, row_index: int, message: str):
        super().__init__(f"manifest row {row_index}: {message}")
        self.row_index = row_index


class DuplicatePath(CryscreenError):
    code = "duplicate_path"


class MixedLabelSubject(CryscreenError):
    """A subject id appears under both classes; a subject-disjoint split
    would leak it across sides, so the corpus is rejected up front."""

    code = "mixed_label_subject"


class TooFewSubjects(CryscreenError):
    code = "too_few_subjects"


class EmptyPredictions(CryscreenError):
    code = "empty_predictions"


class IoFailure(CryscreenError):
    code = "io_failure"


# --- model files -------------------------------------------------------------

class BadMagic(CryscreenError):
    code = "bad_magic"


class UnsupportedVersion(CryscreenError):
    code = "unsupported_version"


class DigestMismatch(CryscreenError):
    code = "digest_mismatch"


class Truncated(CryscreenError):
    code = "truncated"


# --- configuration -----------------------------------------------------------

class UnknownConfigKey(CryscreenError):
    code = "unknown_config_key"

    def __init__(self, key: str):
        super().__init__(f"unknown config key: {key}")
        self.key = key


class InvalidConfigValue(CryscreenError):
    code = "invalid_config_value"
