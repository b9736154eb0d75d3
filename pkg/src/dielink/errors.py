"""Exception hierarchy shared across the package."""


class DielinkError(Exception):
    """Base class for all package errors."""


# --- imaging ---

class DecodeError(DielinkError):
    """The byte stream is not a decodable raster image."""


class SegmentationFailure(DielinkError):
    """No foreground (coin) region could be separated from the background."""


# --- registration ---

class TooFewKeypoints(DielinkError):
    """Fewer than the minimum number of interest points were detected."""


class NoMatches(DielinkError):
    """The ratio test left no keypoint correspondences."""


class DegenerateGeometry(DielinkError):
    """Correspondences are coincident or otherwise unusable for a fit."""


class ConsensusFailure(DielinkError):
    """Robust fitting found no transform with enough inlier support."""


# --- scoring ---

class EmptyOverlap(DielinkError):
    """The valid overlap region contains no usable comparison windows."""


class DatasetTooSmall(DielinkError):
    """A dataset needs at least two images to form a pair."""


# --- notations CSV ---

class NotationsFormatError(DielinkError):
    """A notations CSV file violates the export schema.

    `line` is the 1-based line number of the offending record.
    """

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


# --- datastore ---

class StoreError(DielinkError):
    """Base class for persistence-layer errors."""


class UploadRejected(StoreError):
    """An uploaded archive violates one of the ingestion rules.

    `rule` is a stable machine-readable identifier of the broken rule.
    """

    rule = "UPLOAD_REJECTED"


class CorruptArchive(UploadRejected):
    rule = "CORRUPT_ARCHIVE"


class ArchiveTooLarge(UploadRejected):
    rule = "ARCHIVE_TOO_LARGE"


class TooManyFiles(UploadRejected):
    rule = "TOO_MANY_FILES"


class NonImageEntry(UploadRejected):
    rule = "NON_IMAGE_ENTRY"

    def __init__(self, name: str):
        super().__init__(f"archive entry is not an image: {name}")
        self.name = name


class DuplicateName(StoreError):
    """A dataset with this name already exists."""


class DuplicateFileNames(StoreError):
    """Two upload entries share the same file name."""


class InvalidState(StoreError):
    """The dataset is not in the state this transition requires."""


class UnknownDataset(StoreError):
    """No dataset with this id."""


class UnknownPair(StoreError):
    """The named pair does not exist in the dataset."""


class DatasetNotComputed(StoreError):
    """Results were requested before scoring finished (or after it failed).

    `state` carries the dataset's actual state.
    """

    def __init__(self, state: str):
        super().__init__(f"dataset is {state}, not computed")
        self.state = state
