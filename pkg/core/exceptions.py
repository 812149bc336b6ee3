"""
Custom exceptions for posekit
"""

from typing import Optional


class PoseKitError(Exception):
    """Base exception for all posekit errors"""
    pass


# .pose container exceptions
class PoseFormatError(PoseKitError):
    """Base exception for .pose reading/writing errors"""
    pass


class TruncatedFileError(PoseFormatError):
    """Byte length does not match the header or the frame stride"""
    def __init__(self, message: str, expected_stride: int = 0, remaining: int = 0):
        super().__init__(message)
        self.expected_stride = expected_stride
        self.remaining = remaining


class BadVersionError(PoseFormatError):
    """Unsupported file-format version"""
    pass


class BadIndexError(PoseFormatError):
    """Limb index out of range of the component's points"""
    pass


class BadUtf8Error(PoseFormatError):
    """String field could not be decoded as UTF-8"""
    pass


class InvariantViolationError(PoseFormatError):
    """Caller-constructed pose breaks a type invariant"""
    def __init__(self, message: str, issues: Optional[list] = None):
        super().__init__(message)
        self.issues = issues or []


class UnknownComponentError(PoseFormatError):
    """Requested component does not exist in the header"""
    pass


# Numeric pose operations
class PoseOpsError(PoseKitError):
    """Base exception for pose transformations"""
    pass


class DegenerateSkeletonError(PoseOpsError):
    """Reference distance is too small to normalize by"""
    pass


class MissingPointError(PoseOpsError):
    """Named point is absent from the header"""
    pass


class NotThreeDError(PoseOpsError):
    """Operation needs at least three axes"""
    pass


class CollinearPointsError(PoseOpsError):
    """All frames have collinear reference points"""
    pass


class ZeroFpsError(PoseOpsError):
    """Frame rate must be positive"""
    pass


class BadWindowError(PoseOpsError):
    """Invalid smoothing window"""
    pass


# Hand normalization
class HandError(PoseKitError):
    """Base exception for hand analysis"""
    pass


class MissingLandmarkError(HandError):
    """Required landmark is missing (confidence 0)"""
    pass


class DegenerateDirectionError(HandError):
    """WRIST -> M_MCP projection has zero length"""
    pass


class CollinearLandmarksError(HandError):
    """Palm landmarks do not span a plane"""
    pass


class DegenerateMetacarpalError(HandError):
    """Middle metacarpal has zero length"""
    pass


class InsufficientObservationsError(HandError):
    """Fewer than two usable observations in a group"""
    pass


# Segmentation
class SegmentationError(PoseKitError):
    """Base exception for tagging, decoding and metrics"""
    pass


class OverlappingSegmentsError(SegmentationError):
    """Segments overlap or are not sorted"""
    pass


class OutOfRangeError(SegmentationError):
    """Segment lies outside the sequence"""
    pass


class LengthMismatchError(SegmentationError):
    """Gold and predicted sequences differ in length"""
    pass


class EmptyGoldError(SegmentationError):
    """Gold segment list is empty"""
    pass


class BadTagError(SegmentationError):
    """Tag character outside {B, I, O}"""
    pass


# Stitching
class StitchError(PoseKitError):
    """Base exception for gloss-to-pose stitching"""
    pass


class SchemaMismatchError(StitchError):
    """Clips do not share header schema or fps"""
    pass


class NoSharedPointsError(StitchError):
    """No point is present in both frames of every candidate pair"""
    pass


class EmptyInputError(StitchError):
    """No clips given"""
    pass


# Formal SignWriting
class FswError(PoseKitError):
    """Base exception for FSW parsing and tokenization"""
    def __init__(self, message: str, position: int = -1):
        super().__init__(message)
        self.position = position


class BadBoxError(FswError):
    """Unknown box letter"""
    pass


class BadSymbolCodeError(FswError):
    """Symbol base outside S100-S38f or bad modifier digit"""
    pass


class BadCoordinateError(FswError):
    """Coordinate outside [250, 749]"""
    pass


class TrailingGarbageError(FswError):
    """Unparseable text after a sign"""
    pass


class MalformedStreamError(FswError):
    """Token stream does not follow box/position/grapheme structure"""
    pass


# Adapters and benchmark
class AdapterError(PoseKitError):
    """Base exception for foreign-format adapters"""
    pass


class BadSchemaError(AdapterError):
    """JSON does not follow the accepted OpenPose schema"""
    pass


class RaggedKeypointsError(AdapterError):
    """Keypoint array length is wrong"""
    pass


class BenchIOError(AdapterError):
    """Benchmark input/output failure"""
    pass


# Rendering
class RenderError(PoseKitError):
    """Base exception for rasterization"""
    pass


class FrameOutOfRangeError(RenderError):
    """Frame index outside the pose"""
    pass


# Config exceptions
class ConfigError(PoseKitError):
    """Configuration error"""
    pass


class MissingConfigError(ConfigError):
    """Config file does not exist"""
    pass
