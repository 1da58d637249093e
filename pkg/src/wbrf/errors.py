"""Exception types raised across the wbrf package."""


class WbrfError(Exception):
    """Base class for all wbrf-specific errors."""


class ComponentUnderflow(WbrfError):
    """A raw cast-vector component fell below the epsilon clamp in strict mode."""


class DegenerateImage(WbrfError):
    """An estimator could not produce a usable cast vector from the image."""


class DegenerateColor(WbrfError):
    """A manually supplied color is at or near black in strict mode."""


class RankDeficient(WbrfError):
    """Unregularized normal equations are singular."""


class InsufficientData(WbrfError):
    """Fewer training pairs than requested clusters."""


class FormatVersionMismatch(WbrfError):
    """Model file has an unsupported format version or kernel layout tag."""


class CorruptFile(WbrfError):
    """Model file failed structural or checksum validation."""


class DimensionMismatch(WbrfError):
    """Two images (or a vector/matrix pair) have incompatible shapes."""


class AllPixelsDegenerate(WbrfError):
    """Every pixel was excluded from the angular-error mean."""


class OutOfBoundsPixel(WbrfError):
    """Pixel coordinates lie outside the image."""


class NoPairsFound(WbrfError):
    """A dataset directory yielded no usable image pairs."""


class EmptyList(WbrfError):
    """An aggregate was requested over an empty collection."""
