"""Exception types shared across the engine."""


class MicroastError(Exception):
    """Base class for all engine errors."""


class ShapeError(MicroastError):
    """Tensor extents or channel counts violate an operation contract."""


class SchemaError(MicroastError):
    """Weight names/shapes do not match the expected architecture."""


class IntegrityError(MicroastError):
    """Weight container is structurally invalid or fails its checksum."""


class ImageError(MicroastError):
    """Image file cannot be decoded or has an unsupported format."""
