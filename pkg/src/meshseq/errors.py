"""Exception types shared across the toolkit.

``MeshDataError`` covers everything caused by bad input data (files,
sequences, coordinate ranges); callers that need to distinguish usage
mistakes from data problems catch it as a group. Programming-contract
violations (shape mismatches, invalid hyperparameters) raise plain
``ValueError``.
"""


class MeshDataError(Exception):
    """Base class for errors caused by invalid input data."""


class ObjFormatError(MeshDataError):
    """Malformed Wavefront OBJ content."""


class DegenerateInputError(MeshDataError):
    """Geometry too degenerate to process (e.g. collapsed bounding box)."""


class OutOfRangeError(MeshDataError):
    """Coordinates outside the expected normalized range."""


class MalformedSequenceError(MeshDataError):
    """Token sequence violating the sequence invariants."""
