"""Degrees-of-freedom recovery for CAD assemblies."""

from mateforge.config import ToleranceConfig
from mateforge.lines import AxisLine, canonicalize_line, directions_parallel, lines_coincident
from mateforge.model import Assembly, Feature, Mate, MateType, Part, Provenance, TriangleMesh
from mateforge.motion import MotionGroup, compose, intersect, relative_motion
from mateforge.transforms import RigidTransform, compose_transforms, screw_decompose

__version__ = "0.1.0"

__all__ = [
    "Assembly",
    "AxisLine",
    "Feature",
    "Mate",
    "MateType",
    "MotionGroup",
    "Part",
    "Provenance",
    "RigidTransform",
    "ToleranceConfig",
    "TriangleMesh",
    "canonicalize_line",
    "compose",
    "compose_transforms",
    "directions_parallel",
    "intersect",
    "lines_coincident",
    "relative_motion",
    "screw_decompose",
]
