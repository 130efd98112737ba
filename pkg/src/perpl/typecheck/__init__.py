"""Type and tag inference plus linear/affine usage checking."""
from ..core import is_positive
from .check import AFFINE, LINEAR, TypedProgram, typecheck
from .elaborate import elaborate

infer_tags = elaborate

__all__ = ["AFFINE", "LINEAR", "TypedProgram", "typecheck", "elaborate", "infer_tags", "is_positive"]
