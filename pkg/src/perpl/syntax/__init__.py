"""Lexing, parsing, printing and desugaring of PERPL source programs."""
from .desugar import desugar
from .parser import parse_program, parse_type
from .printer import show_sexpr, show_stype, show_surface
from .surface import SurfaceProgram

__all__ = ["desugar", "parse_program", "parse_type", "show_sexpr", "show_stype", "show_surface",
           "SurfaceProgram"]
