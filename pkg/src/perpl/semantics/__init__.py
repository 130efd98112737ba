"""Finite denotations and compilation to equation systems."""
from .domain import Tagged, enumerate_domain, index_of, render, size, value_of
from .mspe import DEFAULT_MAX_VARS, compile_mspe, count_variables

__all__ = ["Tagged", "enumerate_domain", "index_of", "render", "size", "value_of",
           "DEFAULT_MAX_VARS", "compile_mspe", "count_variables"]
