"""Affine-to-linear rewriting and recursive-type elimination."""
from .dr import (DRGraph, Elimination, Site, build_dr_graph, choose_step, d_phi, defunctionalize,
                 eliminate_recursive_types, fold_sites, r_phi, refunctionalize, unfold_sites)
from .linearize import discard_name, lin_type, linearize

__all__ = ["DRGraph", "Elimination", "Site", "build_dr_graph", "choose_step", "d_phi", "defunctionalize",
           "eliminate_recursive_types", "fold_sites", "r_phi", "refunctionalize", "unfold_sites",
           "discard_name", "lin_type", "linearize"]
