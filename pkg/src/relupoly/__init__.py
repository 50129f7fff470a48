"""Exact polyhedral analysis of ReLU network parameters.

Canonical complexes, tropical weights, dependency graphs, identifiability
verdicts, slab constructions and configuration-variety equations, all in
rational arithmetic.
"""
from .checks import Verdict, all_verdicts, analyse, functional_dimension_estimate, identifiability_verdict
from .complex import build_complex
from .construct import build_identifiable, build_minimal_nonidentifiable, compress_one_layer
from .depgraph import dependency_graph, depth_certificate
from .net import Network, canonicalize, equivalent_mod_symmetries, from_json, load, to_json
from .tropical import breakpoint_complex, facet_weight

__version__ = "0.1.0"

__all__ = [
    "Network", "Verdict", "all_verdicts", "analyse", "breakpoint_complex", "build_complex",
    "build_identifiable", "build_minimal_nonidentifiable", "canonicalize", "compress_one_layer",
    "dependency_graph", "depth_certificate", "equivalent_mod_symmetries", "facet_weight", "from_json",
    "functional_dimension_estimate", "identifiability_verdict", "load", "to_json",
]
