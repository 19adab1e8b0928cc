"""Textual function nets, feature views, and the consistency checks between them."""

from .analysis import blocks_of_view, flatten_communication, impact, matrix
from .checker import check_view, lint_net, match_connectors
from .diagnostics import Diagnostic, Severity, Span
from .formatter import serialize_net, serialize_view
from .model import FeatureView, InternalError, ResolvedNet
from .parser import parse_net_source, parse_view_source
from .resolver import expand_types, merge_fragments, resolve, resolve_ref

__version__ = "0.1.0"

__all__ = [
    "Diagnostic",
    "FeatureView",
    "InternalError",
    "ResolvedNet",
    "Severity",
    "Span",
    "blocks_of_view",
    "check_view",
    "expand_types",
    "flatten_communication",
    "impact",
    "lint_net",
    "match_connectors",
    "matrix",
    "merge_fragments",
    "parse_net_source",
    "parse_view_source",
    "resolve",
    "resolve_ref",
    "serialize_net",
    "serialize_view",
]
