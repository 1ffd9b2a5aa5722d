"""Conflict-free collaborative editing of edge-labelled trees."""
from .dependence import all_compliant_linearizations, dependencies_of, depends_on, is_valid_sequence
from .engine import DeleteEdge, InsertChild, Relabel, Request, SiteEngine, StaleTarget
from .identity import ROOT_ID, Id, StateVector
from .simnet import RunReport, ScenarioConfig, check_convergence, run_scenario
from .tree import NO_VALUE, Add, ChLab, Del, Label, Tree, canonical_digest, canonical_form
from .wire import decode_request, encode_request
from .xmlmap import export_xml, import_xml

__all__ = [
    "Add", "ChLab", "Del", "DeleteEdge", "Id", "InsertChild", "Label", "NO_VALUE",
    "ROOT_ID", "Relabel", "Request", "RunReport", "ScenarioConfig", "SiteEngine",
    "StaleTarget", "StateVector", "Tree", "all_compliant_linearizations",
    "canonical_digest", "canonical_form", "check_convergence", "decode_request",
    "dependencies_of", "depends_on", "encode_request", "export_xml", "import_xml",
    "is_valid_sequence", "run_scenario",
]
