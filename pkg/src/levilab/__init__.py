"""levilab: q-plurisubharmonicity, Levi forms, Hartogs sweeps and CR graph certificates.

Layers, bottom to top: :mod:`~levilab.expr` (expression DSL),
:mod:`~levilab.calculus` (Wirtinger jets), :mod:`~levilab.levi` (inertia
and q-psh verdicts), :mod:`~levilab.domains` (sublevel domains and
boundary distance), :mod:`~levilab.hartogs` (Hartogs figures and disc
families), :mod:`~levilab.graphs` (graph certificates and leaves) and
:mod:`~levilab.cli` (scenario runner).
"""

from .calculus import jet2, validate_jet_fd, wirtinger_derive
from .domains import SublevelDomain, boundary_distance, hartogs_pcv_via_distance, levi_pcv_at_boundary
from .expr import Point, evaluate, parse, print_expr
from .graphs import GraphMapping, foliation_certificate, trace_leaf
from .hartogs import AnalyticFamily, HartogsFigure, kontinuitaetssatz_sweep
from .levi import classify_qpsh, holomorphic_tangent, inertia

__version__ = "0.1.0"

__all__ = [
    "AnalyticFamily", "GraphMapping", "HartogsFigure", "Point", "SublevelDomain",
    "boundary_distance", "classify_qpsh", "evaluate", "foliation_certificate",
    "hartogs_pcv_via_distance", "holomorphic_tangent", "inertia", "jet2",
    "kontinuitaetssatz_sweep", "levi_pcv_at_boundary", "parse", "print_expr", "trace_leaf",
    "validate_jet_fd", "wirtinger_derive",
]
