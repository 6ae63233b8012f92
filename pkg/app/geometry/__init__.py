from .contact import (
    ContactReport,
    GraphChart,
    chart_hessian,
    contact_order,
    graph_chart,
    householder,
    sugimoto_indices,
)
from .limits import LimitingGeometry, limiting_geometry
from .phase import HomogeneousPhase, linear_shift, trace_point

__all__ = [
    "ContactReport",
    "GraphChart",
    "HomogeneousPhase",
    "LimitingGeometry",
    "chart_hessian",
    "contact_order",
    "graph_chart",
    "householder",
    "limiting_geometry",
    "linear_shift",
    "sugimoto_indices",
    "trace_point",
]
