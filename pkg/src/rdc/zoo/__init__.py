"""Analysis/synthesis transforms, hyper-transforms, and their layer inventories."""

from .inventory import LayerRecord, inventory_params, layer_inventory
from .transforms import (
    TransformHandle,
    build_analysis,
    build_hyper_analysis,
    build_hyper_synthesis,
    build_synthesis,
)

__all__ = [
    "LayerRecord",
    "TransformHandle",
    "build_analysis",
    "build_hyper_analysis",
    "build_hyper_synthesis",
    "build_synthesis",
    "inventory_params",
    "layer_inventory",
]
