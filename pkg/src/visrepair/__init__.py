"""Visibility-guided repair of triangle meshes into watertight 2-manifolds."""
from .config import RepairConfig
from .hausdorff import hausdorff
from .measures import BACKEND, classify_faces, compute_measures
from .mesh_io import IndexedMesh, load_mesh, normalize, parse_obj, save_mesh
from .pipeline import RepairReport, repair
from .topology import is_manifold, is_watertight, split_nonmanifold

__all__ = [
    "BACKEND",
    "IndexedMesh",
    "RepairConfig",
    "RepairReport",
    "classify_faces",
    "compute_measures",
    "hausdorff",
    "is_manifold",
    "is_watertight",
    "load_mesh",
    "normalize",
    "parse_obj",
    "repair",
    "save_mesh",
    "split_nonmanifold",
]
