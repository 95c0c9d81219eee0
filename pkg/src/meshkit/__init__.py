"""Hierarchical feature learning on triangle meshes."""
__version__ = "0.1"
