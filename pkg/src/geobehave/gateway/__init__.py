"""Operational surface: the pipeline CLI and the what-if HTTP service."""

from .cli import main
from .config import PipelineConfig, load_config
from .service import ServicePaths, Snapshot, create_app

__all__ = [
    "main",
    "PipelineConfig",
    "load_config",
    "ServicePaths",
    "Snapshot",
    "create_app",
]
