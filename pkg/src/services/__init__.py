"""Service layer: the pipeline stages behind the command line."""

from src.services.pipeline_service import ABLATION_VARIANTS, PipelineService

__all__ = [
    "ABLATION_VARIANTS",
    "PipelineService",
]
