"""Pipeline orchestration, durable storage, and the review HTTP API."""

from .app import API_VERSION, create_app, item_to_json
from .pipeline import (
    JobRunner,
    PipelineModels,
    heuristic_models,
    load_pipeline_models,
    run_processing,
)
from .storage import (
    ACTIVE_STATES,
    ALLOWED_TRANSITIONS,
    JOB_STATES,
    SCHEMA_VERSION,
    ProcessingJob,
    Storage,
)

__all__ = [
    "API_VERSION",
    "ACTIVE_STATES",
    "ALLOWED_TRANSITIONS",
    "JOB_STATES",
    "JobRunner",
    "PipelineModels",
    "ProcessingJob",
    "SCHEMA_VERSION",
    "Storage",
    "create_app",
    "heuristic_models",
    "item_to_json",
    "load_pipeline_models",
    "run_processing",
]
