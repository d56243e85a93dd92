"""Coco instance datasets from session outputs."""
from .dataset import (SPLITS, CocoDataset, ImageRef, SplitMode, SplitSpec, UnmappedImage, ValidationReport,
                      assign_splits, emit_json, filter_categories, filter_small, subsample_frames,
                      validate_dataset)
from .export import (ExportConfig, ExportError, ExportResult, ManifestError, MissingSessions, SessionEntry,
                     build_datasets, export_dataset, parse_manifest, read_manifest)
from .instances import InstanceObservation, UnknownInstance, extract_instances
from .polygons import trace_polygons

__all__ = [
    "SPLITS", "CocoDataset", "ExportConfig", "ExportError", "ExportResult", "ImageRef",
    "InstanceObservation", "ManifestError", "MissingSessions", "SessionEntry", "SplitMode", "SplitSpec",
    "UnknownInstance", "UnmappedImage", "ValidationReport", "assign_splits", "build_datasets",
    "emit_json", "export_dataset", "extract_instances", "filter_categories", "filter_small",
    "parse_manifest", "read_manifest", "subsample_frames", "trace_polygons", "validate_dataset",
]
