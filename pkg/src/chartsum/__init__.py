"""chartsum: accurate, semantically rich summaries of time-series line charts.

Deterministic analysis modules (patch segmentation, cross-dimension
relations, claim-verification oracles) wrap a pluggable text-generation
backend in a bounded multi-agent refinement loop with a self-consistency
correction pass; evaluation metrics and a benchmark schema ship alongside.
"""

from .agents import PipelineConfig, Transcript, chat_refine, run_pipeline
from .backend import GenRequest, GenResponse, MockBackend, RemoteBackend, backend_from_env
from .ingest import (
    BoundChart,
    ChartSpec,
    TimeSeriesDataset,
    TimeWindow,
    bind,
    load_chart,
    parse_chart_spec,
    parse_data_table,
)
from .patches import Patch, PatchStats, SegmentationConfig, TrendClass, segment, uni_insight
from .relations import MultiInsightRecord, RelationClass, multi_insight
from .sumdoc import DataRef, Sentence, SummaryDoc, deserialize, serialize

__version__ = "0.1.0"

__all__ = [
    "BoundChart",
    "ChartSpec",
    "DataRef",
    "GenRequest",
    "GenResponse",
    "MockBackend",
    "MultiInsightRecord",
    "Patch",
    "PatchStats",
    "PipelineConfig",
    "RelationClass",
    "RemoteBackend",
    "SegmentationConfig",
    "Sentence",
    "SummaryDoc",
    "TimeSeriesDataset",
    "TimeWindow",
    "Transcript",
    "TrendClass",
    "backend_from_env",
    "bind",
    "chat_refine",
    "deserialize",
    "load_chart",
    "multi_insight",
    "parse_chart_spec",
    "parse_data_table",
    "run_pipeline",
    "segment",
    "serialize",
    "uni_insight",
]
