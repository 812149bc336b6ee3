"""Foreign-format adapters and the read benchmark"""

from .openpose import (
    OPENPOSE_COMPONENTS,
    ingest_openpose,
    ingest_openpose_dir,
    openpose_specs,
    pose_to_openpose_json,
)
from .bench import (
    BenchReport,
    Timing,
    bench_read,
    format_report_csv,
    format_report_text,
    make_benchmark_pair,
    run_benchmark,
)

__all__ = [
    "OPENPOSE_COMPONENTS",
    "ingest_openpose",
    "ingest_openpose_dir",
    "openpose_specs",
    "pose_to_openpose_json",
    "BenchReport",
    "Timing",
    "bench_read",
    "format_report_csv",
    "format_report_text",
    "make_benchmark_pair",
    "run_benchmark",
]
