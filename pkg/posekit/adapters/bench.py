"""
Bench - .pose vs OpenPose JSON read benchmark

Times JSON parsing alone (no tensor conversion), a full .pose read and a
body-only .pose read on synthetic pairs of identical content.

Timing method: each path runs `warmup` untimed calls, then `iterations`
(at least 5) calls timed one by one with time.perf_counter. A call covers
reading the file from disk plus parsing. Timing keeps the mean and the
sample standard deviation of those runs; speedup is the JSON mean over the
full .pose read mean.
"""

import csv
import io
import json
import logging
import statistics
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, List, Sequence, Tuple, Union

from core.exceptions import BenchIOError
from core.logging_config import LogContext
from ..pose import generate_synthetic, read_pose, read_pose_body, write_pose
from .openpose import ingest_openpose, openpose_specs, pose_to_openpose_json

logger = logging.getLogger(__name__)

MIN_ITERATIONS = 5
DEFAULT_WARMUP = 2
BENCH_FPS = 25
BENCH_CANVAS = 512


@dataclass(frozen=True)
class Timing:
    """Mean and sample standard deviation in seconds"""
    mean: float
    std: float

    @classmethod
    def of(cls, samples: Sequence[float]) -> "Timing":
        return cls(statistics.mean(samples), statistics.stdev(samples) if len(samples) > 1 else 0.0)

    def __str__(self) -> str:
        return f"{_human(self.mean)} ± {_human(self.std)}"


def _human(seconds: float) -> str:
    if seconds >= 1:
        return f"{seconds:.2f} s"
    if seconds >= 1e-3:
        return f"{seconds * 1e3:.2f} ms"
    return f"{seconds * 1e6:.0f} us"


@dataclass
class BenchReport:
    frames: int
    json_bytes: int
    pose_bytes: int
    json_parse: Timing
    pose_full_read: Timing
    pose_body_read: Timing
    iterations: int

    @property
    def size_ratio(self) -> float:
        return self.pose_bytes / self.json_bytes if self.json_bytes else 0.0

    @property
    def speedup(self) -> float:
        """JSON parse time over full .pose read time"""
        return self.json_parse.mean / self.pose_full_read.mean if self.pose_full_read.mean else float("inf")


def _time(action: Callable[[], object], iterations: int, warmup: int) -> Timing:
    for _ in range(warmup):
        action()
    samples = []
    for _ in range(iterations):
        start = time.perf_counter()
        action()
        samples.append(time.perf_counter() - start)
    return Timing.of(samples)


def make_benchmark_pair(
    frames: int,
    seed: int,
    out_dir: Union[str, Path],
    people: int = 1,
) -> Tuple[Path, Path]:
    """Write the same synthetic 137-point sequence as JSON and as .pose"""
    if frames < 1:
        raise ValueError("frames must be at least 1")
    pose = generate_synthetic(
        frames, people, openpose_specs(), seed,
        fps=BENCH_FPS, width=BENCH_CANVAS, height=BENCH_CANVAS,
    )
    out = Path(out_dir)
    json_path = out / f"bench_{frames}.json"
    pose_path = out / f"bench_{frames}.pose"
    try:
        out.mkdir(parents=True, exist_ok=True)
        json_path.write_text(pose_to_openpose_json(pose), encoding="utf-8")
        pose_path.write_bytes(write_pose(pose))
    except OSError as e:
        raise BenchIOError(f"Cannot write benchmark pair to {out}: {e}") from e
    logger.debug(f"Wrote benchmark pair for {frames} frames to {out}")
    return json_path, pose_path


def bench_read(
    json_path: Union[str, Path],
    pose_path: Union[str, Path],
    iterations: int = MIN_ITERATIONS,
    warmup: int = DEFAULT_WARMUP,
) -> BenchReport:
    """Time the three read paths after checking both files hold the same pose"""
    if iterations < MIN_ITERATIONS:
        raise ValueError(f"iterations must be at least {MIN_ITERATIONS}")
    json_path, pose_path = Path(json_path), Path(pose_path)
    try:
        json_raw = json_path.read_bytes()
        pose_raw = pose_path.read_bytes()
    except OSError as e:
        raise BenchIOError(f"Cannot read benchmark inputs: {e}") from e

    pose = read_pose(pose_raw)
    if ingest_openpose(json_raw, people=pose.people_count) != pose:
        raise BenchIOError(f"{json_path.name} and {pose_path.name} do not hold the same pose")

    # every timed path includes reading the file from disk
    json_parse = _time(lambda: json.loads(json_path.read_bytes()), iterations, warmup)
    full_read = _time(lambda: read_pose(pose_path.read_bytes()), iterations, warmup)
    body_read = _time(lambda: read_pose_body(pose_path.read_bytes()), iterations, warmup)

    return BenchReport(
        frames=pose.frame_count,
        json_bytes=len(json_raw),
        pose_bytes=len(pose_raw),
        json_parse=json_parse,
        pose_full_read=full_read,
        pose_body_read=body_read,
        iterations=iterations,
    )


def run_benchmark(
    frame_counts: Sequence[int],
    out_dir: Union[str, Path],
    seed: int,
    iterations: int = MIN_ITERATIONS,
    warmup: int = DEFAULT_WARMUP,
) -> List[BenchReport]:
    """Generate a pair per frame count and benchmark it"""
    reports = []
    for frames in frame_counts:
        with LogContext(logger, operation="bench", case=frames):
            json_path, pose_path = make_benchmark_pair(frames, seed, out_dir)
            report = bench_read(json_path, pose_path, iterations, warmup)
            logger.info(
                f"{frames} frames: json {report.json_parse}, pose {report.pose_full_read}, "
                f"body {report.pose_body_read}, size ratio {report.size_ratio:.2f}"
            )
        reports.append(report)
    return reports


_COLUMNS = ("frames", "json size", "pose size", "json parse", "pose read", "body read", "speedup")


def _size(n: int) -> str:
    for unit, scale in (("MB", 1e6), ("KB", 1e3)):
        if n >= scale:
            return f"{n / scale:.1f} {unit}"
    return f"{n} B"


def format_report_text(reports: Sequence[BenchReport]) -> str:
    """Aligned columns, one row per case"""
    rows = [_COLUMNS] + [
        (str(r.frames), _size(r.json_bytes), _size(r.pose_bytes), str(r.json_parse),
         str(r.pose_full_read), str(r.pose_body_read), f"{r.speedup:.1f}x")
        for r in reports
    ]
    widths = [max(len(row[i]) for row in rows) for i in range(len(_COLUMNS))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    return "\n".join(lines) + "\n"


def format_report_csv(reports: Sequence[BenchReport]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow([
        "frames", "json_bytes", "pose_bytes",
        "json_parse_mean_s", "json_parse_std_s",
        "pose_full_read_mean_s", "pose_full_read_std_s",
        "pose_body_read_mean_s", "pose_body_read_std_s",
        "iterations",
    ])
    for r in reports:
        writer.writerow([
            r.frames, r.json_bytes, r.pose_bytes,
            repr(r.json_parse.mean), repr(r.json_parse.std),
            repr(r.pose_full_read.mean), repr(r.pose_full_read.std),
            repr(r.pose_body_read.mean), repr(r.pose_body_read.std),
            r.iterations,
        ])
    return out.getvalue()
