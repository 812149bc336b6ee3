"""
posekit CLI - batch front end over the posekit library

Commands:
- posekit info FILE.pose                      - header summary and validation
- posekit convert IN OUT                      - OpenPose JSON <-> .pose
- posekit components / remove-points          - schema edits
- posekit normalize / augment / fps / flow / smooth
- posekit hand-normalize / hand-metrics
- posekit segment-encode / segment-decode / segment-eval / segment-tune
- posekit stitch CLIP... -o OUT
- posekit fsw tokenize / fsw detokenize       - stdin -> stdout
- posekit bench / render

Exit codes: 0 success, 1 usage error, 2 data error.
"""

import csv
import sys
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import click

from core.config import Config, load_config
from core.exceptions import PoseKitError
from core.logging_config import setup_logging
from posekit.adapters import (
    format_report_csv,
    format_report_text,
    ingest_openpose,
    ingest_openpose_dir,
    pose_to_openpose_json,
    run_benchmark,
)
from posekit.fsw import detokenize_lines, tokenize_lines
from posekit.hand_norm import (
    HAND_POINT_COUNT,
    Handedness,
    cce,
    load_hand_groups,
    mace,
    normalize_pose_hands,
)
from posekit.pose import (
    Pose,
    header_summary,
    read_pose,
    remove_points,
    select_components,
    validate,
    write_pose,
)
from posekit.pose_ops import (
    AffineParams,
    augment,
    interpolate_fps,
    normalize_plane,
    normalize_shoulders,
    optical_flow,
    savgol_smooth,
)
from posekit.render import RenderConfig, render_sequence
from posekit.segmentation import (
    DecodeMode,
    Scheme,
    SegmentKind,
    ProbSeries,
    TagSequence,
    decode_probs,
    format_segments,
    frame_f1,
    parse_segments,
    segment_iou,
    segment_percentage,
    segments_to_tags,
    tune_thresholds,
)
from posekit.stitcher import StitchConfig, stitch

from .display import Display, DisplayMode


def _read(path: str) -> Pose:
    return read_pose(Path(path).read_bytes())


def _write(pose: Pose, path: str) -> None:
    Path(path).write_bytes(write_pose(pose))


def _names(value: str, count: int, option: str) -> List[str]:
    names = [name.strip() for name in value.split(",") if name.strip()]
    if len(names) != count:
        raise click.BadParameter(f"expected {count} comma-separated names", param_hint=option)
    return names


def _emit(text: str, output: Optional[str]) -> None:
    """Write text to a file, or to stdout when no file is given"""
    if output:
        Path(output).write_text(text, encoding="utf-8", newline="\n")
    else:
        click.echo(text, nl=False)


def _config(ctx: click.Context) -> Config:
    return ctx.obj["config"]


def _display(ctx: click.Context) -> Display:
    return ctx.obj["display"]


@click.group()
@click.option('--debug', is_flag=True, help='Enable debug logging')
@click.option('--quiet', is_flag=True, help='Only warnings and errors on stderr')
@click.option('--config', 'config_path', type=click.Path(dir_okay=False), default=None,
              help='YAML file with toolkit defaults')
@click.option('--json-logs', is_flag=True, help='Write JSON log records to the log directory')
@click.option('--log-dir', type=click.Path(file_okay=False), default=None, help='Directory for log files')
@click.pass_context
def cli(ctx, debug, quiet, config_path, json_logs, log_dir):
    """posekit - pose data engineering toolkit

    Reads and writes .pose files, normalizes and augments poses, decodes
    segments, tokenizes SignWriting and stitches clips.

    \b
    Examples:
        posekit info video.pose
        posekit convert keypoints.json video.pose
        posekit segment-decode --tb 50 --to 50 probs.csv
        echo "M518x529S14c20481x471" | posekit fsw tokenize
        posekit bench --frames 1000 --frames 10000 --iters 5 --seed 0
    """
    ctx.ensure_object(dict)
    config = load_config(
        config_path,
        log_level="DEBUG" if debug else None,
        json_logs=json_logs or None,
        log_dir=log_dir,
    )
    file_logs = log_dir is not None or config.json_logs
    setup_logging(
        level=config.log_level,
        log_dir=str(config.logs_path) if file_logs else None,
        json_format=config.json_logs,
    )
    ctx.obj['debug'] = debug
    ctx.obj['config'] = config
    ctx.obj['display'] = Display(DisplayMode.QUIET if quiet else DisplayMode.VERBOSE)


# ---------------------------------------------------------------------------
# .pose files
# ---------------------------------------------------------------------------

@cli.command()
@click.argument('input_path', type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def info(ctx, input_path):
    """Print the header summary and validate the file"""
    pose = _read(input_path)
    click.echo(header_summary(pose))
    report = validate(pose)
    if report.ok:
        click.echo("valid: yes")
    else:
        click.echo(f"valid: no ({len(report)} issues)")
        for issue in report.issues:
            _display(ctx).warning(str(issue))


@cli.command()
@click.argument('input_path', type=click.Path(exists=True))
@click.argument('output_path', type=click.Path())
@click.option('--fps', type=click.IntRange(min=1), default=None,
              help='Frame rate for OpenPose input (default: from JSON, else 25)')
@click.option('--people', type=click.IntRange(min=0), default=None, help='Pad or truncate to N people')
@click.pass_context
def convert(ctx, input_path, output_path, fps, people):
    """Convert between OpenPose JSON (file or frame directory) and .pose

    Direction follows the file extensions: .json in means ingest, .json out
    means export.
    """
    source = Path(input_path)
    if source.is_dir():
        pose = ingest_openpose_dir(source, fps=fps or 25, people=people)
    elif source.suffix.lower() == ".json":
        pose = ingest_openpose(source.read_bytes(), people=people, fps=fps)
    else:
        pose = _read(input_path)

    if Path(output_path).suffix.lower() == ".json":
        Path(output_path).write_text(pose_to_openpose_json(pose), encoding="utf-8")
    else:
        _write(pose, output_path)
    _display(ctx).success(f"{pose.frame_count} frames -> {output_path}")


@cli.command()
@click.argument('input_path', type=click.Path(exists=True, dir_okay=False))
@click.argument('output_path', type=click.Path())
@click.option('--keep', 'names', multiple=True, required=True, help='Component to keep (repeatable)')
def components(input_path, output_path, names):
    """Keep only the named components, in the given order"""
    _write(select_components(_read(input_path), list(names)), output_path)


@cli.command('remove-points')
@click.argument('input_path', type=click.Path(exists=True, dir_okay=False))
@click.argument('output_path', type=click.Path())
@click.option('--component', required=True, help='Component holding the points')
@click.option('--points', required=True, help='Comma-separated point names')
def remove_points_cmd(input_path, output_path, component, points):
    """Drop points from a component and re-base its limbs"""
    names = [name.strip() for name in points.split(",") if name.strip()]
    _write(remove_points(_read(input_path), component, names), output_path)


# ---------------------------------------------------------------------------
# Pose operations
# ---------------------------------------------------------------------------

@cli.command()
@click.argument('input_path', type=click.Path(exists=True, dir_okay=False))
@click.argument('output_path', type=click.Path())
@click.option('--shoulders', default=None, help='LEFT,RIGHT point names')
@click.option('--plane', default=None, help='A,B,C point names (3-D poses)')
def normalize(input_path, output_path, shoulders, plane):
    """Normalize by shoulder distance or rotate a plane to face the camera"""
    if (shoulders is None) == (plane is None):
        raise click.UsageError("Give exactly one of --shoulders or --plane")
    pose = _read(input_path)
    if shoulders is not None:
        left, right = _names(shoulders, 2, '--shoulders')
        pose = normalize_shoulders(pose, left, right)
    else:
        a, b, c = _names(plane, 3, '--plane')
        pose = normalize_plane(pose, a, b, c)
    _write(pose, output_path)


@cli.command('augment')
@click.argument('input_path', type=click.Path(exists=True, dir_okay=False))
@click.argument('output_path', type=click.Path())
@click.option('--rotate', type=float, default=0.0, help='Rotation in degrees')
@click.option('--scale', type=click.FloatRange(min=0, min_open=True), default=1.0)
@click.option('--shear', type=float, default=0.0, help='Horizontal shear factor')
@click.option('--shear-y', type=float, default=0.0, help='Vertical shear factor')
@click.option('--translate', type=(float, float), default=(0.0, 0.0), help='X Y offset')
@click.option('--reflect', is_flag=True, help='Mirror x')
@click.option('--noise', type=click.FloatRange(min=0), default=0.0, help='Gaussian sigma')
@click.option('--dropout', type=click.FloatRange(min=0, max=1, max_open=True), default=0.0,
              help='Frame drop probability')
@click.option('--seed', type=int, required=True)
def augment_cmd(input_path, output_path, rotate, scale, shear, shear_y, translate, reflect,
                noise, dropout, seed):
    """Affine transform, then noise, then frame dropout"""
    params = AffineParams(
        rotation_deg=rotate, scale=scale, shear_x=shear, shear_y=shear_y,
        translate=translate, reflect_x=reflect,
    )
    pose = augment(_read(input_path), params, noise_sigma=noise, dropout=dropout, seed=seed)
    _write(pose, output_path)


@cli.command('fps')
@click.argument('input_path', type=click.Path(exists=True, dir_okay=False))
@click.argument('output_path', type=click.Path())
@click.option('--fps', 'new_fps', type=click.IntRange(min=1), required=True, help='Target frame rate')
def fps_cmd(input_path, output_path, new_fps):
    """Resample to a new frame rate"""
    _write(interpolate_fps(_read(input_path), new_fps), output_path)


@cli.command()
@click.argument('input_path', type=click.Path(exists=True, dir_okay=False))
@click.option('-o', '--output', default=None, help='CSV file (default: stdout)')
def flow(input_path, output):
    """Per-point optical flow as CSV: frame,person,point,value"""
    series = optical_flow(_read(input_path))
    lines = ["frame,person,point,value\n"]
    lines.extend(f"{t},{p},{n},{value!r}\n" for t, p, n, value in series.to_rows())
    _emit("".join(lines), output)


@cli.command()
@click.argument('input_path', type=click.Path(exists=True, dir_okay=False))
@click.argument('output_path', type=click.Path())
@click.option('--window', type=int, default=None, help='Odd window length')
@click.option('--polyorder', type=int, default=None)
@click.pass_context
def smooth(ctx, input_path, output_path, window, polyorder):
    """Savitzky-Golay smoothing along time"""
    config = _config(ctx)
    pose = savgol_smooth(
        _read(input_path),
        window if window is not None else config.savgol_window,
        polyorder if polyorder is not None else config.savgol_polyorder,
    )
    _write(pose, output_path)


# ---------------------------------------------------------------------------
# Hands
# ---------------------------------------------------------------------------

def _hand_components(pose: Pose) -> List[str]:
    return [c.name for c in pose.header.components
            if c.point_count == HAND_POINT_COUNT and "HAND" in c.name.upper()]


@cli.command('hand-normalize')
@click.argument('input_path', type=click.Path(exists=True, dir_okay=False))
@click.argument('output_path', type=click.Path())
@click.option('--component', 'names', multiple=True,
              help='21-point hand component (default: every hand component)')
def hand_normalize(input_path, output_path, names):
    """Rotate and scale every hand into the canonical frame"""
    pose = _read(input_path)
    chosen = list(names) or _hand_components(pose)
    if not chosen:
        raise click.UsageError("No 21-point hand component found; pass --component")
    _write(normalize_pose_hands(pose, chosen), output_path)


@cli.command('hand-metrics')
@click.argument('manifest', type=click.Path(exists=True, dir_okay=False))
@click.option('--component', required=True, help='Hand component in every listed file')
@click.option('--handedness', type=click.Choice(['left', 'right']), default=None,
              help='Override handedness inferred from the component name')
@click.option('--mace', 'want_mace', is_flag=True, help='Multi-angle consistency error')
@click.option('--cce', 'want_cce', is_flag=True, help='Crop consistency error')
def hand_metrics(manifest, component, handedness, want_mace, want_cce):
    """Consistency errors per hand-shape group

    MANIFEST is YAML mapping each shape id to a list of .pose files.
    Without --mace/--cce both metrics are printed.
    """
    if not (want_mace or want_cce):
        want_mace = want_cce = True
    side = Handedness(handedness.capitalize()) if handedness else None
    groups = load_hand_groups(manifest, component, side)
    columns = (["mace"] if want_mace else []) + (["cce"] if want_cce else [])
    click.echo("\t".join(["shape"] + columns))
    for group in groups:
        row = [group.shape_id]
        if want_mace:
            row.append(f"{mace(group):.6f}")
        if want_cce:
            row.append(f"{cce(group):.6f}")
        click.echo("\t".join(row))


# ---------------------------------------------------------------------------
# Segmentation
# ---------------------------------------------------------------------------

_SCHEMES = click.Choice([s.value for s in Scheme], case_sensitive=False)
_KINDS = click.Choice([k.value for k in SegmentKind])


def _read_segments(path: str):
    return parse_segments(Path(path).read_text(encoding="utf-8"))


@cli.command('segment-encode')
@click.argument('segments_path', type=click.Path(exists=True, dir_okay=False))
@click.option('--length', type=click.IntRange(min=0), required=True, help='Frame count')
@click.option('--scheme', type=_SCHEMES, default=None, help='BIO (default) or IO')
@click.pass_context
def segment_encode(ctx, segments_path, length, scheme):
    """Segments file -> one line of tags"""
    chosen = Scheme((scheme or _config(ctx).default_scheme).upper())
    click.echo(str(segments_to_tags(_read_segments(segments_path), length, chosen)))


@cli.command('segment-decode')
@click.argument('probs_path', type=click.Path(exists=True, dir_okay=False))
@click.option('--tb', 'threshold_b', type=click.FloatRange(0, 100), default=None, help='B threshold')
@click.option('--to', 'threshold_o', type=click.FloatRange(0, 100), default=None, help='O threshold')
@click.option('--mode', type=click.Choice([m.value for m in DecodeMode]), default=DecodeMode.THRESHOLD.value)
@click.option('--restart-on-b', is_flag=True, help='A closing B frame opens the next segment')
@click.option('--kind', type=_KINDS, default=SegmentKind.SIGN.value)
@click.option('-o', '--output', default=None, help='Segments file (default: stdout)')
@click.pass_context
def segment_decode(ctx, probs_path, threshold_b, threshold_o, mode, restart_on_b, kind, output):
    """Probabilities CSV (b,i,o) -> segments"""
    config = _config(ctx)
    probs = ProbSeries.from_csv(Path(probs_path).read_text(encoding="utf-8"))
    segments = decode_probs(
        probs,
        threshold_b if threshold_b is not None else config.threshold_b,
        threshold_o if threshold_o is not None else config.threshold_o,
        kind=SegmentKind(kind),
        mode=DecodeMode(mode),
        restart_on_b=restart_on_b,
    )
    _emit(format_segments(segments), output)


@cli.command('segment-eval')
@click.argument('gold_path', type=click.Path(exists=True, dir_okay=False))
@click.argument('pred_path', type=click.Path(exists=True, dir_okay=False))
@click.option('--length', type=click.IntRange(min=0), default=None,
              help='Frame count for F1 (default: last covered frame + 1)')
@click.option('--pred-tags', type=click.Path(exists=True, dir_okay=False), default=None,
              help='Predicted tag line for F1 instead of tags derived from PRED')
@click.pass_context
def segment_eval(ctx, gold_path, pred_path, length, pred_tags):
    """Frame F1, IoU and segment percentage of PRED against GOLD"""
    gold = _read_segments(gold_path)
    pred = _read_segments(pred_path)
    if length is None:
        length = max((s.end + 1 for s in [*gold, *pred]), default=0)
    gold_tags = segments_to_tags(gold, length)
    if pred_tags:
        predicted = TagSequence.from_string(Path(pred_tags).read_text(encoding="utf-8"))
    else:
        predicted = segments_to_tags(pred, length)
    click.echo(f"f1\t{frame_f1(gold_tags, predicted):.6f}")
    click.echo(f"iou\t{segment_iou(gold, pred):.6f}")
    if gold:
        click.echo(f"percentage\t{segment_percentage(gold, pred):.6f}")
    else:
        _display(ctx).warning("Gold is empty; segment percentage undefined")


@cli.command('segment-tune')
@click.option('--pair', 'pairs', type=(click.Path(exists=True, dir_okay=False),) * 2,
              multiple=True, required=True, help='PROBS_CSV GOLD_SEGMENTS (repeatable)')
@click.option('--mode', type=click.Choice([m.value for m in DecodeMode]), default=DecodeMode.THRESHOLD.value)
@click.option('--restart-on-b', is_flag=True)
@click.option('--table', 'table_path', default=None, help='Write the full grid as CSV')
@click.pass_context
def segment_tune(ctx, pairs, mode, restart_on_b, table_path):
    """Grid-search decode thresholds (10..90 step 10) for best IoU"""
    series = [ProbSeries.from_csv(Path(p).read_text(encoding="utf-8")) for p, _ in pairs]
    golds = [_read_segments(g) for _, g in pairs]
    result = tune_thresholds(series, golds, mode=DecodeMode(mode), restart_on_b=restart_on_b)
    click.echo(f"threshold_b\t{result.threshold_b:g}")
    click.echo(f"threshold_o\t{result.threshold_o:g}")
    click.echo(f"iou\t{result.iou:.6f}")
    click.echo(f"percentage\t{result.percentage:.6f}")
    if table_path:
        with open(table_path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["threshold_b", "threshold_o", "iou", "percentage"])
            writer.writerows(result.table)
        _display(ctx).info(f"Grid written to {table_path}")


# ---------------------------------------------------------------------------
# Stitching
# ---------------------------------------------------------------------------

@cli.command('stitch')
@click.argument('clips', nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('-o', '--output', required=True, type=click.Path(), help='Output .pose')
@click.option('--padding', type=click.FloatRange(min=0), default=None, help='Gap between clips, seconds')
@click.option('--search-window', type=click.IntRange(min=1), default=None,
              help='Frames searched at each clip edge (default: a fraction of the clip)')
@click.option('--trim-fraction', type=click.FloatRange(0, 1), default=None,
              help='Idle threshold as a fraction of peak motion')
@click.option('--no-smooth', is_flag=True, help='Skip Savitzky-Golay smoothing')
@click.option('--align-wrists', is_flag=True, help='Snap hand wrists onto body wrists first')
@click.option('--distance-component', 'distance_components', multiple=True,
              help='Component compared when searching cut points (repeatable)')
@click.pass_context
def stitch_cmd(ctx, clips, output, padding, search_window, trim_fraction, no_smooth,
               align_wrists, distance_components):
    """Join per-gloss clips into one continuous pose"""
    config = _config(ctx)
    stitch_config = StitchConfig(
        padding_seconds=padding if padding is not None else config.padding_seconds,
        search_window=search_window,
        search_fraction=config.search_fraction,
        trim_flow_fraction=trim_fraction if trim_fraction is not None else config.trim_flow_fraction,
        savgol_window=config.savgol_window,
        savgol_polyorder=config.savgol_polyorder,
        smooth=not no_smooth,
        align_wrists=align_wrists,
        distance_components=list(distance_components) or None,
    )
    result = stitch([_read(path) for path in clips], stitch_config)
    _write(result, output)
    _display(ctx).success(f"Stitched {len(clips)} clips into {result.frame_count} frames")


# ---------------------------------------------------------------------------
# SignWriting
# ---------------------------------------------------------------------------

@cli.group()
def fsw():
    """Formal SignWriting tokenization (one text per line)"""


@fsw.command('tokenize')
@click.argument('source', type=click.File('r', encoding='utf-8'), default='-')
def fsw_tokenize(source):
    """FSW lines -> space-separated token lines"""
    for line in tokenize_lines(source.read().splitlines()):
        click.echo(line)


@fsw.command('detokenize')
@click.argument('source', type=click.File('r', encoding='utf-8'), default='-')
def fsw_detokenize(source):
    """Token lines -> FSW lines"""
    for line in detokenize_lines(source.read().splitlines()):
        click.echo(line)


# ---------------------------------------------------------------------------
# Benchmark and rendering
# ---------------------------------------------------------------------------

@cli.command('bench')
@click.option('--frames', 'frame_counts', type=click.IntRange(min=1), multiple=True,
              default=(1000,), show_default=True, help='Frames per synthetic pair (repeatable)')
@click.option('--iters', 'iterations', type=click.IntRange(min=5), default=None,
              help='Timed iterations per read path (at least 5)')
@click.option('--warmup', type=click.IntRange(min=0), default=None)
@click.option('--seed', type=int, required=True, help='Synthetic data seed')
@click.option('--out-dir', type=click.Path(file_okay=False), default=None,
              help='Keep the generated pairs here (default: temporary directory)')
@click.option('--csv', 'as_csv', is_flag=True, help='CSV report instead of aligned text')
@click.pass_context
def bench(ctx, frame_counts, iterations, warmup, seed, out_dir, as_csv):
    """Time .pose reads against OpenPose JSON parsing"""
    config = _config(ctx)
    display = _display(ctx)
    iterations = iterations if iterations is not None else config.bench_iterations
    warmup = warmup if warmup is not None else config.bench_warmup
    display.header(f"Benchmark: {', '.join(map(str, frame_counts))} frames x {iterations} iterations")

    if out_dir:
        reports = run_benchmark(frame_counts, out_dir, seed, iterations, warmup)
    else:
        with tempfile.TemporaryDirectory(prefix="posekit_bench_") as tmp:
            reports = run_benchmark(frame_counts, tmp, seed, iterations, warmup)

    click.echo(format_report_csv(reports) if as_csv else format_report_text(reports), nl=False)
    for report in reports:
        if report.speedup < 1:
            display.warning(f"{report.frames} frames: .pose read slower than JSON parse")


@cli.command('render')
@click.argument('input_path', type=click.Path(exists=True, dir_okay=False))
@click.argument('out_dir', type=click.Path(file_okay=False))
@click.option('--format', 'image_format', type=click.Choice(['ppm', 'png']), default='ppm')
@click.option('--radius', type=click.IntRange(min=0), default=3, help='Point radius in pixels')
@click.option('--size', type=(int, int), default=None, help='Canvas WIDTH HEIGHT')
@click.pass_context
def render(ctx, input_path, out_dir, image_format, radius, size):
    """One image per frame: frame_00000.ppm, frame_00001.ppm, ..."""
    config = RenderConfig(canvas=size, point_radius=radius, fallback_size=_config(ctx).canvas_fallback)
    paths = render_sequence(_read(input_path), out_dir, config, image_format)
    _display(ctx).success(f"Rendered {len(paths)} frames to {out_dir}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and return its exit code"""
    args = list(sys.argv[1:] if argv is None else argv)
    obj: Dict[str, Any] = {}
    try:
        rv = cli.main(args=args, prog_name="posekit", standalone_mode=False, obj=obj)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.exceptions.Abort:
        click.echo("Aborted!", err=True)
        return 1
    except click.ClickException as e:
        e.show()
        return 1
    except (PoseKitError, OSError) as e:
        # errors raised before the group callback have no display yet
        display = obj.get("display") or Display(DisplayMode.QUIET)
        display.error(f"Error: {e}")
        return 2
    return rv if isinstance(rv, int) else 0


def run() -> None:
    """Console-script entry point"""
    sys.exit(main())
