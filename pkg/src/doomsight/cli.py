"""Command line: ``doomsight info|render|export-coco|validate``.

Summaries go to stdout as tab-separated ``key<TAB>value`` lines; diagnostics
go to stderr.  Exit status is 0 on success, 1 on a domain error and 2 on a
usage error.
"""
from __future__ import annotations

import argparse
import os
import sys
from collections import Counter
from pathlib import Path

from .coco import ExportConfig, ExportError, SplitMode, export_dataset, read_manifest, validate_dataset
from .coco.export import check_sessions
from .level import load_level
from .render import RenderConfig, RenderError
from .session import SessionConfig, SessionError, read_pose_script, run_session
from .things import THING_TYPES, read_category_table
from .wad import WadError, read_archive

ENV_JOBS = "DOOMSIGHT_JOBS"


class CommandError(Exception):
    pass


def _positive(value: str) -> int:
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {value!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {n}")
    return n


def _non_negative(value: str) -> int:
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {value!r}") from None
    if n < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {n}")
    return n


def resolve_jobs(flag, parser: argparse.ArgumentParser) -> int:
    if flag is not None:
        return flag
    env = os.environ.get(ENV_JOBS)
    if env:
        try:
            return _positive(env)
        except argparse.ArgumentTypeError as e:
            parser.error(f"{ENV_JOBS}: {e}")
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def _out(key, *values) -> None:
    print("\t".join(map(str, (key, *values))))


def _readable(path: Path, what: str) -> Path:
    if not path.is_file():
        raise CommandError(f"{what} not found: {path}")
    return path


def _writable_dir(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise CommandError(f"cannot create output directory {path}: {e.strerror or e}") from None
    if not os.access(path, os.W_OK | os.X_OK):
        raise CommandError(f"output directory is not writable: {path}")
    return path


# subcommands -------------------------------------------------------------------

def cmd_info(args) -> int:
    archive = read_archive(_readable(args.wad, "WAD"))
    _out("kind", archive.kind.name)
    _out("lumps", len(archive.lumps))
    _out("maps", *archive.map_names())
    if args.map:
        level = load_level(archive, args.map.upper())
        _out("map", level.name)
        _out("vertices", len(level.vertices))
        _out("linedefs", len(level.linedefs))
        _out("sectors", len(level.sectors))
        _out("things", len(level.things))
        for t, n in sorted(Counter(t.doomed_type for t in level.things).items()):
            info = THING_TYPES.get(t)
            _out("type", t, info.category if info else "unknown", n)
    return 0


def cmd_render(args) -> int:
    archive = read_archive(_readable(args.wad, "WAD"))
    track = read_pose_script(_readable(args.track, "track"))
    load_level(archive, args.map.upper())  # fail on a missing map before touching the output
    render = RenderConfig(width=args.width, height=args.height, hfov=args.hfov,
                          apply_light=not args.no_light, depth_scale=args.depth_scale)
    cfg = SessionConfig(_writable_dir(args.out), args.map.upper(), render, run_id=args.run, jobs=args.jobs)
    summary = run_session(archive, cfg, track)
    for w in summary.warnings:
        print(f"doomsight: warning: {w}", file=sys.stderr)
    print(f"frames: {summary.frames_written}")
    return 0


def cmd_export(args) -> int:
    entries = read_manifest(_readable(args.manifest, "manifest"))
    check_sessions(entries)
    table = read_category_table(_readable(args.categories, "category table")) if args.categories else None
    cfg = ExportConfig(min_area=args.min_area, frame_stride=args.stride, min_category_images=args.min_cat_images,
                       category_table=table, split=SplitMode(args.split))
    result = export_dataset(entries, _writable_dir(args.out), cfg, jobs=args.jobs, figures=args.figures)
    for split, ds in result.datasets.items():
        _out(split, len(ds.images), len(ds.annotations))
    _out("categories", len(next(iter(result.datasets.values())).categories))
    return 0


def cmd_validate(args) -> int:
    report = validate_dataset(_readable(args.dataset, "dataset").read_bytes())
    for e in report.errors:
        print(f"doomsight: invalid: {e}", file=sys.stderr)
    _out("errors", len(report.errors))
    if report.stats:
        for key in ("images", "annotations", "categories"):
            _out(key, report.stats[key])
        for name, n in report.stats["images_per_category"].items():
            _out("category", name, n, report.stats["annotations_per_category"][name])
    return 1 if report.errors else 0


# parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="doomsight", description="Doom WAD frame extraction and Coco export.")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")
    d = RenderConfig()
    e = ExportConfig()

    info = sub.add_parser("info", help="describe a WAD and optionally one map")
    info.add_argument("--wad", type=Path, required=True)
    info.add_argument("--map")
    info.set_defaults(func=cmd_info)

    render = sub.add_parser("render", help="render a pose track into frame triples and a log")
    render.add_argument("--wad", type=Path, required=True)
    render.add_argument("--map", required=True)
    render.add_argument("--track", type=Path, required=True)
    render.add_argument("--out", type=Path, required=True)
    render.add_argument("--width", type=_positive, default=d.width)
    render.add_argument("--height", type=_positive, default=d.height)
    render.add_argument("--hfov", type=float, default=d.hfov)
    render.add_argument("--depth-scale", type=float, default=d.depth_scale)
    render.add_argument("--run", type=_positive, default=1, help="playthrough ordinal")
    render.add_argument("--no-light", action="store_true", help="disable distance lighting")
    render.add_argument("--jobs", type=_positive, help=f"render processes (default ${ENV_JOBS} or CPU count)")
    render.set_defaults(func=cmd_render)

    export = sub.add_parser("export-coco", help="build Coco instance files from sessions")
    export.add_argument("--manifest", type=Path, required=True)
    export.add_argument("--out", type=Path, required=True)
    export.add_argument("--split", choices=[m.value for m in SplitMode], default=e.split.value)
    export.add_argument("--stride", type=_positive, default=e.frame_stride)
    export.add_argument("--min-area", type=_non_negative, default=e.min_area)
    export.add_argument("--min-cat-images", type=_non_negative, default=e.min_category_images)
    export.add_argument("--categories", type=Path, help="'<doomed_type> <name>' lines")
    export.add_argument("--figures", action="store_true", help="also write stats.png")
    export.add_argument("--jobs", type=_positive, help=f"extraction processes (default ${ENV_JOBS} or CPU count)")
    export.set_defaults(func=cmd_export)

    validate = sub.add_parser("validate", help="check a Coco instances file")
    validate.add_argument("--dataset", type=Path, required=True)
    validate.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "jobs"):
        args.jobs = resolve_jobs(args.jobs, parser)
    try:
        return args.func(args)
    except (CommandError, WadError, SessionError, RenderError, ExportError, OSError, ValueError, KeyError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"doomsight: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
