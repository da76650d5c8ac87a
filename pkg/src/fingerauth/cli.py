"""Command-line surface: process, verify, enroll, identify, evaluate, synth.

Exit codes are stable:

    0  success (for verify: score >= accept threshold)
    1  no match (verify below threshold, identify against an empty db)
    2  usage or configuration error
    3  I/O failure
    4  no finger found in the input image
    5  pipeline produced no features
    6  malformed template file

The template database root is taken from the FINGERDB environment variable
when set, otherwise from --db.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
from enum import IntEnum
from pathlib import Path

import numpy as np

from .config import MatchConfig, PipelineConfig, RansacConfig, config_to_text, load_config
from .descriptor import PipelineResult, Template, extract_template, run_pipeline
from .errors import NoFeaturesError, NoFingerError, TemplateFormatError
from .imgops import load_image, save_png
from .matcher import MatchResult, match_score
from .minutiae import MinutiaKind
from .report import EvalReport, render_report
from .store import MAGIC, TemplateDb, deserialize, serialize
from .synth import Pose, write_finger_png

DEFAULT_ACCEPT_THRESHOLD = 40.0
DEFAULT_DB = "fingerdb"


class ExitCode(IntEnum):
    OK = 0
    NO_MATCH = 1
    USAGE = 2
    IO_ERROR = 3
    NO_FINGER = 4
    NO_FEATURES = 5
    BAD_TEMPLATE = 6


def _fail(code: ExitCode, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return int(code)


def _load_cfg(args: argparse.Namespace) -> PipelineConfig:
    cfg = PipelineConfig()
    if getattr(args, "config", None):
        cfg = load_config(args.config, base=cfg)
    seed = getattr(args, "seed", None)
    if seed is not None:
        ransac = dataclasses.replace(cfg.match.ransac, seed=seed)
        cfg = dataclasses.replace(cfg, match=dataclasses.replace(cfg.match, ransac=ransac))
    return cfg


def _db_root(args: argparse.Namespace) -> str:
    return os.environ.get("FINGERDB") or args.db


def _looks_like_template(path: Path) -> bool:
    with open(path, "rb") as fh:
        return fh.read(len(MAGIC)) == MAGIC


def _load_probe(path: Path, label: str | None, cfg: PipelineConfig) -> Template:
    """A probe argument may be a template file or an image to process."""
    if _looks_like_template(path):
        return deserialize(path.read_bytes())
    photo = load_image(path)
    return extract_template(photo, label or path.stem, cfg)


def _transform_json(result: MatchResult) -> dict | None:
    if result.transform is None:
        return None
    t = result.transform
    return {
        "scale": t.scale,
        "rotation_deg": math.degrees(t.rotation),
        "tx": t.tx,
        "ty": t.ty,
    }


def _dump_stages(result: PipelineResult, directory: Path) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    save_png(directory / "00_working.png", result.working)
    save_png(directory / "01_skin_mask.png", result.mask)
    save_png(directory / "02_clean_mask.png", result.clean)
    save_png(directory / "03_gray.png", result.gray)
    save_png(directory / "04_blurred.png", result.blurred)
    save_png(directory / "05_cropped.png", result.cropped)
    save_png(directory / "06_enhanced.png", result.enhanced)
    save_png(directory / "07_binary.png", result.binary)
    save_png(directory / "08_skeleton.png", result.skel)
    overlay = np.stack([result.enhanced // 2] * 3, axis=-1).astype(np.uint8)
    overlay[result.skel] = (255, 255, 255)
    h, w = result.skel.shape
    for m in result.minutiae:
        color = (255, 64, 64) if m.kind == MinutiaKind.ENDING else (64, 255, 64)
        y0, y1 = max(m.y - 2, 0), min(m.y + 3, h)
        x0, x1 = max(m.x - 2, 0), min(m.x + 3, w)
        overlay[y0:y1, x0:x1] = color
    save_png(directory / "09_minutiae.png", overlay)


def cmd_process(args: argparse.Namespace) -> int:
    cfg = _load_cfg(args)
    try:
        photo = load_image(args.input)
    except (OSError, ValueError) as exc:
        return _fail(ExitCode.IO_ERROR, f"cannot read image {args.input}: {exc}")
    label = args.label or Path(args.input).stem
    try:
        result = run_pipeline(photo, label, cfg)
    except NoFingerError:
        return _fail(ExitCode.NO_FINGER, "no finger found")
    except NoFeaturesError:
        return _fail(ExitCode.NO_FEATURES, "no features")
    if args.dump_stages:
        _dump_stages(result, Path(args.dump_stages))
    if args.output:
        try:
            Path(args.output).write_bytes(serialize(result.template))
        except OSError as exc:
            return _fail(ExitCode.IO_ERROR, f"cannot write {args.output}: {exc}")
    print(
        f"{label}: {len(result.template)} features, "
        f"working size {result.template.working_width}x{result.template.working_height}"
    )
    return int(ExitCode.OK)


def cmd_verify(args: argparse.Namespace) -> int:
    cfg = _load_cfg(args)
    try:
        probe = _load_probe(Path(args.probe), None, cfg)
    except TemplateFormatError as exc:
        return _fail(ExitCode.BAD_TEMPLATE, f"probe: {exc}")
    except NoFingerError:
        return _fail(ExitCode.NO_FINGER, "probe: no finger found")
    except NoFeaturesError:
        return _fail(ExitCode.NO_FEATURES, "probe: no features")
    except (OSError, ValueError) as exc:
        return _fail(ExitCode.IO_ERROR, f"probe: {exc}")
    try:
        gallery = deserialize(Path(args.gallery).read_bytes())
    except TemplateFormatError as exc:
        return _fail(ExitCode.BAD_TEMPLATE, f"gallery: {exc}")
    except OSError as exc:
        return _fail(ExitCode.IO_ERROR, f"gallery: {exc}")

    result = match_score(probe, gallery, cfg.match)
    accepted = result.score >= args.threshold
    payload = {
        "score": result.score,
        "correspondences": len(result.correspondences),
        "inliers": len(result.inliers),
        "transform": _transform_json(result),
        "threshold": args.threshold,
        "accepted": accepted,
    }
    print(json.dumps(payload, indent=None if args.json else 2))
    return int(ExitCode.OK if accepted else ExitCode.NO_MATCH)


def cmd_enroll(args: argparse.Namespace) -> int:
    cfg = _load_cfg(args)
    db = TemplateDb(_db_root(args))
    try:
        template = _load_probe(Path(args.input), args.label, cfg)
    except TemplateFormatError as exc:
        return _fail(ExitCode.BAD_TEMPLATE, str(exc))
    except NoFingerError:
        return _fail(ExitCode.NO_FINGER, "no finger found")
    except NoFeaturesError:
        return _fail(ExitCode.NO_FEATURES, "no features")
    except (OSError, ValueError) as exc:
        return _fail(ExitCode.IO_ERROR, str(exc))
    if args.label:
        template.label = args.label
    try:
        entry_id = db.enroll(template)
    except OSError as exc:
        return _fail(ExitCode.IO_ERROR, f"cannot write to db: {exc}")
    print(json.dumps({"entry": entry_id, "label": template.label}))
    return int(ExitCode.OK)


def cmd_identify(args: argparse.Namespace) -> int:
    cfg = _load_cfg(args)
    db = TemplateDb(_db_root(args), create=False)
    try:
        probe = _load_probe(Path(args.probe), None, cfg)
    except TemplateFormatError as exc:
        return _fail(ExitCode.BAD_TEMPLATE, str(exc))
    except NoFingerError:
        return _fail(ExitCode.NO_FINGER, "no finger found")
    except NoFeaturesError:
        return _fail(ExitCode.NO_FEATURES, "no features")
    except (OSError, ValueError) as exc:
        return _fail(ExitCode.IO_ERROR, str(exc))
    try:
        ranking = db.identify(probe, cfg.match)
    except TemplateFormatError as exc:
        return _fail(ExitCode.BAD_TEMPLATE, f"db entry: {exc}")
    except OSError as exc:
        return _fail(ExitCode.IO_ERROR, str(exc))
    payload = {
        "ranking": [
            {
                "entry": entry_id,
                "label": label,
                "score": result.score,
                "correspondences": len(result.correspondences),
                "inliers": len(result.inliers),
            }
            for entry_id, label, result in ranking
        ]
    }
    print(json.dumps(payload, indent=None if args.json else 2))
    return int(ExitCode.OK if ranking else ExitCode.NO_MATCH)


def _read_manifest(path: Path) -> list[tuple[str, Path, Path]]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["label", "extract", "match"]:
            raise ValueError("manifest must be CSV with header: label,extract,match")
        base = path.parent
        for record in reader:
            rows.append(
                (
                    record["label"].strip(),
                    base / record["extract"].strip(),
                    base / record["match"].strip(),
                )
            )
    return rows


def build_eval_report(
    rows: list[tuple[str, Path, Path]], cfg: PipelineConfig
) -> EvalReport:
    """Extract templates per manifest row and fill the score matrix.

    A row whose extraction or matching image fails to process is skipped
    (dropped from both axes) and noted in the report.
    """
    labels: list[str] = []
    extract_templates: list[Template] = []
    match_templates: list[Template] = []
    notes: list[str] = []
    for label, extract_path, match_path in rows:
        try:
            t_extract = extract_template(load_image(extract_path), label, cfg)
            t_match = extract_template(load_image(match_path), label, cfg)
        except (OSError, ValueError, NoFingerError, NoFeaturesError) as exc:
            notes.append(f"{label}: {exc}; row skipped")
            continue
        labels.append(label)
        extract_templates.append(t_extract)
        match_templates.append(t_match)
    matrix = [
        [match_score(te, tm, cfg.match).score for tm in match_templates]
        for te in extract_templates
    ]
    return EvalReport(labels=labels, matrix=matrix, notes=notes)


def cmd_evaluate(args: argparse.Namespace) -> int:
    cfg = _load_cfg(args)
    try:
        rows = _read_manifest(Path(args.manifest))
    except OSError as exc:
        return _fail(ExitCode.IO_ERROR, str(exc))
    except ValueError as exc:
        return _fail(ExitCode.USAGE, str(exc))
    report = build_eval_report(rows, cfg)
    if args.json:
        print(json.dumps(report.to_json_dict()))
    else:
        print(render_report(report), end="")
    return int(ExitCode.OK)


def _parse_translate(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected DX,DY")
    return float(parts[0]), float(parts[1])


def cmd_synth(args: argparse.Namespace) -> int:
    pose = Pose(
        rotation_deg=args.rotate,
        tx=args.translate[0],
        ty=args.translate[1],
        noise=args.noise,
    )
    try:
        write_finger_png(args.output, args.seed, width=args.width, height=args.height, pose=pose)
    except OSError as exc:
        return _fail(ExitCode.IO_ERROR, str(exc))
    print(args.output)
    return int(ExitCode.OK)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fingerauth",
        description="Offline fingerprint-photo authentication toolkit.",
        epilog="Exit codes: 0 ok, 1 no match, 2 usage, 3 I/O, 4 no finger, 5 no features, 6 bad template.",
    )
    parser.add_argument("--print-config", action="store_true", help="print the effective config and exit")
    parser.add_argument("--config", help="key=value config file")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value config file")
    matching = argparse.ArgumentParser(add_help=False)
    matching.add_argument("--seed", type=int, help="override the RANSAC seed")
    matching.add_argument("--json", action="store_true", help="compact machine-readable output")
    db_arg = argparse.ArgumentParser(add_help=False)
    db_arg.add_argument("--db", default=DEFAULT_DB, help="template database directory (env FINGERDB overrides)")

    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("process", parents=[common], help="extract a template from an image")
    p.add_argument("input")
    p.add_argument("-o", "--output", help="template file to write")
    p.add_argument("--label", help="finger label (default: input stem)")
    p.add_argument("--dump-stages", metavar="DIR", help="write numbered per-stage PNGs")
    p.set_defaults(func=cmd_process)

    p = sub.add_parser("dump-stages", parents=[common], help="process an image, writing per-stage PNGs")
    p.add_argument("input")
    p.add_argument("directory")
    p.add_argument("-o", "--output", help="template file to write")
    p.add_argument("--label", help="finger label (default: input stem)")
    p.set_defaults(func=lambda a: cmd_process(_alias_dump(a)))

    p = sub.add_parser("verify", parents=[common, matching], help="score a probe against a gallery template")
    p.add_argument("probe", help="image or template file")
    p.add_argument("gallery", help="template file")
    p.add_argument("--threshold", type=float, default=DEFAULT_ACCEPT_THRESHOLD, help="accept threshold (default 40)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("enroll", parents=[common, db_arg], help="add a template to the database")
    p.add_argument("input", help="image or template file")
    p.add_argument("--label", help="finger label")
    p.set_defaults(func=cmd_enroll)

    p = sub.add_parser("identify", parents=[common, matching, db_arg], help="rank database entries against a probe")
    p.add_argument("probe", help="image or template file")
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("evaluate", parents=[common, matching], help="confusion-matrix evaluation from a manifest")
    p.add_argument("manifest", help="CSV with header label,extract,match")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", parents=[], help="render a synthetic finger photo")
    p.add_argument("seed", type=lambda s: int(s, 0))
    p.add_argument("output")
    p.add_argument("--width", type=int, default=480)
    p.add_argument("--height", type=int, default=640)
    p.add_argument("--rotate", type=float, default=0.0, help="pattern rotation in degrees")
    p.add_argument("--translate", type=_parse_translate, default=(0.0, 0.0), metavar="DX,DY")
    p.add_argument("--noise", type=float, default=0.0, help="gaussian pixel noise sigma")
    p.set_defaults(func=cmd_synth)

    return parser


def _alias_dump(args: argparse.Namespace) -> argparse.Namespace:
    args.dump_stages = args.directory
    return args


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.print_config:
        cfg = PipelineConfig()
        if args.config:
            try:
                cfg = load_config(args.config, base=cfg)
            except (OSError, ValueError) as exc:
                return _fail(ExitCode.USAGE, str(exc))
        print(config_to_text(cfg), end="")
        return int(ExitCode.OK)
    if not getattr(args, "command", None):
        parser.print_help()
        return int(ExitCode.USAGE)
    try:
        return args.func(args)
    except ValueError as exc:
        return _fail(ExitCode.USAGE, str(exc))


if __name__ == "__main__":
    sys.exit(main())
