"""Command line interface: ``detect``, ``eval`` and ``synth`` subcommands.

Settings for ``detect`` are resolved in increasing priority: built-in
defaults, a ``key = value`` config file (``--config``), the ``RIPT_OUT_DIR``
environment variable (output directory only), then explicit flags.
"""
import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from .detect import DetectionConfig, detect, normalize
from .io import (ImageFormatError, read_image, read_pgm, rescale_to_uint16, to_uint8,
                 write_json, write_pgm)
from .metrics import Detection, match, metrics, roc
from .solver import MODES, SolverConfig, SolverResult
from .synth import ClutterSpec, GroundTruth, TargetSpec, benchmark_frames, gen_scene

logger = logging.getLogger(__name__)

OUT_DIR_ENV = "RIPT_OUT_DIR"
IMAGE_SUFFIXES = (".pgm", ".png")

# option name -> (type, default); names double as config-file keys
DETECT_OPTIONS = {
    "patch": (int, 50),
    "step": (int, 10),
    "sigma": (float, 3.0),
    "alpha": (float, 0.5),
    "h": (float, 10.0),
    "L": (float, 1.0),
    "c_mu": (float, 5.0),
    "rho": (float, 1.05),
    "eps_w": (float, 0.01),
    "tol": (float, 1e-7),
    "max_iter": (int, 500),
    "mode": (str, "ript"),
    "k_seg": (float, 5.0),
    "v_min": (float, 0.0),
    "out": (str, "."),
    "trace": (bool, False),
    "emit_weight_map": (bool, False),
}


def _parse_bool(text):
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def read_config(path):
    """Parse a ``key = value`` file; ``#`` starts a comment.

    Keys may use dashes or underscores. Unknown keys are an error.
    """
    settings = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DETECT_OPTIONS:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        kind = DETECT_OPTIONS[key][0]
        try:
            settings[key] = _parse_bool(value) if kind is bool else kind(value)
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from exc
    return settings


def resolve_settings(args, environ=None):
    """Merge defaults, config file, environment and flags for ``detect``."""
    environ = os.environ if environ is None else environ
    settings = {k: default for k, (_, default) in DETECT_OPTIONS.items()}
    if args.config:
        settings.update(read_config(args.config))
    if environ.get(OUT_DIR_ENV):
        settings["out"] = environ[OUT_DIR_ENV]
    for key in DETECT_OPTIONS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    return settings


def config_from_settings(settings):
    solver_names = {f.name for f in fields(SolverConfig)}
    solver = SolverConfig(**{k: v for k, v in settings.items() if k in solver_names})
    top = {f.name for f in fields(DetectionConfig)} - {"solver"}
    return DetectionConfig(solver=solver, **{k: v for k, v in settings.items() if k in top})


def expand_inputs(inputs):
    """Files as given, directories expanded to their images; sorted by file name."""
    paths = []
    for item in inputs:
        p = Path(item)
        if p.is_dir():
            paths.extend(q for q in p.iterdir() if q.suffix.lower() in IMAGE_SUFFIXES)
        else:
            paths.append(p)
    return sorted(paths, key=lambda q: (q.name, str(q)))


def write_artifacts(result, stem, out_dir, trace=False, emit_weight_map=False):
    """Write one frame's output files; returns their paths."""
    out_dir = Path(out_dir)
    written = []
    sidecar = {}
    for kind, image in (("target", result.target_image),
                        ("background", result.background_image)):
        samples, record = rescale_to_uint16(image)
        path = out_dir / f"{stem}_{kind}.pgm"
        write_pgm(path, samples, maxval=65535)
        sidecar[kind] = record
        written.append(path)
    path = out_dir / f"{stem}_rescale.json"
    write_json(path, sidecar)
    written.append(path)

    path = out_dir / f"{stem}_mask.pgm"
    write_pgm(path, result.mask.astype(np.uint8) * 255, maxval=255)
    written.append(path)

    path = out_dir / f"{stem}_detections.json"
    write_json(path, {
        "t_up": result.threshold,
        "count": len(result.detections),
        "detections": [d.to_dict() for d in result.detections],
        "iterations": result.iterations,
        "stop_reason": result.stop_reason,
    })
    written.append(path)

    if trace:
        path = out_dir / f"{stem}_trace.csv"
        path.write_text(SolverResult.format_trace(result.trace))
        written.append(path)
    if emit_weight_map:
        path = out_dir / f"{stem}_weight.pgm"
        write_pgm(path, to_uint8(result.weight_image), maxval=255)
        written.append(path)
    return written


def run_batch(inputs, cfg, out_dir, trace=False, emit_weight_map=False):
    """Detect targets in every input, continuing past per-file failures.

    Returns
    -------
    rows : list of dict
        One summary record per input, in file-name order. Failed inputs carry
        an ``error`` field instead of results.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for path in expand_inputs(inputs):
        try:
            result = detect(read_image(path), cfg)
            write_artifacts(result, path.stem, out_dir, trace, emit_weight_map)
        except (OSError, ValueError, ArithmeticError) as exc:
            logger.error("%s: %s", path, exc)
            rows.append({"file": path.name, "error": str(exc)})
            continue
        rows.append({
            "file": path.name,
            "detections": len(result.detections),
            "t_up": result.threshold,
            "iterations": result.iterations,
            "stop_reason": result.stop_reason,
        })
    return rows


def cmd_detect(args):
    settings = resolve_settings(args)
    cfg = config_from_settings(settings).validate()
    rows = run_batch(args.inputs, cfg, settings["out"], settings["trace"],
                     settings["emit_weight_map"])
    summary = Path(settings["out"]) / "summary.jsonl"
    summary.write_text("".join(json.dumps(r, sort_keys=True) + "\n" for r in rows))
    for row in rows:
        print(json.dumps(row, sort_keys=True))
    return 1 if any("error" in r for r in rows) else 0


def load_target_image(det_dir, stem):
    """Recover the real-valued target image from its 16-bit file and sidecar."""
    det_dir = Path(det_dir)
    samples = read_pgm(det_dir / f"{stem}_target.pgm").astype(float)
    record = json.loads((det_dir / f"{stem}_rescale.json").read_text())["target"]
    if record["scale"] == 0:
        return np.full(samples.shape, record["min"])
    return record["min"] + samples / record["scale"]


def cmd_eval(args):
    truth = GroundTruth.from_json(json.loads(Path(args.truth).read_text()))
    det_dir = Path(args.detections)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    frames = sorted(truth.frames)
    targets, truths, rows = [], [], []
    total_hits = total_false = 0
    for frame in frames:
        stem = Path(frame).stem
        boxes = truth.boxes(frame)
        target = load_target_image(det_dir, stem)
        targets.append(normalize(target))
        truths.append(boxes)
        found = json.loads((det_dir / f"{stem}_detections.json").read_text())
        dets = [Detection(**d) for d in found["detections"]]
        hits, false = match(dets, boxes)
        total_hits += hits
        total_false += false
        source = None
        if args.inputs:
            source = read_image(Path(args.inputs) / frame).astype(float)
        for idx, box in enumerate(boxes):
            row = {"frame": frame, "box": idx, "row": box.row, "col": box.col,
                   "a": box.a, "b": box.b, "hits": hits, "false": false}
            if source is not None:
                rep = metrics(source, target, box, args.d)
                row.update(lsnrg=rep.lsnrg, bsf=rep.bsf, scrg=rep.scrg)
            rows.append(row)
        if not boxes:
            rows.append({"frame": frame, "box": "", "hits": hits, "false": false})

    columns = ["frame", "box", "row", "col", "a", "b", "hits", "false"]
    if args.inputs:
        columns += ["lsnrg", "bsf", "scrg"]
    with open(out_dir / "metrics.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, columns, restval="")
        writer.writeheader()
        writer.writerows(rows)

    with open(out_dir / "roc.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["threshold", "pd", "fa"])
        if targets:
            for p in roc(targets, truths, args.n_thresholds):
                writer.writerow([repr(p.threshold), repr(p.pd), repr(p.fa)])

    n_targets = sum(len(b) for b in truths)
    print(json.dumps({
        "frames": len(frames),
        "pd": total_hits / n_targets if n_targets else 0.0,
        "fa": total_false / len(frames) if frames else 0.0,
    }, sort_keys=True))
    return 0


def cmd_synth(args):
    """Render frames described by a JSON scene spec.

    Either a ``"benchmark"`` block (``n_frames``, ``seed``, ``noise_std``,
    ``scr``, ``min_amplitude``) or an explicit ``"frames"`` list of
    ``{"seed", "targets": [{"center", "amplitude", "spread"}], "noise_std"}``.
    ``"dims"`` and ``"clutter"`` apply to all frames.
    """
    spec = json.loads(Path(args.spec).read_text())
    dims = tuple(spec.get("dims", (200, 200)))
    clutter = ClutterSpec(**{k: tuple(v) if isinstance(v, list) else v
                             for k, v in spec.get("clutter", {}).items()})
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rendered = []
    if "benchmark" in spec:
        b = spec["benchmark"]
        for name, image, boxes, _ in benchmark_frames(
                b.get("n_frames", 20), b.get("seed", 0), b.get("noise_std", 0.0),
                b.get("scr", 3.5), b.get("min_amplitude", 100.0), dims, clutter=clutter):
            rendered.append((name, image, boxes))
    for i, frame in enumerate(spec.get("frames", [])):
        targets = [TargetSpec(tuple(t["center"]), t["amplitude"], t.get("spread", 1.0))
                   for t in frame.get("targets", [])]
        image, boxes = gen_scene(frame.get("seed", i), dims, targets, clutter,
                                 frame.get("noise_std", 0.0))
        rendered.append((frame.get("name", f"scene_{i:04d}"), image, boxes))

    truth = GroundTruth()
    for name, image, boxes in rendered:
        write_pgm(out_dir / f"{name}.pgm", np.rint(image).astype(np.uint8), maxval=255)
        truth.frames[f"{name}.pgm"] = boxes
    write_json(out_dir / "truth.json", truth.to_json())
    print(json.dumps({"frames": len(rendered), "out": str(out_dir)}))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="ript", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="detect small targets in PGM/PNG frames")
    p.add_argument("inputs", nargs="+", help="image files or directories")
    p.add_argument("--config", help="key = value settings file")
    p.add_argument("--patch", type=int)
    p.add_argument("--step", type=int)
    p.add_argument("--sigma", type=float, help="gradient pre-smoothing scale")
    p.add_argument("--alpha", type=float, help="structure tensor integration scale")
    p.add_argument("--h", type=float, help="structure weight stretching")
    p.add_argument("--L", type=float, help="sparsity weight lambda = L / sqrt(min dim)")
    p.add_argument("--c-mu", dest="c_mu", type=float, help="mu0 = c_mu * std(F)")
    p.add_argument("--rho", type=float, help="mu decay factor")
    p.add_argument("--eps-w", dest="eps_w", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--k-seg", dest="k_seg", type=float)
    p.add_argument("--v-min", dest="v_min", type=float)
    p.add_argument("--out", help=f"output directory (env {OUT_DIR_ENV})")
    p.add_argument("--trace", action="store_true", default=None)
    p.add_argument("--emit-weight-map", dest="emit_weight_map", action="store_true",
                   default=None)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("eval", help="score detection outputs against ground truth")
    p.add_argument("detections", help="directory written by 'detect'")
    p.add_argument("truth", help="ground-truth JSON")
    p.add_argument("--inputs", help="directory of the source frames, enables gain metrics")
    p.add_argument("--out", default=".")
    p.add_argument("--n-thresholds", dest="n_thresholds", type=int, default=50)
    p.add_argument("--d", type=int, default=20, help="neighborhood width")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="generate synthetic frames and ground truth")
    p.add_argument("spec", help="JSON scene spec")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ImageFormatError, ValueError, OSError) as exc:
        logger.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
