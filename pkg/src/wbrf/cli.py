"""Command-line interface: train, correct, evaluate, serve, synth.

The model file used by correct/evaluate/serve comes from --model or the
WBRF_MODEL environment variable.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .correction import (
    AutoSource,
    CorrectionRequest,
    ManualColor,
    ManualPixel,
    correct,
    correct_diagonal_baseline,
    resolve_gamma,
)
from .datagen import default_manifest, ingest_pairs, load_manifest, manifest_pairs, write_corpus
from .errors import WbrfError
from .estimators import EstimatorConfig, EstimatorKind
from .evaluation import evaluate_methods
from .imageio import read_image, write_image
from .metrics import render_table, reports_to_json
from .model_io import load_model, save_model
from .training import TrainConfig, train

_HIST_WIDTH = 40


def _model_path(args) -> str:
    path = getattr(args, "model", None) or os.environ.get("WBRF_MODEL")
    if not path:
        raise WbrfError("no model file: pass --model or set WBRF_MODEL")
    return path


def _load_manifest_arg(spec: str) -> dict:
    if spec == "default":
        return default_manifest()
    return load_manifest(spec)


def _training_pairs(args):
    if args.synth:
        return manifest_pairs(_load_manifest_arg(args.synth), "train")
    return ingest_pairs(args.data, input_glob=args.input_glob,
                        gt_template=args.gt_template)


def _estimator_config(args) -> EstimatorConfig:
    return EstimatorConfig(
        kind=EstimatorKind(args.estimator),
        minkowski_p=args.sog_p,
        pre_linearize=args.linearize,
    )


def _parse_pixel(text: str) -> tuple[int, int]:
    try:
        x, y = (int(v) for v in text.split(","))
    except ValueError:
        raise WbrfError(f"--pixel expects X,Y integers, got {text!r}") from None
    return x, y


def _parse_color(text: str) -> tuple[float, float, float]:
    try:
        r, g, b = (float(v) for v in text.split(","))
    except ValueError:
        raise WbrfError(f"--color expects R,G,B in [0,1], got {text!r}") from None
    return r, g, b


def _fmt_vec(v) -> str:
    return "[" + ", ".join(f"{x:.6f}" for x in v) + "]"


# ---------------------------------------------------------------------------
# Subcommands


def cmd_train(args) -> int:
    cfg = TrainConfig(k=args.k, seed=args.seed, estimator=_estimator_config(args))
    model, stats = train(_training_pairs(args), cfg, return_stats=True)
    save_model(model, args.out)

    print(f"trained on {stats.n_pairs} pairs, k={model.k}, seed={args.seed}")
    print("cluster occupancy:")
    top = int(stats.occupancy.max())
    for j, count in enumerate(stats.occupancy):
        bar = "#" * max(1, round(_HIST_WIDTH * int(count) / top))
        print(f"  [{j:3d}] {int(count):5d} {bar}")
    print(f"mean fit residual (rms): {stats.mean_fit_rms:.6g}")
    size = Path(args.out).stat().st_size
    print(f"model written to {args.out} ({size} bytes)")
    return 0


def cmd_correct(args) -> int:
    model = load_model(_model_path(args))
    img = read_image(args.infile)

    if args.auto:
        source = AutoSource()
    elif args.pixel:
        source = ManualPixel(*_parse_pixel(args.pixel))
    else:
        source = ManualColor(_parse_color(args.color))
    req = CorrectionRequest(source=source, model=model,
                            single_pixel=args.single_pixel, strict=args.strict)

    if args.baseline_diagonal:
        gamma = resolve_gamma(img, req)
        from .core import cast_correction_vector
        ell = cast_correction_vector(gamma, strict=args.strict)
        out = correct_diagonal_baseline(img, gamma)
        print(f"gamma:   {_fmt_vec(gamma.gamma)}")
        print(f"ell:     {_fmt_vec(ell.ell)}")
        print("cluster: (none: diagonal baseline)")
    else:
        result = correct(img, req)
        out = result.corrected
        print(f"gamma:   {_fmt_vec(result.gamma_used.gamma)}")
        print(f"ell:     {_fmt_vec(result.ell_used.ell)}")
        print(f"cluster: {result.cluster_index}")

    write_image(args.out, out)
    print(f"corrected image written to {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    methods = args.methods
    model = None
    if any(name.startswith("rf-") for name in methods):
        model = load_model(_model_path(args))
    pairs = list(ingest_pairs(args.data, input_glob=args.input_glob,
                              gt_template=args.gt_template))
    reports = evaluate_methods(pairs, methods, model=model, sog_p=args.sog_p)
    print(f"{len(pairs)} image pairs")
    print(render_table(reports))
    doc = reports_to_json(reports)
    if args.json:
        Path(args.json).write_text(doc + "\n")
        print(f"report written to {args.json}")
    else:
        print(doc)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import build_app

    model = load_model(_model_path(args))
    app = build_app(model, static_dir=args.static,
                    max_pixels=args.max_pixels, capacity=args.capacity)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_synth(args) -> int:
    manifest = _load_manifest_arg(args.manifest)
    total = 0
    for split in args.splits:
        total += write_corpus(manifest, Path(args.outdir) / split, split,
                              fmt=args.fmt)
    print(f"wrote {total} pairs under {args.outdir}")
    return 0


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wbrf",
        description="White-balance rectification: train, correct, evaluate, serve.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit a rectification model")
    data = p.add_mutually_exclusive_group(required=True)
    data.add_argument("--data", help="directory of paired images (input/ and gt/)")
    data.add_argument("--synth", metavar="MANIFEST",
                      help="synthetic corpus manifest path, or 'default'")
    p.add_argument("--input-glob", default="input/*",
                   help="glob for input images under --data")
    p.add_argument("--gt-template", default="gt/{name}",
                   help="ground-truth path template ({name}/{base}/{stem}/{ext})")
    p.add_argument("--k", type=int, default=50, help="number of cast clusters")
    p.add_argument("--seed", type=int, default=0, help="clustering seed")
    p.add_argument("--estimator", choices=[k.value for k in EstimatorKind],
                   default="gw", help="cast estimator")
    p.add_argument("--sog-p", type=float, default=6.0,
                   help="Minkowski p for the sog estimator")
    p.add_argument("--linearize", action="store_true",
                   help="estimate on the sRGB-linearized image")
    p.add_argument("--out", required=True, help="model file to write")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("correct", help="correct one image")
    p.add_argument("--model", help="model file (or WBRF_MODEL)")
    p.add_argument("--in", dest="infile", required=True, help="input image")
    p.add_argument("--out", required=True, help="output image")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--auto", action="store_true",
                      help="estimate the cast with the model's estimator")
    mode.add_argument("--pixel", metavar="X,Y",
                      help="read the cast from this pixel")
    mode.add_argument("--color", metavar="R,G,B",
                      help="use this RGB value in [0,1] as the cast")
    p.add_argument("--single-pixel", action="store_true",
                   help="exact pixel read instead of the 3x3 neighborhood mean")
    p.add_argument("--baseline-diagonal", action="store_true",
                   help="apply the diagonal correction instead of the model")
    p.add_argument("--strict", action="store_true",
                   help="fail on near-black casts instead of clamping")
    p.set_defaults(func=cmd_correct)

    p = sub.add_parser("evaluate", help="run methods over a paired dataset")
    p.add_argument("--model", help="model file (or WBRF_MODEL); rf-* methods only")
    p.add_argument("--data", required=True, help="directory of paired images")
    p.add_argument("--input-glob", default="input/*")
    p.add_argument("--gt-template", default="gt/{name}")
    p.add_argument("--methods", nargs="+", required=True,
                   help="any of: diag-gw diag-sog diag-gw-lin diag-sog-lin rf-gw rf-sog")
    p.add_argument("--sog-p", type=float, default=6.0)
    p.add_argument("--json", help="also write the report as JSON to this path")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("serve", help="run the HTTP session service")
    p.add_argument("--model", help="model file (or WBRF_MODEL)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8790)
    p.add_argument("--static", help="directory with the UI bundle")
    p.add_argument("--max-pixels", type=int, default=24_000_000,
                   help="reject uploads beyond this pixel count")
    p.add_argument("--capacity", type=int, default=32,
                   help="session store size (LRU eviction)")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("synth", help="materialize a synthetic corpus to disk")
    p.add_argument("--manifest", default="default",
                   help="manifest path, or 'default'")
    p.add_argument("--outdir", required=True)
    p.add_argument("--splits", nargs="+", default=["train", "test"],
                   choices=["train", "test"])
    p.add_argument("--fmt", default="png", choices=["png", "ppm"])
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (WbrfError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
