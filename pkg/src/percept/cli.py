"""Command-line surface: load an input, build the explainer, write artifacts.

Every run creates an output directory holding a report.json plus rendered
images. Exit codes: 0 success, 2 usage error, 3 data/model error.
"""

import argparse
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .data import ingest_csv
from .errors import PerceptError
from .gradient import (
    CamRequest,
    grad_cam,
    grad_cam_pp,
    integrated_gradients,
    guided_bp,
    score_cam,
    smooth_grad,
    vanilla_bp,
)
from .imageio import read_image, write_image
from .models import (
    CentroidTabularPredictor,
    NetworkPredictor,
    build_demo_sentiment_classifier,
)
from .netio import load_network
from .optimize import (
    OptimizationConfig,
    deep_dream,
    invert_features,
    maximize_activation,
)
from .perturbation import (
    ImageInstance,
    TabularInstance,
    TextInstance,
    anchors_explain,
    cle_explain,
    grid_segment,
    kernel_shap_explain,
    lime_explain,
)
from .render import (
    RenderSpec,
    render_anchor_segments,
    render_bars,
    render_saliency,
    render_segment_weights,
)

GRADIENT_METHODS = {
    "gradcam": grad_cam,
    "gradcampp": grad_cam_pp,
    "scorecam": score_cam,
}
BACKPROP_METHODS = {"vanilla", "guided", "smoothgrad", "ig"}
PERTURBATION_METHODS = {"lime", "shap", "anchor", "cle"}
IMAGE_METHODS = sorted(set(GRADIENT_METHODS) | BACKPROP_METHODS | PERTURBATION_METHODS)
TEXT_METHODS = sorted(PERTURBATION_METHODS)
TABULAR_METHODS = sorted(PERTURBATION_METHODS)
GLOBAL_METHODS = ["filter", "layer", "logit", "deepdream", "inverted"]

#: Every algorithm of the toolkit and the CLI invocation that reaches it.
METHOD_REGISTRY = {
    "Grad-CAM": ("explain-image", "gradcam"),
    "Grad-CAM++": ("explain-image", "gradcampp"),
    "Score-CAM": ("explain-image", "scorecam"),
    "Vanilla-BP": ("explain-image", "vanilla"),
    "Guided-BP": ("explain-image", "guided"),
    "SmoothGrad": ("explain-image", "smoothgrad"),
    "IntegrateGrad": ("explain-image", "ig"),
    "LIME": ("explain-image", "lime"),
    "Anchors": ("explain-image", "anchor"),
    "SHAP": ("explain-image", "shap"),
    "CLE": ("explain-image", "cle"),
    "Max-Activation": ("global", "filter"),
    "Invert-Feature": ("global", "inverted"),
}


def _default_seed():
    return int(os.environ.get("PERCEPT_SEED", "0"))


def _out_dir(args):
    if args.out:
        path = Path(args.out)
    else:
        stamp = datetime.now(timezone.utc).strftime("%Y%m%d-%H%M%S%f")
        path = Path("out") / f"{stamp}-{args.method}"
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_report(out_dir, method, inputs, parameters, outputs, explanation,
                  seed):
    report = {
        "report_version": 1,
        "tool": "percept",
        "tool_version": __version__,
        "method": method,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "seed": int(seed),
        "inputs": inputs,
        "parameters": parameters,
        "outputs": [str(p) for p in outputs],
        "explanation": explanation,
    }
    path = out_dir / "report.json"
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    return path


def _parse_grid(text):
    try:
        rows, cols = text.lower().split("x")
        return int(rows), int(cols)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"grid must look like '4x4', got {text!r}") from None


def _class_names(args, k):
    if getattr(args, "classes", None):
        names = [c.strip() for c in args.classes.split(",")]
        if len(names) == k:
            return names
    return [f"class_{i}" for i in range(k)]


def _explain_image(args):
    net = load_network(args.model)
    image = read_image(args.input)
    if tuple(image.shape) != net.input_shape:
        raise PerceptError(
            f"input image shape {image.shape} does not match the model's "
            f"input shape {net.input_shape}")
    out = _out_dir(args)
    seed = args.seed
    spec = RenderSpec(colormap=args.colormap, alpha=args.alpha)
    class_names = _class_names(args, net.class_count)
    outputs = []
    params = {"target_layer": args.target_layer, "class": args.cls,
              "samples": args.samples, "steps": args.steps,
              "sigma": args.sigma, "grid": f"{args.grid[0]}x{args.grid[1]}",
              "alpha": args.alpha, "colormap": args.colormap,
              "top_labels": args.top_labels, "tau": args.tau}

    if args.method in GRADIENT_METHODS:
        trace = {}
        req = CamRequest(method=args.method, target_layer=args.target_layer,
                         target_class=args.cls)
        saliency = GRADIENT_METHODS[args.method](net, image, req, trace=trace)
        explanation = {"method": args.method, "target_layer": args.target_layer,
                       "channel_weights": trace.get("channel_weights")}
        viz = [saliency]
    elif args.method in BACKPROP_METHODS:
        target = args.cls if args.cls is not None else 0
        trace = {}
        if args.method == "vanilla":
            saliency = vanilla_bp(net, image, target, trace=trace)
        elif args.method == "guided":
            saliency = guided_bp(net, image, target, trace=trace)
        elif args.method == "smoothgrad":
            saliency = smooth_grad(net, image, target, n=args.samples,
                                   sigma=args.sigma, seed=seed, trace=trace)
        else:
            saliency = integrated_gradients(net, image, target,
                                            steps=args.steps, trace=trace)
        explanation = {"method": args.method, "class": target}
        viz = [saliency]
    else:
        segments = grid_segment(image, *args.grid)
        instance = ImageInstance(image.array, segments)
        predictor = NetworkPredictor(net)
        explanation, viz = _run_perturbation(
            args, predictor, instance, class_names, out, outputs,
            segments=segments, image=image)

    if viz and not args.no_viz:
        map_path = out / ("map.pgm" if args.colormap == "gray" else "map.ppm")
        overlay_path = out / "overlay.ppm"
        render_saliency(viz[0], image, spec, map_path, overlay_path)
        outputs.extend([map_path, overlay_path])

    report = _write_report(out, args.method,
                           {"model": args.model, "input": args.input},
                           params, outputs, explanation, seed)
    print(report)
    return 0


def _run_perturbation(args, predictor, instance, class_names, out, outputs,
                      segments=None, image=None):
    """Shared lime/shap/anchor/cle dispatch; returns (payload, saliency list)."""
    seed = args.seed
    if args.method == "lime" or args.method == "cle":
        fn = lime_explain if args.method == "lime" else cle_explain
        result = fn(predictor, instance, label=args.cls,
                    n_samples=args.samples, seed=seed,
                    top_labels=args.top_labels, class_names=class_names)
        explanations = result if isinstance(result, list) else [result]
        if not args.no_viz:
            for i, expl in enumerate(explanations):
                tag = f"_{expl.label}" if len(explanations) > 1 else ""
                bar_path = out / f"bars{tag}.ppm"
                render_bars(expl, bar_path)
                outputs.append(bar_path)
                if segments is not None:
                    seg_path = out / f"segments{tag}.ppm"
                    render_segment_weights(expl, image, segments, seg_path)
                    outputs.append(seg_path)
        payload = [e.to_dict() for e in explanations]
        return (payload[0] if len(payload) == 1 else payload), []
    if args.method == "shap":
        expl = kernel_shap_explain(predictor, instance, label=args.cls,
                                   n_samples=args.samples, exact=args.exact,
                                   seed=seed, class_names=class_names)
        if not args.no_viz:
            bar_path = out / "bars.ppm"
            render_bars(expl, bar_path)
            outputs.append(bar_path)
            if segments is not None:
                seg_path = out / "segments.ppm"
                render_segment_weights(expl, image, segments, seg_path)
                outputs.append(seg_path)
        return expl.to_dict(), []
    # anchor
    result = anchors_explain(predictor, instance, label=args.cls,
                             tau=args.tau, n_samples=args.samples,
                             seed=seed, class_names=class_names)
    if segments is not None and not args.no_viz:
        path = out / "anchor.ppm"
        render_anchor_segments(result, image, segments, path)
        outputs.append(path)
    return result.to_dict(), []


def _explain_text(args):
    with open(args.input, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not 0 <= args.line < len(lines):
        raise PerceptError(
            f"--line {args.line} out of range; file has {len(lines)} lines")
    text = lines[args.line]
    predictor = build_demo_sentiment_classifier()
    class_names = ["positive", "negative"]
    instance = TextInstance(text)
    out = _out_dir(args)
    outputs = []
    payload, _ = _run_perturbation(args, predictor, instance, class_names,
                                   out, outputs)
    listing = out / "explanation.txt"
    listing.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                       encoding="utf-8")
    outputs.append(listing)
    report = _write_report(out, args.method, {"input": args.input,
                                              "line": args.line,
                                              "text": text},
                           {"samples": args.samples, "tau": args.tau,
                            "class": args.cls,
                            "top_labels": args.top_labels},
                           outputs, payload, args.seed)
    print(report)
    return 0


def _explain_tabular(args):
    dataset = ingest_csv(args.data)
    if not 0 <= args.row < dataset.rows.shape[0]:
        raise PerceptError(
            f"--row {args.row} out of range; dataset has "
            f"{dataset.rows.shape[0]} rows")
    row = dataset.rows[args.row]
    predictor = CentroidTabularPredictor(dataset)
    class_names = list(dataset.schema.class_names)
    instance = TabularInstance(row, dataset, discretize=args.discretize)
    out = _out_dir(args)
    outputs = []
    payload, _ = _run_perturbation(args, predictor, instance, class_names,
                                   out, outputs)
    report = _write_report(out, args.method,
                           {"data": args.data, "row": args.row},
                           {"samples": args.samples, "tau": args.tau,
                            "discretize": args.discretize,
                            "class": args.cls,
                            "top_labels": args.top_labels},
                           outputs, payload, args.seed)
    print(report)
    return 0


def _global(args):
    net = load_network(args.model)
    out = _out_dir(args)
    seed = args.seed
    image = None
    if args.method in ("deepdream", "inverted"):
        if not args.input:
            raise PerceptError(f"--input is required for {args.method}")
        image = read_image(args.input)

    if args.method == "filter":
        if args.target_filter is None:
            raise PerceptError("--target-filter is required for 'filter'")
        target = ("filter", args.target_layer, args.target_filter)
    elif args.method == "layer":
        target = ("layer", args.target_layer)
    elif args.method == "logit":
        target = ("logit", args.cls if args.cls is not None else 0)
    elif args.method == "deepdream":
        if args.target_filter is None:
            raise PerceptError("--target-filter is required for 'deepdream'")
        target = ("filter", args.target_layer, args.target_filter)
    else:
        target = ("inverted", args.target_layer)

    kw = dict(num_iter=args.num_iter, seed=seed,
              snapshot_every=args.snapshot_every)
    if args.lr is not None:
        kw["learning_rate"] = args.lr
    if args.method == "inverted":
        cfg = OptimizationConfig.for_inversion(args.target_layer, **kw)
        trace = invert_features(net, image, args.target_layer, cfg)
    elif args.method == "deepdream":
        cfg = OptimizationConfig(target=target, **kw)
        trace = deep_dream(net, image.array, args.target_layer,
                           args.target_filter, cfg)
    else:
        cfg = OptimizationConfig(target=target, **kw)
        trace = maximize_activation(net, cfg)

    outputs = []
    final_path = out / "final.pgm"
    write_image(trace.final_image.array, final_path)
    outputs.append(final_path)
    if trace.snapshots:
        for it, snap in trace.snapshots:
            p = out / f"iter_{it:04d}.pgm"
            write_image(snap.array, p)
            outputs.append(p)
    payload = trace.to_dict(target, cfg)
    report = _write_report(out, args.method,
                           {"model": args.model, "input": args.input},
                           payload["config"] | {"target": payload["target"]},
                           outputs, payload, seed)
    print(report)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="percept",
        description="Post-hoc model interpretation: local and global "
                    "explanations for small CNNs, text, and tables.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, methods):
        p.add_argument("--method", required=True, choices=methods)
        p.add_argument("--out", default=None,
                       help="output directory (default: out/<stamp>-<method>)")
        p.add_argument("--seed", type=int, default=_default_seed(),
                       help="RNG seed (falls back to $PERCEPT_SEED, then 0)")
        p.add_argument("--class", dest="cls", type=int, default=None,
                       help="target class index (default: model's top class)")
        p.add_argument("--top-labels", type=int, default=1,
                       help="explain this many top classes (lime/cle)")
        p.add_argument("--samples", type=int, default=1000,
                       help="perturbation/noise sample count")
        p.add_argument("--tau", type=float, default=0.95,
                       help="anchor precision target")
        p.add_argument("--no-viz", action="store_true",
                       help="skip image artifacts, write only the report")

    p_img = sub.add_parser("explain-image", help="local explanation of one image")
    common(p_img, IMAGE_METHODS)
    p_img.add_argument("--model", required=True, help="PCPT weight file")
    p_img.add_argument("--input", required=True, help="PGM/PPM image")
    p_img.add_argument("--target-layer", default="relu2",
                       help="CAM target layer name")
    p_img.add_argument("--steps", type=int, default=64,
                       help="integration steps for ig")
    p_img.add_argument("--sigma", type=float, default=0.15,
                       help="noise level for smoothgrad")
    p_img.add_argument("--grid", type=_parse_grid, default=(4, 4),
                       help="segment grid, e.g. 4x4")
    p_img.add_argument("--alpha", type=float, default=0.5,
                       help="overlay blend factor")
    p_img.add_argument("--colormap", choices=["jet", "gray"], default="jet")
    p_img.add_argument("--exact", action="store_true",
                       help="exact SHAP enumeration (d <= 14)")
    p_img.add_argument("--classes", default=None,
                       help="comma-separated class names")
    p_img.set_defaults(fn=_explain_image)

    p_txt = sub.add_parser("explain-text", help="local explanation of one text line")
    common(p_txt, TEXT_METHODS)
    p_txt.add_argument("--input", required=True, help="UTF-8 text file")
    p_txt.add_argument("--line", type=int, default=0,
                       help="line number to explain")
    p_txt.add_argument("--exact", action="store_true")
    p_txt.set_defaults(fn=_explain_text)

    p_tab = sub.add_parser("explain-tabular",
                           help="local explanation of one CSV row")
    common(p_tab, TABULAR_METHODS)
    p_tab.add_argument("--data", required=True, help="CSV with header")
    p_tab.add_argument("--row", type=int, default=0)
    p_tab.add_argument("--discretize", action="store_true",
                       help="route continuous columns through quartile bins")
    p_tab.add_argument("--exact", action="store_true")
    p_tab.set_defaults(fn=_explain_tabular)

    p_glob = sub.add_parser("global", help="model-level visualization")
    p_glob.add_argument("--method", required=True, choices=GLOBAL_METHODS)
    p_glob.add_argument("--model", required=True)
    p_glob.add_argument("--input", default=None,
                        help="source image for deepdream/inverted")
    p_glob.add_argument("--target-layer", default="conv2")
    p_glob.add_argument("--target-filter", type=int, default=None)
    p_glob.add_argument("--class", dest="cls", type=int, default=None)
    p_glob.add_argument("--num-iter", type=int, default=10)
    p_glob.add_argument("--lr", type=float, default=None,
                        help="override the mode's default step size")
    p_glob.add_argument("--seed", type=int, default=_default_seed())
    p_glob.add_argument("--out", default=None)
    p_glob.add_argument("--snapshot-every", type=int, default=0)
    p_glob.set_defaults(fn=_global)

    return parser


def cli_main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 2
    try:
        return args.fn(args)
    except PerceptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
