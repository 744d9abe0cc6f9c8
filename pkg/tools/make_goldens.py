"""Freeze golden expected values after oracle verification.

Run once after the engine is validated against the independent oracles;
outputs land in tests/golden/ and are committed.
"""

import hashlib
import json
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))
sys.path.insert(0, str(ROOT / "tests"))

from percept.data import ingest_csv  # noqa: E402
from percept.gradient import CamRequest, grad_cam, vanilla_bp  # noqa: E402
from percept.imageio import read_image  # noqa: E402
from percept.models import (  # noqa: E402
    CentroidTabularPredictor,
    build_reference_cnn,
)
from percept.perturbation import TabularInstance, cle_explain  # noqa: E402
from percept.render import RenderSpec, render_bars, render_saliency  # noqa: E402

from oracles import scalar_forward  # noqa: E402

GOLDEN = ROOT / "tests" / "golden"


def main():
    GOLDEN.mkdir(exist_ok=True)
    digit = read_image(ROOT / "fixtures" / "digit0.pgm").array

    # forward logits on the digit fixture, computed by the scalar-loop oracle
    net = build_reference_cnn(7)
    logits = scalar_forward(net, digit.astype(np.float64))
    (GOLDEN / "forward_digit0.json").write_text(
        json.dumps({"seed": 7, "input": "fixtures/digit0.pgm",
                    "logits": logits}, indent=2) + "\n")

    # vanilla-bp map checksum (engine output, frozen after gradient_check
    # validated the backward pass against finite differences)
    m = vanilla_bp(net, digit, 0)
    sha = hashlib.sha256(m.values.tobytes()).hexdigest()
    (GOLDEN / "vanilla_digit0.json").write_text(
        json.dumps({"class": 0, "sha256": sha,
                    "sum": float(m.values.sum())}, indent=2) + "\n")

    # grad-cam overlay on the planted CNN (first verified run)
    planted = build_reference_cnn(7, planted=True)
    sal = grad_cam(planted, digit, CamRequest(target_layer="relu2",
                                              target_class=0))
    render_saliency(sal, digit, RenderSpec(colormap="jet", alpha=0.5),
                    GOLDEN / "overlay_gradcam_planted_map.ppm",
                    GOLDEN / "overlay_gradcam_planted.ppm")

    # bar chart for the tabular CLE fixture (first verified run)
    dataset = ingest_csv(ROOT / "fixtures" / "adult.csv")
    predictor = CentroidTabularPredictor(dataset)
    instance = TabularInstance(dataset.rows[0], dataset, discretize=True)
    expl = cle_explain(predictor, instance, label=0, n_samples=500, seed=0,
                       class_names=list(dataset.schema.class_names))
    render_bars(expl, GOLDEN / "bars_cle_tabular.ppm")

    print(f"goldens written to {GOLDEN}")


if __name__ == "__main__":
    main()
