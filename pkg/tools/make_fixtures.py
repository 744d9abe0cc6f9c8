"""Generate the committed fixture corpus (digits, CSV, sentiment, weights).

Deterministic; rerunning reproduces identical bytes.
"""

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from percept.imageio import write_image  # noqa: E402
from percept.models import build_reference_cnn  # noqa: E402
from percept.netio import save_network  # noqa: E402

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"

BG = 26 / 255.0
FG = 230 / 255.0


def _canvas():
    return np.full((16, 16), BG, dtype=np.float32)


def digit0():
    img = _canvas()
    yy, xx = np.mgrid[0:16, 0:16]
    # elliptical ring centred on the glyph box
    r = ((yy - 8.0) / 5.0) ** 2 + ((xx - 8.0) / 3.6) ** 2
    img[(r <= 1.25) & (r >= 0.45)] = FG
    return img


def digit1():
    img = _canvas()
    img[3:13, 8:10] = FG
    img[4:6, 6:8] = FG  # serif
    img[12:13, 6:12] = FG  # base
    return img


def digit2():
    img = _canvas()
    img[3:5, 5:11] = FG  # top bar
    img[5:7, 9:11] = FG  # upper right
    img[7:9, 7:10] = FG  # middle
    img[9:11, 5:8] = FG  # lower left
    img[11:13, 5:11] = FG  # bottom bar
    return img


def make_digits():
    for name, fn in (("digit0", digit0), ("digit1", digit1), ("digit2", digit2)):
        write_image(fn(), FIXTURES / f"{name}.pgm")


def make_adult_csv():
    rng = np.random.default_rng(123)
    workclasses = ["private", "government", "self_employed"]
    sexes = ["male", "female"]
    lines = ["age,workclass,education_num,hours_per_week,sex,income"]
    for _ in range(40):
        age = int(rng.integers(20, 65))
        wc = workclasses[int(rng.integers(0, 3))]
        edu = int(rng.integers(6, 17))
        hours = int(rng.integers(20, 61))
        sex = sexes[int(rng.integers(0, 2))]
        score = (0.05 * (age - 40) + 0.35 * (edu - 10) + 0.04 * (hours - 40)
                 + (0.6 if sex == "male" else 0.0) + rng.normal(0.0, 0.8))
        income = ">50k" if score > 0.5 else "<=50k"
        lines.append(f"{age},{wc},{edu},{hours},{sex},{income}")
    (FIXTURES / "adult.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")


SENTENCES = [
    "the food was good and the staff were friendly",
    "what a great experience overall",
    "excellent service and tasty dishes",
    "the room was lovely and very clean",
    "a wonderful evening with great music",
    "the portions were generous and the soup was tasty",
    "friendly waiters made it a good night",
    "great value and an excellent location",
    "the dessert was wonderful and the coffee was good",
    "lovely atmosphere with friendly people",
    "the food was bad and the room was dirty",
    "a terrible experience from start to finish",
    "awful service and bland dishes",
    "the staff were rude and the music was awful",
    "slow service ruined an otherwise average meal",
    "the soup was bland and the bread was stale",
    "rude waiters made it a bad night",
    "terrible value and an awful location",
    "the dessert was bad and the coffee was cold",
    "dirty tables and slow careless staff",
]


def make_sentiment():
    (FIXTURES / "sentiment.txt").write_text(
        "\n".join(SENTENCES) + "\n", encoding="utf-8")


def make_networks():
    save_network(build_reference_cnn(7), FIXTURES / "reference_cnn.pcpt")
    save_network(build_reference_cnn(7, planted=True),
                 FIXTURES / "planted_cnn.pcpt")


def main():
    FIXTURES.mkdir(exist_ok=True)
    make_digits()
    make_adult_csv()
    make_sentiment()
    make_networks()
    print(f"fixtures written to {FIXTURES}")


if __name__ == "__main__":
    main()
