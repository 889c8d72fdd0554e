"""Regenerate the bundled demo image, demo script and benchmark suite."""
import json
from pathlib import Path

import numpy as np

from savcd.augment import save_png
from savcd.backend import image_digest

ASSETS = Path(__file__).resolve().parents[1] / "src" / "savcd" / "assets"
V, END = 8, 7


def row(**kv):
    r = [0.0] * V
    for k, v in kv.items():
        r[int(k[1:])] = float(v)
    return r


# Each case: expert/amateur rows per step plus the scripted correct sequence.
SUITE = {
    "vocab_size": V,
    "end_token": END,
    "prompt_tokens": [0],
    "cases": [
        {
            # Expert narrowly prefers wrong token 1; the amateur prefers it strongly.
            "name": "failure_correction",
            "steps": [
                {"expert": row(t1=2.0, t2=1.9), "amateur": row(t1=3.0, t2=0.0)},
                {"expert": row(t7=5.0), "amateur": row(t7=5.0)},
            ],
            "ground_truth": [2, END],
        },
        {
            # Noise makes the amateur hallucinate token 4; contrast pushes it down.
            "name": "hallucination_penalty",
            "steps": [
                {"expert": row(t3=4.0, t4=2.0), "amateur": row(t3=3.0, t4=5.0)},
                {"expert": row(t7=5.0), "amateur": row(t7=5.0)},
            ],
            "ground_truth": [3, END],
        },
        {
            # Tail token 6 is near-impossible for the expert but even less likely
            # for the amateur, so raw contrast ranks it first.
            "name": "tail_boost",
            "steps": [
                {"expert": row(t5=6.0, t6=1.0), "amateur": row(t5=6.5, t6=-6.0)},
                {"expert": row(t7=5.0), "amateur": row(t7=5.0)},
            ],
            "ground_truth": [5, END],
        },
        {
            # Token 6 clears a static 0.1 cutoff but not the low-entropy adaptive one.
            "name": "static_threshold_leak",
            "steps": [
                {"expert": row(t5=6.0, t6=4.0), "amateur": row(t5=7.0, t6=0.0)},
                {"expert": row(t7=5.0), "amateur": row(t7=5.0)},
            ],
            "ground_truth": [5, END],
        },
        {
            # Confident function word, then an uncertain content word the
            # contrast resolves, then end.
            "name": "mixed_confidence",
            "steps": [
                {"expert": row(t1=8.0), "amateur": row(t1=8.0)},
                {"expert": row(t2=1.2, t3=1.1, t4=1.0, t5=0.9), "amateur": row(t2=2.5, t3=0.0, t4=1.0, t5=0.9)},
                {"expert": row(t7=5.0), "amateur": row(t7=5.0)},
            ],
            "ground_truth": [1, 3, END],
        },
    ],
}


def demo_image():
    h, w = 32, 32
    y, x = np.mgrid[0:h, 0:w]
    img = np.stack([x * 8, y * 8, (x + y) * 4], axis=-1).astype(np.uint8)
    img[8:16, 20:28] = (220, 40, 40)
    return img


DEMO_QUERY = "Is the red square above the blue line?"


def demo_script(img):
    vocab, end = 16, 15
    rng = np.random.default_rng(20240607)
    steps = []
    # Alternate peaked and flat expert rows so entropy varies step to step.
    for t in range(10):
        spread = [6.0, 1.0, 3.5, 0.5, 5.0, 2.0, 4.0, 1.5, 7.0, 0.8][t]
        expert = rng.normal(0.0, 1.0, vocab) / spread
        expert[(3 * t + 1) % 14] += 0.3 + 6.0 / spread**2
        amateur = expert + rng.normal(0.0, 0.8, vocab)
        amateur[(3 * t + 1) % 14] += 0.5
        steps.append({"expert": [round(float(v), 6) for v in expert],
                      "amateur": [round(float(v), 6) for v in amateur]})
    final = [0.0] * vocab
    final[end] = 9.0
    steps.append({"expert": final, "amateur": final})
    return {
        "vocab_size": vocab,
        "end_token": end,
        "prompt_length": 3,
        "prompt_tokens": [0, 4, 9],
        "strict": False,
        "clean_image_sha256": image_digest(img),
        "steps": steps,
        "contexts": {},
        "completions": {
            DEMO_QUERY: "Reason: The question asks about vertical placement. Vertical flip swaps top and "
                        "bottom, which invalidates it.\nChoice: vertical flip",
        },
    }


if __name__ == "__main__":
    img = demo_image()
    save_png(img, ASSETS / "demo_image.png")
    (ASSETS / "demo_script.json").write_text(json.dumps(demo_script(img), indent=1) + "\n")
    (ASSETS / "hallucination_suite.json").write_text(json.dumps(SUITE, indent=1) + "\n")
