"""
The six augmentations
=====================

Each one writes a PNG next to this script so the results can be compared
by eye with the bundled demo image.
"""
from pathlib import Path

import numpy as np

from savcd import AugmentationKind, augment
from savcd.harness import asset_path

image = augment.load_png(asset_path("demo_image.png"))
out_dir = Path(__file__).with_name("out")
out_dir.mkdir(exist_ok=True)

for kind in AugmentationKind:
    view = augment.apply(kind, image, seed=3)
    augment.save_png(view, out_dir / f"{kind.value}.png")
    changed = (view != image).any(axis=2).mean()
    print(f"{kind.label:16s} shape={view.shape}  pixels changed: {changed:.0%}")

# Flips and inversion undo themselves.
assert np.array_equal(augment.horizontal_flip(augment.horizontal_flip(image)), image)

# Noise strength grows with the diffusion step.
for step in (1, 100, 500, 1000):
    noisy = augment.add_diffusion_noise(image, step=step, seed=0)
    print(f"step {step:4d}: mean |delta| = {np.abs(noisy.astype(int) - image).mean():6.2f}")
