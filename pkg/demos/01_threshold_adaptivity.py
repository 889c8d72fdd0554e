"""
Entropy-adaptive truncation
===========================

A confident step gets a high threshold and a small candidate set. A spread
out step gets a low threshold, so more of the tail survives.
"""
import numpy as np

from savcd import entropy_bits, h_decay, sat_candidates, softmax

rng = np.random.default_rng(0)

# Sharpen or flatten the same logits with a temperature.
base = rng.normal(0, 1, 32)
for temperature in (0.1, 0.5, 1.0, 2.0, 8.0):
    logits = base / temperature
    p = softmax(logits)
    cs = sat_candidates(logits, gamma=-0.5)
    print(f"T={temperature:4.1f}  H={entropy_bits(p):5.2f} bits  beta_t={cs.threshold_used:.3f}  |C|={len(cs):2d}")

# gamma controls how fast the threshold decays with entropy.
p = softmax(base)
for gamma in (-0.1, -0.5, -1.0, -2.0):
    print(f"gamma={gamma:5.1f}  beta_t={h_decay(p, gamma):.3f}")
