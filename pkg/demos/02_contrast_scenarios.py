"""
Contrast and truncation on two scripted steps
=============================================

Two toy steps over an 8-token vocabulary. In the first, the clean view
narrowly prefers the wrong token (1) and the degraded view prefers it
strongly, so contrast promotes token 2. In the second, the degraded view
boosts token 4, which drops out of the candidate set entirely.
"""
import numpy as np

from savcd import contrast, sat_candidates, softmax

np.set_printoptions(precision=2, suppress=True)

expert = np.array([0.0, 2.0, 1.9, 0, 0, 0, 0, 0])
amateur = np.array([0.0, 3.0, 0.0, 0, 0, 0, 0, 0])
l_cd = contrast(expert, amateur, alpha=1.0)
print("greedy on expert:   ", int(np.argmax(expert)))
print("greedy on contrast: ", int(np.argmax(l_cd)))

expert = np.array([0.0, 0, 0, 4.0, 2.0, 0, 0, 0])
amateur = np.array([0.0, 0, 0, 3.0, 5.0, 0, 0, 0])
l_cd = contrast(expert, amateur, alpha=1.0)
cs = sat_candidates(expert, gamma=-0.5)
p_cd = softmax(l_cd)
print("contrasted probs:   ", p_cd)
print(f"cutoff beta_t*max = {cs.threshold_used * p_cd.max():.3f}, p_cd[4] = {p_cd[4]:.4f}")
print("candidates:         ", cs.sorted())
