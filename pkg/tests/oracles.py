"""Independent reference computations; deliberately share no code with savcd."""
import math


def softmax_ref(logits):
    m = max(x for x in logits if x != -math.inf)
    e = [0.0 if x == -math.inf else math.exp(x - m) for x in logits]
    s = sum(e)
    return [v / s for v in e]


def entropy_ref(p):
    return -sum(q * math.log2(q) for q in p if q > 0)


def sat_threshold_ref(logits, gamma):
    return 1.0 / (1.0 + math.exp(-gamma * entropy_ref(softmax_ref(logits))))


def brute_force_filter(p, beta):
    """Every token tested against ``p(y) >= beta * max_w p(w)``, one at a time."""
    top = max(p)
    return {y for y in range(len(p)) if p[y] >= beta * top}
