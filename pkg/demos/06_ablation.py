"""
Threshold ablation on the injection suite
=========================================

The bundled suite has five short scripted cases, each with known
ground-truth tokens. Every row below decodes all of them greedily.
"""
from savcd import harness
from savcd.engine import ThresholdMode as M
from savcd.harness import GridCell

suite = harness.load_suite()
cells = [
    GridCell(M.NONE),
    GridCell(M.APC, beta=0.0),
    GridCell(M.APC, beta=0.1),
    GridCell(M.HNS, gamma=-0.5),
    GridCell(M.SAT, gamma=-0.1),
    GridCell(M.SAT, gamma=-0.5),
    GridCell(M.SAT, gamma=-1.0),
]
rows = harness.run_ablation(cells, suite)
print(harness.rows_to_csv(rows))
