#!/usr/bin/env python3
# A miniature version of the ablation experiment grid: every loss
# combination on small datasets at two difficulty levels, results written
# as CSV plus a self-generated SVG chart under demos/output/.
#
# The full grid (including the 100- and 1000-puzzle rows) runs through the
# CLI instead:  neurosudoku --out results table1 --profile full

import os

from neurosudoku.charts import comparison_chart
from neurosudoku.losses import ABLATIONS, ablation_config
from neurosudoku.training import (
    TrainConfig,
    build_dataset,
    kfold_evaluate,
    result_rows,
    write_results_csv,
)

OUT_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "output")
os.makedirs(OUT_DIR, exist_ok=True)

N_PUZZLES = 12
DIFFICULTIES = (0.1, 0.8)
EPOCHS = 60  # a fast demo; the experiment default is 200

rows = []
means = {}
for difficulty in DIFFICULTIES:
    dataset = build_dataset(N_PUZZLES, difficulty, seed=0)
    for label in ABLATIONS:
        config = TrainConfig(epochs=EPOCHS, folds=3, seed=0,
                             loss=ablation_config(label))
        result = kfold_evaluate(dataset, config)
        rows.extend(result_rows(result, N_PUZZLES, difficulty))
        means[(difficulty, label)] = result.mean_all
        print(f"difficulty {difficulty} {label:22s} "
              f"acc_all={result.mean_all:.3f} +/- {result.std_all:.3f}")

csv_path = os.path.join(OUT_DIR, "mini_grid.csv")
write_results_csv(rows, csv_path)
print("\nwrote", csv_path)

svg = comparison_chart(
    title=f"accuracy vs difficulty ({N_PUZZLES} puzzles, {EPOCHS} epochs)",
    group_labels=[str(d) for d in DIFFICULTIES],
    series=[(label, [means[(d, label)] for d in DIFFICULTIES]) for label in ABLATIONS],
)
svg_path = os.path.join(OUT_DIR, "mini_grid.svg")
with open(svg_path, "w", encoding="utf-8") as fh:
    fh.write(svg)
print("wrote", svg_path)
