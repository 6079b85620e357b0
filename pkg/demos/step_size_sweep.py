"""Cost curves for several RMSProp step sizes on the three toy datasets.

Run: python3 demos/step_size_sweep.py [output-dir]

Writes one SVG per dataset with a line per step size. The CLI equivalent is
``vqkmeans train --preset blobs --sweep 0.05,0.1,0.15 --out runs/blobs``.
"""

import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from vqkmeans import svg
from vqkmeans.datasets import atomic_write_text
from vqkmeans.experiment import DEFAULT_SWEEP, preset, run_training

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")

for name in ("blobs", "circles", "moons"):
    series = {}
    for step in DEFAULT_SWEEP:
        cfg = preset(name, seed=0)
        cfg.train = replace(cfg.train, step_size=step, max_epochs=min(cfg.train.max_epochs, 100))
        trace, _ = run_training(cfg)
        series[f"step {step:g}"] = (np.arange(len(trace.costs)), trace.costs)
        print(f"{name:8s} step {step:<5g} min C {trace.min_cost:.4f} at epoch {trace.argmin_epoch}")
    atomic_write_text(out / f"sweep_{name}.svg", svg.line_chart(series, title=f"{name}: C(θ) vs epoch"))
