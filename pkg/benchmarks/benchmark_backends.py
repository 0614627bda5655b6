"""Compare the compiled and pure-python accumulation kernels.

Runs the same scenarios through both backends in subprocesses (the backend is
chosen at import time) and reports wall time plus the worst state deviation.

    python3 benchmarks/benchmark_backends.py
"""
from __future__ import annotations

import json
import os
import subprocess
import sys
import tempfile

CASES = [
    {"label": "pair, constant kernel", "n": 2, "d": 1, "family": "constant", "t_end": 5.0},
    {"label": "N=50 1D, constant kernel", "n": 50, "d": 1, "family": "constant", "t_end": 2.0},
    {"label": "N=50 2D, power-law kernel", "n": 50, "d": 2, "family": "power_law", "t_end": 2.0},
    {"label": "N=200 1D, constant kernel", "n": 200, "d": 1, "family": "constant", "t_end": 1.0},
]

_RUN = """
import json, sys, time
import numpy as np
import hkdelay

case = json.loads(sys.argv[1])
kernel = hkdelay.InfluenceKernel(case["family"])
delay = hkdelay.DelayProfile("constant", tau_bar=0.25)
weight = hkdelay.MemoryWeight("constant", value=1.0)
config = hkdelay.ModelConfig(
    case["n"], case["d"], kernel, delay, weight, dt=0.0125, t_end=case["t_end"]
)
rng = np.random.default_rng(42)
initial = hkdelay.InitialHistory.constant(rng.uniform(-1.0, 1.0, size=(case["n"], case["d"])))
t0 = time.perf_counter()
trajectory = hkdelay.simulate(config, initial)
elapsed = time.perf_counter() - t0
np.save(sys.argv[2], trajectory.states[-1])
print(json.dumps({"backend": hkdelay.backend_name(), "seconds": elapsed}))
"""


def run_case(case: dict, backend: str, out_path: str) -> dict:
    env = dict(os.environ, HKDELAY_BACKEND=backend)
    proc = subprocess.run(
        [sys.executable, "-c", _RUN, json.dumps(case), out_path],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main() -> None:
    import numpy as np

    print(f"{'case':<28} {'compiled':>10} {'python':>10} {'speedup':>8} {'max|diff|':>10}")
    for case in CASES:
        with tempfile.TemporaryDirectory() as tmp:
            paths = {b: os.path.join(tmp, b + ".npy") for b in ("compiled", "python")}
            stats = {b: run_case(case, b, paths[b]) for b in paths}
            diff = float(
                np.abs(np.load(paths["compiled"]) - np.load(paths["python"])).max()
            )
        t_c = stats["compiled"]["seconds"]
        t_p = stats["python"]["seconds"]
        print(
            f"{case['label']:<28} {t_c:>9.3f}s {t_p:>9.3f}s {t_p / t_c:>7.1f}x {diff:>10.2e}"
        )


if __name__ == "__main__":
    main()
