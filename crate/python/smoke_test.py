#!/usr/bin/env python3
"""Smoke test for the lzkz_py extension module.

Builds nothing itself: run `cargo build -p lzkz-python` (or --release)
first, then `python3 python/smoke_test.py`. The script locates the compiled
cdylib under target/, imports it, and exercises one representative call
from each API area.
"""

import json
import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parent.parent


def locate_cdylib() -> Path:
    names = ("liblzkz_py.so", "liblzkz_py.dylib", "lzkz_py.dll")
    candidates = [
        REPO_ROOT / "target" / profile / name
        for profile in ("release", "debug")
        for name in names
    ]
    hits = [p for p in candidates if p.exists()]
    if not hits:
        sys.exit(
            "lzkz_py cdylib not found; run `cargo build -p lzkz-python` first"
        )
    # Prefer the most recently built artifact.
    return max(hits, key=lambda p: p.stat().st_mtime)


def import_module(tmp: Path):
    lib = locate_cdylib()
    target = tmp / ("lzkz_py" + (".pyd" if lib.suffix == ".dll" else ".so"))
    shutil.copyfile(lib, target)
    sys.path.insert(0, str(tmp))
    import lzkz_py

    return lzkz_py


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        m = import_module(Path(tmp))

        # Closed-form layer: the rate at which a full sweep is 50/50.
        nu_half = 2.0 * math.pi * 10.3**2 / (m.HBAR * math.log(2.0))
        assert abs(m.lz_probability(10.3, nu_half) - 0.5) < 1e-12

        # Visibility round trip on both branches.
        for p, branch in ((0.12, "near_adiabatic"), (0.38, "near_sudden")):
            v = m.visibility(p)
            assert abs(m.invert_visibility(v, branch) - p) < 1e-12, (p, branch)

        # Propagation vs the transfer-matrix closed form, deep in the
        # asymptotic regime.
        params = m.QubitParams(10.3)
        w = m.Waveform.double_passage(1200.0, -1600.0, 1.0, 0.5)
        shot = m.single_shot(params, w, tol=1e-6)
        assert 0.0 <= shot["p_excited"] <= 1.0
        assert shot["phi"] is not None and math.isfinite(shot["phi"])
        assert len(shot["nu_per_crossing"]) == 2
        assert abs(shot["p_excited"] - shot["p_transfer_matrix"]) < 0.02, shot

        # Dephasing damps the interference but keeps probabilities physical.
        damped = m.single_shot(m.QubitParams(10.3, gamma_phi=0.5), w, tol=1e-6)
        assert 0.0 <= damped["p_excited"] <= 1.0

        # Kibble-Zurek layer: fit recovers a planted scale factor.
        xs = [0.05 + 0.1 * k for k in range(12)]
        points = [(x, m.defect_density(1.3 * x)) for x in xs]
        alpha, residual = m.fit_alpha(points)
        assert abs(alpha - 1.3) < 1e-6 and residual < 1e-9, (alpha, residual)

        # Sweep harness: tiny deterministic map through the JSON config.
        config = json.dumps(
            {
                "kind": "lzs_map",
                "qubit": {"delta": 10.3},
                "pulse": {
                    "convention": {"fixed_amplitude": 120.0},
                    "hold_time": 0.05,
                },
                "axes": [
                    {
                        "name": "eps_lz0",
                        "min": 60.0,
                        "max": 70.0,
                        "count": 2,
                        "spacing": "linear",
                    },
                    {
                        "name": "nu",
                        "min": 600.0,
                        "max": 900.0,
                        "count": 2,
                        "spacing": "log",
                    },
                ],
                "tol": 1e-5,
                "seed": 11,
            }
        )
        first = m.run_sweep(config)
        again = m.run_sweep(config)
        assert first["columns"][0] == "eps_lz0"
        assert len(first["rows"]) == 4
        assert first["csv"] == again["csv"], "sweep must be deterministic"

        # Config errors surface as ValueError.
        try:
            m.run_sweep("{}")
        except ValueError:
            pass
        else:
            raise AssertionError("empty config should raise ValueError")

    print("smoke test passed")


if __name__ == "__main__":
    main()
