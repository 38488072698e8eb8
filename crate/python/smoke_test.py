"""Smoke test of the qg2py extension: scales, a short run and the readers.

Build first with `maturin develop --release` (or install the wheel), then
run `python python/smoke_test.py`.
"""

import math
import os
import tempfile

import qg2py


def main():
    assert round(qg2py.munk_scale(0.001, 450.0, 2.0), 3) == 0.026
    assert round(qg2py.kolmogorov_scale(1.0, 100.0), 4) == 0.0316

    ini = qg2py.case_config("case1", "16x32", "nonlinear")
    assert "alpha = " in ini

    with tempfile.TemporaryDirectory() as tmp:
        out = os.path.join(tmp, "run")
        text = ini.replace("t_end = 1e2", "t_end = 1e-2").replace(
            "output = output/case1-16x32-nonlinear", "output = " + out
        )
        text = text.replace("window_start = 2e1", "window_start = 0e0")
        text = text.replace("window_end = 1e2", "window_end = 1e-2")
        text = text.replace("enstrophy_stride = 1e-1", "enstrophy_stride = 1e-3")
        run_dir, steps, t, stats = qg2py.run(text)
        assert steps == 400, steps
        assert abs(t - 0.01) < 1e-12
        e1_avg, e1_max, e2_avg, e2_min = stats
        assert 0.0 < e2_min <= e2_avg and e1_avg <= e1_max < 10.0

        series = qg2py.read_enstrophy(os.path.join(run_dir, "enstrophy.csv"))
        assert len(series) == 11
        assert abs(series[0][1] - 2.0 / 3.0) < 2e-3
        (a1, lo1, hi1), _ = qg2py.enstrophy_stats(series, (0.0, 0.01))
        assert lo1 <= a1 <= hi1

        nx, ny, bounds, time, values = qg2py.read_fld(os.path.join(run_dir, "avg_q1.fld"))
        assert (nx, ny) == (16, 32) and bounds == (0.0, 1.0, -1.0, 1.0)
        assert len(values) == nx * ny and all(math.isfinite(v) for v in values)

    rows = qg2py.verify("ro1-re10", [8, 16], t_end=0.05)
    assert [n for n, _ in rows] == [8, 16]
    rate = math.log2(rows[0][1][0] / rows[1][1][0])
    assert rate > 1.8, rate

    try:
        qg2py.case_config("case3")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown case accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
