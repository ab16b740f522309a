"""End-to-end check against a real simulator sweep.

Drives the simulator through its command line only (the CSV is the whole
contract between the two packages).  Trial count is reduced: the figure
structure — rows, flags, curve families — does not depend on it.
"""

import shutil
import subprocess

import pytest

from vrplot import PlotSpec, SchemaError, build_series, read_sweep, render


def _report(name, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] {name}"
    if detail:
        line += f" -- {detail}"
    print(line)
    return ok


@pytest.fixture(scope="module")
def default_sweep_csv(tmp_path_factory):
    exe = shutil.which("vrmimo")
    if exe is None:
        pytest.skip("simulator CLI not on PATH; cannot produce a sweep CSV")
    path = tmp_path_factory.mktemp("accept") / "sweep.csv"
    proc = subprocess.run(
        [exe, "sweep-d", "--trials", "80", "--out", str(path)],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return path


def test_renders_default_sweep_both_panels(default_sweep_csv, tmp_path):
    out = tmp_path / "sweep.png"
    result = render(PlotSpec(default_sweep_csv, out))
    ok = (out.exists() and out.stat().st_size > 0
          and result.panels == ("trace-m", "trace-d")
          and result.families == {"trace-m": 12, "trace-d": 12})
    _report("plot helper renders default sweep", ok,
            f"panels {result.panels}, families {result.families}")
    assert out.exists() and out.stat().st_size > 0
    assert result.panels == ("trace-m", "trace-d")
    # 2 precoders x 3 estimators x 2 non-stationary scenarios per panel
    assert result.families == {"trace-m": 12, "trace-d": 12}


def test_singular_cells_absent_from_zf_worst_curve(default_sweep_csv):
    rows = read_sweep(default_sweep_csv)
    flagged_d = {r.D for r in rows
                 if r.flags == "singular" and r.scenario == "worst"
                 and r.precoder == "zf" and r.normalization == "trace-m"}
    curves, _ = build_series(rows, "trace-m")
    zf_mc = next(c for c in curves
                 if (c.scenario, c.precoder, c.estimator)
                 == ("worst", "zf", "monte-carlo"))
    ok = (flagged_d == set(range(2, 30, 2)) and min(zf_mc.D) == 30
          and not flagged_d.intersection(zf_mc.D))
    _report("singular cells absent from ZF worst-case curve", ok,
            f"curve starts at D={min(zf_mc.D)}, "
            f"{len(flagged_d)} singular cells omitted")
    assert flagged_d == set(range(2, 30, 2))
    assert min(zf_mc.D) == 30
    assert not flagged_d.intersection(zf_mc.D)


def test_schema_mismatch_rejected(default_sweep_csv, tmp_path):
    lines = default_sweep_csv.read_text().splitlines()
    corrupted = tmp_path / "corrupted.csv"
    corrupted.write_text("\n".join([lines[0].replace("sinr_db", "snr_db")]
                                   + lines[1:]) + "\n")
    with pytest.raises(SchemaError):
        render(PlotSpec(corrupted, tmp_path / "x.png"))
    _report("schema mismatch rejected", True, "SchemaError raised")
