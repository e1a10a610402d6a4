from __future__ import annotations

import csv
import math
import xml.etree.ElementTree as ET

import pytest

from energy_lab.harness import SweepConfig, fit_groups, run_sweep
from energy_lab.report import (
    FITS_COLUMNS,
    SWEEP_COLUMNS,
    emit_report,
    read_sweep_csv,
    scatter_svg,
)

SVG_NS = "{http://www.w3.org/2000/svg}"


@pytest.fixture(scope="module")
def records():
    cfg = SweepConfig(dims=(3,), families=(("Gaussian", None), ("MultivariateT", 2.0)),
                      mu1_values=(0.1, 0.2, 0.4), n_cov=3, n_samples=1024, master_seed=5)
    return run_sweep(cfg)


def test_emit_report_writes_expected_files(records, tmp_path):
    paths = emit_report(records, None, tmp_path / "out")
    names = sorted(p.name for p in paths)
    assert names == ["fits.csv", "scatter_d3_Gaussian.svg", "scatter_d3_MultivariateT_dof_2.svg",
                     "sweep.csv"]
    with open(tmp_path / "out" / "sweep.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == SWEEP_COLUMNS
    assert len(rows) == 1 + len(records)
    with open(tmp_path / "out" / "fits.csv", newline="") as fh:
        fits = list(csv.reader(fh))
    assert tuple(fits[0]) == FITS_COLUMNS
    assert [r[-1] for r in fits[1:]] == ["ok", "moments_unreliable"]


def test_sweep_csv_round_trip_is_exact(records, tmp_path):
    emit_report(records, fit_groups(records), tmp_path)
    back = read_sweep_csv(tmp_path / "sweep.csv")
    for rec, row in zip(records, back):
        assert row["estimate"] == rec.estimate.value
        assert row["std_error"] == rec.estimate.std_error
        assert row["feature2"] == rec.features[1]
        assert row["seed"] == rec.seed
        assert row["flags"] == rec.flags
        assert row["param"] == rec.param
        if rec.family == "Gaussian":
            assert row["predicted"] == rec.predicted
        else:
            assert math.isnan(row["predicted"])


def test_svg_is_valid_and_has_one_marker_per_point(records, tmp_path):
    emit_report(records, None, tmp_path)
    root = ET.parse(tmp_path / "scatter_d3_Gaussian.svg").getroot()
    markers = [c for c in root.iter(f"{SVG_NS}circle") if c.get("class") == "marker"]
    assert len(markers) == 9
    assert any(e.get("class") == "reference" for e in root.iter(f"{SVG_NS}line"))
    title = next(root.iter(f"{SVG_NS}text")).text
    assert "R^2=" in title


def test_scatter_svg_skips_nonfinite_and_escapes_title():
    svg = scatter_svg([1.0, math.nan, 2.0], [1.0, 1.0, math.inf], "a<b & c")
    root = ET.fromstring(svg)
    assert len([c for c in root.iter(f"{SVG_NS}circle")]) == 1
    assert "a&lt;b &amp; c" in svg
    ET.fromstring(scatter_svg([], [], "empty"))


def test_emit_report_errors(records, tmp_path):
    with pytest.raises(ValueError):
        emit_report([], None, tmp_path)
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        emit_report(records, None, blocker)
