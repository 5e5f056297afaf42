import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from robust_spdc import (Axis, Design, DesignConstraints, DesignFileError, PumpPhysics, Segment,
                         SensitivityCoefficients, auto_width_90, default_coefficients, design_mu, parse_pattern,
                         periodically_poled, recover_segments, sweep)
from robust_spdc import io as dio
from robust_spdc.cli import main


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def write_doc(tmp_path, design, name="d.json", coeffs=None):
    path = tmp_path / name
    dio.save(dio.DesignFile(design, coeffs or default_coefficients()), path)
    return path


# -- design files ---------------------------------------------------------------

def test_reference_files_are_canonical(pp_file, dmcs_file):
    for path in (pp_file, dmcs_file):
        text = path.read_text()
        assert dio.dumps(dio.loads(text)) == text


def test_round_trip_with_optional_sections():
    pump = PumpPhysics(1e-11, 1.8, 1.8, 1.9, 1.7e15, 1.8e15, 3.5e15, 2.5)
    constraints = DesignConstraints(min_domain_width=2e-6, efficiency_floor=0.2, delta_k_material=7e5)
    doc = dio.DesignFile(periodically_poled(0.01, 2.0), default_coefficients(), pump, constraints)
    text = dio.dumps(doc)
    back = dio.loads(text)
    assert back.pump == pump and back.constraints == constraints and back.design == doc.design
    assert dio.dumps(back) == text
    body = json.loads(text)
    assert set(body["design"]["segments"][0]) == {"omega_rad_per_m", "delta_k_rad_per_m", "length_m"}


def _mutate(text, fn):
    body = json.loads(text)
    fn(body)
    return json.dumps(body)


@pytest.mark.parametrize("mutation, field", [
    (lambda b: b["design"]["segments"][0].pop("length_m"), "design.segments[0].length_m"),
    (lambda b: b["design"]["segments"][0].update(length_m=-1.0), "design.segments[0]"),
    (lambda b: b["design"]["segments"][0].update(omega_rad_per_m="fast"), "design.segments[0].omega_rad_per_m"),
    (lambda b: b["design"].update(segments=[]), "design.segments"),
    (lambda b: b.update(schema_version=2), "schema_version"),
    (lambda b: b.pop("design"), "design"),
    (lambda b: b["sensitivity"].update(dk_dT_rad_per_m_per_c=[1]), "sensitivity.dk_dT_rad_per_m_per_c"),
])
def test_load_errors_name_the_field(pp_file, mutation, field):
    text = _mutate(pp_file.read_text(), mutation)
    with pytest.raises(DesignFileError) as exc:
        dio.loads(text)
    assert exc.value.field == field
    assert field in str(exc.value)


def test_invalid_json_and_missing_file(tmp_path):
    with pytest.raises(DesignFileError, match="invalid JSON"):
        dio.loads("{not json")
    with pytest.raises(DesignFileError, match="cannot read"):
        dio.load(tmp_path / "absent.json")


def test_constraints_file_forms(tmp_path, dmcs_file):
    bare = tmp_path / "c.json"
    bare.write_text(json.dumps({"efficiency_floor": 0.5, "flatness": {"half_window_c": 1.0}}))
    c = dio.load_constraints(bare)
    assert c.efficiency_floor == 0.5 and c.flatness.half_window == 1.0 and c.flatness.order == 2
    assert dio.load_constraints(dmcs_file) == DesignConstraints()
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"flatness": {"order": 1.5}}))
    with pytest.raises(DesignFileError, match="flatness.order"):
        dio.load_constraints(bad)


def test_csv_round_trip_at_twelve_digits(dmcs_doc):
    table = sweep(dmcs_doc.design, Axis.TEMPERATURE, dmcs_doc.sensitivity, 3.0, 61)
    cols = dio.read_csv(dio.sweep_csv(table))
    np.testing.assert_allclose(cols["mu"], table.mu, rtol=5e-12)
    np.testing.assert_allclose(cols["deviation"], table.deviation, rtol=5e-12, atol=1e-300)


# -- simulate -------------------------------------------------------------------

def test_simulate_pp_monotone(pp_file):
    code, out, _ = run("simulate", pp_file, "--samples", 10)
    assert code == 0
    cols = dio.read_csv(out)
    assert list(cols) == ["z_m", "mu", "mu_normalized", "u", "v", "w"]
    assert np.all(np.diff(cols["mu"]) > 0)


def test_simulate_row_count(dmcs_file):
    code, out, _ = run("simulate", dmcs_file, "--samples", 2)
    assert code == 0
    assert len(out.strip().splitlines()) == 1 + 2 * 6 + 1


def test_simulate_temperature_offset_stays_in_band(dmcs_file):
    _, base, _ = run("simulate", dmcs_file)
    _, shifted, _ = run("simulate", dmcs_file, "--dT", 1.0)
    mu0 = dio.read_csv(base)["mu"][-1]
    mu1 = dio.read_csv(shifted)["mu"][-1]
    assert abs(mu1 / mu0 - 1) < 0.05


def test_simulate_is_deterministic(dmcs_file):
    assert run("simulate", dmcs_file, "--dlambda", 3.0) == run("simulate", dmcs_file, "--dlambda", 3.0)


def test_simulate_usage_errors(dmcs_file):
    assert run("simulate", dmcs_file, "--dT", 1, "--epsilon", 2)[0] == 1
    assert run("simulate", dmcs_file, "--samples", 1)[0] == 1


# -- sweep ----------------------------------------------------------------------

def test_sweep_pp_width(pp_file):
    code, out, err = run("sweep", pp_file, "--axis", "temperature", "--range", 2.4, "--points", 481)
    assert code == 0
    width = float(err.strip().split("=")[1])
    assert width == pytest.approx(0.89, rel=1e-2)
    assert len(out.splitlines()) == 482


def test_sweep_zero_width_epsilon(pp_file):
    code, out, err = run("sweep", pp_file, "--axis", "epsilon", "--range", 0, 0)
    assert code == 0 and len(out.splitlines()) == 2 and "width90" not in err


def test_sweep_uncalibrated_axis(tmp_path):
    path = write_doc(tmp_path, periodically_poled(0.02, 1.0), coeffs=SensitivityCoefficients(dk_dT=100.0))
    code, _, err = run("sweep", path, "--axis", "angle")
    assert code == 3 and "angle" in err


def test_sweep_range_too_small(pp_file):
    assert run("sweep", pp_file, "--range", 0.1)[0] == 3


# -- design ---------------------------------------------------------------------

def test_design_usage_errors():
    assert run("design", "--starts", 0)[0] == 1
    assert run("design", "--segments", 5)[0] == 1


def test_design_unreachable_efficiency(tmp_path):
    cfile = tmp_path / "c.json"
    cfile.write_text(json.dumps({"efficiency_floor": 1.0}))
    code, out, err = run("design", "--starts", 4, "--constraints", cfile, "--out-dir", tmp_path / "o")
    assert code == 3
    assert "efficiency" in err
    assert not (tmp_path / "o").exists()


def test_design_bad_constraints_file(tmp_path):
    cfile = tmp_path / "c.json"
    cfile.write_text("[")
    assert run("design", "--starts", 1, "--constraints", cfile)[0] == 2


# -- stats ----------------------------------------------------------------------

def test_stats_vacuum(tmp_path):
    path = write_doc(tmp_path, Design((Segment(0.0, 0.0, 0.01),)))
    code, out, _ = run("stats", path, "--nmax", 3)
    rows = dict(line.split(",") for line in out.splitlines())
    assert code == 0 and float(rows["P(0)"]) == 1.0 and float(rows["P(1)"]) == 0.0


def test_stats_unit_mean(tmp_path):
    path = write_doc(tmp_path, Design((Segment(1.0, 0.0, math.asinh(1.0)),)))
    _, out, _ = run("stats", path)
    rows = dict(line.split(",") for line in out.splitlines())
    assert float(rows["mu"]) == pytest.approx(1.0, rel=1e-11)
    assert float(rows["variance"]) == pytest.approx(2.0, rel=1e-11)
    assert float(rows["multi_pair_probability"]) == pytest.approx(0.25, rel=1e-11)


def test_stats_matches_library(dmcs_doc, dmcs_file):
    _, out, _ = run("stats", dmcs_file, "--dT", 0.5)
    rows = dict(line.split(",") for line in out.splitlines())
    mu = design_mu(dmcs_doc.design, 0.5 * dmcs_doc.sensitivity.dk_dT)
    assert float(rows["mu"]) == pytest.approx(mu, rel=1e-11)
    assert float(rows["P(1)"]) == pytest.approx(mu / (1 + mu) / (1 + mu), rel=1e-11)


# -- export-poling ----------------------------------------------------------------

def test_export_poling_round_trip(tmp_path, dmcs_doc, dmcs_file):
    out_path = tmp_path / "walls.txt"
    dk_mat = 2 * math.pi / 9e-6
    code, _, _ = run("export-poling", dmcs_file, "--dk-material", dk_mat, "--min-domain", 1e-6, "--output", out_path)
    assert code == 0
    rec = recover_segments(parse_pattern(out_path.read_text()))
    assert [round(dk, 3) for dk, _ in rec] == [round(s.delta_k, 3) for s in dmcs_doc.design.segments]


def test_export_poling_fabrication_failure(dmcs_file):
    code, _, err = run("export-poling", dmcs_file, "--dk-material", 2 * math.pi / 9e-6, "--min-domain", 1e-5)
    assert code == 3 and "segment 1" in err


# -- scale ----------------------------------------------------------------------

def test_scale_identity_and_round_trip(tmp_path, dmcs_file):
    one = tmp_path / "one.json"
    code, out, _ = run("scale", dmcs_file, "--r", 1, "--output", one)
    assert code == 0 and out.strip() == "pump_power_factor=1"
    assert one.read_text() == dmcs_file.read_text()
    two, back = tmp_path / "two.json", tmp_path / "back.json"
    assert run("scale", dmcs_file, "--r", 2, "--output", two)[1].strip() == "pump_power_factor=0.25"
    run("scale", two, "--r", 0.5, "--output", back)
    assert back.read_text() == dmcs_file.read_text()


def test_scaled_epsilon_width_halves(tmp_path, dmcs_doc, dmcs_file):
    two = tmp_path / "two.json"
    run("scale", dmcs_file, "--r", 2, "--output", two)
    scaled = dio.load(two).design
    ratio = auto_width_90(scaled, Axis.EPSILON, dmcs_doc.sensitivity) / auto_width_90(
        dmcs_doc.design, Axis.EPSILON, dmcs_doc.sensitivity)
    assert ratio == pytest.approx(0.5, rel=1e-3)


def test_scale_rejects_nonpositive(dmcs_file, tmp_path):
    assert run("scale", dmcs_file, "--r", 0, "--output", tmp_path / "x.json")[0] == 1
    assert run("scale", dmcs_file, "--r", -2, "--output", tmp_path / "x.json")[0] == 1


# -- exit codes -----------------------------------------------------------------

def test_input_file_errors(tmp_path):
    assert run("stats", tmp_path / "missing.json")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"schema_version": 1, "design": {"segments": [{"omega_rad_per_m": 1}]}}))
    code, _, err = run("simulate", bad)
    assert code == 2 and "design.segments[0].delta_k_rad_per_m" in err


def test_unknown_command_is_usage_error():
    assert run("frobnicate")[0] == 1
    assert run()[0] == 1


def test_module_entry_point(pp_file):
    proc = subprocess.run([sys.executable, "-m", "robust_spdc.cli", "stats", str(pp_file), "--nmax", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.startswith("mu,")
