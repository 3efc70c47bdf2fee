import csv
import io
import json

import numpy as np
import pytest

from helium_ci import cli
from helium_ci.config import ConfigError, RunConfig, load, parse_text, validate


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


SMALL = ["--nmax", "5", "--lmax", "1", "--serial"]


def test_parse_text_and_comments():
    config = parse_text("# comment\nZ = 2\nn_max = 5, 4  # per l\nsector = both\nalpha = 6.0\n")
    assert config.n_max == (5, 4)
    assert config.sectors == ("singlet", "triplet")
    assert config.alpha == (6.0,)


@pytest.mark.parametrize("text, fragment", [
    ("bogus = 1\n", "<config>:1: key 'bogus': unknown key"),
    ("Z = 2\nl_max = x\n", "<config>:2: key 'l_max'"),
    ("Z = 2\nZ = 3\n", "repeats line 1"),
    ("just words\n", "expected 'key = value'"),
    ("sector = quartet\n", "unknown sector"),
])
def test_parse_errors_name_line_and_key(text, fragment):
    with pytest.raises(ConfigError) as info:
        parse_text(text)
    assert fragment in str(info.value)


@pytest.mark.parametrize("key, value", [("Z", 0.0), ("l_max", 9), ("n_max", (0,)), ("budget", 0),
                                        ("drop_threshold", 0.5), ("beta", (-1.0,))])
def test_range_validation(key, value):
    config = RunConfig()
    setattr(config, key, value)
    with pytest.raises(ConfigError):
        validate(config)


def test_sector_specific_schedule_overrides_shared_one():
    config = validate(parse_text("l_max = 1\nn_max = 3\nalpha = 6.0\nbeta = 0.5\n"
                                 "alpha.triplet = 7.0, 8.0\nbeta.triplet = 0.6, 0.7\n"))
    assert config.basis_spec(sector="singlet").parameters().tolist() == [6.0, 0.5, 6.0, 0.5]
    assert config.basis_spec(sector="triplet").parameters().tolist() == [7.0, 0.6, 8.0, 0.7]
    with pytest.raises(ConfigError, match="alpha.quintet"):
        parse_text("alpha.quintet = 1.0\n")
    with pytest.raises(ConfigError, match="beta.singlet"):
        validate(parse_text("beta.singlet = -0.5\n"))


def test_cell_parameters_must_match_l_max():
    with pytest.raises(ConfigError):
        validate(parse_text("grid_n_max = 5\ngrid_l_max = 1\ncell.5.1 = 1.0, 0.5\n"))


def test_bundled_configs_parse():
    for name in ("table1", "table2", "table3", "fig1", "fig2", "ground"):
        path = cli.bundled_config(name)
        assert path is not None, name
        validate(load(path))


def test_solve_csv_output():
    code, out, _ = run(["solve", *SMALL, "--sector", "both"])
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows[0]["state"] == "(1s)² ¹S"
    assert any(r["state"] == "1s2s ³S" for r in rows)
    assert "\r" not in out and out.endswith("\n")
    assert len(rows[0]["energy"].split(".")[1]) == 6


def test_solve_json_has_meta_and_data():
    code, out, _ = run(["solve", *SMALL, "--format", "json"])
    doc = json.loads(out)
    assert code == 0
    assert set(doc) == {"meta", "data"}
    assert doc["meta"]["config"]["n_max"] == [5]
    assert doc["meta"]["bases"]["singlet"]["l_max"] == 1
    assert isinstance(doc["data"][0]["energy"], float)


def test_non_interacting_hydrogenic_run(tmp_path):
    cfg = tmp_path / "h.cfg"
    cfg.write_text("exponent_mode = explicit\nl_max = 0\nexponents.l0 = 2.0, 1.0\nsector = triplet\n")
    code, out, _ = run(["solve", "--config", str(cfg), "--no-interaction", "--serial"])
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    # span{e^-2r, e^-r}: lowest triplet is 1s (exact) with the best 2s-like function
    assert float(rows[0]["energy"]) < -2.0


def test_runs_are_byte_identical():
    outputs = [run(["table", *SMALL, "--sector", "both", "--format", "json"])[1] for _ in range(2)]
    assert outputs[0] == outputs[1]


def test_exit_codes(tmp_path):
    assert run(["solve", "--sector", "quintet"])[0] == 2
    assert run(["solve", "--config", str(tmp_path / "missing.cfg")])[0] == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("n_max = 3\nunknown_key = 1\n")
    code, _, err = run(["solve", "--config", str(bad)])
    assert code == 2 and "unknown_key" in err
    # a near-linearly-dependent d shell evaluated in plain double precision
    # collapses far below the exact bound and must be reported, not printed
    collapse = tmp_path / "collapse.cfg"
    body = ("l_max = 2\nn_max = 11\nalpha = 21.94107831, 22.65695102, 22.0372947\n"
            "beta = 0.81263208, 0.85184062, 0.96536038\n")
    collapse.write_text(body + "precision = double\n")
    code, out, err = run(["solve", "--config", str(collapse), "--serial"])
    assert code == 3 and "numerical failure" in err and out == ""
    collapse.write_text(body + "precision = auto\n")
    code, out, _ = run(["solve", "--config", str(collapse), "--serial"])
    assert code == 0 and "(1s)² ¹S,-2.9025" in out


def test_unknown_state_lists_available_labels():
    code, _, err = run(["spectrum", *SMALL, "--state", "1s9s ¹S"])
    assert code == 2
    assert "(1s)² ¹S" in err


def test_spectrum_output_descending():
    code, out, _ = run(["spectrum", *SMALL, "--state", "1s2s ³S"])
    rows = list(csv.DictReader(io.StringIO(out)))
    lam = np.array([float(r["lambda"]) for r in rows])
    assert code == 0
    assert np.all(np.diff(lam) <= 0)
    assert lam.sum() == pytest.approx(1.0, abs=1e-10)


def test_label_normalization():
    assert cli.canonical_label("1s2s ³S") == ("1s2s", "triplet")
    assert cli.canonical_label("1s2s 3S") == ("1s2s", "triplet")
    assert cli.canonical_label("(1s)^2 singlet") == ("(1s)²", "singlet")
    assert cli.canonical_label("1s3s", "triplet") == ("1s3s", "triplet")


def test_power_law_fit_recovers_exact_data():
    n = np.arange(2, 8)
    fit = cli.power_law_fit(n, 0.19 * n**-4.41)
    assert fit["prefactor"] == pytest.approx(0.19, abs=1e-12)
    assert fit["exponent"] == pytest.approx(-4.41, abs=1e-12)
    with pytest.raises(ConfigError):
        cli.power_law_fit([2, 3], [1.0, 0.5])


def test_fit_skips_nonpositive_points():
    table = [{"sector": "singlet", "n": n, "energy": "-2.0", "E": str(0.19 * n**-4.41)} for n in range(2, 7)]
    table.append({"sector": "singlet", "n": 7, "energy": "-2.0", "E": "0.0"})
    warnings = []
    rows, fits = cli.fit_rows(table, warn=warnings.append)
    assert len(rows) == 5 and len(warnings) == 1
    assert fits["singlet"]["exponent"] == pytest.approx(-4.41, abs=1e-9)


def test_fit_round_trip(tmp_path):
    cfg = tmp_path / "levels.cfg"
    cfg.write_text("n_values.singlet = 1, 2, 3, 4\nn_values.triplet = 2, 3, 4\n")
    base = ["--config", str(cfg), *SMALL]
    table_path = tmp_path / "table.csv"
    code, _, err = run(["table", *base, "--sector", "both", "--out", str(table_path)])
    assert code == 0, err
    _, direct, _ = run(["fit", *base, "--sector", "both", "--format", "json"])
    _, reread, _ = run(["fit", *base, "--input", str(table_path), "--format", "json"])
    assert json.loads(direct)["meta"]["fits"] == json.loads(reread)["meta"]["fits"]
    assert json.loads(direct)["data"] == json.loads(reread)["data"]
