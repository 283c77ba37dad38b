import csv
import json
import math
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from ptlat.cli import COMMANDS, CSV_COLUMNS, main, run
from ptlat.config import ConfigError, load_config, parse_config
from ptlat.model import IrrationalBeta, RationalBeta, Variant

ODD_SSH = """
# Hermitian SSH regime, odd chain
variant = "offdiagonal"
N = 49
lambda = 0.4
beta = "1/2"
gamma = 0.0
"""


def write(tmp_path, text, name="run.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


# ------------------------------------------------------------------ configs


def test_rational_beta():
    cfg = parse_config('beta = "1/2"')
    assert cfg.spec.beta == RationalBeta(1, 2)


def test_expression_beta():
    cfg = parse_config('beta = "sqrt(13)-3"')
    assert isinstance(cfg.spec.beta, IrrationalBeta)
    assert cfg.spec.beta.value == pytest.approx(0.605551, abs=1e-6)


def test_fraction_is_reduced():
    assert parse_config('beta = "2/4"').spec.beta == RationalBeta(1, 2)


def test_defaults():
    cfg = parse_config("")
    assert cfg.spec.t == 1.0
    assert (cfg["eps_real"], cfg["eps_zero"], cfg["w_min"], cfg["fraction"]) == (1e-8, 1e-3, 0.5, 0.1)
    assert cfg["tol_bisect"] == 1e-4 and cfg["phi_points"] == 64
    assert cfg["gamma_max"] == 2.0


@pytest.mark.parametrize(
    "text, key",
    [
        ("j = 0", "j"),
        ("N = 5\nj = 6", "j"),
        ("colour = 3", "colour"),
        ('beta = "1/1"', "beta"),
        ('beta = "__import__(1)"', "beta"),
        ('variant = "ladder"', "variant"),
        ("eps_real = -1.0", "eps_real"),
        ('N = "fifty"', "N"),
        ('policy = "worst"', "policy"),
        ("j = = 1", "<document>"),
    ],
)
def test_config_errors_name_the_key(text, key):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.key == key
    assert key in str(info.value)


def test_variant_names():
    assert parse_config('variant = "diagonal"').spec.variant is Variant.DIAGONAL_AA
    assert parse_config('variant = "offdiagonal_nnn"\nt_prime = 0.1').spec.variant is Variant.OFFDIAGONAL_AA_NNN


def test_json_config_is_accepted():
    cfg = parse_config(json.dumps({"N": 12, "beta": "1/3", "j": 3}), fmt="json")
    assert (cfg.spec.N, cfg.spec.j) == (12, 3)


# ----------------------------------------------------------------- commands


def test_sweep_phi_fig1(tmp_path):
    run("sweep-phi", load_config(write(tmp_path, ODD_SSH)), tmp_path)
    rows = read_csv(tmp_path / "sweep-phi.csv")
    assert rows[0] == ["phi", "index", "re", "im"]
    assert len(rows) - 1 == 201 * 49
    assert rows[1][1] == "1" and rows[49][1] == "49"
    assert (tmp_path / "sweep-phi.csv").read_bytes().count(b"\r") == 0
    summary = json.loads((tmp_path / "sweep-phi.json").read_text())
    assert set(summary) == {"config", "result", "version"}
    assert summary["result"]["all_real"]


def test_critical_gamma_summary(tmp_path):
    cfg = load_config(write(tmp_path, 'N = 50\nlambda = 0.4\nbeta = "1/2"\nj = 2\n'))
    run("critical-gamma", cfg, tmp_path)
    res = json.loads((tmp_path / "critical-gamma.json").read_text())["result"]
    assert 0.54 <= res["gamma_c"] <= 0.58
    assert res["status"] == "ok" and res["policy"] == "all_phi"
    rows = read_csv(tmp_path / "critical-gamma.csv")
    assert rows[0] == CSV_COLUMNS["critical-gamma"]


def test_critical_gamma_no_breaking_message(tmp_path):
    cfg = load_config(write(tmp_path, "N = 2\ngamma_max = 0.5\n"))
    res = run("critical-gamma", cfg, tmp_path)["result"]
    assert res["status"] == "no_breaking" and res["gamma_c"] is None
    assert "no breaking below gamma_max" in res["message"]


def test_spectrum_dimer(tmp_path):
    run("spectrum", load_config(write(tmp_path, "N = 2\ngamma = 0.5\n")), tmp_path)
    rows = read_csv(tmp_path / "spectrum.csv")
    assert rows[0] == CSV_COLUMNS["spectrum"]
    assert len(rows) == 3
    assert float(rows[1][1]) == pytest.approx(-math.sqrt(0.75), abs=1e-14)


def test_floats_carry_17_digits(tmp_path):
    run("spectrum", load_config(write(tmp_path, "N = 2\ngamma = 0.5\n")), tmp_path)
    re_text = read_csv(tmp_path / "spectrum.csv")[2][1]
    assert len(re_text.replace(".", "").lstrip("0")) == 17
    assert float(re_text) == pytest.approx(math.sqrt(0.75), abs=1e-15)


@pytest.mark.parametrize(
    "command, text, n_rows",
    [
        ("zero-modes", 'N = 50\nlambda = 0.4\nbeta = "1/2"\n', 2),
        ("check-pt", 'N = 6\nlambda = 0.4\nbeta = "1/3"\ngamma = 0.3\n', 1),
        ("majorana", "N = 50\nj = 2\ngamma = 0.3\nlambda = 0.4\n", 2),
        ("n-scan", 'lambda = 0.4\nbeta = "1/3"\nj = 3\nn_values = [48, 49, 50]\n', 3),
        ("phase-diagram", "N = 12\nlambda = 0.4\nj = 2\nsweep_points = 5\ngamma_points = 4\ngamma_max = 1.0\n", 20),
        ("localization", 'variant = "diagonal"\nN = 30\nbeta = "sqrt(5)/2-1/2"\nv_points = 5\n', 5),
    ],
)
def test_every_command_writes_its_schema(tmp_path, command, text, n_rows):
    payload = run(command, load_config(write(tmp_path, text)), tmp_path)
    rows = read_csv(tmp_path / f"{command}.csv")
    assert rows[0] == CSV_COLUMNS[command]
    assert len(rows) - 1 == n_rows
    summary = json.loads((tmp_path / f"{command}.json").read_text())
    assert summary["config"] == payload["config"] and summary["result"].keys() == payload["result"].keys()


def test_majorana_rows_are_one_based(tmp_path):
    run("majorana", load_config(write(tmp_path, "N = 50\nj = 2\ngamma = 0.3\n")), tmp_path)
    rows = read_csv(tmp_path / "majorana.csv")[1:]
    assert [(r[1], r[3]) for r in rows] == [("2", "2"), ("49", "49")]


def test_check_pt_truth(tmp_path):
    for n, expected in [(6, "true"), (7, "false")]:
        cfg = load_config(write(tmp_path, f'N = {n}\nlambda = 0.4\nbeta = "1/3"\ngamma = 0.3\n'))
        run("check-pt", cfg, tmp_path)
        assert read_csv(tmp_path / "check-pt.csv")[1][1] == expected


# -------------------------------------------------------------- invariants


@pytest.mark.parametrize(
    "command, text",
    [
        ("sweep-phi", 'N = 20\nlambda = 0.4\nbeta = "sqrt(13)-3"\ngamma = 0.1\nj = 2\nsweep_points = 31\nphi = 0.25\n'),
        ("critical-gamma", 'N = 24\nlambda = 0.4\nj = 2\nphi_points = 16\ntol_bisect = 1e-3\n'),
        ("spectrum", 'variant = "offdiagonal_nnn"\nN = 30\nt_prime = 0.1\nlambda = 0.4\ngamma = 0.2\nj = 2\n'),
    ],
)
def test_round_trip_from_echo(tmp_path, command, text):
    first, second = tmp_path / "a", tmp_path / "b"
    run(command, load_config(write(tmp_path, text)), first)
    run(command, load_config(first / f"{command}.json"), second)
    assert (first / f"{command}.csv").read_bytes() == (second / f"{command}.csv").read_bytes()
    assert (first / f"{command}.json").read_bytes() == (second / f"{command}.json").read_bytes()


def test_thread_count_does_not_change_files(tmp_path):
    cfg = write(tmp_path, "N = 30\nlambda = 0.4\nj = 2\ngamma = 0.4\nsweep_points = 41\ngamma_points = 5\n")
    for threads in (1, 4):
        assert main(["phase-diagram", "--config", str(cfg), "--out", str(tmp_path / f"t{threads}"), "--threads", str(threads)]) == 0
    for name in ("phase-diagram.csv", "phase-diagram.json"):
        assert (tmp_path / "t1" / name).read_bytes() == (tmp_path / "t4" / name).read_bytes()


def test_config_error_exit_and_json(tmp_path, capsys):
    cfg = write(tmp_path, "N = 5\nj = 0\n")
    code = main(["spectrum", "--config", str(cfg), "--out", str(tmp_path)])
    assert code != 0
    err = json.loads((tmp_path / "error.json").read_text())["error"]
    assert err["key"] == "j"
    assert json.loads(capsys.readouterr().err)["error"]["type"] == "config"


def test_runtime_error_exit(tmp_path):
    cfg = write(tmp_path, 'N = 10\nbeta = "1/3"\n')
    assert main(["majorana", "--config", str(cfg), "--out", str(tmp_path)]) == 1
    assert "error" in json.loads((tmp_path / "error.json").read_text())


def test_missing_config_file(tmp_path):
    assert main(["spectrum", "--config", str(tmp_path / "nope.toml"), "--out", str(tmp_path)]) == 2


def test_plot_writes_standalone_svg(tmp_path):
    cfg = write(tmp_path, 'N = 12\nlambda = 0.4\nsweep_points = 21\n')
    assert main(["sweep-phi", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    plot_cfg = write(tmp_path, 'input = "sweep-phi.csv"\ntitle = "SSH"\n', "plot.toml")
    assert main(["plot", "--config", str(plot_cfg), "--out", str(tmp_path)]) == 0
    svg = (tmp_path / "sweep-phi.svg").read_text()
    root = ET.fromstring(svg)
    assert root.tag == "{http://www.w3.org/2000/svg}svg"
    assert root.get("version") == "1.1"
    assert "xlink:href=\"http" not in svg and "<image" not in svg


def test_plot_is_reproducible(tmp_path):
    cfg = write(tmp_path, "N = 6\ngamma_points = 3\nsweep_points = 4\ngamma_max = 1.0\n")
    main(["phase-diagram", "--config", str(cfg), "--out", str(tmp_path)])
    plot_cfg = write(tmp_path, f'input = "{tmp_path / "phase-diagram.csv"}"\n', "plot.toml")
    main(["plot", "--config", str(plot_cfg), "--out", str(tmp_path / "x")])
    first = (tmp_path / "x" / "phase-diagram.svg").read_bytes()
    main(["plot", "--config", str(plot_cfg), "--out", str(tmp_path / "x")])
    assert (tmp_path / "x" / "phase-diagram.svg").read_bytes() == first


def test_help_documents_columns():
    out = subprocess.run([sys.executable, "-m", "ptlat.cli", "--help"], capture_output=True, text=True, check=True).stdout
    for command, cols in CSV_COLUMNS.items():
        assert command in out and ",".join(cols) in out
    assert set(COMMANDS) - set(CSV_COLUMNS) == {"plot"}
