import numpy as np
import pytest

from fastescape.cli import main
from fastescape.config import RunConfig, load_config, parse_config
from fastescape.errors import ConfigError
from fastescape.reporting import read_manifest, read_pgm, write_csv, write_manifest, write_pgm


def test_config_defaults_and_roundtrip():
    cfg = RunConfig({})
    text = cfg.canonical_text()
    again = parse_config(text)
    assert again.values == cfg.values
    assert again.canonical_text() == text


def test_config_roundtrip_with_overrides():
    cfg = parse_config("islands.nu = 2.5\nverify.samples = 777\n# comment\n")
    assert cfg["islands.nu"] == 2.5
    assert cfg["verify.samples"] == 777
    text = cfg.canonical_text()
    assert parse_config(text).canonical_text() == text


def test_config_rejects_unknown_and_bad_values():
    with pytest.raises(ConfigError):
        parse_config("no.such.key = 1")
    with pytest.raises(ConfigError):
        parse_config("verify.samples = many")
    with pytest.raises(ConfigError):
        parse_config("islands.nu = inf")
    with pytest.raises(ConfigError):
        parse_config("frame.psi 0.6")


def test_config_builders():
    cfg = parse_config("function.family = positive-real-zeros\nfunction.q = 1\n")
    fn = cfg.build_function()
    assert fn.q == 1
    frame = cfg.build_frame()
    assert frame.sigma == pytest.approx(np.cos(0.8))
    with pytest.raises(ConfigError):
        parse_config("frame.psi = 0.9\n").build_frame()   # psi > psi'
    with pytest.raises(ConfigError):
        parse_config("function.family = nonsense\n").build_function()


def test_reporting_roundtrip(tmp_path):
    man = tmp_path / "m.txt"
    write_manifest(man, {"a": 1.5, "b": True, "c": "text", "n": 7})
    back = read_manifest(man)
    assert back == {"a": "1.5", "b": "true", "c": "text", "n": "7"}

    pgm = tmp_path / "r.pgm"
    data = np.arange(12).reshape(3, 4) % 4
    write_pgm(pgm, data, maxval=3)
    np.testing.assert_array_equal(read_pgm(pgm), data)

    csv = tmp_path / "t.csv"
    write_csv(csv, ("x", "y"), [(0.1, 2), (1.0 / 3.0, 4)])
    lines = csv.read_text().splitlines()
    assert lines[0] == "x,y"
    assert lines[2].startswith("0.33333333333333331")   # 17 significant digits


def test_cli_info_runs(capsys):
    assert main(["info"]) == 0
    out = capsys.readouterr().out
    assert "cosh-sqrt" in out and "sigma" in out


def test_cli_config_error_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("function.family = nonsense\n")
    assert main(["info", "--config", str(bad)]) == 2
    assert main(["verify", "--verify.samples", "abc"]) == 2
    missing = tmp_path / "custom.cfg"
    missing.write_text("function.family = custom\n")     # no zeros given
    assert main(["info", "--config", str(missing)]) == 2


def test_cli_construct_infeasible_exit_3(tmp_path):
    # enormous nu makes t comparable to r: packing impossible
    code = main([
        "construct", "--output.dir", str(tmp_path / "o"),
        "--islands.r", "1e7", "--islands.nu", "1e4",
    ])
    assert code == 3


def test_cli_verify_single_check(tmp_path, capsys):
    out = tmp_path / "v"
    code = main([
        "verify", "--output.dir", str(out),
        "--verify.checks", "sector_cosine,h_decreasing",
        "--verify.samples", "500",
    ])
    assert code == 0
    man = read_manifest(out / "verify_manifest.txt")
    assert man["all_passed"] == "true"
    assert "check.sector_cosine.margin" in man
    assert "check.modulus_lower.margin" not in man


def test_cli_dimension_levels_fixture(tmp_path):
    levels = tmp_path / "levels.csv"
    rows = [(n, 0.25, 4.0**-n) for n in range(1, 6)]
    write_csv(levels, ("n", "delta", "d"), rows)
    out = tmp_path / "d"
    code = main([
        "dimension", "--dimension.source", "levels",
        "--dimension.levels", str(levels), "--output.dir", str(out),
    ])
    assert code == 0
    man = read_manifest(out / "dimension_manifest.txt")
    assert float(man["bound"]) == pytest.approx(1.0, abs=1e-9)


def test_cli_dimension_raster(tmp_path):
    pgm = tmp_path / "r.pgm"
    data = np.zeros((256, 256), dtype=np.int32)
    data[32:224, 32:224] = 0      # "A-certified" block
    data[:32, :] = 255            # unknown elsewhere
    data[224:, :] = 255
    data[:, :32] = 255
    data[:, 224:] = 255
    write_pgm(pgm, data, maxval=255)
    out = tmp_path / "d"
    code = main([
        "dimension", "--dimension.source", "raster",
        "--dimension.raster", str(pgm), "--output.dir", str(out),
    ])
    assert code == 0
    man = read_manifest(out / "dimension_manifest.txt")
    assert float(man["box_dimension"]) == pytest.approx(2.0, abs=0.1)


def test_cli_render_reproducible(tmp_path):
    args = [
        "render", "--render.width", "12", "--render.height", "8",
        "--render.x_min", "0", "--render.x_max", "30",
        "--render.y_min", "-5", "--render.y_max", "5",
        "--render.n_max", "10",
    ]
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    assert main(args + ["--output.dir", str(out1)]) == 0
    assert main(args + ["--output.dir", str(out2)]) == 0
    assert (out1 / "classes.pgm").read_bytes() == (out2 / "classes.pgm").read_bytes()
    assert (out1 / "escape_time.pgm").read_bytes() == (out2 / "escape_time.pgm").read_bytes()
