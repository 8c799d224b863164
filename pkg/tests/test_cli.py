import dataclasses

import pytest

from glru.cli import ConfigError, main, parse_config, read_config_file


def test_defaults_per_command():
    cfg = parse_config(["oracle"])
    assert cfg.sizes == (3, 2, 1) and cfg.capacity == 4
    cfg = parse_config(["sweep"])
    assert cfg.cp == (0.1, 0.2) and cfg.L == (1.0, 2.0, 3.0, 4.0)
    assert cfg.pareto == (2.0, 300.0, 3600.0)


def test_flag_aliases_and_lists():
    cfg = parse_config(["sweep", "--alpha", "0.8,1.2", "--chunk-len", "2", "--startup-delay", "4",
                        "--rate", "30", "--cp", "0.2"])
    assert cfg.alpha == (0.8, 1.2)
    assert cfg.L == (2.0,) and cfg.d_s == (4.0,) and cfg.r == (30.0,) and cfg.cp == (0.2,)


def test_flag_overrides_file_exclusive_choice(tmp_path):
    path = tmp_path / "c.txt"
    path.write_text("capacity = 300\nchunks = 4  # per file\nalpha = 1.1\n")
    cfg = parse_config(["validate", "--config", str(path), "--cp", "0.2"])
    assert cfg.capacity is None and cfg.cp == (0.2,)
    assert cfg.chunks == 4 and cfg.alpha == (1.1,)


@pytest.mark.parametrize("argv", [
    ["sweep", "--cp", "1.5"],
    ["sweep", "--rho", "1.0"],
    ["validate", "--alpha", "0.8,1.2"],
    ["validate", "--ranks", "5000"],
    ["fig1", "--pareto", "2,300,3600"],
    ["oracle", "--sizes", "3,0"],
])
def test_invalid_configs(argv):
    with pytest.raises(ConfigError):
        parse_config(argv)


def test_invalid_configs_exit_code(capsys):
    assert main(["sweep", "--cp", "1.5"]) == 1
    assert main(["sweep", "--cp", "0.1", "--capacity", "10"]) == 1
    assert main(["nonsense"]) == 1


def test_config_file_errors(tmp_path):
    path = tmp_path / "c.txt"
    path.write_text("bogus = 1\n")
    with pytest.raises(ConfigError):
        read_config_file(path)
    path.write_text("capacity = 3\ncp = 0.1\n")
    with pytest.raises(ConfigError):
        parse_config(["oracle", "--config", str(path)])
    path.write_text("command = sweep\n")
    with pytest.raises(ConfigError):
        parse_config(["oracle", "--config", str(path)])
    with pytest.raises(ConfigError):
        read_config_file(tmp_path / "missing.txt")


def test_echo_roundtrip(tmp_path):
    out = tmp_path / "o"
    assert main(["oracle", "--out", str(out), "--requests", "0"]) == 0
    again = parse_config(["oracle", "--config", str(out / "config.txt")])
    first = parse_config(["oracle", "--out", str(out), "--requests", "0"])
    assert dataclasses.asdict(again) == dataclasses.asdict(first)


def test_oracle_outputs(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["oracle", "--out", str(out), "--requests", "20000"]) == 0
    lines = (out / "oracle.csv").read_text().splitlines()
    assert len(lines) == 1 + 2 * 3
    for line in lines[1:]:
        assert sum(float(v) for v in line.split(",")[3:] if v) == pytest.approx(1.0)
    assert (out / "oracle_check_glru.csv").exists()
    assert (out / "summary.txt").exists()


def test_fig1_outputs(tmp_path, capsys):
    out = tmp_path / "f"
    assert main(["fig1", "--n-files", "500", "--capacity", "100", "--out", str(out)]) == 0
    lines = (out / "fig1.csv").read_text().splitlines()
    assert lines[0] == "rank,lru_any,glru_any,glru_full"
    assert len(lines) == 501
    assert (out / "model_glru.csv").exists()


def _small_sweep(out):
    return ["sweep", "--alpha", "0.8", "--cp", "0.1", "--chunk-len", "2", "--startup-delay", "3",
            "--rho", "0.5", "--rate", "10", "--n-files", "100", "--requests", "3000",
            "--out", str(out)]


def test_single_point_sweep_and_determinism(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(_small_sweep(a)) == 0
    assert main(_small_sweep(b)) == 0
    rows = (a / "sweep.csv").read_text().splitlines()[1:]
    assert len(rows) == 2 * 5
    for metric in ("p_c", "p_m", "T_w", "T_d", "p_d"):
        assert sum(f",{metric}," in r for r in rows) == 2
    for name in ("sweep.csv", "comparison.csv", "histograms.csv", "summary.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_validate_outputs(tmp_path, capsys):
    out = tmp_path / "v"
    argv = ["validate", "--n-files", "200", "--capacity", "100", "--chunks", "5",
            "--requests", "20000", "--ranks", "1,10", "--out", str(out)]
    assert main(argv) == 0
    lines = (out / "validation.csv").read_text().splitlines()
    assert lines[0] == "rank,j,empirical,analytic"
    assert len(lines) == 1 + 2 * 6


def test_runtime_error_exit_code(tmp_path, capsys):
    # capacity larger than the catalog is only detectable once it is built
    argv = ["fig1", "--n-files", "10", "--chunks", "5", "--capacity", "60", "--out", str(tmp_path)]
    assert main(argv) == 2
