import pytest

from ccresm_sim.cli import main, parse_snr
from ccresm_sim.harness import CSV_HEADER
from ccresm_sim.ra_codec import ConfigError


def test_parse_snr_forms():
    assert parse_snr("0:0.5:2") == (0.0, 0.5, 1.0, 1.5, 2.0)
    assert parse_snr("-12:0.5:-11") == (-12.0, -11.5, -11.0)
    assert parse_snr("1,3,inf") == (1.0, 3.0, float("inf"))
    with pytest.raises(ConfigError):
        parse_snr("0:1")
    with pytest.raises(ConfigError):
        parse_snr("2:1:0")


def test_simulate_writes_csv(tmp_path):
    out = tmp_path / "r.csv"
    rc = main(["simulate", "--schemes", "ccresm,independent", "--snr=-8,inf", "--delta", "0.3",
               "--N", "16", "--packets", "3", "--m", "1", "--out", str(out), "--quiet"])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 5


def test_config_file_with_cli_override(tmp_path, capsys):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text("# small sweep\nschemes = single_user\nsnr = inf\ndelta = 0.5\n"
                   "N = 8\npackets = 4\nn_inner = 5\n")
    rc = main(["simulate", "--config", str(cfg), "--packets", "2", "--quiet"])
    assert rc == 0
    rows = capsys.readouterr().out.splitlines()
    assert rows[1].startswith("single_user,0.5,inf,2,0,16,")


@pytest.mark.parametrize("argv", [
    ["simulate", "--delta", "1.5", "--quiet"],
    ["simulate", "--schemes", "cdma", "--quiet"],
    ["simulate", "--packets", "many", "--quiet"],
    ["simulate", "--config", "/nonexistent/sweep.cfg"],
    ["plot", "--in", "/nonexistent/r.csv", "--out", "x.svg"],
])
def test_errors_give_nonzero_exit(argv, capsys):
    assert main(argv) != 0
    assert "error" in capsys.readouterr().err


def test_unknown_config_key_rejected(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    assert main(["simulate", "--config", str(cfg)]) != 0
    assert "unknown key" in capsys.readouterr().err


def test_plot_command(tmp_path):
    csv = tmp_path / "r.csv"
    csv.write_text(",".join(CSV_HEADER) + "\n"
                   "ccresm,0.1,-10.0,10,7,1000,0.007,0.005,3,20,0.15,0.15,12.0\n")
    out = tmp_path / "f.svg"
    assert main(["plot", "--in", str(csv), "--kind", "per", "--out", str(out)]) == 0
    assert out.exists()


def test_decode_oracle_command(capsys):
    assert main(["decode-oracle", "--N", "2", "--trials", "20"]) == 0
    text = capsys.readouterr().out
    assert "joint MAP agreement" in text and "single-user" in text
