import pytest

from vrmimo.cli import main
from vrmimo.experiment import CSV_HEADER


def test_sweep_d_writes_csv(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    rc = main(["sweep-d", "--trials", "20", "--d-grid", "20,60",
               "--normalization", "trace-m", "--out", str(out)])
    assert rc == 0
    assert "wrote" in capsys.readouterr().out
    lines = out.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) > 10


def test_single_to_stdout(capsys):
    rc = main(["single", "--placement", "worst", "--d", "40",
               "--normalization", "trace-m", "--trials", "30", "--out", "-"])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == CSV_HEADER
    assert any(",monte-carlo," in line for line in lines[1:])


def test_validate_exit_code(capsys):
    rc = main(["validate"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "[PASS]" in out and "validation passed" in out


def test_epsilon_study(tmp_path, capsys):
    out = tmp_path / "eps.csv"
    rc = main(["epsilon-study", "--eps-k", "4", "--eps-m-grid", "16,32,64,128",
               "--eps-trials", "20", "--out", str(out)])
    assert rc == 0
    assert "slope" in capsys.readouterr().out
    assert out.exists()


def test_config_file_plus_override(tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("trials = 10\nd_grid = 60\nnormalization = trace-m\n")
    out = tmp_path / "s.csv"
    rc = main(["sweep-d", "--config", str(cfg), "--trials", "15", "--out", str(out)])
    assert rc == 0
    text = out.read_text()
    assert ",15," in text  # override won over the file


def test_bad_flag_value_exits_2(capsys):
    rc = main(["sweep-d", "--normalization", "bogus"])
    assert rc == 2
    assert "config error" in capsys.readouterr().err


def test_bad_config_file_exits_2(tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("m = 40\nwibble = 2\n")
    rc = main(["sweep-d", "--config", str(cfg)])
    assert rc == 2
    err = capsys.readouterr().err
    assert "exp.cfg:2" in err and "wibble" in err


def test_missing_subcommand_usage_error():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2
