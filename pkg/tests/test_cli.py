import pytest

from owcrelay.cli import main


def test_ooc_family(capsys):
    assert main(["ooc", "--n", "13", "--w", "3", "--lambda", "1"]) == 0
    assert capsys.readouterr().out == "# n=13 w=3 lambda=1 size=2\n0 1 4\n0 2 7\n"


def test_run_small(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("sweep:\n  x_m: [1.0]\n  y_m: [1.0, 3.0]\n")
    assert main(["run", "--config", str(cfg), "--scenario", "2", "--mode", "da", "--out", str(tmp_path / "o")]) == 0
    out = capsys.readouterr().out
    assert out.startswith("scenario,positions,")
    rows = (tmp_path / "o" / "results.csv").read_text().splitlines()
    assert len(rows) == 3 and all(",da," in r for r in rows[1:])


def test_run_structured(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("sweep:\n  x_m: [2.0]\n  y_m: [4.0]\n")
    code = main(["run", "--config", str(cfg), "--scenario", "all", "--format", "structured",
                 "--out", str(tmp_path / "o"), "--no-impulses"])
    assert code == 0 and (tmp_path / "o" / "results.json").exists()


def test_impulse_dump(tmp_path, capsys):
    assert main(["impulse", "--scenario", "1", "--x", "1", "--y", "1", "--z", "1", "--out", str(tmp_path)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "signal,mu_ns,D_ns,total_gain,peak_gain" and len(lines) == 3
    assert (tmp_path / "s1_x1_y1_z1_conventional.csv").exists()
    assert (tmp_path / "s1_x1_y1_z1_relay12.csv").exists()


@pytest.mark.parametrize("method,extra", [("sequential", []), ("ooc", ["--regime", "synthetic"])])
def test_probe_matches_direct(capsys, method, extra):
    assert main(["probe", "--method", method, "--scenario", "3", "--x", "2", "--y", "6", *extra]) == 0
    rows = capsys.readouterr().out.splitlines()[1:]
    assert len(rows) == 12 and all(r.endswith(",1") for r in rows)


def test_oracle(capsys):
    assert main(["oracle", "--relays", "1"]) == 0
    assert "within" in capsys.readouterr().out


def test_exit_code_invalid_config(tmp_path):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("room:\n  height_m: 0\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == 1
    assert main(["ooc", "--n", "5", "--w", "3"]) == 1


def test_exit_code_bad_arguments():
    with pytest.raises(SystemExit) as exc:
        main(["run", "--scenario", "9"])
    assert exc.value.code == 1


def test_exit_code_runtime(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cfg = tmp_path / "c.yaml"
    cfg.write_text("sweep:\n  x_m: [1.0]\n  y_m: [1.0]\n")
    assert main(["run", "--config", str(cfg), "--scenario", "1", "--out", str(blocker / "o")]) == 2


def test_exit_code_no_signal(tmp_path):
    cfg = tmp_path / "dark.yaml"
    cfg.write_text(
        "relays:\n  layout: explicit\n  positions:\n    - {position_m: [4.0, 4.0, 0.2], normal: [1.0, 0.0, 0.0]}\n"
        "channel:\n  max_bounces: 0\n"
    )
    assert main(["impulse", "--config", str(cfg), "--x", "1", "--y", "1"]) == 3
