import json

import pytest

from qpjacobi.cli import clean, main, split_output


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def body(text):
    return split_output(text)[1]


def test_freq_golden(capsys):
    code, out, _ = run(capsys, "freq", "--depth", "20", "--json")
    assert code == 0
    head, b = split_output(out)
    assert any(line.startswith("# created") for line in head)
    assert any('"seed"' in line or "seed" in line for line in head)
    data = json.loads(b)
    assert data


def test_run_prefix_is_accepted(capsys):
    c1, o1, _ = run(capsys, "run", "freq", "--depth", "10")
    c2, o2, _ = run(capsys, "freq", "--depth", "10")
    assert c1 == c2 == 0 and body(o1) == body(o2)


@pytest.mark.parametrize("argv", [
    ["cocycle", "--op", "lyapunov", "--ehm", "0,0.5,0", "--E", "spectrum:3", "--n", "2000",
     "--phases", "4", "--seed", "7"],
    ["spectral", "--op", "jl", "--E", "0.1", "--probes", "3", "--seed", "3"],
    ["growth", "--op", "sublevel", "--poly", "1,0,-2,0.5", "--levels", "0.1,0.6"],
    ["bounds", "--check", "aj09", "--q", "89", "--seed", "1"],
])
def test_bodies_are_deterministic(capsys, argv):
    c1, o1, _ = run(capsys, *argv)
    c2, o2, _ = run(capsys, *argv)
    assert c1 == c2 == 0
    assert body(o1) == body(o2)
    assert body(o1).strip()


def test_seed_changes_random_draws(capsys):
    base = ["cocycle", "--op", "lyapunov", "--E", "spectrum:3", "--n", "1000", "--phases", "4"]
    _, o1, _ = run(capsys, *base, "--seed", "1")
    _, o2, _ = run(capsys, *base, "--seed", "2")
    assert body(o1) != body(o2)


def test_global_flags_before_subcommand(capsys):
    _, o1, _ = run(capsys, "--seed", "5", "freq", "--depth", "8")
    _, o2, _ = run(capsys, "freq", "--depth", "8", "--seed", "5")
    assert body(o1) == body(o2)


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[run]\nseed = 4\n\n[model]\nehm = 0.2,0.3,0.2\ntheta = 0.1\n\n"
                   "[growth]\nop = sublevel\npoly = 1,0,-1\n")
    code, out, _ = run(capsys, "--config", str(cfg), "growth")
    assert code == 0
    assert '"seed": 4' in "".join(split_output(out)[0])


def test_config_errors_exit_2(tmp_path, capsys):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[run]\nseed = 1\n\n[model]\n\nehm = 1,2\nnonsense = 3\n")
    code, _, err = run(capsys, "--config", str(cfg), "model")
    assert code == 2
    assert "nonsense" in err and "line 7" in err
    code, _, err = run(capsys, "cocycle", "--op", "dance")
    assert code == 2 and "op" in err
    code, _, err = run(capsys, "model", "--ehm", "1,2")
    assert code == 2
    cfg.write_text("[run]\nseed = 1\n\n[bogus]\nx = 1\n")
    code, _, err = run(capsys, "--config", str(cfg), "model")
    assert code == 2 and "bogus" in err and "line 4" in err


def test_io_error_exit_3(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code, _, err = run(capsys, "freq", "--out-dir", str(blocker / "sub"))
    assert code == 3


def test_out_dir_writes_file(tmp_path, capsys):
    code, out, _ = run(capsys, "growth", "--op", "sublevel", "--out-dir", str(tmp_path))
    assert code == 0
    path = out.strip()
    assert path.startswith(str(tmp_path))
    assert open(path).read().startswith("#")


def test_domain_failure_is_a_row_not_an_exit(capsys):
    # a repeated zero is rejected by the sublevel bound but the run still succeeds
    code, out, _ = run(capsys, "growth", "--op", "sublevel", "--poly", "1,-2,1")
    assert code == 0
    assert "DegenerateZeros" in body(out)


def test_clean_handles_special_values():
    assert clean(float("inf")) == "inf"
    assert clean(1 + 2j) == [1.0, 2.0]
    assert clean({"a": (1, float("nan"))}) == {"a": [1, "nan"]}
