import json
from fractions import Fraction

import pytest

from absnorm.cli import main
from absnorm.serialize import canonical_dumps, read_json
from toys import TOY_SYMBOLS, toy_plan


@pytest.fixture()
def toy_files(tmp_path):
    plan_path = tmp_path / "plan.json"
    plan_path.write_text(canonical_dumps(toy_plan(6).as_dict()))
    sched_path = tmp_path / "symbols.json"
    sched_path.write_text(json.dumps({"symbols": list(TOY_SYMBOLS)}))
    return plan_path, sched_path


def test_constants_json(capsys):
    assert main(["constants", "--r", "2", "--s", "3", "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["constants"]["a1"] == 4
    assert payload["constants"]["a2"] == 81
    assert "a20" in payload["formulas"]


def test_constants_text(capsys):
    assert main(["constants", "--r", "2", "--s", "3"]) == 0
    out = capsys.readouterr().out
    assert "a1" in out and "max(g_1..g_h)" in out


def test_constants_rejects_dependent_pair(capsys):
    assert main(["constants", "--r", "2", "--s", "8"]) == 2


def test_plan_command(capsys, tmp_path):
    out = tmp_path / "plan.json"
    assert main(["plan", "--horizon", "4", "--out", str(out)]) == 0
    data = read_json(out)
    assert data["r_seq"] == [2, 3, 4, 5]
    assert data["certified"] is True


def test_plan_toy_csv(tmp_path, capsys):
    csv_path = tmp_path / "beta.csv"
    csv_path.write_text("beta,gamma\n0.4,3\n0.3,4\n0.1,5\n")
    assert (
        main(
            [
                "plan",
                "--horizon",
                "4",
                "--toy",
                str(csv_path),
                "--raw-r",
                "2,3,4",
                "--raw-s",
                "3,5,6",
            ]
        )
        == 0
    )
    data = json.loads(capsys.readouterr().out)
    assert data["phi"] == [1, 1, 1, 2]
    assert data["certified"] is False


def test_schmidt_zero_steps_state(tmp_path, toy_files, capsys):
    plan_path, sched_path = toy_files
    state_path = tmp_path / "state.json"
    rc = main(
        [
            "schmidt",
            "run",
            "--schedule",
            f"toy:{sched_path}",
            "--steps",
            "0",
            "--plan",
            str(plan_path),
            "--state",
            str(state_path),
        ]
    )
    assert rc == 0
    data = read_json(state_path)
    assert data["xi"] == "0/1"
    assert data["m"] == 0


def test_schmidt_run_resume_and_digits(tmp_path, toy_files, capsys):
    plan_path, sched_path = toy_files
    direct_path = tmp_path / "direct.json"
    split_path = tmp_path / "split.json"
    base_args = ["schmidt", "run", "--schedule", f"toy:{sched_path}", "--plan", str(plan_path)]
    assert main(base_args + ["--steps", "4", "--state", str(direct_path), "--verify"]) == 0
    assert main(base_args + ["--steps", "2", "--state", str(split_path)]) == 0
    assert main(["schmidt", "run", "--steps", "2", "--state", str(split_path), "--resume"]) == 0
    assert direct_path.read_bytes() == split_path.read_bytes()

    assert main(["schmidt", "digits", "--state", str(direct_path), "--base", "10"]) == 0
    out = capsys.readouterr().out
    assert "certain digits" in out


def test_schmidt_paper_schedule_hits_cap(tmp_path, toy_files):
    plan_path, _ = toy_files
    rc = main(
        [
            "schmidt",
            "run",
            "--schedule",
            "paper",
            "--steps",
            "1",
            "--plan",
            str(plan_path),
            "--state",
            str(tmp_path / "s.json"),
        ]
    )
    assert rc == 3


def test_disc_exact(tmp_path, capsys):
    pts = tmp_path / "points.csv"
    pts.write_text("1/4\n3/4\n")
    assert main(["disc", "exact", "--points", str(pts)]) == 0
    assert capsys.readouterr().out.strip() == "1/2"


def test_disc_orbit(capsys):
    assert main(["disc", "orbit", "--x", "1/3", "--base", "2", "--N", "64"]) == 0
    out = capsys.readouterr().out
    assert "D_N" in out and "D*_N" in out


def test_weyl_command(capsys):
    assert main(["weyl", "--x", "1/3", "--base", "2", "--t", "1", "--N", "2"]) == 0
    out = capsys.readouterr().out
    assert "re = -1.0" in out


def test_et_command(capsys):
    assert main(["et", "--x", "1/3", "--base", "2", "--N", "100", "--exact"]) == 0
    out = capsys.readouterr().out
    assert "bound" in out and "D_N" in out


def test_hs5_command(capsys):
    assert main(["hs5", "--r", "3", "--s", "2", "--l", "2", "--K", "1", "--N", "32"]) == 0
    out = capsys.readouterr().out
    assert "certified_error" in out
    assert "within bound: True" in out


def test_sierpinski_run_cli(tmp_path, capsys):
    caps = tmp_path / "caps.json"
    caps.write_text(
        json.dumps({"q_max": 3, "m_max": 2, "n_lo": 8, "n_hi": 9, "k_cap": None})
    )
    state = tmp_path / "sierp.json"
    rc = main(
        [
            "sierpinski",
            "run",
            "--base",
            "2",
            "--eps",
            "1/2",
            "--digits",
            "3",
            "--toy",
            str(caps),
            "--state",
            str(state),
        ]
    )
    assert rc == 0
    data = read_json(state)
    assert len(data["digits"]) == 3
    assert data["certified"] is False
    assert data["choices"][0]["mode"] == "exact"


def test_report_orbit_csv(capsys):
    rc = main(["report", "orbit", "--x", "1/7", "--base", "2", "--N", "200", "--points", "5"])
    assert rc == 0
    out = capsys.readouterr().out
    assert out.startswith("N,")
    assert "d_exact" in out


def test_report_schmidt_json(tmp_path, toy_files, capsys):
    plan_path, sched_path = toy_files
    state_path = tmp_path / "state.json"
    main(
        [
            "schmidt",
            "run",
            "--schedule",
            f"toy:{sched_path}",
            "--steps",
            "2",
            "--plan",
            str(plan_path),
            "--state",
            str(state_path),
        ]
    )
    capsys.readouterr()  # drain the run status line
    assert main(["report", "schmidt", "--state", str(state_path), "--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["meta"]["certified"] is False
    assert len(payload["rows"]) == 2


def test_usage_error_exit_code(capsys):
    assert main(["disc", "exact", "--points", "/nonexistent/file.csv"]) == 2
    assert main(["weyl", "--x", "not-a-number", "--base", "2", "--N", "4"]) == 2
