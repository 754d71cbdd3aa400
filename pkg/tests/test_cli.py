import json

import numpy as np
import pytest

from critmarkets import cli


def run(*argv):
    return cli.main(list(argv))


def first_line(path):
    with open(path) as fh:
        return fh.readline().strip()


class TestDispatch:
    def test_unknown_subcommand_rejected(self, capsys):
        with pytest.raises(SystemExit):
            run("does-not-exist")

    def test_unknown_flag_rejected(self):
        with pytest.raises(SystemExit):
            run("classify-ts", "--T", "0.5", "--S", "0.5", "--bogus", "1")

    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run("--version")
        assert exc.value.code == 0


class TestClassifyTS:
    def test_stag_hunt_line(self, capsys):
        assert run("classify-ts", "--T", "0.5", "--S", "-0.5") == 0
        assert capsys.readouterr().out.strip() == "StagHunt, NE: CC, DD"

    def test_chicken_line(self, capsys):
        assert run("classify-ts", "--T", "1.5", "--S", "0.5") == 0
        assert capsys.readouterr().out.strip() == "Chicken, NE: CD, DC"


class TestTransform:
    def test_reports_both_players(self, capsys):
        assert run("transform", "--game", "chicken-paper") == 0
        data = json.loads(capsys.readouterr().out)
        assert data["player1"]["g0"] == 3.75
        assert data["player1"]["J"] == -0.75
        assert data["player2"]["g_other"] == 2.75

    def test_game_from_json_file(self, tmp_path, capsys):
        path = tmp_path / "game.json"
        path.write_text(json.dumps({"p1": [[0, 7], [2, 6]], "p2": [[0, 2], [7, 6]]}))
        assert run("transform", "--game", str(path)) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["player1"]["g_self"] == 0.25

    def test_unknown_game_exits_2(self, capsys):
        assert run("transform", "--game", "tic-tac-toe") == 2
        assert "game" in capsys.readouterr().err


class TestGumbelCheck:
    def test_reports_tv_distance(self, capsys):
        assert run("gumbel-check", "--utilities", "1.0,0.0", "--xi", "1.0",
                   "--samples", "20000", "--seed", "4") == 0
        data = json.loads(capsys.readouterr().out)
        assert data["tv_distance"] < 0.02
        assert len(data["analytic"]) == 2

    def test_zero_xi_is_config_error(self, capsys):
        assert run("gumbel-check", "--utilities", "1.0,0.0", "--xi", "0.0",
                   "--samples", "10", "--seed", "1") == 2
        assert "xi" in capsys.readouterr().err

    def test_seed_env_fallback(self, capsys, monkeypatch):
        monkeypatch.setenv("CRITMKT_SEED", "12")
        run("gumbel-check", "--utilities", "0.5,0.0", "--xi", "1.0", "--samples", "5000")
        first = json.loads(capsys.readouterr().out)
        monkeypatch.setenv("CRITMKT_SEED", "12")
        run("gumbel-check", "--utilities", "0.5,0.0", "--xi", "1.0", "--samples", "5000")
        assert json.loads(capsys.readouterr().out) == first


class TestCSVOutputs:
    def test_sdt_sweep_header_and_manifest(self, tmp_path):
        out = tmp_path / "sweep.csv"
        assert run("sdt-sweep", "--j", "1.0", "--xi-range", "0.5:1.5:0.25",
                   "--out", str(out)) == 0
        assert first_line(out) == "xi,equilibrium,stability"
        manifest = json.loads((tmp_path / "sweep.csv.manifest.json").read_text())
        assert manifest["subcommand"] == "sdt-sweep"
        assert manifest["outputs"] == [str(out)]
        assert "duration_s" in manifest

    def test_manifest_reproduces_output(self, tmp_path):
        out = tmp_path / "sweep.csv"
        run("sdt-sweep", "--j", "2.0", "--xi-range", "0.3:0.9:0.2", "--out", str(out))
        before = out.read_bytes()
        manifest = json.loads((tmp_path / "sweep.csv.manifest.json").read_text())
        cfg = manifest["config"]
        run("sdt-sweep", "--j", str(cfg["j"]), "--xi-range", cfg["xi_range"],
            "--out", str(out))
        assert out.read_bytes() == before

    def test_qre_surface_regions(self, tmp_path):
        out = tmp_path / "surface.csv"
        assert run("qre-surface", "--game", "chicken-paper", "--xi1", "0:4:1",
                   "--xi2", "0:4:1", "--out", str(out)) == 0
        assert first_line(out) == "xi1,xi2,x1,x2,stability,region"
        body = out.read_text().strip().splitlines()[1:]
        regions = {line.split(",")[-1] for line in body}
        assert regions <= {"A", "B", "critical"}
        assert {"A", "B"} <= regions

    def test_qre_critical_csv(self, tmp_path):
        out = tmp_path / "critical.csv"
        assert run("qre-critical", "--game", "chicken-paper", "--rows", "13",
                   "--out", str(out)) == 0
        assert first_line(out) == "xi1,xi2,x1,x2"
        assert len(out.read_text().strip().splitlines()) > 5

    def test_qre_critical_notes_impossible_multiplicity(self, tmp_path, capsys):
        out = tmp_path / "critical.csv"
        assert run("qre-critical", "--game", "harmony", "--rows", "9",
                   "--out", str(out)) == 0
        assert "no fold exists" in capsys.readouterr().err
        assert len(out.read_text().strip().splitlines()) == 1

    def test_cusp_surface_and_boundary(self, tmp_path):
        surface = tmp_path / "surface.csv"
        assert run("cusp-surface", "--u1=0:2:0.5", "--u2=-0.5:0.5:0.25",
                   "--out", str(surface)) == 0
        assert first_line(surface) == "u1,u2,root,stability,region"
        boundary = tmp_path / "boundary.csv"
        assert run("cusp-critical", "--u1-max", "2.0", "--n", "21",
                   "--out", str(boundary)) == 0
        rows = np.loadtxt(boundary, delimiter=",", skiprows=1)
        assert np.abs(4 * rows[:, 0] ** 3 - 27 * rows[:, 1] ** 2).max() < 1e-10

    def test_cusp_density_integrates(self, tmp_path):
        out = tmp_path / "density.csv"
        assert run("cusp-density", "--u1", "1.0", "--u2", "0.0", "--xi", "6.0",
                   "--out", str(out)) == 0
        rows = np.loadtxt(out, delimiter=",", skiprows=1)
        mass = np.trapezoid(rows[:, 1], rows[:, 0])
        assert mass == pytest.approx(1.0, abs=1e-3)

    def test_stdout_when_no_out_flag(self, capsys):
        assert run("sdt-sweep", "--j", "1.0", "--xi-range", "0.5:1.0:0.5") == 0
        out = capsys.readouterr().out
        assert out.startswith("xi,equilibrium,stability")

    def test_full_precision_round_trip(self, tmp_path):
        out = tmp_path / "sweep.csv"
        run("sdt-sweep", "--j", "1.0", "--xi-range", "1.5:2.0:0.5", "--out", str(out))
        values = [float(line.split(",")[1]) for line in out.read_text().splitlines()[1:]]
        assert 0.9575040240772688 in values


class TestTwinCrises:
    def test_descending_sweep_summary(self, tmp_path, capsys):
        out = tmp_path / "twin.csv"
        code = run("twin-crises", "--game", "chicken-paper", "--xi2", "3.0",
                   "--xi1", "0:4:0.05", "--direction", "down",
                   "--start", "0.99881194,-0.90466403", "--out", str(out))
        assert code == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["direction"] == "descending"
        assert summary["n_jumps"] == 1
        assert summary["jumps"][0]["xi1"] == pytest.approx(1.04947, abs=5e-3)
        assert first_line(out) == "xi1,x1,x2,jumped"

    def test_ambiguous_start_is_config_error(self, tmp_path, capsys):
        # two stable branches coexist at xi1 = 4, so a down sweep without an
        # explicit starting state cannot pick one
        out = tmp_path / "twin.csv"
        code = run("twin-crises", "--game", "chicken-paper", "--xi2", "3.0",
                   "--xi1", "0:4:0.5", "--direction", "down", "--out", str(out))
        assert code == 2
        err = capsys.readouterr().err.lower()
        assert "start" in err and "equilibria" in err


class TestABMRun:
    def test_runs_config_file(self, tmp_path, capsys):
        cfg = {"n_agents": 50, "horizon": 200, "j": 1.0, "xi": 2.0, "z": 0.0,
               "beta": 0.0, "seed": 3, "x0": 0.2}
        cfg_path = tmp_path / "abm.json"
        cfg_path.write_text(json.dumps(cfg))
        out = tmp_path / "run.csv"
        assert run("abm-run", "--config", str(cfg_path), "--out", str(out)) == 0
        assert first_line(out) == "t,p,x"
        summary = json.loads(capsys.readouterr().out)
        assert summary["mean_abs_x"] > 0.5
        assert len(out.read_text().strip().splitlines()) == 202

    def test_choices_matrix_export(self, tmp_path):
        cfg = {"n_agents": 10, "horizon": 20, "j": 0.5, "xi": 1.0, "z": 0.0,
               "beta": 0.0, "seed": 1}
        cfg_path = tmp_path / "abm.json"
        cfg_path.write_text(json.dumps(cfg))
        out = tmp_path / "run.csv"
        choices = tmp_path / "choices.csv"
        assert run("abm-run", "--config", str(cfg_path), "--out", str(out),
                   "--choices-out", str(choices)) == 0
        matrix = np.loadtxt(choices, delimiter=",")
        assert matrix.shape == (20, 10)
        assert set(np.unique(matrix)) <= {-1.0, 1.0}

    def test_bad_field_is_config_error(self, tmp_path, capsys):
        cfg_path = tmp_path / "abm.json"
        cfg_path.write_text(json.dumps({"n_agents": 1, "horizon": 10, "j": 0.0,
                                        "xi": 0.0, "z": 0.0, "beta": 0.0, "seed": 0}))
        assert run("abm-run", "--config", str(cfg_path)) == 2
        assert "n_agents" in capsys.readouterr().err

    def test_cli_seed_overrides_config(self, tmp_path):
        cfg = {"n_agents": 30, "horizon": 50, "j": 1.0, "xi": 1.0, "z": 0.1,
               "beta": 0.1, "seed": 1}
        cfg_path = tmp_path / "abm.json"
        cfg_path.write_text(json.dumps(cfg))
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run("abm-run", "--config", str(cfg_path), "--out", str(a), "--seed", "77")
        cfg["seed"] = 77
        cfg_path.write_text(json.dumps(cfg))
        run("abm-run", "--config", str(cfg_path), "--out", str(b))
        assert a.read_bytes() == b.read_bytes()


class TestRanges:
    def test_malformed_range_is_config_error(self, capsys):
        assert run("sdt-sweep", "--j", "1.0", "--xi-range", "0:4") == 2
        assert "xi-range" in capsys.readouterr().err or "xi_range" in capsys.readouterr().err

    def test_zero_step_rejected(self, capsys):
        assert run("sdt-sweep", "--j", "1.0", "--xi-range", "0:4:0") == 2


class TestVerifySubcommand:
    def test_passing_suite_exits_zero(self, capsys):
        assert run("verify", "--suite", "games") == 0
        out = capsys.readouterr().out
        assert "[PASS] games.transform_round_trip" in out

    def test_unknown_suite_rejected(self):
        with pytest.raises(SystemExit):
            run("verify", "--suite", "nope")
