import json

import pytest

from triphase.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestBoundCommand:
    def test_region_B_example(self, capsys):
        code, out, _ = run_cli(capsys, "bound", "--k1", "1", "--k2", "3",
                               "--m1", "0.1", "--m2", "0.5", "--r", "0.7")
        assert code == 0
        payload = json.loads(out)
        assert payload["region"] == "B"
        assert payload["B"] == pytest.approx(6.871, abs=5e-4)
        assert payload["exact"] is True

    def test_isotropic_tiny_m1_is_A(self, capsys):
        code, out, _ = run_cli(capsys, "bound", "--m1", "0.001", "--r", "1.0")
        payload = json.loads(out)
        assert code == 0
        assert payload["region"].startswith("A")
        assert payload["exact"] is True
        assert payload["k_star1"] == pytest.approx(payload["k_star2"], rel=1e-10)

    def test_oracle_flag(self, capsys):
        code, out, _ = run_cli(capsys, "bound", "--m1", "0.1", "--r", "0.7", "--oracle")
        payload = json.loads(out)
        assert code == 0
        assert abs(payload["oracle_gap"]) < 1e-7

    def test_invalid_input_exit_2(self, capsys):
        code, _, err = run_cli(capsys, "bound", "--m1", "0.9", "--m2", "0.5")
        assert code == 2
        assert "invalid" in err


class TestSweepCommands:
    def test_region_map_schema_and_determinism(self, capsys):
        args = ("region-map", "--steps", "5", "--m1-min", "0.02", "--m1-max", "0.4")
        code1, out1, _ = run_cli(capsys, *args)
        code2, out2, _ = run_cli(capsys, *args)
        assert code1 == code2 == 0
        assert out1 == out2
        lines = out1.strip().split("\n")
        assert lines[0] == "m1,r,region,B,t_opt"
        assert len(lines) == 1 + 25

    def test_region_map_seventeen_digits(self, capsys):
        _, out, _ = run_cli(capsys, "region-map", "--steps", "4",
                            "--m1-min", "0.05", "--m1-max", "0.3",
                            "--r-min", "0.1", "--r-max", "0.9")
        cell = out.strip().split("\n")[1].split(",")[3]
        assert float(cell) > 0  # parses back
        # 17 significant digits survive a round trip
        assert float(f"{float(cell):.17g}") == float(cell)

    def test_region_map_invalid_range(self, capsys):
        code, _, _ = run_cli(capsys, "region-map", "--m1-min", "0.4", "--m1-max", "0.9")
        assert code == 2

    def test_gclosure_sequence(self, capsys):
        code, out, _ = run_cli(capsys, "gclosure", "--k1", "1", "--k2", "2",
                               "--m1", "0.15", "--m2", "0.5", "--steps", "60")
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "r,k_star1,k_star2,region,exact,harmonic,transl_k1,transl_k2"
        regions = [ln.split(",")[3][0] for ln in lines[1:]]
        seen = []
        for letter in reversed(regions):
            if not seen or seen[-1] != letter:
                seen.append(letter)
        assert seen == ["D", "B", "C", "A"]

    def test_gap_sweep_output(self, capsys, tmp_path):
        out_file = tmp_path / "gap.csv"
        code, _, _ = run_cli(capsys, "gap-sweep", "--m1", "0.2", "--steps", "12",
                             "--out", str(out_file))
        assert code == 0
        lines = out_file.read_text().strip().split("\n")
        assert lines[0] == "r,alpha_opt,W_struct,B,delta_rel"
        gaps = [float(ln.split(",")[4]) for ln in lines[1:]]
        assert all(g >= -1e-10 for g in gaps)

    def test_gap_sweep_second_spec(self, capsys):
        code, out, _ = run_cli(capsys, "gap-sweep", "--k1", "1", "--k2", "2",
                               "--m1", "0.35", "--m2", "0.4", "--steps", "8")
        assert code == 0
        gaps = [float(ln.split(",")[4]) for ln in out.strip().split("\n")[1:]]
        assert all(g >= -1e-10 for g in gaps)

    def test_gclosure_plot_rendered(self, capsys, tmp_path):
        out_file = tmp_path / "gcl.csv"
        code, _, _ = run_cli(capsys, "gclosure", "--m1", "0.15", "--k2", "2",
                             "--steps", "10", "--out", str(out_file))
        assert code == 0
        assert (tmp_path / "gcl.png").stat().st_size > 1000

    def test_gap_sweep_plot_rendered(self, capsys, tmp_path):
        out_file = tmp_path / "gap.csv"
        code, _, _ = run_cli(capsys, "gap-sweep", "--m1", "0.2", "--steps", "8",
                             "--out", str(out_file))
        assert code == 0
        assert (tmp_path / "gap.png").stat().st_size > 1000

    def test_gap_sweep_empty_region_exit_5(self, capsys):
        code, _, err = run_cli(capsys, "gap-sweep", "--k1", "1", "--k2", "2",
                               "--m1", "0.15", "--m2", "0.5", "--steps", "5")
        assert code == 5
        assert "empty region" in err

    def test_region_map_k2_2_variant_consistent_with_classify(self, capsys):
        from triphase.core import CompositeSpec
        from triphase.bounds import classify_region
        _, out, _ = run_cli(capsys, "region-map", "--k2", "2", "--steps", "6",
                            "--m1-min", "0.03", "--m1-max", "0.4")
        for line in out.strip().split("\n")[1:]:
            m1, r, region = line.split(",")[:3]
            expected = classify_region(CompositeSpec(1.0, 2.0, float(m1), 0.5), float(r))
            assert region == expected.value

    def test_region_map_dense_strip_near_bc_line(self, capsys):
        from triphase.core import CompositeSpec
        from triphase.bounds import classify_region
        _, out, _ = run_cli(capsys, "region-map", "--steps", "7",
                            "--m1-min", "0.05", "--m1-max", "0.12",
                            "--r-min", "0.497", "--r-max", "0.503")
        letters = set()
        for line in out.strip().split("\n")[1:]:
            m1, r, region = line.split(",")[:3]
            expected = classify_region(CompositeSpec(1.0, 3.0, float(m1), 0.5), float(r))
            assert region == expected.value
            letters.add(region[0])
        assert {"B", "C"} <= letters  # the strip straddles the B/C line

    def test_region_map_json_format(self, capsys):
        code, out, _ = run_cli(capsys, "region-map", "--steps", "3",
                               "--m1-min", "0.05", "--m1-max", "0.3",
                               "--format", "json")
        assert code == 0
        rows = json.loads(out)
        assert len(rows) == 9
        assert set(rows[0]) == {"m1", "r", "region", "B", "t_opt"}

    def test_gclosure_small_m1_all_region_A(self, capsys):
        _, out, _ = run_cli(capsys, "gclosure", "--k1", "1", "--k2", "2",
                            "--m1", "0.05", "--m2", "0.5", "--steps", "20")
        regions = {ln.split(",")[3] for ln in out.strip().split("\n")[1:]}
        assert regions == {"A2"}

    def test_jobs_flag_preserves_order(self, capsys):
        args = ("region-map", "--steps", "4", "--m1-min", "0.05", "--m1-max", "0.3")
        _, serial, _ = run_cli(capsys, *args)
        _, parallel, _ = run_cli(capsys, *args, "--jobs", "2")
        assert serial == parallel

    def test_plot_rendered_by_default_with_out_file(self, capsys, tmp_path):
        out_file = tmp_path / "map.csv"
        code, _, _ = run_cli(capsys, "region-map", "--steps", "4", "--out",
                             str(out_file))
        assert code == 0
        assert (tmp_path / "map.png").exists()

    def test_no_plot_suppresses_figure(self, capsys, tmp_path):
        out_file = tmp_path / "map.csv"
        code, _, _ = run_cli(capsys, "region-map", "--steps", "4", "--out",
                             str(out_file), "--no-plot")
        assert code == 0
        assert not (tmp_path / "map.png").exists()


class TestStructureCommand:
    def test_region_B_report(self, capsys):
        code, out, _ = run_cli(capsys, "structure", "--m1", "0.1", "--r", "0.7")
        assert code == 0
        payload = json.loads(out)
        assert payload["region"] == "B"
        assert abs(payload["gap"]) < 1e-9
        assert payload["node"]["type"] == "layering"
        assert "layering normal=" in payload["text"]
        assert payload["optimality_residuals"]["material1_det"] < 1e-12

    def test_region_C_t_structure(self, capsys):
        code, out, _ = run_cli(capsys, "structure", "--k1", "1", "--k2", "2",
                               "--m1", "0.15", "--m2", "0.5", "--r", "0.4")
        payload = json.loads(out)
        assert payload["region"] == "C"
        assert abs(payload["gap"]) < 1e-9

    def test_region_E_positive_gap(self, capsys):
        code, out, _ = run_cli(capsys, "structure", "--m1", "0.2", "--r", "0.3")
        payload = json.loads(out)
        assert payload["region"] == "E"
        assert 1e-6 < payload["gap"] < 1e-3

    def test_out_of_applicability_exit_4(self, capsys):
        code, _, err = run_cli(capsys, "structure", "--m1", "0.1", "--r", "0.3",
                               "--region", "B")
        assert code == 4
        assert "violated" in err


class TestConfigFile:
    def test_flags_beat_config(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("m1 = 0.2\nr = 0.3\n")
        # config supplies m1 and r; the explicit flag overrides r
        code, out, _ = run_cli(capsys, "bound", "--config", str(cfg), "--r", "0.7")
        payload = json.loads(out)
        assert code == 0
        sp_bound = json.loads(run_cli(capsys, "bound", "--m1", "0.2", "--r", "0.7")[1])
        assert payload["B"] == sp_bound["B"]

    def test_config_fills_defaults(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("m1 0.2\n")
        code, out, _ = run_cli(capsys, "bound", "--config", str(cfg), "--r", "0.3")
        payload = json.loads(out)
        expected = json.loads(run_cli(capsys, "bound", "--m1", "0.2", "--r", "0.3")[1])
        assert payload["B"] == expected["B"]


class TestVerifyCommand:
    def test_default_run_passes(self, capsys):
        code, out, _ = run_cli(capsys, "verify")
        assert code == 0
        assert "pass" in out and "FAIL" not in out

    def test_failed_invariant_exits_1(self, capsys, monkeypatch):
        import triphase.cli as cli_mod
        from triphase.verify import CheckResult
        monkeypatch.setattr(cli_mod, "run_invariant_suite",
                            lambda fast=True: [CheckResult("broken", 1.0, 1e-9)])
        code, out, _ = run_cli(capsys, "verify")
        assert code == 1
        assert "FAIL" in out
