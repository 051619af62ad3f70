"""Command-line interface: config handling, outputs, exit codes and the verification gate."""
import csv
import io
import json

import pytest
from click.testing import CliRunner

from lchs_fvm import blocks, cli, sim

# coarse grids need a finer node spacing than the tabulated radius rule gives
SMALL = ["--experiment", "1", "--n", "4", "--m", "6", "--R", "7.15", "--r-steps", "16"]


@pytest.fixture
def runner():
    return CliRunner()


def parse_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestRun:
    def test_csv_row_on_stdout(self, runner):
        res = runner.invoke(cli.main, ["run", *SMALL, "--no-time"])
        assert res.exit_code == 0, res.output
        rows = parse_csv(res.output)
        assert len(rows) == 1 and tuple(rows[0]) == cli.CSV_COLUMNS
        row = rows[0]
        assert (row["experiment"], row["scheme"], row["n"], row["m"]) == ("1", "central", "4", "6")
        assert row["wall_ms"] == "0.0000e+00"
        assert 0 < float(row["L2"]) < 0.01 and 0 < float(row["p_success"]) <= 1

    def test_unitary_case_leaves_quadrature_fields_blank(self, runner):
        res = runner.invoke(cli.main, ["run", "--experiment", "3", "--n", "4", "--no-time"])
        row = parse_csv(res.output)[0]
        assert row["m"] == "" and row["R"] == ""
        assert float(row["p_success"]) == pytest.approx(1.0)

    def test_outputs_to_files(self, runner, tmp_path):
        c, j, d = tmp_path / "o.csv", tmp_path / "o.json", tmp_path / "o.dat"
        res = runner.invoke(cli.main, ["run", *SMALL, "--csv", str(c), "--json", str(j), "--dump", str(d)])
        assert res.exit_code == 0, res.output
        assert res.output == ""
        payload = json.loads(j.read_text())
        assert set(payload) == {"config", "row", "report"}
        assert payload["config"]["n"] == 4
        assert len(d.read_text().strip().splitlines()) >= 16
        assert float(parse_csv(c.read_text())[0]["L2"]) == pytest.approx(payload["row"]["L2"], rel=1e-4)

    def test_config_round_trip_is_byte_identical(self, runner, tmp_path):
        saved = tmp_path / "cfg.json"
        first = runner.invoke(cli.main, ["run", *SMALL, "--no-time", "--save-config", str(saved)])
        second = runner.invoke(cli.main, ["run", "--config", str(saved)])
        assert first.exit_code == second.exit_code == 0
        assert first.output == second.output
        assert cli.RunConfig.from_json(saved.read_text()).to_json() == saved.read_text()

    def test_flags_override_config(self, runner, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"experiment": 1, "n": 5, "m": 3, "R": 7.15, "record_time": False}))
        res = runner.invoke(cli.main, ["run", "--config", str(cfg), "--n", "4"])
        assert parse_csv(res.output)[0]["n"] == "4"


class TestConfigErrors:
    @pytest.mark.parametrize("args", [
        ["--experiment", "99"],
        ["--experiment", "1", "--scheme", "upwind"],
        ["--experiment", "1", "--n", "0"],
        ["--experiment", "1", "--m-o", "2"],
        ["--experiment", "1", "--R", "-1"],
        ["--experiment", "1", "--eps-lchs", "2"],
        ["--experiment", "8", "--n", "11"],
    ])
    def test_exit_code_two(self, runner, args):
        res = runner.invoke(cli.main, ["run", *args])
        assert res.exit_code == cli.EXIT_CONFIG
        assert "config error" in res.output

    def test_unknown_key(self, runner, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"experiment": 1, "colour": "red"}))
        res = runner.invoke(cli.main, ["run", "--config", str(cfg)])
        assert res.exit_code == cli.EXIT_CONFIG
        assert "colour" in res.output

    @pytest.mark.parametrize("data", [{"n": "8"}, {"n": 8.5}, {"record_time": 1}, {"experiment": None}])
    def test_type_checks(self, data):
        with pytest.raises(cli.ConfigError):
            cli.RunConfig.from_dict(data)

    def test_invalid_json(self):
        with pytest.raises(cli.ConfigError):
            cli.RunConfig.from_json("{n: 1}")


class TestVerify:
    def test_commutator_lines(self, runner):
        res = runner.invoke(cli.main, ["verify", "--suite", "commutators", "--n", "3"])
        assert res.exit_code == 0, res.output
        lines = res.output.splitlines()
        assert all(l.split(" ", 1)[0] in ("PASS", "ERRATUM", "suite") for l in lines)
        assert any(l.startswith("ERRATUM [commutators]") for l in lines)
        assert lines[-1].startswith("suite commutators:") and " 0 fail" in lines[-1]

    def test_strict_counts_errata_as_failures(self, runner):
        res = runner.invoke(cli.main, ["verify", "--suite", "commutators", "--n", "3", "--strict"])
        assert res.exit_code == cli.EXIT_VERIFY

    def test_csv_record(self, runner, tmp_path):
        out = tmp_path / "v.csv"
        res = runner.invoke(cli.main, ["verify", "--suite", "eigen", "--csv", str(out)])
        assert res.exit_code == 0
        rows = parse_csv(out.read_text())
        assert rows and {r["status"] for r in rows} == {"PASS"}

    def test_register_size_checked(self, runner):
        res = runner.invoke(cli.main, ["verify", "--suite", "commutators", "--n", "7"])
        assert res.exit_code == cli.EXIT_CONFIG

    def test_sign_mutation_in_rotation_is_caught(self, runner, monkeypatch):
        def flipped(controls, target, angle):
            return sim.mc_rz(controls, target, -angle)

        monkeypatch.setattr(blocks, "mc_rz", flipped)
        res = runner.invoke(cli.main, ["verify", "--suite", "blocks"])
        assert res.exit_code == cli.EXIT_VERIFY
        assert "FAIL [blocks]" in res.output


class TestTablesAndDump:
    def test_single_table(self, runner, tmp_path):
        res = runner.invoke(cli.main, ["tables", "--table", "7", "--out", str(tmp_path), "--no-time"])
        assert res.exit_code == 0, res.output
        rows = parse_csv((tmp_path / "table07_central.csv").read_text())
        assert [r["n"] for r in rows] == ["7", "8", "9"]
        assert all(float(r["dev_L2"]) < 0.05 for r in rows)

    def test_unknown_table(self, runner, tmp_path):
        res = runner.invoke(cli.main, ["tables", "--table", "2", "--out", str(tmp_path)])
        assert res.exit_code == cli.EXIT_CONFIG

    def test_dump_circuit(self, runner, tmp_path):
        out = tmp_path / "c.txt"
        res = runner.invoke(cli.main, ["dump-circuit", *SMALL, "--out", str(out)])
        assert res.exit_code == 0, res.output
        header, *gates = out.read_text().splitlines()
        assert header.startswith("# qubits=10 gates=")
        assert int(header.split()[2].split("=")[1]) == len(gates)

    def test_dump_inhomogeneous_uses_outer_register(self, runner):
        res = runner.invoke(cli.main, ["dump-circuit", "--experiment", "7", "--n", "3", "--m", "2", "--m-o", "2"])
        assert res.exit_code == 0, res.output
        assert res.output.startswith("# qubits=7 ")
