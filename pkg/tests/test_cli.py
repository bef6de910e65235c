"""Command-line interface: subcommands, exit codes, output artifacts, and
byte-level reproducibility of repeated runs."""
import json

import pytest

from dmnls.cli import main


def _write(tmp_path, name, preset, **scalars):
    lines = [f'preset = "{preset}"',
             f'output_dir = "{(tmp_path / name).as_posix()}_out"']
    lines += [f"{key} = {value}" for key, value in scalars.items()]
    path = tmp_path / f"{name}.toml"
    path.write_text("\n".join(lines) + "\n")
    return path


class TestExponentsCommand:
    def test_prints_report_json(self, capsys):
        assert main(["exponents", "--d", "1", "--p", "4"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["s_c"] == 0.0
        assert payload["regime"] == "mass_critical"

    def test_invalid_power_is_a_runtime_error(self, capsys):
        assert main(["exponents", "--d", "1", "--p", "-2"]) == 3
        assert "runtime error" in capsys.readouterr().err


class TestRunCommand:
    def test_free_sanity_passes(self, tmp_path, capsys):
        config = _write(tmp_path, "free", "free_sanity")
        assert main(["run", str(config)]) == 0
        out = capsys.readouterr().out
        assert "[PASS] free_propagation_error" in out
        assert "status=pass" in out
        outdir = tmp_path / "free_out"
        for artifact in ("manifest.json", "summary.json",
                         "time_series.csv", "final_state.bin"):
            assert (outdir / artifact).exists()
        manifest = json.loads((outdir / "manifest.json").read_text())
        assert manifest["status"] == "pass"
        assert manifest["preset"] == "free_sanity"

    def test_repeat_runs_are_byte_identical(self, tmp_path, capsys):
        a = _write(tmp_path, "a", "free_sanity")
        b = _write(tmp_path, "b", "free_sanity")
        assert main(["run", str(a)]) == 0
        assert main(["run", str(b)]) == 0
        capsys.readouterr()
        csv_a = (tmp_path / "a_out" / "time_series.csv").read_bytes()
        csv_b = (tmp_path / "b_out" / "time_series.csv").read_bytes()
        assert csv_a == csv_b
        state_a = (tmp_path / "a_out" / "final_state.bin").read_bytes()
        state_b = (tmp_path / "b_out" / "final_state.bin").read_bytes()
        assert state_a == state_b

    def test_config_error_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.toml"
        bad.write_text('preset = "free_sanity"\n')  # output_dir missing
        assert main(["run", str(bad)]) == 2
        assert "config error" in capsys.readouterr().err

    def test_missing_file_exits_3(self, tmp_path, capsys):
        assert main(["run", str(tmp_path / "absent.toml")]) == 3
        assert "runtime error" in capsys.readouterr().err


class TestGroundstateCommand:
    def test_rejects_other_presets(self, tmp_path, capsys):
        config = _write(tmp_path, "free", "free_sanity")
        assert main(["groundstate", str(config)]) == 2
        assert "preset" in capsys.readouterr().err


class TestBatchCommand:
    def test_runs_all_and_reports_worst_code(self, tmp_path, capsys,
                                             monkeypatch):
        monkeypatch.setenv("DMNLS_MAX_WORKERS", "1")
        _write(tmp_path, "one", "free_sanity")
        _write(tmp_path, "two", "exponents_table")
        broken = tmp_path / "three.toml"
        broken.write_text('preset = "nope"\noutput_dir = "x"\n')
        assert main(["batch", str(tmp_path)]) == 2
        out = capsys.readouterr().out
        assert "one.toml: exit 0" in out
        assert "two.toml: exit 0" in out
        assert "three.toml: exit 2" in out

    def test_empty_directory_exits_2(self, tmp_path, capsys):
        assert main(["batch", str(tmp_path)]) == 2
        assert "no *.toml" in capsys.readouterr().err
