from click.testing import CliRunner

from fdwpcn.cli import main
from fdwpcn.config import SystemConfig, config_to_text


def write_spec(path, schemes="no_irs", extra=None):
    base = SystemConfig(K=2, Mx=2, Mz=1, rng_seed=0)
    keys = {"sweep_axis": "Pmax_dBm", "sweep_values": "30",
            "schemes": schemes, "n_seeds": "1", "seed0": "5",
            "output_path": str(path / "results")}
    if extra:
        keys.update(extra)
    spec = path / "spec.txt"
    spec.write_text(config_to_text(base, extra=keys))
    return spec


class TestRunCommand:
    def test_writes_outputs_and_exits_zero(self, tmp_path):
        spec = write_spec(tmp_path)
        result = CliRunner().invoke(main, ["run", str(spec)])
        assert result.exit_code == 0, result.output
        csv = (tmp_path / "results.csv").read_text()
        assert csv.splitlines()[0] == (
            "scheme,axis,value,seed,objective,iterations,xi_final,wallclock_ms")
        assert (tmp_path / "results_agg.csv").exists()
        assert (tmp_path / "results.json").exists()

    def test_rerun_byte_identical(self, tmp_path):
        spec = write_spec(tmp_path)
        CliRunner().invoke(main, ["run", str(spec)])
        first = (tmp_path / "results.csv").read_bytes()
        CliRunner().invoke(main, ["run", str(spec)])
        assert (tmp_path / "results.csv").read_bytes() == first

    def test_cell_error_exits_nonzero(self, tmp_path):
        # fd_penalty on a perfect-cancellation config errors per cell.
        spec = write_spec(tmp_path, schemes="fd_penalty,no_irs")
        result = CliRunner().invoke(main, ["run", str(spec)])
        assert result.exit_code == 1
        assert (tmp_path / "results.csv").exists()

    def test_output_override(self, tmp_path):
        spec = write_spec(tmp_path)
        out = tmp_path / "custom"
        result = CliRunner().invoke(main, ["run", str(spec), "-o", str(out)])
        assert result.exit_code == 0
        assert (tmp_path / "custom.csv").exists()


class TestTraceCommand:
    def test_trace_file(self, tmp_path):
        spec = write_spec(tmp_path)
        out = tmp_path / "trace.csv"
        result = CliRunner().invoke(main, [
            "trace", "--config", str(spec), "--scheme", "fd_perfect",
            "--seed", "2", "-o", str(out)])
        assert result.exit_code == 0, result.output
        assert out.read_text().splitlines()[0] == "iter,objective"


class TestChannelsCommand:
    def test_dump_file(self, tmp_path):
        spec = write_spec(tmp_path)
        out = tmp_path / "channels.csv"
        result = CliRunner().invoke(main, [
            "channels", "--config", str(spec), "-o", str(out)])
        assert result.exit_code == 0, result.output
        assert out.read_text().splitlines()[0] == "link,k,m,re,im"
