import json
import math

import numpy as np
import pytest

from photodetect_sim.cli import (
    ResultTable,
    build_config,
    main,
    run_darkcount_table,
    run_deadtime_rate,
    run_hom_dip,
    run_multiplex_fidelity,
    run_spdc_herald,
)
from photodetect_sim.errors import ParameterError


def make_config(experiment, seed=0, **params):
    return build_config(experiment, None, params, seed, None)


class TestConfigAssembly:
    def test_defaults_fill_in(self):
        cfg = make_config("hom-dip")
        assert cfg.parameters["gamma"] == 1.0
        assert cfg.parameters["n_tau"] == 81

    def test_unknown_parameter_rejected(self):
        with pytest.raises(ParameterError):
            make_config("hom-dip", sigma=2.0)

    def test_unknown_config_key_rejected(self):
        with pytest.raises(ParameterError):
            build_config("hom-dip", {"rng": 3}, {}, None, None)

    def test_experiment_mismatch_rejected(self):
        with pytest.raises(ParameterError):
            build_config("hom-dip", {"experiment": "spdc-herald"}, {}, None, None)

    def test_overrides_beat_file_values(self):
        file_cfg = {"parameters": {"gamma": 0.4}, "seed": 9}
        cfg = build_config("hom-dip", file_cfg, {"gamma": 0.7}, None, None)
        assert cfg.parameters["gamma"] == 0.7
        assert cfg.seed == 9

    def test_cli_seed_beats_file_seed(self):
        cfg = build_config("hom-dip", {"seed": 9}, {}, 4, None)
        assert cfg.seed == 4

    @pytest.mark.parametrize(
        "experiment,bad",
        [
            ("hom-dip", {"gamma": 1.2}),
            ("hom-dip", {"n_tau": 1}),
            ("spdc-herald", {"rho_c": 1.0}),
            ("spdc-herald", {"n_points": 4}),
            ("multiplex-fidelity", {"scheme": "other"}),
            ("multiplex-fidelity", {"eta": -0.2}),
            ("deadtime-rate", {"rates": []}),
            ("deadtime-rate", {"tau_dead": -1e-6}),
            ("darkcount-table", {"r_dark": -0.1}),
            ("darkcount-table", {"signature_n": 99}),
        ],
    )
    def test_range_validation(self, experiment, bad):
        with pytest.raises(ParameterError):
            make_config(experiment, **bad)


class TestRunners:
    def test_hom_dip_ideal(self):
        table = run_hom_dip(make_config("hom-dip"))
        assert list(table.columns) == ["tau", "analytic", "simulated", "dressed"]
        assert table.columns["simulated"].min() < 1e-6
        assert abs(table.metadata["summary"]["visibility_simulated"] - 1.0) < 1e-9

    def test_hom_dip_mismatch_floor(self):
        table = run_hom_dip(make_config("hom-dip", gamma=0.5))
        sim = table.columns["simulated"]
        assert abs(sim.min() - 0.25) < 1e-6
        assert abs(table.metadata["summary"]["visibility_simulated"] - 1 / 3) < 1e-4

    def test_spdc_herald_regimes(self):
        table = run_spdc_herald(make_config("spdc-herald"))
        p = table.columns["purity"]
        assert p[0] >= 0.99  # separable
        assert p[1] < 0.2  # strongly correlated, fine readout
        assert abs(p[2] - 1.0) < 1e-9  # single readout node
        scan = p[3:]
        assert np.all(np.diff(scan) >= -1e-12)

    def test_multiplex_nport_values(self):
        table = run_multiplex_fidelity(
            make_config("multiplex-fidelity", n_list=[1, 2], N_list=[2, 4])
        )
        rows = list(
            zip(
                table.columns["n_photons"],
                table.columns["n_units"],
                table.columns["m_clicks"],
                table.columns["probability"],
                table.columns["fidelity"],
            )
        )
        lookup = {(n, N, m): (p, f) for n, N, m, p, f in rows}
        assert abs(lookup[(2, 4, 2)][0] - 0.75) < 1e-12
        assert abs(lookup[(1, 2, 1)][1] - 1.0) < 1e-12

    def test_multiplex_single_photon_efficiency(self):
        table = run_multiplex_fidelity(
            make_config("multiplex-fidelity", n_list=[1], N_list=[3], eta=0.6)
        )
        mask = table.columns["m_clicks"] == 1
        assert abs(table.columns["probability"][mask][0] - 0.6) < 1e-12

    def test_multiplex_fidelity_monotone_in_ports(self):
        table = run_multiplex_fidelity(
            make_config("multiplex-fidelity", n_list=[2], N_list=[2, 4, 8, 16])
        )
        mask = table.columns["m_clicks"] == 2
        fid = table.columns["fidelity"][mask]
        assert np.all(np.diff(fid) > 0)

    def test_multiplex_tdm(self):
        table = run_multiplex_fidelity(
            make_config("multiplex-fidelity", scheme="tdm", n_list=[1], eta=0.6)
        )
        mask = table.columns["m_clicks"] == 1
        # single photon: P(1) = eta * (1 - residual)
        assert abs(table.columns["probability"][mask][0] - 0.6 * (1 - 0.5 ** 20)) < 1e-9

    def test_deadtime_zero_tau(self):
        table = run_deadtime_rate(
            make_config("deadtime-rate", seed=3, rates=[1e4], tau_dead=0.0)
        )
        obs = table.columns["observed_rate"][0]
        se = math.sqrt(1e4)  # Poisson count error
        assert abs(obs - 1e4) < 3 * se

    def test_deadtime_saturation(self):
        table = run_deadtime_rate(
            make_config("deadtime-rate", seed=3, rates=[1e5], tau_dead=1e-5)
        )
        obs = table.columns["observed_rate"][0]
        assert abs(obs - 5e4) < 3 * table.columns["std_error"][0]

    def test_darkcount_zero_r(self):
        table = run_darkcount_table(make_config("darkcount-table", r_dark=0.0))
        p = table.columns["p_dc"]
        assert p[0] == 1.0 and np.all(p[1:] == 0.0)

    def test_darkcount_mixture_weights(self):
        table = run_darkcount_table(
            make_config("darkcount-table", r_dark=0.3, eta=1.0, input_n=1, signature_n=1)
        )
        w = table.columns["mixture_weight"]
        # eta = 1: photon always transmitted, i=1 term weight 1, no i=0 leak
        assert abs(w[1] - 1.0) < 1e-12
        assert w[0] == 0.0


class TestResultTable:
    def test_ragged_columns_rejected(self):
        with pytest.raises(ParameterError):
            ResultTable({"a": np.zeros(3), "b": np.zeros(2)})

    def test_round_trip_precision(self, tmp_path):
        values = np.array([1 / 3, math.pi, 1e-17, 123456.789012345678])
        table = ResultTable({"x": values}, {"experiment": "t", "config": {}, "summary": {}})
        path = tmp_path / "t.csv"
        table.write_csv(path)
        body = [l for l in path.read_text().splitlines() if not l.startswith("#")]
        parsed = np.array([float(v) for v in body[1:]])
        assert np.array_equal(parsed, values)

    def test_timestamp_not_written(self, tmp_path):
        table = ResultTable(
            {"x": np.zeros(1)},
            {"experiment": "t", "config": {}, "summary": {}, "timestamp": "now"},
        )
        path = tmp_path / "t.csv"
        table.write_csv(path)
        assert "timestamp" not in path.read_text()


class TestMainEntry:
    def test_success_writes_file(self, tmp_path, capsys):
        out = tmp_path / "dip.csv"
        code = main(["hom-dip", "--out", str(out), "--param", "n_tau=11"])
        assert code == 0
        assert out.exists()
        header = out.read_text().splitlines()
        assert header[0].startswith("# photodetect-sim")
        assert capsys.readouterr().out.strip() == str(out)

    def test_same_config_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        argv = ["deadtime-rate", "--seed", "7", "--param", "rates=[20000.0]"]
        assert main(argv + ["--out", str(a)]) == 0
        assert main(argv + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_config_file_round_trip(self, tmp_path):
        cfg = {
            "experiment": "multiplex-fidelity",
            "parameters": {"n_list": [2], "N_list": [4]},
            "seed": 1,
            "output_path": str(tmp_path / "m.csv"),
        }
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        assert main(["multiplex-fidelity", "--config", str(cfg_path)]) == 0
        text = (tmp_path / "m.csv").read_text()
        assert "0.75" in text

    def test_bad_param_exits_2(self, capsys):
        assert main(["hom-dip", "--param", "gamma=2.0"]) == 2
        assert "config error" in capsys.readouterr().err

    def test_unknown_param_exits_2(self, capsys):
        assert main(["hom-dip", "--param", "nope=1"]) == 2
        capsys.readouterr()

    def test_malformed_config_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["hom-dip", "--config", str(bad)]) == 2
        capsys.readouterr()

    def test_model_error_exits_3(self, capsys):
        # grid narrower than the required +-5 widths -> coverage failure
        assert main(["hom-dip", "--param", "span_widths=3"]) == 3
        assert "model error" in capsys.readouterr().err

    def test_outdir_env_var(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("PHOTODETECT_SIM_OUTDIR", str(tmp_path))
        assert main(["darkcount-table", "--param", "n_max=5"]) == 0
        assert (tmp_path / "darkcount-table.csv").exists()
        capsys.readouterr()

    def test_rerun_from_echoed_config(self, tmp_path):
        first = tmp_path / "first.csv"
        assert main(["spdc-herald", "--param", "n_points=64", "--out", str(first)]) == 0
        echoed = None
        for line in first.read_text().splitlines():
            if line.startswith("# config: "):
                echoed = json.loads(line[len("# config: "):])
        assert echoed is not None
        second = tmp_path / "second.csv"
        cfg_path = tmp_path / "echo.json"
        cfg_path.write_text(
            json.dumps({"experiment": "spdc-herald", **echoed})
        )
        assert main(["spdc-herald", "--config", str(cfg_path), "--out", str(second)]) == 0
        assert first.read_bytes() == second.read_bytes()
