"""Command-line experiment runner emitting plot-ready CSV tables.

Usage: photodetect-sim <experiment> --config <path> [--seed N] [--out <path>]
[--param key=value ...].  CLI flags override config-file values which
override built-in defaults.  Exit codes: 0 success, 2 config error, 3
numeric-model error.  Output files carry '#'-prefixed metadata lines (the
config echo) followed by numeric columns at full round-trip precision; a
rerun from the echoed config reproduces the file byte for byte.
"""

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import __version__, hom, multiplex, spectral, temporal
from .errors import ModelError, ParameterError
from .fock import DetectorSpec, dark_count_probs, fock_state, loss_channel
from .multiplex import NPortSpec, TdmSpec
from .spectral import FrequencyGrid
from .temporal import DeadTimeModel

ENV_OUTDIR = "PHOTODETECT_SIM_OUTDIR"

EXPERIMENTS = (
    "hom-dip",
    "spdc-herald",
    "multiplex-fidelity",
    "deadtime-rate",
    "darkcount-table",
)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    parameters: dict
    seed: int = 0
    output_path: str | None = None


@dataclass
class ResultTable:
    """Named numeric columns plus run metadata.

    The metadata echoes everything needed to reproduce the table (experiment
    name, parameters, seed, package version).  The in-memory table also
    carries a timestamp, which is deliberately not written to disk so that
    identical configs produce identical files.
    """

    columns: dict
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        lengths = {k: len(v) for k, v in self.columns.items()}
        if len(set(lengths.values())) > 1:
            raise ParameterError(f"ragged columns: {lengths}")

    def write_csv(self, path) -> None:
        meta = {k: v for k, v in self.metadata.items() if k != "timestamp"}
        names = list(self.columns)
        arrays = [np.asarray(self.columns[k], dtype=float) for k in names]
        with open(path, "w") as fh:
            fh.write(f"# photodetect-sim {__version__}\n")
            for key in sorted(meta):
                fh.write(f"# {key}: {json.dumps(meta[key], sort_keys=True)}\n")
            fh.write(",".join(names) + "\n")
            for row in zip(*arrays):
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


# ---------------------------------------------------------------------------
# parameter schemas

_DEFAULTS = {
    "hom-dip": {
        "gamma": 1.0,
        "tau_min": -4.0,
        "tau_max": 4.0,
        "n_tau": 81,
        "width": 1.0,
        "center": 0.0,
        "span_widths": 8.0,
        "grid_points": 257,
        "eta_detector": 1.0,
        "window_halfwidth": math.inf,
    },
    "spdc-herald": {
        "n_points": 128,
        "span_widths": 5.0,
        "width": 1.0,
        "center": 0.0,
        "rho_c": 0.9,
        "Delta_scan": 3.0,
        "n_scan": 10,
    },
    "multiplex-fidelity": {
        "scheme": "nport",
        "eta": 1.0,
        "n_list": [1, 2, 3, 4],
        "N_list": [2, 4, 8, 16, 32, 64],
        "p_couple": 0.5,
        "loop_loss": 1.0,
        "max_bins": 20,
    },
    "deadtime-rate": {
        "rates": [1.0e4, 1.0e5, 5.0e5],
        "tau_dead": 1.0e-5,
        "eta": 1.0,
        "dark_rate": 0.0,
        "window": 1.0,
    },
    "darkcount-table": {
        "r_dark": 0.3,
        "eta": 0.8,
        "n_max": 25,
        "signature_n": 1,
        "input_n": 1,
    },
}


def _need(cond: bool, message: str):
    if not cond:
        raise ParameterError(message)


def _validate_params(experiment: str, p: dict):
    if experiment == "hom-dip":
        _need(0.0 <= p["gamma"] <= 1.0, "gamma must lie in [0, 1]")
        _need(p["tau_max"] > p["tau_min"], "tau_max must exceed tau_min")
        _need(int(p["n_tau"]) >= 2, "n_tau must be >= 2")
        _need(p["width"] > 0, "width must be > 0")
        _need(int(p["grid_points"]) >= 8, "grid_points must be >= 8")
        _need(p["span_widths"] > 0, "span_widths must be > 0")
        _need(0.0 <= p["eta_detector"] <= 1.0, "eta_detector must lie in [0, 1]")
        _need(p["window_halfwidth"] >= 0, "window_halfwidth must be >= 0")
    elif experiment == "spdc-herald":
        _need(int(p["n_points"]) >= 16, "n_points must be >= 16")
        _need(p["span_widths"] > 0, "span_widths must be > 0")
        _need(p["width"] > 0, "width must be > 0")
        _need(-1.0 < p["rho_c"] < 1.0, "rho_c must lie in (-1, 1)")
        _need(p["Delta_scan"] > 0, "Delta_scan must be > 0")
        _need(int(p["n_scan"]) >= 2, "n_scan must be >= 2")
    elif experiment == "multiplex-fidelity":
        _need(p["scheme"] in ("nport", "tdm"), "scheme must be 'nport' or 'tdm'")
        _need(0.0 <= p["eta"] <= 1.0, "eta must lie in [0, 1]")
        _need(
            all(int(n) >= 0 for n in p["n_list"]) and len(p["n_list"]) > 0,
            "n_list must hold counts >= 0",
        )
        if p["scheme"] == "nport":
            _need(
                all(int(N) >= 1 for N in p["N_list"]) and len(p["N_list"]) > 0,
                "N_list must hold counts >= 1",
            )
        else:
            _need(0.0 < p["p_couple"] <= 1.0, "p_couple must lie in (0, 1]")
            _need(0.0 < p["loop_loss"] <= 1.0, "loop_loss must lie in (0, 1]")
            _need(int(p["max_bins"]) >= 1, "max_bins must be >= 1")
    elif experiment == "deadtime-rate":
        _need(
            all(r > 0 for r in p["rates"]) and len(p["rates"]) > 0,
            "rates must hold positive values",
        )
        _need(p["tau_dead"] >= 0, "tau_dead must be >= 0")
        _need(0.0 <= p["eta"] <= 1.0, "eta must lie in [0, 1]")
        _need(p["dark_rate"] >= 0, "dark_rate must be >= 0")
        _need(p["window"] > 0, "window must be > 0")
    elif experiment == "darkcount-table":
        _need(p["r_dark"] >= 0, "r_dark must be >= 0")
        _need(0.0 <= p["eta"] <= 1.0, "eta must lie in [0, 1]")
        _need(int(p["n_max"]) >= 1, "n_max must be >= 1")
        _need(0 <= int(p["signature_n"]) <= int(p["n_max"]), "signature_n out of range")
        _need(0 <= int(p["input_n"]) <= int(p["n_max"]), "input_n out of range")
    else:
        raise ParameterError(f"unknown experiment {experiment!r}")


def build_config(experiment: str, file_cfg: dict | None, overrides: dict,
                 seed: int | None, out: str | None) -> ExperimentConfig:
    """Merge defaults, config file and CLI overrides, then range-check."""
    if experiment not in EXPERIMENTS:
        raise ParameterError(f"unknown experiment {experiment!r}")
    params = dict(_DEFAULTS[experiment])
    cfg_seed = 0
    cfg_out = None
    if file_cfg is not None:
        allowed = {"experiment", "parameters", "seed", "output_path"}
        unknown = set(file_cfg) - allowed
        _need(not unknown, f"unknown config keys: {sorted(unknown)}")
        if "experiment" in file_cfg:
            _need(
                file_cfg["experiment"] == experiment,
                f"config is for {file_cfg['experiment']!r}, not {experiment!r}",
            )
        file_params = file_cfg.get("parameters", {})
        _need(isinstance(file_params, dict), "parameters must be a mapping")
        unknown = set(file_params) - set(params)
        _need(not unknown, f"unknown parameters: {sorted(unknown)}")
        params.update(file_params)
        cfg_seed = file_cfg.get("seed", 0)
        cfg_out = file_cfg.get("output_path")
    unknown = set(overrides) - set(params)
    _need(not unknown, f"unknown parameters: {sorted(unknown)}")
    params.update(overrides)
    _validate_params(experiment, params)
    return ExperimentConfig(
        experiment=experiment,
        parameters=params,
        seed=int(seed if seed is not None else cfg_seed),
        output_path=out if out is not None else cfg_out,
    )


def _metadata(config: ExperimentConfig, summary: dict) -> dict:
    return {
        "experiment": config.experiment,
        "config": {"parameters": config.parameters, "seed": config.seed},
        "summary": summary,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }


# ---------------------------------------------------------------------------
# experiments


def run_hom_dip(config: ExperimentConfig) -> ResultTable:
    p = config.parameters
    gamma = float(p["gamma"])
    taus = np.linspace(float(p["tau_min"]), float(p["tau_max"]), int(p["n_tau"]))
    center, width = float(p["center"]), float(p["width"])
    span = float(p["span_widths"]) * width
    grid = FrequencyGrid(center - span, center + span, int(p["grid_points"]))
    psi = spectral.gaussian_amplitude(grid, center, width)
    det = DetectorSpec(
        eta_eff=float(p["eta_detector"]),
        omega0_macro=center,
        Delta=float(p["window_halfwidth"]),
    )
    analytic = np.array([hom.coincidence_analytic(gamma, t) for t in taus])
    simulated = np.array(
        [hom.coincidence_simulated(psi, psi, t, gamma_extra=gamma) for t in taus]
    )
    dressed = np.array(
        [
            hom.coincidence_detector_dressed(psi, psi, t, det, det, gamma_extra=gamma)
            for t in taus
        ]
    )
    summary = {
        "visibility_analytic": hom.visibility(analytic),
        "visibility_simulated": hom.visibility(simulated),
        "visibility_dressed": hom.visibility(dressed),
        "delay_scale": hom.delay_scale(psi, psi),
    }
    return ResultTable(
        {"tau": taus, "analytic": analytic, "simulated": simulated, "dressed": dressed},
        _metadata(config, summary),
    )


def run_spdc_herald(config: ExperimentConfig) -> ResultTable:
    p = config.parameters
    width, center = float(p["width"]), float(p["center"])
    span = float(p["span_widths"]) * width
    grid = FrequencyGrid(center - span, center + span, int(p["n_points"]))
    d_omega = grid.spacing
    jsas = {}

    def herald_row(rho_c, delta, Delta):
        if rho_c not in jsas:
            jsas[rho_c] = spectral.gaussian_jsa(
                grid, grid, (center, center), (width, width), rho_c
            )
        det = DetectorSpec(omega0_macro=center, Delta=Delta, delta=delta)
        rho = spectral.condition_signal_tophat(jsas[rho_c], det)
        return (delta, Delta, delta / Delta, rho_c, rho.trace, spectral.purity(rho))

    rows = [
        # factorizable pair: heralded state is pure for any window pair
        herald_row(0.0, 0.4 * width, 2.0 * width),
        # strong correlation read out finely over a wide window: mixed
        herald_row(0.99, d_omega, 10.0 * width),
        # single-readout window: pure regardless of correlation
        herald_row(float(p["rho_c"]), width, 0.25 * d_omega),
    ]
    for delta in np.geomspace(d_omega, 0.35 * width, int(p["n_scan"])):
        rows.append(herald_row(float(p["rho_c"]), float(delta), float(p["Delta_scan"])))
    cols = list(zip(*rows))
    names = ("delta", "Delta", "delta_over_Delta", "rho_c", "herald_prob", "purity")
    summary = {"grid_spacing": d_omega, "regime_rows": 3, "scan_rows": int(p["n_scan"])}
    return ResultTable(
        {name: np.array(col) for name, col in zip(names, cols)},
        _metadata(config, summary),
    )


def run_multiplex_fidelity(config: ExperimentConfig) -> ResultTable:
    p = config.parameters
    eta = float(p["eta"])
    rows = []
    if p["scheme"] == "nport":
        for n in p["n_list"]:
            for nports in p["N_list"]:
                dist = multiplex.nport_click_distribution(
                    int(n), NPortSpec(int(nports), eta)
                )
                fid = multiplex.resolution_fidelity(int(n), dist)
                for m, prob in enumerate(dist.probs):
                    rows.append((int(n), int(nports), m, prob, fid))
    else:
        spec = TdmSpec(
            p_couple=float(p["p_couple"]),
            loop_loss=float(p["loop_loss"]),
            max_bins=int(p["max_bins"]),
            eta=eta,
        )
        for n in p["n_list"]:
            dist = multiplex.tdm_click_distribution(int(n), spec)
            fid = multiplex.resolution_fidelity(int(n), dist)
            for m, prob in enumerate(dist.probs):
                rows.append((int(n), spec.max_bins, m, prob, fid))
    cols = list(zip(*rows))
    names = ("n_photons", "n_units", "m_clicks", "probability", "fidelity")
    return ResultTable(
        {name: np.array(col, dtype=float) for name, col in zip(names, cols)},
        _metadata(config, {"scheme": p["scheme"], "eta": eta}),
    )


def run_deadtime_rate(config: ExperimentConfig) -> ResultTable:
    p = config.parameters
    model = DeadTimeModel(eta_eff=float(p["eta"]), tau_dead=float(p["tau_dead"]))
    window = float(p["window"])
    dark = float(p["dark_rate"])
    rows = []
    for i, rate in enumerate(p["rates"]):
        rate = float(rate)
        arrivals = temporal.poisson_arrivals(rate, window, seed=config.seed + 2 * i)
        clicks = temporal.simulate_clicks(
            arrivals, model, dark_rate=dark, window=window, seed=config.seed + 2 * i + 1
        )
        rows.append(
            (
                rate,
                len(clicks) / window,
                temporal.expected_observed_rate(rate, model, dark),
                temporal.observed_rate_std_error(rate, model, window, dark),
            )
        )
    cols = list(zip(*rows))
    names = ("true_rate", "observed_rate", "expected_rate", "std_error")
    return ResultTable(
        {name: np.array(col) for name, col in zip(names, cols)},
        _metadata(config, {"window": window, "tau_dead": model.tau_dead}),
    )


def run_darkcount_table(config: ExperimentConfig) -> ResultTable:
    p = config.parameters
    n_max = int(p["n_max"])
    spec = DetectorSpec(eta_eff=float(p["eta"]), r_dark=float(p["r_dark"]))
    p_dc = dark_count_probs(spec, k_max=n_max, n_max=n_max)
    signature = int(p["signature_n"])
    rho = fock_state(int(p["input_n"]), n_max + 1)
    rho_p = loss_channel(rho, spec.eta_eff)
    # mixture weights of the signature-n outcome: the wanted term i = n plus
    # one false-positive term per i < n, zero-padded above the signature
    weights = np.zeros(n_max + 1)
    weights[signature] = rho_p.data[signature, signature].real
    for i in range(signature):
        weights[i] = p_dc[signature - i] * rho_p.data[i, i].real
    return ResultTable(
        {
            "k": np.arange(n_max + 1, dtype=float),
            "p_dc": p_dc,
            "mixture_weight": weights,
        },
        _metadata(config, {"signature_n": signature, "outcome_weight": float(weights.sum())}),
    )


_RUNNERS = {
    "hom-dip": run_hom_dip,
    "spdc-herald": run_spdc_herald,
    "multiplex-fidelity": run_multiplex_fidelity,
    "deadtime-rate": run_deadtime_rate,
    "darkcount-table": run_darkcount_table,
}


# ---------------------------------------------------------------------------
# argument handling


def _parse_param(text: str):
    if "=" not in text:
        raise ParameterError(f"--param expects key=value, got {text!r}")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="photodetect-sim",
        description="Detector-model experiment runner emitting CSV tables.",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        sp = sub.add_parser(name, help=f"run the {name} experiment")
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--seed", type=int, default=None, help="override the seed")
        sp.add_argument("--out", default=None, help="output CSV path")
        sp.add_argument(
            "--param",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a single parameter (repeatable)",
        )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        file_cfg = None
        if args.config:
            try:
                with open(args.config) as fh:
                    file_cfg = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise ParameterError(f"cannot read config {args.config}: {exc}")
        overrides = dict(_parse_param(item) for item in args.param)
        config = build_config(args.experiment, file_cfg, overrides, args.seed, args.out)
    except ParameterError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        table = _RUNNERS[config.experiment](config)
    except ParameterError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ModelError, FloatingPointError) as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return 3
    out = config.output_path
    if out is None:
        out = os.path.join(
            os.environ.get(ENV_OUTDIR, "."), f"{config.experiment}.csv"
        )
    table.write_csv(out)
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
