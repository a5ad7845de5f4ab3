"""Dead-time gating and seeded click-stream Monte Carlo.

The detector efficiency is an inverted top-hat in time: eta_eff before any
click, zero for tau_dead after a click, eta_eff again afterwards
(non-paralyzable: blocked events do not extend the dead window).  Dark
events are a Poisson process passed through the same gate.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ParameterError


@dataclass(frozen=True)
class DeadTimeModel:
    eta_eff: float = 1.0
    tau_dead: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.eta_eff <= 1.0:
            raise ParameterError("eta_eff must lie in [0, 1]")
        if self.tau_dead < 0.0:
            raise ParameterError("tau_dead must be >= 0")


class ClickStream:
    """Strictly increasing, non-negative event times in seconds."""

    __slots__ = ("times",)

    def __init__(self, times):
        t = np.asarray(times, dtype=np.float64).reshape(-1)
        if t.size and t[0] < 0.0:
            raise ParameterError("event times must be >= 0")
        if t.size and not np.all(np.diff(t) > 0.0):
            raise ParameterError("event times must be strictly increasing")
        t.setflags(write=False)
        self.times = t

    def __len__(self):
        return self.times.size

    def __repr__(self):
        return f"ClickStream(n={len(self)})"


def eta_of_t(model: DeadTimeModel, t: float, last_click: float | None = None) -> float:
    """Time-dependent efficiency: 0 inside the dead window, eta_eff outside."""
    if t < 0.0:
        raise ParameterError("t must be >= 0")
    if last_click is None:
        return model.eta_eff
    dt = t - last_click
    if 0.0 <= dt < model.tau_dead:
        return 0.0
    return model.eta_eff


def poisson_arrivals(rate: float, window: float, seed: int) -> ClickStream:
    """Homogeneous Poisson sample on [0, window], deterministic given seed."""
    if rate < 0.0:
        raise ParameterError("rate must be >= 0")
    if window <= 0.0:
        raise ParameterError("window must be > 0")
    rng = np.random.default_rng(seed)
    n = rng.poisson(rate * window)
    times = np.sort(rng.uniform(0.0, window, n))
    if times.size:
        keep = np.concatenate(([True], np.diff(times) > 0.0))
        times = times[keep]
    return ClickStream(times)


def simulate_clicks(
    arrivals: ClickStream,
    model: DeadTimeModel,
    dark_rate: float = 0.0,
    window: float = 1.0,
    seed: int = 0,
) -> ClickStream:
    """Gate photon arrivals plus Poisson dark events through the dead-time model.

    Dark events are drawn first from the seeded generator, then one uniform
    per merged candidate; candidate i clicks when it falls outside the dead
    window of the previous click and its uniform is below eta_eff.  Output
    is deterministic given the seed and identical across backends.
    """
    if dark_rate < 0.0:
        raise ParameterError("dark_rate must be >= 0")
    if window <= 0.0:
        raise ParameterError("window must be > 0")
    t = arrivals.times
    if t.size and (t[0] < 0.0 or t[-1] > window):
        raise ParameterError("arrivals must lie within [0, window]")
    rng = np.random.default_rng(seed)
    n_dark = rng.poisson(dark_rate * window)
    darks = rng.uniform(0.0, window, n_dark)
    merged = np.sort(np.concatenate((t, darks)))
    if merged.size:
        keep = np.concatenate(([True], np.diff(merged) > 0.0))
        merged = merged[keep]
    uniforms = rng.uniform(size=merged.size)
    accept = _kernels.deadtime_scan(merged, uniforms, model.eta_eff, model.tau_dead)
    return ClickStream(merged[accept])


def expected_observed_rate(
    true_rate: float, model: DeadTimeModel, dark_rate: float = 0.0
) -> float:
    """Long-run click rate of the gated process.

    The eta-thinned merged Poisson stream has rate lam = eta*(R + dark); one
    click per renewal cycle of mean length 1/lam + tau_dead gives
    lam / (1 + lam*tau_dead).
    """
    lam = model.eta_eff * (true_rate + dark_rate)
    return lam / (1.0 + lam * model.tau_dead)


def observed_rate_std_error(
    true_rate: float, model: DeadTimeModel, window: float, dark_rate: float = 0.0
) -> float:
    """Renewal-CLT standard error of the measured rate over one window.

    Inter-click times are tau_dead + Exp(1/lam): mean mu = 1/lam + tau_dead,
    std sigma = 1/lam; the count variance over window T is T*sigma^2/mu^3.
    """
    lam = model.eta_eff * (true_rate + dark_rate)
    if lam <= 0.0:
        return 0.0
    mu = 1.0 / lam + model.tau_dead
    sigma2 = 1.0 / lam ** 2
    return float(np.sqrt(sigma2 / (window * mu ** 3)))


def save_click_stream(stream: ClickStream, path) -> None:
    """One event time per line, 12 significant digits."""
    with open(path, "w") as fh:
        for t in stream.times:
            fh.write(f"{t:.11e}\n")


def load_click_stream(path) -> ClickStream:
    with open(path) as fh:
        text = fh.read().split()
    return ClickStream(np.array([float(v) for v in text], dtype=np.float64))
