"""Click-count statistics of multiplexed photon counting.

Two schemes approximate number resolution with bucket detectors: a splitter
cascade spreading the input over N ports, and a fiber-loop scheme spreading
it over time bins.  Photons are routed independently (classical multinomial
model); a unit clicks when at least one of its photons survives the
per-photon efficiency.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import EnumerationLimitError, ParameterError

_ORACLE_MAX_PHOTONS = 6
_ORACLE_MAX_PORTS = 8


@dataclass(frozen=True)
class NPortSpec:
    """Uniform N-port cascade: each photon lands in any port with prob 1/N."""

    n_ports: int
    eta: float = 1.0

    def __post_init__(self):
        if self.n_ports < 1:
            raise ParameterError("n_ports must be >= 1")
        if not 0.0 <= self.eta <= 1.0:
            raise ParameterError("eta must lie in [0, 1]")


@dataclass(frozen=True)
class TdmSpec:
    """Fiber-loop time-division multiplexing parameters.

    p_couple: per-round-trip out-coupling probability; loop_loss: per-round-
    trip survival probability; max_bins: truncation of the bin ladder; eta:
    detector efficiency.
    """

    p_couple: float
    loop_loss: float = 1.0
    max_bins: int = 20
    eta: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.p_couple <= 1.0:
            raise ParameterError("p_couple must lie in (0, 1]")
        if not 0.0 < self.loop_loss <= 1.0:
            raise ParameterError("loop_loss must lie in (0, 1]")
        if self.max_bins < 1:
            raise ParameterError("max_bins must be >= 1")
        if not 0.0 <= self.eta <= 1.0:
            raise ParameterError("eta must lie in [0, 1]")


@dataclass(frozen=True)
class ClickDistribution:
    """P(m clicks) for m = 0..n_photons plus the per-photon miss probability."""

    probs: np.ndarray
    loss_mass: float

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        object.__setattr__(self, "probs", probs)
        if probs.min(initial=0.0) < -1e-12:
            raise ParameterError("negative click probability")
        if abs(probs.sum() - 1.0) > 1e-12:
            raise ParameterError(f"click probabilities sum to {probs.sum()!r}")


def _binomial_pmf(n: int, p: float) -> np.ndarray:
    return np.array(
        [math.comb(n, s) * p ** s * (1.0 - p) ** (n - s) for s in range(n + 1)]
    )


def nport_click_distribution(n_photons: int, spec: NPortSpec) -> ClickDistribution:
    """Exact click-count distribution for n photons on a uniform N-port.

    Photons are thinned by eta independently; survivors are thrown uniformly
    into N ports and the click count is the number of distinct occupied
    ports (occupancy recursion, exact in float).
    """
    if n_photons < 0:
        raise ParameterError("n_photons must be >= 0")
    n, nports = n_photons, spec.n_ports
    surv = _binomial_pmf(n, spec.eta)
    occ = np.zeros((n + 1, n + 1))
    occ[0, 0] = 1.0
    for s in range(1, n + 1):
        for m in range(1, min(s, nports) + 1):
            occ[s, m] = occ[s - 1, m] * (m / nports) + occ[s - 1, m - 1] * (
                (nports - m + 1) / nports
            )
    return ClickDistribution(surv @ occ, loss_mass=1.0 - spec.eta)


def nport_oracle(n_photons: int, spec: NPortSpec) -> ClickDistribution:
    """Exhaustive enumeration over all N**n routings and 2**n survival masks.

    Independent verification path for ``nport_click_distribution``; limited
    to n <= 6 photons and N <= 8 ports.
    """
    if n_photons < 0:
        raise ParameterError("n_photons must be >= 0")
    if n_photons > _ORACLE_MAX_PHOTONS or spec.n_ports > _ORACLE_MAX_PORTS:
        raise EnumerationLimitError(
            f"oracle supports n <= {_ORACLE_MAX_PHOTONS}, N <= {_ORACLE_MAX_PORTS}"
        )
    probs = _kernels.nport_enumerate(n_photons, spec.n_ports, spec.eta)
    return ClickDistribution(probs, loss_mass=1.0 - spec.eta)


def tdm_bin_probabilities(spec: TdmSpec):
    """P(photon couples out in bin k), k = 1..max_bins, plus the residual.

    P(k) = loop_loss**k * (1 - p_couple)**(k-1) * p_couple; the residual
    (lost in the loop or still circulating after max_bins) is returned
    separately, never renormalized away.
    """
    k = np.arange(1, spec.max_bins + 1, dtype=float)
    probs = spec.loop_loss ** k * (1.0 - spec.p_couple) ** (k - 1) * spec.p_couple
    return probs, float(1.0 - probs.sum())


def tdm_click_distribution(
    n_photons: int,
    spec: TdmSpec,
    tau_dead: float = 0.0,
    round_trip_time: float | None = None,
) -> ClickDistribution:
    """Click-count distribution for n photons through the fiber-loop scheme.

    Photons land in bins independently per ``tdm_bin_probabilities``; a bin
    clicks when at least one of its photons survives eta (same collision
    semantics as the N-port).  With tau_dead > 0 and a round-trip time, the
    ceil(tau_dead / round_trip_time) - 1 bins after each click are blanked:
    photons arriving there are absorbed without a click.
    """
    if n_photons < 0:
        raise ParameterError("n_photons must be >= 0")
    bins, _residual = tdm_bin_probabilities(spec)
    blanked = 0
    if tau_dead > 0.0:
        if round_trip_time is None or round_trip_time <= 0.0:
            raise ParameterError("tau_dead > 0 requires a positive round_trip_time")
        blanked = max(0, math.ceil(tau_dead / round_trip_time) - 1)
    elif tau_dead < 0.0:
        raise ParameterError("tau_dead must be >= 0")

    n = n_photons
    eta = spec.eta
    # DP over (photons not yet assigned, cooldown bins remaining) holding a
    # probability vector over click counts; bins processed in arrival order
    # with conditional landing probabilities.
    start = np.zeros(n + 1)
    start[0] = 1.0
    states = {(n, 0): start}
    mass_left = 1.0
    for pb in bins:
        if mass_left <= 0.0:
            break
        cond = min(pb / mass_left, 1.0)
        new: dict = {}
        for (r, c), dist in states.items():
            for j in range(r + 1):
                w = math.comb(r, j) * cond ** j * (1.0 - cond) ** (r - j)
                if w == 0.0:
                    continue
                if c > 0:
                    _accumulate(new, (r - j, c - 1), dist * w, shift=0)
                    continue
                p_click = 1.0 - (1.0 - eta) ** j if j > 0 else 0.0
                if p_click > 0.0:
                    _accumulate(new, (r - j, blanked), dist * (w * p_click), shift=1)
                if p_click < 1.0:
                    _accumulate(new, (r - j, 0), dist * (w * (1.0 - p_click)), shift=0)
        states = new
        mass_left -= pb
    probs = np.zeros(n + 1)
    for dist in states.values():
        probs += dist
    detect_per_photon = eta * float(bins.sum())
    return ClickDistribution(probs, loss_mass=1.0 - detect_per_photon)


def _accumulate(table: dict, key, dist: np.ndarray, shift: int):
    if shift:
        shifted = np.zeros_like(dist)
        shifted[shift:] = dist[:-shift]
        dist = shifted
    if key in table:
        table[key] = table[key] + dist
    else:
        table[key] = dist


def resolution_fidelity(n_photons: int, distribution: ClickDistribution) -> float:
    """P(click count equals the true photon number)."""
    if n_photons < 0 or n_photons >= distribution.probs.size:
        raise ParameterError("n_photons outside the distribution support")
    return float(distribution.probs[n_photons])
