"""Truncated photon-number-basis states, channels and measurements.

States live on |0..n_max> for one mode or |m>|n> (row index m*dim + n) for
two.  Measurement outputs are returned unnormalized together with their
outcome probability; ``normalize`` is a separate operation.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ModelConsistencyWarning, ParameterError, TruncationError

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
SUPPORT_TOL = 1e-12


class FockDensityMatrix:
    """Density matrix over the truncated photon-number basis.

    data[m, n] = <m|rho|n> for a single mode; for two modes rows and columns
    are indexed m*dim + n.  Sub-normalized states (trace < 1) are allowed;
    trace above 1, loss of hermiticity or negative eigenvalues are rejected.
    """

    __slots__ = ("data", "dim", "modes")

    def __init__(self, data, modes=1, validate=True):
        data = np.asarray(data, dtype=np.complex128)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise ParameterError("density matrix must be square")
        if modes not in (1, 2):
            raise ParameterError("modes must be 1 or 2")
        side = data.shape[0]
        if modes == 1:
            dim = side
        else:
            dim = math.isqrt(side)
            if dim * dim != side:
                raise ParameterError(
                    f"two-mode matrix side {side} is not a perfect square"
                )
        if dim < 1:
            raise ParameterError("cutoff must allow at least the vacuum")
        self.data = data
        self.dim = dim
        self.modes = modes
        if validate:
            self.validate()

    def validate(self):
        herm = np.abs(self.data - self.data.conj().T).max()
        if herm > HERMITICITY_TOL:
            raise ParameterError(f"not Hermitian: max asymmetry {herm:.3e}")
        tr = self.data.trace()
        if abs(tr.imag) > TRACE_TOL:
            raise ParameterError(f"trace has imaginary part {tr.imag:.3e}")
        if tr.real < -TRACE_TOL or tr.real > 1.0 + TRACE_TOL:
            raise ParameterError(f"trace {tr.real!r} outside [0, 1]")
        w = np.linalg.eigvalsh(0.5 * (self.data + self.data.conj().T))
        if w[0] < -PSD_TOL:
            raise ParameterError(f"not positive semidefinite: min eig {w[0]:.3e}")

    @property
    def trace(self) -> float:
        return float(self.data.trace().real)

    def normalized(self) -> "FockDensityMatrix":
        return normalize(self)

    def __repr__(self):
        return (
            f"FockDensityMatrix(dim={self.dim}, modes={self.modes}, "
            f"trace={self.trace:.6g})"
        )


@dataclass(frozen=True)
class ThermalSource:
    """Diagonal photon-number mixture with geometric weights tanh(r)**n."""

    r: float
    n_max: int

    def __post_init__(self):
        if self.r < 0:
            raise ParameterError("thermal parameter r must be >= 0")
        if self.n_max < 0:
            raise ParameterError("n_max must be >= 0")

    def weights(self) -> np.ndarray:
        """Truncated geometric weights, renormalized to sum to 1."""
        w = np.tanh(self.r) ** np.arange(self.n_max + 1, dtype=float)
        return w / w.sum()

    def mean_photon_number(self) -> float:
        """Mean photon number of the truncated, renormalized distribution."""
        w = self.weights()
        return float(np.arange(self.n_max + 1) @ w)


@dataclass(frozen=True)
class DetectorSpec:
    """Bundle of detector imperfection parameters.

    eta_eff: quantum efficiency; r_dark: thermal dark-count parameter;
    tau_dead: dead-time in seconds; omega0_macro / Delta: macroscopic
    spectral window centre and half-width (rad/s); delta: microscopic
    resolution half-width (rad/s).
    """

    eta_eff: float = 1.0
    r_dark: float = 0.0
    tau_dead: float = 0.0
    omega0_macro: float = 0.0
    Delta: float = math.inf
    delta: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.eta_eff <= 1.0:
            raise ParameterError("eta_eff must lie in [0, 1]")
        if self.r_dark < 0:
            raise ParameterError("r_dark must be >= 0")
        if self.tau_dead < 0:
            raise ParameterError("tau_dead must be >= 0")
        if self.Delta < 0:
            raise ParameterError("Delta must be >= 0")
        if self.delta < 0:
            raise ParameterError("delta must be >= 0")


# ---------------------------------------------------------------------------
# state constructors


def fock_state(n: int, dim: int) -> FockDensityMatrix:
    """|n><n| on a dim-dimensional single mode."""
    if not 0 <= n < dim:
        raise ParameterError(f"n={n} outside basis 0..{dim - 1}")
    data = np.zeros((dim, dim), dtype=np.complex128)
    data[n, n] = 1.0
    return FockDensityMatrix(data)


def pure_state(amplitudes) -> FockDensityMatrix:
    """Single-mode density matrix of a (normalized) amplitude vector."""
    v = np.asarray(amplitudes, dtype=np.complex128)
    return FockDensityMatrix(np.outer(v, v.conj()))


def two_mode_pure(coefficients) -> FockDensityMatrix:
    """Two-mode density matrix from coefficients c[m, n] on |m>|n>."""
    c = np.asarray(coefficients, dtype=np.complex128)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ParameterError("coefficient matrix must be square")
    v = c.ravel()
    return FockDensityMatrix(np.outer(v, v.conj()), modes=2)


def tensor(rho_a: FockDensityMatrix, rho_b: FockDensityMatrix) -> FockDensityMatrix:
    """Two-mode product state rho_a (x) rho_b; both modes share one cutoff."""
    if rho_a.modes != 1 or rho_b.modes != 1:
        raise ParameterError("tensor expects two single-mode states")
    if rho_a.dim != rho_b.dim:
        raise ParameterError("tensor factors must share the same cutoff")
    return FockDensityMatrix(np.kron(rho_a.data, rho_b.data), modes=2)


def partial_trace(rho2: FockDensityMatrix, keep: int) -> FockDensityMatrix:
    """Trace out one mode of a two-mode state (keep=0 first, keep=1 second)."""
    if rho2.modes != 2:
        raise ParameterError("partial_trace expects a two-mode state")
    d = rho2.dim
    t = rho2.data.reshape(d, d, d, d)
    if keep == 0:
        out = np.einsum("mnpn->mp", t)
    elif keep == 1:
        out = np.einsum("mnmq->nq", t)
    else:
        raise ParameterError("keep must be 0 or 1")
    return FockDensityMatrix(out)


# ---------------------------------------------------------------------------
# projectors and measurements


def number_projector(n: int, dim: int) -> np.ndarray:
    """Projector |n><n| as a dim x dim matrix."""
    if not 0 <= n < dim:
        raise ParameterError(f"n={n} outside basis 0..{dim - 1}")
    p = np.zeros((dim, dim), dtype=np.complex128)
    p[n, n] = 1.0
    return p


def project_number(rho: FockDensityMatrix, n: int):
    """Pi_n rho Pi_n and its trace (the outcome probability)."""
    _require_single_mode(rho)
    if not 0 <= n < rho.dim:
        raise ParameterError(f"n={n} outside basis 0..{rho.dim - 1}")
    out = np.zeros_like(rho.data)
    out[n, n] = rho.data[n, n]
    prob = float(rho.data[n, n].real)
    return FockDensityMatrix(out), prob


def project_click(rho: FockDensityMatrix):
    """Sum of Pi_n rho Pi_n over n >= 1 (bucket-detector click outcome)."""
    _require_single_mode(rho)
    diag = np.diag(rho.data).copy()
    diag[0] = 0.0
    prob = float(diag.sum().real)
    return FockDensityMatrix(np.diag(diag)), prob


def project_no_click(rho: FockDensityMatrix):
    """Pi_0 rho Pi_0 (bucket-detector no-click outcome)."""
    _require_single_mode(rho)
    out = np.zeros_like(rho.data)
    out[0, 0] = rho.data[0, 0]
    return FockDensityMatrix(out), float(rho.data[0, 0].real)


def normalize(rho: FockDensityMatrix) -> FockDensityMatrix:
    """rho / tr(rho)."""
    tr = rho.trace
    if tr <= 0.0:
        raise ParameterError("cannot normalize a trace-zero state")
    return FockDensityMatrix(rho.data / tr, modes=rho.modes)


# ---------------------------------------------------------------------------
# beamsplitter and loss channel

_BS_CACHE: dict = {}


def beamsplitter_matrix(dim: int, eta: float) -> np.ndarray:
    """Two-mode beamsplitter unitary with transmissivity eta (real matrix).

    Sign convention: transmitted amplitudes sqrt(eta) real positive, the
    reflection of mode a carries the minus sign, so that at eta=1/2 two
    single photons bunch into (|2,0> - |0,2>)/sqrt(2).
    """
    _check_eta(eta)
    if dim < 1:
        raise ParameterError("dim must be >= 1")
    key = (dim, float(eta))
    u = _BS_CACHE.get(key)
    if u is None:
        u = _kernels.bs_matrix(dim, math.sqrt(eta), math.sqrt(1.0 - eta))
        u.setflags(write=False)
        _BS_CACHE[key] = u
    return u


def beamsplitter_two_mode(rho2: FockDensityMatrix, eta: float) -> FockDensityMatrix:
    """Apply the eta-transmissivity beamsplitter to a two-mode state."""
    if rho2.modes != 2:
        raise ParameterError("beamsplitter_two_mode expects a two-mode state")
    _check_eta(eta)
    d = rho2.dim
    totals = (np.arange(d)[:, None] + np.arange(d)[None, :]).ravel()
    over = totals > d - 1
    if over.any():
        spill = max(
            np.abs(rho2.data[over, :]).max(initial=0.0),
            np.abs(rho2.data[:, over]).max(initial=0.0),
        )
        if spill > SUPPORT_TOL:
            raise TruncationError(
                "input has support on total photon number above the cutoff "
                f"(max amplitude {spill:.3e}); raise n_max"
            )
    u = beamsplitter_matrix(d, eta)
    return FockDensityMatrix(u @ rho2.data @ u.T, modes=2)


def loss_channel(rho: FockDensityMatrix, eta: float) -> FockDensityMatrix:
    """Finite-efficiency channel: beamsplitter to vacuum, reflected mode traced.

    Equals the explicit two-mode dilation; diagonal inputs map through the
    binomial kernel P(k|n) = C(n,k) eta**k (1-eta)**(n-k).
    """
    _require_single_mode(rho)
    _check_eta(eta)
    d = rho.dim
    out = np.zeros_like(rho.data)
    for k in range(d):
        c = np.array(
            [
                math.sqrt(math.comb(n, k) * eta ** (n - k) * (1.0 - eta) ** k)
                for n in range(k, d)
            ]
        )
        out[: d - k, : d - k] += np.outer(c, c) * rho.data[k:, k:]
    return FockDensityMatrix(out)


# ---------------------------------------------------------------------------
# thermal source and dark counts


def thermal_state(source: ThermalSource) -> FockDensityMatrix:
    """Diagonal thermal state with renormalized truncated geometric weights."""
    return FockDensityMatrix(np.diag(source.weights()).astype(np.complex128))


def dark_count_probs(spec: DetectorSpec, k_max: int, n_max: int | None = None) -> np.ndarray:
    """Probability of k dark counts, k = 0..k_max.

    k of the n thermal photons entering the unused beamsplitter port exit
    into the detector arm, each with probability (1 - eta_eff).  The thermal
    series is truncated at n_max and renormalized like ``thermal_state``.
    """
    if k_max < 0:
        raise ParameterError("k_max must be >= 0")
    if n_max is None:
        n_max = k_max
    if n_max < 0:
        raise ParameterError("n_max must be >= 0")
    eta = spec.eta_eff
    th = math.tanh(spec.r_dark)
    weights = th ** np.arange(n_max + 1, dtype=float)
    z = weights.sum()
    probs = np.zeros(k_max + 1)
    for k in range(min(k_max, n_max) + 1):
        series = sum(
            math.comb(n, k) * weights[n] * eta ** (n - k) for n in range(k, n_max + 1)
        )
        probs[k] = (1.0 - eta) ** k * series / z
    total = probs.sum()
    if k_max >= n_max and total > 1.0 + 1e-6:
        warnings.warn(
            f"dark-count probabilities sum to {total!r} > 1 at full cutoff",
            ModelConsistencyWarning,
        )
    return probs


def measure_with_dark_counts(
    rho: FockDensityMatrix, spec: DetectorSpec, n: int
) -> FockDensityMatrix:
    """Unnormalized state after reading signature n on a dark-count detector.

    rho' = loss_channel(rho, eta); output = Pi_n rho' Pi_n plus, for each
    i < n, p_dc(n-i) Pi_i rho' Pi_i.
    """
    _require_single_mode(rho)
    if not 0 <= n < rho.dim:
        raise ParameterError(f"n={n} outside basis 0..{rho.dim - 1}")
    rho_p = loss_channel(rho, spec.eta_eff)
    p_dc = dark_count_probs(spec, k_max=rho.dim - 1, n_max=rho.dim - 1)
    out = np.zeros_like(rho_p.data)
    out[n, n] = rho_p.data[n, n]
    for i in range(n):
        out[i, i] += p_dc[n - i] * rho_p.data[i, i]
    return FockDensityMatrix(out)


# ---------------------------------------------------------------------------


def _require_single_mode(rho: FockDensityMatrix):
    if rho.modes != 1:
        raise ParameterError("operation expects a single-mode state")


def _check_eta(eta: float):
    if not 0.0 <= eta <= 1.0:
        raise ParameterError(f"transmissivity eta={eta!r} outside [0, 1]")
