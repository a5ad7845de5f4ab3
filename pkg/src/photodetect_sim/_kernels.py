"""Hot numeric kernels, each in a numba build and a pure-numpy fallback.

The dispatching wrappers (``bs_matrix``, ``deadtime_scan``,
``conditioned_density``, ``nport_enumerate``) honour the backend flag; the
per-backend builds are module attributes so they can be compared and timed
directly.  The two sequential kernels (beamsplitter build, dead-time scan)
fall back to plain python loops; the other two have vectorized numpy paths.
"""

import math

import numpy as np

from . import backend

if backend.NUMBA_AVAILABLE:
    from numba import njit
else:  # pragma: no cover - depends on environment
    njit = None


# ---------------------------------------------------------------------------
# two-mode beamsplitter matrix over the photon-number basis

def _bs_matrix_loops(dim, t, r):
    # <k,l|U|m,n> on total-photon-conserving blocks, mode map
    # a+ -> t a+ - r b+ , b+ -> r a+ + t b+ (t, r real non-negative).
    # Blocks with m+n > dim-1 cannot be represented in the per-mode
    # truncation; they get identity rows and callers must reject states
    # with support there.
    d2 = dim * dim
    u = np.zeros((d2, d2))
    for m in range(dim):
        for n in range(dim):
            tot = m + n
            col = m * dim + n
            if tot > dim - 1:
                u[col, col] = 1.0
                continue
            lg_mn = math.lgamma(m + 1) + math.lgamma(n + 1)
            for k in range(tot + 1):
                ll = tot - k
                half = 0.5 * (math.lgamma(k + 1) + math.lgamma(ll + 1) - lg_mn)
                ilo = k - n if k - n > 0 else 0
                ihi = m if m < k else k
                acc = 0.0
                for i in range(ilo, ihi + 1):
                    j = k - i
                    logmag = (
                        math.lgamma(m + 1)
                        - math.lgamma(i + 1)
                        - math.lgamma(m - i + 1)
                        + math.lgamma(n + 1)
                        - math.lgamma(j + 1)
                        - math.lgamma(n - j + 1)
                        + half
                    )
                    term = math.exp(logmag) * t ** (i + n - j) * r ** (m - i + j)
                    if (m - i) % 2 == 1:
                        term = -term
                    acc += term
                u[k * dim + ll, col] = acc
    return u


# ---------------------------------------------------------------------------
# sequential dead-time gate over a merged candidate-event stream

def _deadtime_scan_loops(times, uniforms, eta_eff, tau_dead):
    # One pre-drawn uniform per candidate keeps the accept pattern identical
    # across backends; blocked candidates skip their draw but still own it.
    n = times.shape[0]
    accept = np.zeros(n, np.bool_)
    last = -np.inf
    for i in range(n):
        if times[i] - last < tau_dead:
            continue
        if uniforms[i] < eta_eff:
            accept[i] = True
            last = times[i]
    return accept


# ---------------------------------------------------------------------------
# incoherent accumulation of windowed conditional states
#
# weights: (n_sel, n1) real sqrt-efficiency rows, one per readout node
# psi:     (n1, n2) complex joint amplitude
# returns rho[x, y] = sum_a phi_a(x) conj(phi_a(y)) * d0 * d2
# with phi_a = (weights[a] @ psi) * d1

def _conditioned_density_loops(weights, psi, d1, d0, d2):
    n_sel, n1 = weights.shape
    n2 = psi.shape[1]
    rho = np.zeros((n2, n2), np.complex128)
    phi = np.zeros(n2, np.complex128)
    scale = d0 * d2
    for a in range(n_sel):
        for j in range(n2):
            acc = 0.0 + 0.0j
            for i in range(n1):
                w = weights[a, i]
                if w != 0.0:
                    acc = acc + w * psi[i, j]
            phi[j] = acc * d1
        for x in range(n2):
            px = phi[x] * scale
            for y in range(n2):
                rho[x, y] += px * np.conj(phi[y])
    return rho


def _conditioned_density_numpy(weights, psi, d1, d0, d2):
    phi = (weights @ psi) * d1
    return (phi.T @ phi.conj()) * (d0 * d2)


# ---------------------------------------------------------------------------
# exhaustive N-port enumeration: all N**n routings x all 2**n survival masks

def _nport_enumerate_loops(n, nports, eta):
    # exact integer tally of (survivors, clicks) over every routing x mask,
    # weighted at the end: keeps float error at the 1e-15 level instead of
    # accumulating over N**n * 2**n tiny additions
    probs = np.zeros(n + 1)
    if n == 0:
        probs[0] = 1.0
        return probs
    counts = np.zeros((n + 1, n + 1), np.int64)
    total = nports ** n
    routing = np.zeros(n, np.int64)
    for ridx in range(total):
        x = ridx
        for p in range(n):
            routing[p] = x % nports
            x //= nports
        for mask in range(1 << n):
            s = 0
            occupied = 0
            for p in range(n):
                if (mask >> p) & 1:
                    s += 1
                    occupied |= 1 << routing[p]
            m = 0
            while occupied:
                m += occupied & 1
                occupied >>= 1
            counts[s, m] += 1
    route_w = 1.0 / total
    for s in range(n + 1):
        w = eta ** s * (1.0 - eta) ** (n - s) * route_w
        if w != 0.0:
            for m in range(n + 1):
                if counts[s, m] != 0:
                    probs[m] += counts[s, m] * w
    return probs


_POPCOUNT8 = np.array([bin(v).count("1") for v in range(256)], dtype=np.int64)


def _nport_enumerate_numpy(n, nports, eta):
    probs = np.zeros(n + 1)
    if n == 0:
        probs[0] = 1.0
        return probs
    routings = np.indices((nports,) * n).reshape(n, -1)
    port_bits = np.left_shift(1, routings)
    counts = np.zeros((n + 1, n + 1), np.int64)
    for mask in range(1 << n):
        alive = [p for p in range(n) if (mask >> p) & 1]
        s = len(alive)
        if s == 0:
            counts[0, 0] += port_bits.shape[1]
            continue
        occupied = np.bitwise_or.reduce(port_bits[alive, :], axis=0)
        clicks = _POPCOUNT8[occupied]
        tally = np.bincount(clicks, minlength=n + 1)
        counts[s] += tally[: n + 1]
    route_w = 1.0 / nports ** n
    for s in range(n + 1):
        w = eta ** s * (1.0 - eta) ** (n - s) * route_w
        if w != 0.0:
            probs += counts[s] * w
    return probs


# ---------------------------------------------------------------------------
# backend wiring

_bs_matrix_numpy = _bs_matrix_loops
_deadtime_scan_numpy = _deadtime_scan_loops

if backend.NUMBA_AVAILABLE:
    _bs_matrix_numba = njit(cache=True)(_bs_matrix_loops)
    _deadtime_scan_numba = njit(cache=True)(_deadtime_scan_loops)
    _conditioned_density_numba = njit(cache=True)(_conditioned_density_loops)
    _nport_enumerate_numba = njit(cache=True)(_nport_enumerate_loops)
else:  # pragma: no cover - depends on environment
    _bs_matrix_numba = None
    _deadtime_scan_numba = None
    _conditioned_density_numba = None
    _nport_enumerate_numba = None


def bs_matrix(dim, t, r):
    if backend.USE_NUMBA:
        return _bs_matrix_numba(dim, t, r)
    return _bs_matrix_numpy(dim, t, r)


def deadtime_scan(times, uniforms, eta_eff, tau_dead):
    if backend.USE_NUMBA:
        return _deadtime_scan_numba(times, uniforms, eta_eff, tau_dead)
    return _deadtime_scan_numpy(times, uniforms, eta_eff, tau_dead)


def conditioned_density(weights, psi, d1, d0, d2):
    if backend.USE_NUMBA:
        return _conditioned_density_numba(weights, psi, d1, d0, d2)
    return _conditioned_density_numpy(weights, psi, d1, d0, d2)


def nport_enumerate(n, nports, eta):
    if backend.USE_NUMBA:
        return _nport_enumerate_numba(n, nports, eta)
    return _nport_enumerate_numpy(n, nports, eta)


#: kernel name -> (numba build or None, numpy build); used by the benchmark
PAIRS = {
    "bs_matrix": (_bs_matrix_numba, _bs_matrix_numpy),
    "deadtime_scan": (_deadtime_scan_numba, _deadtime_scan_numpy),
    "conditioned_density": (_conditioned_density_numba, _conditioned_density_numpy),
    "nport_enumerate": (_nport_enumerate_numba, _nport_enumerate_numpy),
}
