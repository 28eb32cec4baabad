# src/wavepacket/services.py
import logging
from typing import Optional

import numpy as np

from signal_core.grids import SampledSignal
from signal_core.services import DEFAULT_PAD_FACTOR, spectrum
from varcarleson.partitions import LinearizationData
from varcarleson.services import linearized_form
from .exceptions import GridMismatchError, OrderingError, ScaleError
from .params import WavePacketParams, chi, packet_normalization, psi_hat, smooth_step_down
from .tiles import Tile, TileField, TileGrid, TileRegion

logger = logging.getLogger(__name__)

# packets are treated as negligible beyond this many scales from their center
PACKET_REACH = 16.0
QUADRATURE_NODES = 256
TAIL_SAMPLING_SLACK = 1.01
ROW_CHUNK = 128


def packet_pad_factor(length: float, t: float, base: int = DEFAULT_PAD_FACTOR) -> int:
    """Power-of-two zero padding keeping a scale-t packet clear of wrap-around"""
    needed = max(float(base), (length + 2.0 * PACKET_REACH * t) / length)
    return int(2 ** np.ceil(np.log2(needed)))


def _check_scale(f: SampledSignal, t: float):
    if t < 2.0 * f.spacing:
        raise ScaleError(f"Scale t={t:g} is below twice the sample spacing {f.spacing:g}")


def psi_values(x, params: WavePacketParams) -> np.ndarray:
    """psi(x) = (1/pi) int_0^{b/2} psi^(zeta) cos(x zeta) d zeta by Gauss-Legendre quadrature"""
    nodes, weights = np.polynomial.legendre.leggauss(QUADRATURE_NODES)
    half = params.b / 2.0
    zeta = half * (nodes + 1.0) / 2.0
    weighted = psi_hat(zeta, params) * weights * half / 2.0
    x = np.abs(np.atleast_1d(np.asarray(x, dtype=float)))
    return np.cos(np.outer(x, zeta)) @ weighted / np.pi


def packet_tail(s, params: WavePacketParams, reach: float) -> np.ndarray:
    """sup of |psi(y)| over s <= |y| <= reach

    Scanned on samples 1/(8b) apart starting at or below s; psi is band-limited
    to b/2, so the sampled maximum is within TAIL_SAMPLING_SLACK of the true one.
    """
    step = 0.125 / params.b
    y = step * np.arange(int(np.ceil(reach / step)) + 1)
    running = np.maximum.accumulate(np.abs(psi_values(y, params))[::-1])[::-1]
    s = np.minimum(np.asarray(s, dtype=float), y[-1])
    return running[np.floor(s / step).astype(int)] * TAIL_SAMPLING_SLACK


def mother_wavepacket(params: WavePacketParams, spacing: Optional[float] = None,
                      half_width: Optional[float] = None) -> SampledSignal:
    """Real, even psi with int psi = psi^(0) = 1, sampled symmetrically about 0"""
    spacing = spacing or 0.25 / params.b
    half_width = half_width or 64.0 / params.b
    n = int(round(half_width / spacing))
    x = spacing * np.arange(-n, n + 1)
    return SampledSignal(-n * spacing, spacing, psi_values(x, params))


def _lower_truncation_weight(t, eta, lo, hi, params: WavePacketParams) -> np.ndarray:
    """chi(t(eta - xi-)) w(g y) with y = (eta - xi-)/(xi+ - xi-), zero for eta outside (xi-, xi+)

    w = smooth_step_down is exactly 1 once t(xi+ - eta) > d'' and exactly 0
    unless t(xi+ - eta) > d'.
    """
    debias = packet_normalization(params).debias
    with np.errstate(invalid='ignore'):
        inside = (eta > lo) & (eta < hi)
        a = np.where(inside, t * (eta - lo), np.inf)
        width = hi - lo
        position = np.where(np.isfinite(width), (eta - lo) / np.where(np.isfinite(width), width, 1.0),
                            np.where(np.isfinite(lo), 0.0, 1.0))
        position = np.where(inside, position, 0.5)
        lower = chi(a, params) * smooth_step_down(debias * position, params)
    return np.where(inside, lower, 0.0)


def truncation_weights(t, eta, xi_minus, xi_plus, params: WavePacketParams):
    """The xi- and xi+ summands of kappa; the xi+ one is the mirror image of the xi- one

    Using w(z) + w(1 - z) = 1 the pair sums to
    chi(t(eta - xi-)) w(g y) + chi(t(xi+ - eta)) (1 - w(1 - g(1 - y))).
    """
    t, eta, lo, hi = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (t, eta, xi_minus, xi_plus)))
    lower = _lower_truncation_weight(t, eta, lo, hi, params)
    upper = _lower_truncation_weight(t, -eta, -hi, -lo, params)
    return lower, upper


def truncation_weight(t, eta, xi_minus, xi_plus, params: WavePacketParams) -> np.ndarray:
    """kappa with Psi^{xi-,xi+}_{t,eta} = kappa * psi_{t,eta}

    Near xi- only the first summand survives, near xi+ only the second, and
    kappa = 0 for eta outside (xi-, xi+). Each summand vanishes unless its own
    endpoint sits at distance (d - eps, d + eps)/t and the other endpoint lies
    beyond d'/t, and it no longer moves with the other endpoint beyond d''/t.
    """
    lower, upper = truncation_weights(t, eta, xi_minus, xi_plus, params)
    return lower + upper


def _packet_convolution(rows: np.ndarray, spacing: float, t: float, etas: np.ndarray,
                        params: WavePacketParams) -> np.ndarray:
    """(h * psi_{t,eta})(u_m) on the sample grid of h, one output row per eta

    rows is either a single signal (1, n) shared by every eta or one signal
    per eta (len(etas), n).
    """
    rows = np.atleast_2d(rows)
    n = rows.shape[1]
    size = n * packet_pad_factor(n * spacing, t)
    raw = np.fft.fft(rows, n=size, axis=1)
    zeta = 2.0 * np.pi * np.fft.fftfreq(size, d=spacing)
    out = np.empty((etas.size, n), dtype=complex)
    for start in range(0, etas.size, ROW_CHUNK):
        block = slice(start, start + ROW_CHUNK)
        multiplier = psi_hat(t * (zeta[None, :] - etas[block, None]), params)
        source = raw if raw.shape[0] == 1 else raw[block]
        out[block] = np.fft.ifft(source * multiplier, axis=1)[:, :n]
    return out


def _single_tile_convolution(h: SampledSignal, tile: Tile, eta: float, params: WavePacketParams) -> complex:
    spec = spectrum(h, pad_factor=packet_pad_factor(h.count * h.spacing, tile.t))
    weights = spec.coefficients * psi_hat(tile.t * (spec.frequencies - eta), params) * spec.step
    return complex(np.sum(weights * np.exp(1j * tile.u * spec.frequencies)) / (2.0 * np.pi))


def _require_signal_grid(grid: TileGrid, f: SampledSignal):
    if grid.u_count != f.count or abs(grid.u_spacing - f.spacing) > 1e-12 * f.spacing \
            or abs(grid.u_origin - f.origin) > 1e-9 * max(1.0, abs(f.origin)):
        raise GridMismatchError("Tile translations must coincide with the sample grid of the signal")


def embed_F(f: SampledSignal, tile: Tile, params: WavePacketParams) -> float:
    """|f * psi_{t,eta}(u)| with psi_{t,eta}(x) = t^{-1} e^{i eta x} psi(x/t)"""
    _check_scale(f, tile.t)
    return abs(_single_tile_convolution(f, tile, tile.eta, params))


def embed_F_field(f: SampledSignal, grid: TileGrid, params: WavePacketParams) -> TileField:
    _require_signal_grid(grid, f)
    values = []
    for layer in grid.layers:
        _check_scale(f, layer.t)
        if layer.size == 0:
            values.append(np.zeros((0, f.count)))
            continue
        values.append(np.abs(_packet_convolution(f.samples[None, :], f.spacing, layer.t, layer.etas, params)))
    logger.debug(f"Wave packet transform on {grid.tile_count} tiles")
    return TileField(grid, values)


def wavepacket_samples(t: float, eta: float, params: WavePacketParams, spacing: Optional[float] = None,
                       half_width: Optional[float] = None, weight: float = 1.0) -> SampledSignal:
    """weight * psi_{t,eta} built from its transform, periodic over the sampled window

    The discrete transform of the result (pad factor 1) is weight * psi^(t(zeta - eta))
    at every grid frequency.
    """
    spacing = spacing or np.pi / (2.0 * (abs(eta) + params.b / t))
    half_width = half_width or 2.0 * PACKET_REACH * t
    n = int(round(half_width / spacing))
    count = 2 * n + 1
    origin = -n * spacing
    zeta = 2.0 * np.pi * np.fft.fftfreq(count, d=spacing)
    coefficients = weight * psi_hat(t * (zeta - eta), params) * np.exp(1j * origin * zeta)
    return SampledSignal(origin, spacing, np.fft.ifft(coefficients) / spacing)


def truncated_wavepacket(t: float, eta: float, xi_minus: float, xi_plus: float, params: WavePacketParams,
                         spacing: Optional[float] = None, half_width: Optional[float] = None) -> SampledSignal:
    """Psi^{xi-,xi+}_{t,eta}; infinite endpoints are passed as -inf / +inf"""
    if not xi_minus < xi_plus:
        raise OrderingError(f"xi_minus must be below xi_plus, got ({xi_minus}, {xi_plus})")
    kappa = float(truncation_weight(t, eta, xi_minus, xi_plus, params))
    return wavepacket_samples(t, eta, params, spacing=spacing, half_width=half_width, weight=kappa)


def _linearization_weights(g: SampledSignal, linearization: LinearizationData):
    linearization.require_matches(g)
    lower = linearization.lower_frequencies()
    upper = linearization.upper_frequencies()
    weighted = g.samples[:, None] * linearization.coefficients
    return lower, upper, weighted


def embed_A(g: SampledSignal, tile: Tile, linearization: LinearizationData, params: WavePacketParams) -> float:
    """|int g(x) sum_j a_j(x) Psi^{xi_{j-1}(x), xi_j(x)}_{t,eta}(x - u) dx| with the canonical truncated packets"""
    _check_scale(g, tile.t)
    lower, upper, weighted = _linearization_weights(g, linearization)
    kappa = truncation_weight(tile.t, tile.eta, lower, upper, params)
    modulated = np.sum(kappa * weighted, axis=1)
    if not np.any(modulated):
        return 0.0
    # int G(x) psi_{t,eta}(x - u) dx = (G * psi_{t,-eta})(u) since psi is even
    return abs(_single_tile_convolution(g.with_samples(modulated), tile, -tile.eta, params))


def embed_A_field(g: SampledSignal, grid: TileGrid, linearization: LinearizationData,
                  params: WavePacketParams) -> TileField:
    _require_signal_grid(grid, g)
    lower, upper, weighted = _linearization_weights(g, linearization)
    values = []
    for layer in grid.layers:
        _check_scale(g, layer.t)
        field = np.zeros((layer.size, g.count))
        for start in range(0, layer.size, ROW_CHUNK):
            etas = layer.etas[start:start + ROW_CHUNK]
            kappa = truncation_weight(layer.t, etas[:, None, None], lower[None], upper[None], params)
            modulated = np.sum(kappa * weighted[None], axis=2)
            live = np.flatnonzero(np.any(modulated != 0, axis=1))
            if live.size:
                convolved = _packet_convolution(modulated[live], g.spacing, layer.t, -etas[live], params)
                field[start + live] = np.abs(convolved)
        values.append(field)
    return TileField(grid, values)


def multiplier_reconstruction(xi_minus: float, xi_plus: float, zeta, grid: TileGrid,
                              params: WavePacketParams):
    """Tile quadrature of int int Psi^^{xi-,xi+}_{t,eta}(zeta) dt deta, close to 1 on (xi-, xi+)"""
    if not xi_minus < xi_plus:
        raise OrderingError(f"xi_minus must be below xi_plus, got ({xi_minus}, {xi_plus})")
    zeta_values = np.atleast_1d(np.asarray(zeta, dtype=float))
    total = np.zeros(zeta_values.size)
    for layer in grid.layers:
        kappa = truncation_weight(layer.t, layer.etas, xi_minus, xi_plus, params)
        live = kappa != 0
        if not np.any(live):
            continue
        transforms = psi_hat(layer.t * (zeta_values[:, None] - layer.etas[live][None, :]), params)
        total += transforms @ kappa[live] * layer.dt * layer.eta_step
    return total[0] if np.ndim(zeta) == 0 else total


def half_line_multiplier(xi_minus: float, zeta, grid: TileGrid, params: WavePacketParams):
    """Tile quadrature of int int psi^(t(zeta - eta)) chi(t(eta - xi-)) dt deta, close to 1_{zeta > xi-}"""
    zeta_values = np.atleast_1d(np.asarray(zeta, dtype=float))
    total = np.zeros(zeta_values.size)
    for layer in grid.layers:
        weights = chi(layer.t * (layer.etas - xi_minus), params)
        live = weights != 0
        if not np.any(live):
            continue
        transforms = psi_hat(layer.t * (zeta_values[:, None] - layer.etas[live][None, :]), params)
        total += transforms @ weights[live] * layer.dt * layer.eta_step
    return total[0] if np.ndim(zeta) == 0 else total


def multiplier_grid(xi_minus: float, xi_plus: float, params: WavePacketParams, scales_per_octave: int = 32,
                    c_eta: Optional[float] = None) -> TileGrid:
    """Tiles resolving the multiplier of (xi-, xi+) away from the outer eighths of the interval"""
    width = xi_plus - xi_minus
    near = params.d - params.eps - params.b / 2.0
    far = params.d + params.eps + params.b / 2.0
    return TileGrid.geometric(
        near / (2.0 * width), far / (width / 8.0), scales_per_octave=scales_per_octave,
        c_eta=c_eta or params.eps / 16.0, eta_range=(xi_minus, xi_plus),
    )


def bilinear_form_B(F: TileField, A: TileField, region: Optional[TileRegion] = None, epsilon: float = 0.0) -> float:
    """sum over the region (and t > epsilon) of F * A * du dt deta"""
    F.grid.require_same(A.grid)
    region = region if region is not None else TileRegion.full(F.grid)
    if epsilon > 0:
        region = region.above(epsilon)
    return F.product(A).integral(region)


def wave_packet_domination(f: SampledSignal, g: SampledSignal, linearization: LinearizationData, r: float,
                           grid: TileGrid, params: WavePacketParams) -> dict:
    """|Lambda(f, g)| against B(F(f), A(g)) on the full tile grid"""
    form = abs(linearized_form(f, g, linearization, r))
    bilinear = bilinear_form_B(embed_F_field(f, grid, params), embed_A_field(g, grid, linearization, params))
    ratio = form / bilinear if bilinear > 0 else (0.0 if form == 0 else float('inf'))
    return {'linearized_form': form, 'bilinear_form': bilinear, 'ratio': ratio}
