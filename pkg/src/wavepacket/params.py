# src/wavepacket/params.py
import logging
from dataclasses import dataclass, asdict
from functools import lru_cache
from typing import Tuple

import numpy as np
from django.conf import settings
from scipy import integrate

from .exceptions import WavePacketParameterError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WavePacketParams:
    """Constants of the packet construction: psi^ lives on [-b/2, b/2], chi on [d - eps, d + eps]"""
    b: float = 1.0
    d: float = 2.0
    eps: float = 0.125
    d_prime: float = 0.5
    d_doubleprime: float = 8.0
    sharpness: float = 4.0

    def __post_init__(self):
        if not self.b > 0:
            raise WavePacketParameterError(f"b must be positive, got {self.b}")
        if not self.d > self.b:
            raise WavePacketParameterError(f"d must exceed b, got d={self.d}, b={self.b}")
        if not 0 < self.eps < self.b / 4:
            raise WavePacketParameterError(f"eps must lie in (0, b/4), got {self.eps}")
        if not self.d_doubleprime > self.d_prime > 0:
            raise WavePacketParameterError(
                f"Need d'' > d' > 0, got d'={self.d_prime}, d''={self.d_doubleprime}"
            )
        if not self.d_prime < self.d - self.eps:
            raise WavePacketParameterError(f"d' must lie below d - eps, got d'={self.d_prime}")
        # the xi+ summand lives at t(xi+ - eta) < d + eps and must be gone beyond d''
        if not self.d_doubleprime > self.d + self.eps:
            raise WavePacketParameterError(f"d'' must exceed d + eps, got d''={self.d_doubleprime}")
        if not self.sharpness > 0:
            raise WavePacketParameterError(f"sharpness must be positive, got {self.sharpness}")

    @classmethod
    def from_settings(cls, **overrides) -> 'WavePacketParams':
        packet = settings.CARLESON_TOOLKIT['WAVE_PACKET']
        values = {
            'b': packet['B'],
            'd': packet['D'],
            'eps': packet['EPS'],
            'd_prime': packet['D_PRIME'],
            'd_doubleprime': packet['D_DOUBLEPRIME'],
            'sharpness': packet['SHARPNESS'],
        }
        values.update(overrides)
        return cls(**values)

    def as_dict(self) -> dict:
        return asdict(self)

    @property
    def transition_top(self) -> float:
        """Largest relative position (eta - xi_-)/(xi_+ - xi_-) at which t(xi_+ - eta) > d' is guaranteed"""
        inner = self.d - self.eps
        return inner / (inner + self.d_prime)

    @property
    def transition_bottom(self) -> float:
        """Relative position below which t(xi_+ - eta) > d'' for every eta in the chi support"""
        outer = self.d + self.eps
        return outer / (outer + self.d_doubleprime)


def _bump(z: np.ndarray, sharpness: float) -> np.ndarray:
    """exp(k - k/(1 - z^2)) on |z| < 1, zero elsewhere; equals 1 at z = 0"""
    z = np.asarray(z, dtype=float)
    inside = np.abs(z) < 1.0
    safe = np.where(inside, z, 0.0)
    return np.where(inside, np.exp(sharpness - sharpness / (1.0 - safe ** 2)), 0.0)


def psi_hat(zeta, params: WavePacketParams) -> np.ndarray:
    """Nonnegative, even, supported in (-b/2, b/2), psi^(0) = 1"""
    return _bump(2.0 * np.asarray(zeta, dtype=float) / params.b, params.sharpness)


def chi_profile(s, params: WavePacketParams) -> np.ndarray:
    """Unnormalized bump on (d - eps, d + eps)"""
    return _bump((np.asarray(s, dtype=float) - params.d) / params.eps, params.sharpness)


@dataclass(frozen=True)
class PacketNormalization:
    mass: float
    debias: float


@lru_cache(maxsize=32)
def packet_normalization(params: WavePacketParams) -> PacketNormalization:
    """Mass of psi^(v) chi(s) / (s + v) and the debias factor 1 / E[s / (s + v)] under that density

    With chi divided by the mass, int int psi^(t(zeta - eta)) chi(t(eta - xi)) dt deta = 1
    for every zeta > xi: substituting s = t(eta - xi), v = t(zeta - eta) turns dt deta into
    ds dv / (s + v).
    """
    half = params.b / 2.0
    low, high = params.d - params.eps, params.d + params.eps

    def density(v, s):
        return psi_hat(v, params) * chi_profile(s, params) / (s + v)

    def biased(v, s):
        return density(v, s) * s / (s + v)

    mass, mass_error = integrate.dblquad(density, low, high, -half, half, epsabs=1e-13, epsrel=1e-11)
    first, _ = integrate.dblquad(biased, low, high, -half, half, epsabs=1e-13, epsrel=1e-11)
    debias = mass / first
    logger.debug(f"Packet normalization: mass={mass:.12g} (+/- {mass_error:.1e}), debias={debias:.12g}")
    return PacketNormalization(mass=float(mass), debias=float(debias))


def chi(s, params: WavePacketParams) -> np.ndarray:
    return chi_profile(s, params) / packet_normalization(params).mass


def transition_band(params: WavePacketParams) -> Tuple[float, float]:
    """Band [bottom, 1 - bottom] of smooth_step_down in debiased relative positions

    The widest band symmetric about 1/2 inside [g*Y'', g*Y'] with Y'' = transition_bottom,
    Y' = transition_top and g the debias factor. Below the band t(xi_+ - eta) > d'' and the
    switch is exactly 1; above it the switch is exactly 0, so it is nonzero only where
    t(xi_+ - eta) > d'.
    """
    debias = packet_normalization(params).debias
    bottom = max(debias * params.transition_bottom, 1.0 - debias * params.transition_top)
    if not bottom < 0.5:
        raise WavePacketParameterError(
            f"No transition band between d'={params.d_prime} and d''={params.d_doubleprime} for d={params.d}"
        )
    return bottom, 1.0 - bottom


def smooth_step_down(z, params: WavePacketParams) -> np.ndarray:
    """C-infinity switch: 1 below the transition band, 0 above, omega(z) + omega(1 - z) = 1"""
    bottom, top = transition_band(params)
    u = (np.asarray(z, dtype=float) - bottom) / (top - bottom)
    rise = _smooth_ramp(u)
    fall = _smooth_ramp(1.0 - u)
    return fall / (rise + fall)


def _smooth_ramp(u: np.ndarray) -> np.ndarray:
    positive = u > 0
    return np.where(positive, np.exp(-1.0 / np.where(positive, u, 1.0)), 0.0)
