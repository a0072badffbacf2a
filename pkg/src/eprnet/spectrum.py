"""Per-channel EPR-pair generation rates of a broadband degenerate source.

The biphoton spectrum is an all-Gaussian wave function in the signal and idler
detunings, and each WDM channel is an ideal rectangular filter.  The heralding
efficiency of channel ``x`` is the probability mass of ``|Psi|^2`` inside the
channel's (signal, idler) passband rectangle, and the generated pair rate is
``rep_rate * (efficiency ** 2) / 4``.

``|Psi|^2`` is a bivariate Gaussian density, so for a fixed signal detuning the
idler integral is a difference of error functions.  :func:`heralding_efficiency`
integrates that closed form over the signal passband with Gauss-Legendre nodes;
:func:`heralding_efficiency_tensor` is a brute 2-D tensor-product rule kept for
validation.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import erf

from .errors import ConfigError, QuadratureError

SPEED_OF_LIGHT = 299_792_458.0

#: Highest per-channel rate of the 185-channel reference plan, pairs/s.
REFERENCE_PEAK_RATE = 4584.0
#: Pump repetition rate that puts the 185-channel peak at REFERENCE_PEAK_RATE.
CALIBRATED_REP_RATE = 3104201178.526894

CHANNELS_PER_PAIR = Fraction(136, 100)


@dataclass(frozen=True)
class SourceParams:
    """SPDC source parameters (SI units, angular phase-matching bandwidth)."""

    sigma_p: float = 36e-12
    omega_pm: float = 2 * math.pi * 6.37e12
    rep_rate: float = CALIBRATED_REP_RATE
    band_total: float = 2.430e12
    center_wavelength: float = 1550e-9

    def __post_init__(self):
        for name in ("sigma_p", "omega_pm", "rep_rate", "band_total", "center_wavelength"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.band_total > self.omega_pm / (2 * math.pi):
            raise ConfigError("band_total exceeds the phase-matching bandwidth")

    @property
    def center_frequency(self) -> float:
        return SPEED_OF_LIGHT / self.center_wavelength


@dataclass(frozen=True)
class ChannelGeometry:
    m: int = 185
    b_c: float = 11e9
    b_delta: float = 13.135e9

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ConfigError(f"channel count must be a positive integer, got {self.m!r}")
        if not (self.b_c > 0 and self.b_delta > 0):
            raise ConfigError("channel width and spacing must be positive")
        if self.b_c > self.b_delta:
            raise ConfigError("channels overlap: b_c > b_delta")

    def check_fits(self, band_total: float) -> None:
        if self.m * self.b_delta > band_total + self.b_delta * (1 + 1e-12):
            raise ConfigError(
                f"{self.m} channels at {self.b_delta:g} Hz spacing do not fit a {band_total:g} Hz band"
            )

    def offsets(self) -> np.ndarray:
        """Channel-center offsets from the band center, in channel spacings.

        Uses the real-valued midpoint (m+1)/2 so even m stays mirror symmetric.
        """
        x = np.arange(1, self.m + 1, dtype=float)
        return x - (self.m + 1) / 2


@dataclass(frozen=True)
class ChannelPlan:
    geometry: ChannelGeometry
    rates: np.ndarray
    center_freqs: np.ndarray
    scale: float = field(default=1.0, compare=False)

    @property
    def m(self) -> int:
        return self.geometry.m

    @property
    def center_wavelengths(self) -> np.ndarray:
        return SPEED_OF_LIGHT / self.center_freqs

    @property
    def total_rate(self) -> float:
        return float(np.sum(self.rates))

    def to_csv(self, path) -> None:
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["channel_index", "center_freq_hz", "center_wavelength_nm", "rate_pairs_per_s"])
            for x, (f, lam, r) in enumerate(zip(self.center_freqs, self.center_wavelengths, self.rates), 1):
                writer.writerow([x, repr(float(f)), repr(float(lam * 1e9)), repr(float(r))])

    @classmethod
    def from_csv(cls, path, b_c: float | None = None) -> "ChannelPlan":
        """Read a plan written by :meth:`to_csv`.

        The channel width is not stored in the CSV; it defaults to the spacing
        scaled by the reference width/spacing ratio.
        """
        with Path(path).open(newline="") as fh:
            rows = list(csv.DictReader(fh))
        freqs = np.array([float(r["center_freq_hz"]) for r in rows])
        rates = np.array([float(r["rate_pairs_per_s"]) for r in rows])
        spacing = abs(freqs[0] - freqs[1]) if len(freqs) > 1 else ChannelGeometry().b_delta
        if b_c is None:
            ref = ChannelGeometry()
            b_c = spacing * ref.b_c / ref.b_delta
        return cls(ChannelGeometry(len(rows), b_c, spacing), rates, freqs)


def _passbands(params: SourceParams, geometry: ChannelGeometry, channel_index) -> tuple:
    """Signal and idler detuning intervals (rad/s) for the given channel(s)."""
    x = np.asarray(channel_index, dtype=float)
    shift = 2 * math.pi * (x - (geometry.m + 1) / 2) * geometry.b_delta
    half = math.pi * geometry.b_c
    # the signal filter sits at -shift, the idler filter at +shift
    return (-shift - half, -shift + half), (shift - half, shift + half)


def _gaussian_coeffs(params: SourceParams) -> tuple[float, float]:
    # |Psi|^2 = pref * exp(-p (a+b)^2 - q (a-b)^2)
    p = params.sigma_p**2 / 8
    q = 8 / params.omega_pm**2
    return p, q


def _prefactor(params: SourceParams) -> float:
    return 8 * math.pi * params.sigma_p / params.omega_pm / (2 * math.pi) ** 2


def _check_index(geometry: ChannelGeometry, channel_index) -> None:
    idx = np.atleast_1d(channel_index)
    if np.any(idx < 1) or np.any(idx > geometry.m) or np.any(idx != np.round(idx)):
        raise ConfigError(f"channel index out of range 1..{geometry.m}: {channel_index!r}")


def _efficiency_erf(params, geometry, channels: np.ndarray, nodes: int) -> np.ndarray:
    p, q = _gaussian_coeffs(params)
    s = p + q
    (a0, a1), (b0, b1) = _passbands(params, geometry, channels)
    t, w = leggauss(nodes)
    half = 0.5 * (a1 - a0)
    a = half[:, None] * t[None, :] + (0.5 * (a1 + a0))[:, None]
    # complete the square in the idler detuning b
    mu = -(p - q) / s * a
    rs = math.sqrt(s)
    inner = 0.5 * math.sqrt(math.pi / s) * (erf(rs * (b1[:, None] - mu)) - erf(rs * (b0[:, None] - mu)))
    outer = np.exp(-4 * p * q / s * a**2) * inner
    return _prefactor(params) * half * (outer @ w)


def heralding_efficiency(
    params: SourceParams,
    geometry: ChannelGeometry,
    channel_index,
    *,
    nodes: int = 32,
    rtol: float = 1e-13,
    max_nodes: int = 2048,
):
    """Probability that signal and idler both pass channel ``channel_index``.

    ``channel_index`` is 1-based and may be an integer or an array of indices.
    The node count is doubled until two successive rules agree to ``rtol``;
    :class:`QuadratureError` is raised if ``max_nodes`` is reached first.
    """
    _check_index(geometry, channel_index)
    channels = np.atleast_1d(np.asarray(channel_index, dtype=float))
    prev = _efficiency_erf(params, geometry, channels, nodes)
    n = nodes
    while True:
        n *= 2
        if n > max_nodes:
            raise QuadratureError(f"efficiency did not converge to rtol={rtol} with {max_nodes} nodes")
        cur = _efficiency_erf(params, geometry, channels, n)
        if np.all(np.abs(cur - prev) <= rtol * np.abs(cur)):
            break
        prev = cur
    return float(cur[0]) if np.ndim(channel_index) == 0 else cur


def heralding_efficiency_tensor(
    params: SourceParams,
    geometry: ChannelGeometry,
    channel_index: int,
    *,
    rtol: float = 1e-9,
    max_level: int = 8,
) -> float:
    """Same quantity as :func:`heralding_efficiency` by 2-D tensor Gauss-Legendre.

    The passband rectangle is split into ``2**level`` panels per side, each
    integrated with a 16x16 rule, refining until successive levels agree.
    """
    _check_index(geometry, channel_index)
    p, q = _gaussian_coeffs(params)
    (a0, a1), (b0, b1) = _passbands(params, geometry, float(channel_index))
    t, w = leggauss(16)

    def level_sum(level: int) -> float:
        k = 2**level
        ea = np.linspace(a0, a1, k + 1)
        eb = np.linspace(b0, b1, k + 1)
        ha, hb = 0.5 * np.diff(ea), 0.5 * np.diff(eb)
        a = ((ea[:-1] + ha)[:, None] + ha[:, None] * t[None, :]).ravel()
        b = ((eb[:-1] + hb)[:, None] + hb[:, None] * t[None, :]).ravel()
        wa = (ha[:, None] * w[None, :]).ravel()
        wb = (hb[:, None] * w[None, :]).ravel()
        A, B = a[:, None], b[None, :]
        f = np.exp(-p * (A + B) ** 2 - q * (A - B) ** 2)
        return float(wa @ f @ wb)

    prev = level_sum(0)
    for level in range(1, max_level + 1):
        cur = level_sum(level)
        if abs(cur - prev) <= rtol * abs(cur):
            return _prefactor(params) * cur
        prev = cur
    raise QuadratureError(f"tensor rule did not converge to rtol={rtol} by level {max_level}")


def channel_rates(params: SourceParams | None = None, geometry: ChannelGeometry | None = None) -> ChannelPlan:
    """Per-channel generated EPR-pair rates, ``rep_rate * eff**2 / 4``."""
    params = params or SourceParams()
    geometry = geometry or ChannelGeometry()
    geometry.check_fits(params.band_total)
    eff = heralding_efficiency(params, geometry, np.arange(1, geometry.m + 1))
    rates = 0.25 * eff**2 * params.rep_rate
    # channel x's signal filter is centred at -(x - (m+1)/2) spacings from the band centre
    freqs = params.center_frequency - geometry.offsets() * geometry.b_delta
    return ChannelPlan(geometry, rates, freqs)


def calibrate_rep_rate(
    params: SourceParams | None = None,
    geometry: ChannelGeometry | None = None,
    peak_rate: float = REFERENCE_PEAK_RATE,
) -> float:
    """Repetition rate for which the plan's highest channel rate equals ``peak_rate``."""
    params = params or SourceParams()
    geometry = geometry or ChannelGeometry()
    mid = (geometry.m + 1) // 2
    eff = heralding_efficiency(params, geometry, mid)
    if geometry.m % 2 == 0:
        eff = max(eff, heralding_efficiency(params, geometry, mid + 1))
    return peak_rate / (0.25 * eff**2)


def pair_count(n_nodes: int) -> int:
    return n_nodes * (n_nodes - 1) // 2


def scaled_channel_count(kappa: int) -> int:
    """floor(1.36 * kappa) in exact arithmetic."""
    return math.floor(CHANNELS_PER_PAIR * kappa)


def scaled_plan(
    reference: ChannelPlan,
    kappa_ref: int,
    n_nodes: int,
    band_total: float | None = None,
    params: SourceParams | None = None,
) -> ChannelPlan:
    """Channel plan for an ``n_nodes`` network with the reference per-pair mean rate.

    The band is cut into ``floor(1.36 * kappa)`` channels keeping the
    reference width/spacing ratio, rates are recomputed from the Gaussian model
    and then scaled so that ``sum(rates) / kappa`` matches the reference.
    When ``kappa`` equals ``kappa_ref`` the reference plan is returned as is.
    """
    if n_nodes < 3:
        raise ConfigError("scaled plans need at least 3 nodes")
    params = params or SourceParams()
    band_total = params.band_total if band_total is None else band_total
    kappa = pair_count(n_nodes)
    if kappa == kappa_ref:
        return reference
    m = scaled_channel_count(kappa)
    if m < kappa:
        raise ConfigError(f"{m} channels cannot serve {kappa} node pairs")
    spacing = band_total / m
    width = spacing * reference.geometry.b_c / reference.geometry.b_delta
    raw = channel_rates(replace(params, band_total=band_total), ChannelGeometry(m, width, spacing))
    target = reference.total_rate / kappa_ref
    factor = target * kappa / raw.total_rate
    return ChannelPlan(raw.geometry, raw.rates * factor, raw.center_freqs, scale=factor)
