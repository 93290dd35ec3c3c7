"""Mobile scatterer in front of a fixed mirror.

The scatterer sits at phase k0x, driven from the left with flux B; the fixed
mirror (reflectivity r) closes the system on the right. The atom-mirror
distance enters only through phi_L = k0L - k0x in the velocity term, the
oscillating factors use e^{-2 i k0x}. Positions may be numpy arrays, in which
case every quantity is evaluated on the whole grid at once.

Units: hbar = c = 1. force0 is in k0 * flux, beta is the coefficient of -v,
diffusion is in k0^2 * flux.
"""
import logging
import math
from dataclasses import dataclass, replace
from typing import Any, Optional

import numpy as np
import pandas as pd

from src.core.errors import NoCoolingPoint, NonConvergent, SingularDenominator, UnsupportedRegime
from src.core.jet import EPS, Jet1, abs2, re
from src.core.limits import resonance_phase, resonance_width
from src.core.scatterer import Polarizability, moving_entries, moving_matrix
from src.core.singlebs import MechanicalResponse
from src.utils.golden import golden_section_maximize
from src.utils.parallel import ordered_map

logger = logging.getLogger(__name__)

GRID_POINTS = 2048
SEARCH_TOL = 1e-10
SERIES_TOL = 1e-12
SERIES_MAX_TERMS = 10_000
FD_STEP = 1e-8
RESONANCE_OFFSETS = np.linspace(-8.0, 8.0, 65)
FLANK_OFFSETS = np.linspace(0.02, 5.0, 1000)


@dataclass(frozen=True)
class SystemSpec:
    zeta: complex = 0.01
    r_fixed: complex = -1.0
    k0L: float = 100.0
    x: Any = 7 * math.pi / 8
    flux: float = 1.0
    eps: float = 0.0
    k0: float = 1.0

    def __post_init__(self):
        if abs(self.r_fixed) > 1 + 1e-12:
            raise ValueError(f"fixed-mirror reflectivity must satisfy |r| <= 1, got {self.r_fixed}")
        if np.any(self.k0L - np.asarray(self.x, dtype=float) <= 0):
            raise ValueError("the scatterer must sit in front of the mirror: k0L - k0x > 0")

    @property
    def phi_l(self) -> Any:
        return self.k0L - np.asarray(self.x, dtype=float)

    def at(self, x: Any) -> "SystemSpec":
        return replace(self, x=x)

    def with_zeta(self, zeta: complex) -> "SystemSpec":
        return replace(self, zeta=zeta)

    @property
    def perfect_mirror_lossless(self) -> bool:
        return self.r_fixed == -1 and np.imag(self.zeta) == 0


@dataclass
class CompositeAmplitudes:
    amplitude: Any
    c_prime: Any
    d_prime: Any
    a_int: Any
    c_int: Any
    d_int: Any


@dataclass
class SeriesResult:
    amplitude: Jet1
    n_terms: int
    ratio: float
    error_bound: float
    tail_bound: Optional[float] = None


@dataclass
class FrictionOptimum:
    k0x: float
    beta: float
    diffusion: float
    temperature: float


def _phase(spec: SystemSpec) -> Any:
    x2 = np.exp(-2j * np.asarray(spec.x, dtype=float))
    return complex(x2) if x2.ndim == 0 else x2


def _series_parts(spec: SystemSpec):
    """Leading term a, round-trip factor q and first-round-trip weight c = (a - b) q.

    The matrix is the inverse of the moving-scatterer matrix, which maps the
    right-side amplitudes back onto the left side.
    """
    m = moving_matrix(Polarizability.constant(spec.zeta)).inverse()
    r = spec.r_fixed
    x2 = _phase(spec)
    a = m.m12 / m.m22
    q = -r * m.m21 / m.m22 * x2
    # (M11/M21) q simplifies to -r M11 x2 / M22, which stays finite at zeta = 0
    c = a * q + r * m.m11 * x2 / m.m22
    return a, q, c


def series_ratio(spec: SystemSpec) -> float:
    return float(abs(spec.r_fixed * spec.zeta / (1 - 1j * spec.zeta)))


def amplitude_series(spec: SystemSpec, n_terms: int) -> SeriesResult:
    """Partial sum of the multiple-reflection series with n_terms round trips."""
    if n_terms < 1:
        raise ValueError("n_terms must be at least 1")
    rho = series_ratio(spec)
    if rho >= 1:
        raise NonConvergent(f"round-trip ratio |r zeta/(1 - i zeta)| = {rho:.6g} >= 1")

    a, q, c = _series_parts(spec)
    q0 = np.asarray(q.val)
    q1 = np.asarray(q.eps)
    phi_l = np.asarray(spec.phi_l)
    m = np.arange(n_terms).reshape((-1,) + (1,) * q0.ndim)
    # term n = m + 1 carries q^m and the round-trip Doppler phase 2i n(n-1) phi_L eps
    q_pow = q0 ** m
    q_pow_prev = q0 ** np.maximum(m - 1, 0)
    val_terms = q_pow
    eps_terms = m * q_pow_prev * q1 + q_pow * (2j * (m + 1) * m * phi_l)
    total = Jet1(val_terms.sum(axis=0), eps_terms.sum(axis=0))
    if total.val.ndim == 0:
        total = Jet1(complex(total.val), complex(total.eps))

    amplitude = a + c * total
    bound = rho ** n_terms * (1 + 2 * n_terms ** 2 * float(np.max(np.abs(phi_l))) * abs(spec.eps)) / (1 - rho)
    return SeriesResult(amplitude=amplitude, n_terms=n_terms, ratio=rho, error_bound=bound)


def _tail_bound(spec: SystemSpec, n: np.ndarray) -> np.ndarray:
    """Upper bound on what the series omits after n terms, val and eps parts together."""
    rho = series_ratio(spec)
    _, q, c = _series_parts(spec)
    c0 = float(np.max(np.abs(c.val)))
    c1 = float(np.max(np.abs(c.eps)))
    slope = float(np.max(np.abs(q.eps))) / rho + 2.0 * float(np.max(np.abs(spec.phi_l)))
    theta = ((n + 2.0) / (n + 1.0)) ** 2 * rho
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        geometric = rho ** n / (1 - rho) * (c0 + c1)
        polynomial = c0 * (n + 1.0) ** 2 * rho ** n * slope / (1 - theta)
        bound = np.where(theta < 1, geometric + polynomial, np.inf)
    return bound


def converged_series(spec: SystemSpec, tol: float = SERIES_TOL,
                     max_terms: int = SERIES_MAX_TERMS) -> SeriesResult:
    """Sum the series until the tail bound drops below tol, or max_terms is reached."""
    rho = series_ratio(spec)
    if rho >= 1:
        raise NonConvergent(f"round-trip ratio |r zeta/(1 - i zeta)| = {rho:.6g} >= 1")
    if rho == 0:
        result = amplitude_series(spec, 1)
        result.tail_bound = 0.0
        return result

    n_terms, tail = _terms_needed(spec, tol, max_terms)
    result = amplitude_series(spec, n_terms)
    result.tail_bound = tail
    logger.debug("series summed with %d terms, tail bound %.3e", n_terms, result.tail_bound)
    return result


def _terms_needed(spec: SystemSpec, tol: float, max_terms: int):
    n = np.arange(1, max_terms + 1, dtype=float)
    bounds = _tail_bound(spec, n)
    hits = np.nonzero(bounds < tol)[0]
    if len(hits):
        n_terms = int(n[hits[0]])
    else:
        n_terms = max_terms
        logger.warning("series cut at %d terms with tail bound %.3e (ratio %.6f)",
                       max_terms, bounds[-1], series_ratio(spec))
    return n_terms, float(bounds[n_terms - 1])


def amplitude_at_velocity(spec: SystemSpec, eps: float, n_terms: Optional[int] = None) -> Any:
    """Reflected amplitude at a finite v/c, summed round trip by round trip.

    Matrix entries are taken at the numeric eps and the ratios between them are
    not expanded; each round-trip phase keeps its full Doppler factor
    e^{2i n(n-1) phi_L eps}. The first-order part therefore reproduces
    amplitude_closed without sharing any of its algebra.
    """
    rho = series_ratio(spec)
    if rho >= 1:
        raise NonConvergent(f"round-trip ratio |r zeta/(1 - i zeta)| = {rho:.6g} >= 1")
    if n_terms is None:
        n_terms = 1 if rho == 0 else _terms_needed(spec, SERIES_TOL, SERIES_MAX_TERMS)[0]

    m11, m12, m21, m22 = moving_entries(complex(spec.zeta), 0j, eps)
    r = spec.r_fixed
    x2 = _phase(spec)
    # ratios of the inverse matrix entries; its determinant cancels
    a = -m12 / m11
    q = np.asarray(r * m21 / m11 * x2)
    c = a * q + r * m22 * x2 / m11
    m = np.arange(n_terms).reshape((-1,) + (1,) * q.ndim)
    phases = np.exp(2j * (m + 1) * m * np.asarray(spec.phi_l) * eps)
    total = (q ** m * phases).sum(axis=0)
    out = a + c * total
    return complex(out) if np.ndim(out) == 0 else out


def amplitude_closed(spec: SystemSpec) -> Jet1:
    """Reflected amplitude A0 + eps A1 relative to the input, in closed form."""
    zeta, r = spec.zeta, spec.r_fixed
    x2 = _phase(spec)
    front = 1 - 1j * zeta
    den = front - r * 1j * zeta * x2
    if front == 0 or np.any(den == 0):
        raise SingularDenominator(f"resonance denominator vanishes for zeta={zeta}, r={r}")
    a0 = (1j * zeta + r * x2 / den) / front
    bracket = (1 - r ** 2 * x2 ** 2 / den ** 2
               - 2j * spec.phi_l * r ** 2 * front * x2 ** 2 / den ** 3)
    a1 = -2j * zeta / front * bracket
    return Jet1(a0, a1)


def intensities(spec: SystemSpec, amplitude: Any = None, eps: Any = EPS) -> CompositeAmplitudes:
    """Intensities around the mobile scatterer, relative to the input flux.

    The amplitude may be a jet (symbolic eps) or a plain number evaluated at a
    numeric eps, in which case eps must carry that same number.
    """
    if amplitude is None:
        amplitude = amplitude_closed(spec)
    zeta = spec.zeta
    a_int = abs2(amplitude)
    c_int = (abs2(1 - 1j * zeta) * a_int + abs2(1j * zeta * (1 - 2 * eps))
             + 2 * re(1j * np.conj(zeta) * (1 - 1j * zeta) * (1 - 2 * eps) * amplitude))
    d_int = (abs2(1j * zeta * (1 + 2 * eps)) * a_int + abs2(1 + 1j * zeta)
             + 2 * re(1j * zeta * (1 - 1j * np.conj(zeta)) * (1 + 2 * eps) * amplitude))
    c_prime = (1 - 1j * zeta) * amplitude - 1j * zeta * (1 - 2 * eps)
    d_prime = 1j * zeta * (1 + 2 * eps) * amplitude + (1 + 1j * zeta)
    return CompositeAmplitudes(amplitude, c_prime, d_prime, a_int, c_int, d_int)


def _flux_balance(spec: SystemSpec, amps: CompositeAmplitudes) -> Any:
    return amps.a_int + 1 - amps.c_int - amps.d_int


def force_jet(spec: SystemSpec, amplitude: Any = None) -> Jet1:
    return spec.k0 * spec.flux * _flux_balance(spec, intensities(spec, amplitude))


def force_composite(spec: SystemSpec, amplitude: Any = None) -> MechanicalResponse:
    """Static force and friction coefficient from the stress-tensor balance."""
    f = force_jet(spec, amplitude)
    return MechanicalResponse(force0=np.real(f.val), beta=-np.real(f.eps))


def force_at_velocity(spec: SystemSpec, eps: float, n_terms: Optional[int] = None) -> Any:
    """Force at a finite v/c from the unexpanded series amplitude and untruncated products."""
    amplitude = amplitude_at_velocity(spec, eps, n_terms)
    amps = intensities(spec, amplitude, eps=eps)
    return spec.k0 * spec.flux * np.real(_flux_balance(spec, amps))


def force_slope(spec: SystemSpec, step: float = FD_STEP) -> float:
    """dF/d(v/c) at rest by a five-point central difference of force_at_velocity."""
    n_terms = None
    if series_ratio(spec) > 0:
        n_terms = _terms_needed(spec, SERIES_TOL, SERIES_MAX_TERMS)[0]
    f = [force_at_velocity(spec, k * step, n_terms) for k in (-2, -1, 1, 2)]
    return float((f[0] - 8 * f[1] + 8 * f[2] - f[3]) / (12 * step))


def expanded_force(spec: SystemSpec, amplitude: Any = None) -> Jet1:
    """Expanded form of the composite force; equals force_jet for real zeta."""
    if amplitude is None:
        amplitude = amplitude_closed(spec)
    zeta = spec.zeta
    z2 = abs(zeta) ** 2
    a_int = abs2(amplitude)
    inner = ((z2 * (1 + 2 * EPS) + np.imag(zeta)) * a_int
             + z2 * (1 - 2 * EPS) - np.imag(zeta)
             + 2 * re(1j * zeta * (1 - 1j * zeta) * amplitude))
    return -2.0 * spec.k0 * spec.flux * inner


def _require_diffusion_regime(spec: SystemSpec):
    if not spec.perfect_mirror_lossless:
        raise UnsupportedRegime("composite diffusion is derived only for r = -1 and real zeta "
                                f"(got r={spec.r_fixed}, zeta={spec.zeta})")


def diffusion_composite(spec: SystemSpec) -> Any:
    """Momentum diffusion at v = 0 for a perfect fixed mirror and a lossless scatterer."""
    _require_diffusion_regime(spec)
    zeta = np.real(spec.zeta)
    den = 1 - 1j * zeta + 1j * zeta * _phase(spec)
    out = 4.0 * spec.k0 ** 2 * spec.flux * (1.0 - 1.0 / abs2(den)) ** 2
    return float(out) if np.ndim(out) == 0 else out


def diffusion_general(spec: SystemSpec) -> Any:
    """Diffusion as the squared flux balance k0^2 B (A + 1 - C - D)^2 at v = 0."""
    _require_diffusion_regime(spec)
    balance = np.real(_flux_balance(spec, intensities(spec)).val)
    return spec.k0 ** 2 * spec.flux * balance ** 2


def response_composite(spec: SystemSpec) -> MechanicalResponse:
    f = force_composite(spec)
    diffusion = diffusion_composite(spec) if spec.perfect_mirror_lossless else None
    return MechanicalResponse.from_coefficients(f.force0, f.beta, diffusion)


def _require_search_regime(spec: SystemSpec) -> float:
    if spec.r_fixed != -1 or np.imag(spec.zeta) != 0 or np.real(spec.zeta) <= 0:
        raise UnsupportedRegime("friction optimum search needs r = -1 and a real zeta > 0")
    return float(np.real(spec.zeta))


def search_candidates(zeta: float) -> np.ndarray:
    """Uniform grid on (0, pi] merged with points spread over the resonance."""
    grid = math.pi * np.arange(1, GRID_POINTS + 1) / GRID_POINTS
    extra = resonance_phase(zeta) + resonance_width(zeta) * RESONANCE_OFFSETS
    extra = extra[(extra > 0) & (extra <= math.pi)]
    return np.unique(np.concatenate([grid, extra]))


def _beta_at(spec: SystemSpec, k0x: float) -> float:
    return float(force_composite(spec.at(k0x)).beta)


def _refine_max(func, xs: np.ndarray, values: np.ndarray):
    j = int(np.argmax(values))
    lo, hi = xs[max(j - 1, 0)], xs[min(j + 1, len(xs) - 1)]
    x, fx = golden_section_maximize(func, lo, hi, tol=SEARCH_TOL)
    if fx < values[j]:
        return float(xs[j]), float(values[j])
    return float(x), float(fx)


def temperature_at_max_friction(spec: SystemSpec) -> FrictionOptimum:
    """Locate the friction maximum on (0, pi] and return D/(2 beta) there."""
    zeta = _require_search_regime(spec)
    xs = search_candidates(zeta)
    betas = np.asarray(force_composite(spec.at(xs)).beta)
    if not np.any(betas > 0):
        raise NoCoolingPoint(f"friction is non-positive over the whole window for zeta={zeta}")
    x_star, beta_star = _refine_max(lambda x: _beta_at(spec, x), xs, betas)
    diffusion = diffusion_composite(spec.at(x_star))
    logger.debug("zeta=%.6g: max friction %.6e at k0x=%.12f", zeta, beta_star, x_star)
    return FrictionOptimum(k0x=x_star, beta=beta_star, diffusion=diffusion,
                           temperature=diffusion / (2.0 * beta_star))


def _neg_temperature(spec: SystemSpec, k0x: Any) -> Any:
    s = spec.at(k0x)
    beta = np.asarray(force_composite(s).beta, dtype=float)
    diffusion = np.asarray(diffusion_composite(s), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(beta > 0, -diffusion / (2.0 * beta), -np.inf)
    return float(out) if out.ndim == 0 else out


def minimum_temperature(spec: SystemSpec) -> FrictionOptimum:
    """Lowest D/(2 beta) on the cooling flank of the resonance (resonator regime, zeta >= 1)."""
    zeta = _require_search_regime(spec)
    if zeta < 1:
        raise UnsupportedRegime("minimum temperature search targets the resonator regime, zeta >= 1")
    phi0 = resonance_phase(zeta)
    xs = phi0 + resonance_width(zeta) * FLANK_OFFSETS
    # the Lorentzian flank ends well before pi, where the exact diffusion vanishes
    xs = xs[(xs > 0) & (xs < phi0 + 0.5 * (math.pi - phi0))]
    neg_t = _neg_temperature(spec, xs)
    if not np.any(np.isfinite(neg_t)):
        raise NoCoolingPoint(f"no cooling point on the resonance flank for zeta={zeta}")
    x_star, value = _refine_max(lambda x: _neg_temperature(spec, x), xs, neg_t)
    s = spec.at(x_star)
    return FrictionOptimum(k0x=x_star, beta=float(force_composite(s).beta),
                           diffusion=diffusion_composite(s), temperature=-value)


def scan_friction(spec: SystemSpec, x_grid: Any) -> pd.DataFrame:
    xs = np.asarray(x_grid, dtype=float)
    beta = np.asarray(force_composite(spec.at(xs)).beta, dtype=float)
    return pd.DataFrame({"k0x": xs, "beta": beta})


def loglog_slope(x: Any, y: Any) -> float:
    """Slope of log y against log x between the first and the last point."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float((math.log(y[-1]) - math.log(y[0])) / (math.log(x[-1]) - math.log(x[0])))


def scan_max_friction_vs_zeta(zeta_grid: Any, spec: SystemSpec, threads: Optional[int] = 1) -> pd.DataFrame:
    """Friction optimum for each zeta; the end-to-end log-log slope goes in df.attrs."""
    zetas = [float(z) for z in np.asarray(zeta_grid, dtype=float)]
    logger.info("max-friction scan over %d zeta values", len(zetas))
    optima = ordered_map(lambda z: temperature_at_max_friction(spec.with_zeta(z)), zetas, threads)
    df = pd.DataFrame({
        "zeta": zetas,
        "k0x_max": [o.k0x for o in optima],
        "beta_max": [o.beta for o in optima],
        "diffusion": [o.diffusion for o in optima],
        "kBT": [o.temperature for o in optima],
    })
    if len(zetas) >= 2:
        df.attrs["slope"] = loglog_slope(df["zeta"], df["beta_max"])
    return df
