import logging
import math
from typing import Iterable, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.optimize import brentq

from src.core.composite import (
    SystemSpec,
    diffusion_composite,
    force_composite,
    minimum_temperature,
    scan_friction,
    scan_max_friction_vs_zeta,
)
from src.core.limits import mmc_temperature, resonator_temperature
from src.core.scatterer import Polarizability, zeta_of
from src.core.singlebs import DriveFields, MechanicalResponse, diffusion_single, force_single
from src.utils.golden import golden_section_maximize

logger = logging.getLogger(__name__)

FIGURE_3_ZETAS = (0.01, 0.1, 0.3, 1.0)
FIGURE_4A_ZETAS = np.logspace(-2, 2, 25)
FIGURE_4B_ZETAS = np.logspace(-3, 2, 26)
FIGURE_5_ZETAS = np.logspace(-3, 2, 26)
FEATURE_GRID = 4096
ZERO_TOL = 1e-12


def half_wavelength_grid(count: int) -> np.ndarray:
    """count points on the canonical window (0, pi], left end excluded."""
    return math.pi * np.arange(1, count + 1) / count


def _column_tag(zeta: float) -> str:
    return f"{zeta:g}"


class FrictionScanner:
    """Tables of friction, diffusion and temperature over position or polarizability."""

    def __init__(self, spec: Optional[SystemSpec] = None, threads: Optional[int] = 1):
        self.spec = spec or SystemSpec(k0L=100.0)
        self.threads = threads

    def composite_scan(self, xs: Iterable[float]) -> pd.DataFrame:
        xs = np.asarray(list(xs), dtype=float)
        s = self.spec.at(xs)
        f = force_composite(s)
        df = pd.DataFrame({"k0x": xs, "force0": np.asarray(f.force0, dtype=float),
                           "beta": np.asarray(f.beta, dtype=float)})
        if s.perfect_mirror_lossless:
            r = MechanicalResponse.from_coefficients(f.force0, f.beta, diffusion_composite(s))
            df["diffusion"] = r.diffusion
            df["kBT"] = r.temperature
        return df

    def single_bs_scan(self, p: Polarizability, b0: complex, c0: complex, xs: Iterable[float]) -> pd.DataFrame:
        """Single scatterer at k0x in two counter-propagating beams of amplitudes b0 and c0."""
        xs = np.asarray(list(xs), dtype=float)
        k = self.spec.k0
        phase = np.exp(1j * xs)
        drive = DriveFields(b0=b0 * phase, c0=c0 * np.conj(phase), k=k)
        f = force_single(p, drive)
        zeta, _ = zeta_of(p, omega=k)
        r = MechanicalResponse.from_coefficients(np.real(f.val), -np.real(f.eps), diffusion_single(zeta, drive))
        return pd.DataFrame({"k0x": xs, "force0": r.force0, "beta": r.beta,
                             "diffusion": r.diffusion, "kBT": r.temperature})

    def max_friction_vs_zeta(self, zetas: Sequence[float]) -> pd.DataFrame:
        return scan_max_friction_vs_zeta(zetas, self.spec, self.threads)

    def temperature_vs_zeta(self, zetas: Sequence[float]) -> pd.DataFrame:
        df = self.max_friction_vs_zeta(zetas)
        return df[["zeta", "k0x_max", "kBT"]].copy()

    def figure_3(self, count: int = 2048) -> pd.DataFrame:
        """Friction profiles normalised to unit peak, one column per zeta."""
        xs = half_wavelength_grid(count)
        df = pd.DataFrame({"k0x": xs})
        for zeta in FIGURE_3_ZETAS:
            beta = scan_friction(self.spec.with_zeta(zeta), xs)["beta"].to_numpy()
            scale = np.max(np.abs(beta))
            df[f"beta_norm_{_column_tag(zeta)}"] = beta / scale if scale > 0 else beta
        return df

    def figure_4a(self, zetas: Sequence[float] = FIGURE_4A_ZETAS) -> pd.DataFrame:
        return self.max_friction_vs_zeta(zetas)[["zeta", "k0x_max"]].copy()

    def figure_4b(self, zetas: Sequence[float] = FIGURE_4B_ZETAS) -> pd.DataFrame:
        return self.max_friction_vs_zeta(zetas)[["zeta", "beta_max"]].copy()

    def figure_5(self, zetas: Sequence[float] = FIGURE_5_ZETAS) -> pd.DataFrame:
        """Temperature at maximum friction, with both asymptotic laws alongside.

        kBT_min is the lowest temperature on the resonance flank and is only
        filled in the resonator regime (zeta >= 1).
        """
        df = self.max_friction_vs_zeta(zetas)
        length = self.spec.k0L - df["k0x_max"].to_numpy()
        df["kBT_mirror_mediated"] = mmc_temperature(self.spec.k0, length)
        df["kBT_resonator"] = [resonator_temperature(z, l, self.spec.k0) for z, l in zip(df["zeta"], length)]
        df["kBT_min"] = [
            minimum_temperature(self.spec.with_zeta(z)).temperature if z >= 1 else np.nan
            for z in df["zeta"]
        ]
        return df[["zeta", "k0x_max", "kBT", "kBT_mirror_mediated", "kBT_resonator", "kBT_min"]]

    def figure(self, name: str, zetas: Optional[Sequence[float]] = None) -> pd.DataFrame:
        """Dataset of one figure; zetas replaces the default polarizability grid of 4a, 4b and 5."""
        builders = {"4a": self.figure_4a, "4b": self.figure_4b, "5": self.figure_5}
        logger.info("building figure %s dataset", name)
        if name == "3":
            return self.figure_3()
        if name not in builders:
            raise ValueError(f"unknown figure '{name}'")
        return builders[name](zetas) if zetas else builders[name]()

    def profile_features(self, zeta: float, count: int = FEATURE_GRID) -> pd.DataFrame:
        """Zero crossings and extrema of beta(k0x) on (0, pi], in units of the peak |beta|."""
        spec = self.spec.with_zeta(zeta)
        xs = half_wavelength_grid(count)
        beta = scan_friction(spec, xs)["beta"].to_numpy()
        scale = float(np.max(np.abs(beta)))

        def beta_at(x: float) -> float:
            return float(force_composite(spec.at(x)).beta)

        # zeros that fall on a grid point (k0x = pi always does) carry only roundoff
        on_grid = np.abs(beta) <= ZERO_TOL * scale
        signs = np.where(on_grid, 0.0, np.sign(beta))
        rows = [{"zeta": zeta, "feature": "zero", "k0x": float(xs[j]), "beta_norm": 0.0}
                for j in np.nonzero(on_grid)[0]]
        for j in np.nonzero(signs[:-1] * signs[1:] < 0)[0]:
            x0 = brentq(beta_at, xs[j], xs[j + 1], xtol=1e-14)
            rows.append({"zeta": zeta, "feature": "zero", "k0x": x0, "beta_norm": 0.0})

        interior = np.arange(1, count - 1)
        peaks = interior[(beta[1:-1] > beta[:-2]) & (beta[1:-1] >= beta[2:])]
        troughs = interior[(beta[1:-1] < beta[:-2]) & (beta[1:-1] <= beta[2:])]
        for j in peaks:
            x, fx = golden_section_maximize(beta_at, xs[j - 1], xs[j + 1])
            rows.append({"zeta": zeta, "feature": "max", "k0x": x, "beta_norm": fx / scale})
        for j in troughs:
            x, fx = golden_section_maximize(lambda t: -beta_at(t), xs[j - 1], xs[j + 1])
            rows.append({"zeta": zeta, "feature": "min", "k0x": x, "beta_norm": -fx / scale})

        df = pd.DataFrame(rows, columns=["zeta", "feature", "k0x", "beta_norm"])
        return df.sort_values("k0x", kind="mergesort").reset_index(drop=True)

    def figure_3_features(self) -> pd.DataFrame:
        return pd.concat([self.profile_features(z) for z in FIGURE_3_ZETAS], ignore_index=True)
