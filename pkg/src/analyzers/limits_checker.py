"""Cross-oracle report: every closed form against the general scattering route.

Each check produces one row with the measured quantity, the expected value, an
error in the check's own metric and the tolerance it is held to. Random cases
are drawn from a seeded generator so the report is reproducible.
"""
import logging
import math
from typing import Callable, Dict, List, Optional

import numpy as np
import pandas as pd

from src.core.composite import (
    SystemSpec,
    amplitude_closed,
    converged_series,
    diffusion_composite,
    diffusion_general,
    force_composite,
    force_jet,
    force_slope,
    intensities,
    loglog_slope,
    minimum_temperature,
    scan_max_friction_vs_zeta,
)
from src.core.limits import (
    G_FREQUENCY_PER_LENGTH,
    G_SQUARED,
    cavity_params_from_scattering,
    hamiltonian_friction,
    mmc_force,
    mmc_temperature,
    resonance_phase,
    resonance_width,
    resonator_diffusion,
    resonator_friction,
    resonator_half_width,
    resonator_temperature,
)
from src.core.scatterer import Polarizability, moving_matrix, refltrans_of, zeta_of
from src.core.singlebs import (
    DriveFields,
    diffusion_amplitude_form,
    diffusion_single,
    force_single,
    molasses_friction,
    standing_wave_drive,
)

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ["name", "measured", "expected", "error", "tolerance", "passed", "note"]
FD_STEP = 1e-8


def _row(name: str, measured: float, expected: float, error: float, tolerance: float,
         note: str = "", passed: Optional[bool] = None) -> Dict:
    if passed is None:
        passed = bool(np.isfinite(error) and error <= tolerance)
    return {"name": name, "measured": float(measured), "expected": float(expected),
            "error": float(error), "tolerance": float(tolerance), "passed": bool(passed), "note": note}


def _rel(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


class LimitsChecker:
    def __init__(self, seed: int = 0, samples: int = 1000, k0L: float = 100.0, threads: Optional[int] = 1):
        self.seed = seed
        self.samples = samples
        self.k0L = k0L
        self.threads = threads

    def _rng(self, offset: int) -> np.random.Generator:
        # each check draws from its own stream so adding a check leaves the others unchanged
        return np.random.default_rng([self.seed, offset])

    def check_series_vs_closed(self) -> Dict:
        rng = self._rng(1)
        worst = 0.0
        for _ in range(self.samples):
            zeta = float(10 ** rng.uniform(-3, math.log10(3.0)))
            spec = SystemSpec(zeta=zeta, r_fixed=-1.0, k0L=self.k0L,
                              x=float(math.pi * (1 - rng.random())), eps=float(rng.choice([0.0, 1e-6])))
            series = converged_series(spec).amplitude
            closed = amplitude_closed(spec)
            for s, c in ((series.val, closed.val), (series.eps, closed.eps)):
                worst = max(worst, abs(s - c) / max(1.0, abs(c)))
        return _row("series_vs_closed", worst, 0.0, worst, 1e-9,
                    "ratio |r zeta/(1 - i zeta)| <= 0.95; error scaled by max(1, |closed|)")

    def check_unitarity(self) -> Dict:
        rng = self._rng(2)
        zetas = 10 ** rng.uniform(-3, 2, self.samples)
        xs = math.pi * (1 - rng.random(self.samples))
        worst = 0.0
        for zeta in zetas:
            # rounding in 1 + zeta^2 - zeta^2 scales with zeta^2
            scale = 1.0 + zeta ** 2
            det = moving_matrix(Polarizability.constant(zeta)).det()
            rt = refltrans_of(zeta)
            worst = max(worst, abs(det.val - 1) / scale, abs(det.eps) / scale, abs(rt.absorption))
        # perfect mirror, v = 0: all incoming power comes back
        spec = SystemSpec(zeta=1.0, r_fixed=-1.0, k0L=self.k0L, x=xs)
        for zeta in zetas[:50]:
            amps = intensities(spec.with_zeta(float(zeta)))
            scale = 1.0 + zeta ** 2
            worst = max(worst, float(np.max(np.abs(amps.a_int.val - 1))),
                        float(np.max(np.abs(amps.c_int.val - amps.d_int.val))) / scale)
        return _row("determinant_and_flux", worst, 0.0, worst, 1e-12)

    def check_molasses(self) -> List[Dict]:
        gamma = 1e-3
        p = Polarizability.two_level_atom(gamma=gamma, detuning=gamma, cross_section_ratio=1e-3)
        xs = math.pi * (np.arange(32) + 0.5) / 32
        drive = standing_wave_drive(1.0, xs)
        f = force_single(p, drive)
        beta_avg = float(np.mean(-np.real(f.eps)))
        expected = molasses_friction(p, flux=1.0)
        friction = _row("molasses_friction", beta_avg, expected, _rel(beta_avg, expected), 0.01)

        zeta, _ = zeta_of(p)
        d = np.asarray(diffusion_single(zeta, drive), dtype=float)
        profile = 8.0 * zeta.imag * np.sin(xs) ** 2
        error = float(np.max(np.abs(d - profile)) / np.max(profile))
        diffusion = _row("molasses_diffusion_profile", float(np.max(d)), float(np.max(profile)), error, 0.01)
        return [friction, diffusion]

    def check_small_zeta(self) -> Dict:
        xs = math.pi * (np.arange(16) + 0.5) / 16

        def residual(zeta: float) -> np.ndarray:
            f = force_jet(SystemSpec(zeta=zeta, r_fixed=-1.0, k0L=self.k0L, x=xs))
            ref = mmc_force(zeta, xs, self.k0L)
            return np.abs(np.real(f.val) - ref.val) + np.abs(np.real(f.eps) - ref.eps)

        # quartic terms still show at zeta = 1e-2 near zeros of the cubic coefficient,
        # so the pointwise ratio uses the 1e-3 / 1e-4 pair and the 1e-2 pair is summed
        ratio = residual(1e-3) / residual(1e-4)
        summed = float(np.sum(residual(1e-2)) / np.sum(residual(1e-3)))
        lo, hi = min(float(np.min(ratio)), summed), max(float(np.max(ratio)), summed)
        passed = bool(lo >= 500 and hi <= 2000)
        return _row("small_zeta_cubic_residual", summed, 1000.0, max(abs(lo - 1000), abs(hi - 1000)),
                    1000.0, f"residual ratio over 16 positions in [{lo:.1f}, {hi:.1f}]", passed)

    def check_max_friction(self) -> List[Dict]:
        spec = SystemSpec(zeta=1.0, r_fixed=-1.0, k0L=self.k0L)
        drift = scan_max_friction_vs_zeta(np.logspace(-2, 2, 25), spec, self.threads)
        x_small = float(drift["k0x_max"].iloc[0])
        x_large = float(drift["k0x_max"].iloc[-1])
        positions = drift["k0x_max"].to_numpy()
        dip = float(np.max(np.maximum.accumulate(positions) - positions))
        rows = [
            _row("max_friction_position_small_zeta", x_small, 7 * math.pi / 8, abs(x_small - 7 * math.pi / 8), 0.02),
            _row("max_friction_position_large_zeta", x_large, math.pi, max(0.0, math.pi - x_large), 0.02),
            _row("max_friction_drift", dip, 0.0, dip, 0.05,
                 "largest drop below the running maximum; a shallow dip near zeta ~ 0.3 precedes the climb to pi"),
        ]

        weak = scan_max_friction_vs_zeta([1e-3, 1e-2], spec, self.threads)
        strong = scan_max_friction_vs_zeta([10.0, 100.0], spec, self.threads)
        s_weak = loglog_slope(weak["zeta"], weak["beta_max"])
        s_strong = loglog_slope(strong["zeta"], strong["beta_max"])
        rows.append(_row("max_friction_slope_weak", s_weak, 2.0, abs(s_weak - 2.0), 0.1))
        rows.append(_row("max_friction_slope_strong", s_strong, 6.0, abs(s_strong - 6.0), 0.2))

        # temperature: plateau at small zeta, 1/zeta^2 at large zeta
        plateau = scan_max_friction_vs_zeta([0.005, 0.01, 0.02, 0.05], spec, self.threads)
        ref = mmc_temperature(1.0, self.k0L - plateau["k0x_max"].to_numpy())
        rows.append(_row("temperature_plateau", float(plateau["kBT"].iloc[0]), float(ref[0]),
                         _rel(plateau["kBT"], ref), 0.25))
        t_slope = loglog_slope(strong["zeta"], strong["kBT"])
        rows.append(_row("temperature_slope_strong", t_slope, -2.0, abs(t_slope + 2.0), 0.1))
        ratios = strong["kBT"].to_numpy() / np.array([
            resonator_temperature(z, self.k0L - x) for z, x in zip(strong["zeta"], strong["k0x_max"])])
        rows.append(_row("temperature_at_max_friction_ratio", float(ratios[-1]), 3 / math.sqrt(5),
                         _rel(ratios, 3 / math.sqrt(5)), 0.1))
        lows = [minimum_temperature(spec.with_zeta(z)) for z in (10.0, 30.0, 100.0)]
        measured = np.array([o.temperature for o in lows])
        expected = np.array([resonator_temperature(z, self.k0L - o.k0x) for z, o in zip((10.0, 30.0, 100.0), lows)])
        rows.append(_row("minimum_temperature", float(measured[-1]), float(expected[-1]), _rel(measured, expected), 0.1))
        return rows

    def _hamiltonian_error(self, g_definition: str) -> float:
        worst = 0.0
        for zeta in (10.0, 30.0, 100.0):
            phi0 = resonance_phase(zeta)
            us = resonance_width(zeta) * np.linspace(-3.0, 3.0, 21)
            length = self.k0L - phi0
            ref = np.array([resonator_friction(zeta, phi0 + u, 1.0, length, 1.0) for u in us])
            got = np.array([
                hamiltonian_friction(cavity_params_from_scattering(zeta, phi0 + u, length, 1.0,
                                                                   g_definition=g_definition)).coefficient
                for u in us])
            worst = max(worst, float(np.max(np.abs(got - ref)) / np.max(np.abs(ref))))
        return worst

    def check_hamiltonian(self) -> List[Dict]:
        primary = self._hamiltonian_error(G_FREQUENCY_PER_LENGTH)
        squared = self._hamiltonian_error(G_SQUARED)
        return [
            _row("hamiltonian_vs_resonator", primary, 0.0, primary, 1e-6, "G = c k0 / L"),
            _row("hamiltonian_g_squared_rejected", squared, 0.0, squared, 1e-6,
                 "G = c^2 k0^2 / L^2 does not reproduce the resonator friction", passed=squared > 1e-6),
        ]

    def check_resonator(self) -> List[Dict]:
        rows = []
        widths = {z: resonator_half_width(z) for z in (10.0, 30.0, 100.0)}
        rows.append(_row("resonator_half_width", widths[100.0], resonance_width(100.0),
                         max(_rel(w, resonance_width(z)) for z, w in widths.items()), 0.05))

        zeta = 30.0
        phi0 = resonance_phase(zeta)
        us = resonance_width(zeta) * np.array([-2.0, -1.0, -0.5, 0.5, 1.0, 2.0])
        spec = SystemSpec(zeta=zeta, r_fixed=-1.0, k0L=self.k0L)
        beta = np.asarray(force_composite(spec.at(phi0 + us)).beta, dtype=float)
        ref = -np.array([resonator_friction(zeta, phi0 + u, 1.0, self.k0L - phi0 - u, 1.0) for u in us])
        rows.append(_row("resonator_friction_vs_composite", float(beta[-1]), float(ref[-1]), _rel(beta, ref), 0.05))

        d = np.asarray(diffusion_composite(spec.at(phi0 + us)), dtype=float)
        d_ref = np.asarray(resonator_diffusion(zeta, phi0 + us), dtype=float)
        rows.append(_row("resonator_diffusion_vs_composite", float(d[-1]), float(d_ref[-1]), _rel(d_ref, d), 0.1))
        return rows

    def check_finite_difference(self) -> Dict:
        rng = self._rng(9)
        worst = 0.0
        for j in range(100):
            if j % 2:
                spec = SystemSpec(zeta=float(10 ** rng.uniform(-3, math.log10(2.0))), r_fixed=-1.0,
                                  k0L=self.k0L, x=float(math.pi * (1 - rng.random())))
                exact = float(np.real(force_jet(spec).eps))
                fd = force_slope(spec)
            else:
                if j % 4:
                    p = Polarizability.constant(complex(rng.uniform(-2, 2), rng.uniform(0, 1)))
                else:
                    gamma = float(10 ** rng.uniform(-3, -1))
                    p = Polarizability.two_level_atom(gamma, gamma * rng.uniform(-5, 5), rng.uniform(0.1, 1.0))
                b, c = rng.normal(size=2) + 1j * rng.normal(size=2)
                drive = DriveFields(b0=complex(b), c0=complex(c))
                exact = float(np.real(force_single(p, drive).eps))
                fd = (force_single(p, drive, FD_STEP) - force_single(p, drive, -FD_STEP)) / (2 * FD_STEP)
            worst = max(worst, abs(float(fd) - exact) / (1.0 + abs(exact)))
        return _row("finite_difference_velocity", worst, 0.0, worst, 1e-6)

    def check_diffusion(self) -> List[Dict]:
        rng = self._rng(10)
        worst_single, worst_composite, lowest = 0.0, 0.0, math.inf
        for _ in range(self.samples):
            zeta = complex(rng.uniform(-3, 3), rng.uniform(0, 2))
            b, c = rng.normal(size=2) + 1j * rng.normal(size=2)
            drive = DriveFields(b0=complex(b), c0=complex(c))
            closed = diffusion_single(zeta, drive)
            amplitude_form = diffusion_amplitude_form(zeta, drive)
            worst_single = max(worst_single, _rel(amplitude_form, closed))
            lowest = min(lowest, float(closed))

            spec = SystemSpec(zeta=float(10 ** rng.uniform(-3, 2)), r_fixed=-1.0, k0L=self.k0L,
                              x=float(math.pi * (1 - rng.random())))
            d = diffusion_composite(spec)
            g = diffusion_general(spec)
            worst_composite = max(worst_composite, abs(g - d) / max(d, 1e-12))
            lowest = min(lowest, float(d))
        return [
            _row("diffusion_single_equivalence", worst_single, 0.0, worst_single, 1e-10),
            _row("diffusion_composite_equivalence", worst_composite, 0.0, worst_composite, 1e-10),
            _row("diffusion_non_negative", lowest, 0.0, max(0.0, -lowest), 0.0),
        ]

    def checks(self) -> List[Callable]:
        return [
            self.check_series_vs_closed,
            self.check_unitarity,
            self.check_molasses,
            self.check_small_zeta,
            self.check_max_friction,
            self.check_hamiltonian,
            self.check_resonator,
            self.check_finite_difference,
            self.check_diffusion,
        ]

    def run(self) -> pd.DataFrame:
        rows: List[Dict] = []
        for check in self.checks():
            out = check()
            rows.extend(out if isinstance(out, list) else [out])
            logger.debug("%s done", check.__name__)
        report = pd.DataFrame(rows, columns=REPORT_COLUMNS)
        failed = report.loc[~report["passed"], "name"].tolist()
        if failed:
            logger.warning("%d of %d checks failed: %s", len(failed), len(report), ", ".join(failed))
        else:
            logger.info("all %d checks passed", len(report))
        return report
