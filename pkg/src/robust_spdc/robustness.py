"""Error-resilience measures for composite designs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson
from scipy.optimize import brentq

from .errors import (DegenerateDesignError, InsufficientRangeError, InvalidArgumentError,
                     NumericalConsistencyError)
from .sensitivity import Axis, SensitivityCoefficients, epsilon_from, width90_epsilon
from .su11 import Design, Segment, design_mu, mu_curve, periodically_poled
from .taylor import mu_derivatives


@dataclass(frozen=True)
class RobustnessSpec:
    work_temperature: float = 37.0
    half_window: float = 2.4
    order: int = 2
    flatness_threshold: float = 0.01

    def __post_init__(self):
        if not self.half_window > 0:
            raise InvalidArgumentError("half_window must be positive")
        if not self.flatness_threshold > 0:
            raise InvalidArgumentError("flatness_threshold must be positive")
        if self.order < 1:
            raise InvalidArgumentError("order must be >= 1")


@dataclass
class RobustnessReport:
    derivatives: list[float]
    flatness: float
    widths: dict[str, float]
    reference_widths: dict[str, float]
    efficiency_ratio: float
    verdicts: dict[str, bool | None] = field(default_factory=dict)

    @property
    def width_ratios(self) -> dict[str, float]:
        return {k: self.widths[k] / self.reference_widths[k] for k in self.widths}

    @property
    def passed(self) -> bool:
        return all(v is not False for v in self.verdicts.values())


@dataclass
class SweepTable:
    deviation: np.ndarray
    mu: np.ndarray
    mu_normalized: np.ndarray
    axis: Axis

    def __len__(self):
        return len(self.deviation)


def _central_differences(f, h: float) -> np.ndarray:
    """Five-point central estimates of f', f'', f''', f'''' at 0."""
    fm2, fm1, f0, fp1, fp2 = (f(k * h) for k in (-2, -1, 0, 1, 2))
    return np.array([
        (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * h),
        (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * h * h),
        (-fm2 + 2 * fm1 - 2 * fp1 + fp2) / (2 * h**3),
        (fm2 - 4 * fm1 + 6 * f0 - 4 * fp1 + fp2) / h**4,
    ])


def finite_difference_derivatives(design: Design, order: int, step: float | None = None) -> np.ndarray:
    """Richardson-extrapolated central differences of |beta(eps)|^2 at eps = 0."""
    if step is None:
        step = 0.05 / design.total_length
    f = lambda e: design_mu(design, e)  # noqa: E731
    coarse = _central_differences(f, step)
    fine = _central_differences(f, step / 2)
    # first two stencils are O(h^4), the last two O(h^2)
    gain = np.array([16.0, 16.0, 4.0, 4.0])
    return ((gain * fine - coarse) / (gain - 1))[:order]


def beta2_derivatives(design: Design, order: int = 2, check: bool = True, rtol: float = 1e-5) -> list[float]:
    """d^m |beta|^2 / d eps^m at eps = 0 for m = 1..order.

    Computed exactly from the Taylor expansion of every segment propagator.
    With ``check`` the result is compared against finite differences, scaled
    by ``mu(0) * L**m``.
    """
    if not 1 <= order <= 4:
        raise InvalidArgumentError("order must be in [1, 4]")
    exact = mu_derivatives(design, order)
    if check:
        fd = finite_difference_derivatives(design, order)
        length = design.total_length
        mu0 = max(abs(exact[0]), 1e-300)
        for m in range(1, order + 1):
            scale = max(mu0 * length**m, abs(exact[m]))
            if abs(exact[m] - fd[m - 1]) > rtol * scale:
                raise NumericalConsistencyError(
                    f"order {m}: analytic {exact[m]:.6e} vs finite difference {fd[m - 1]:.6e}")
    return [float(v) for v in exact[1:]]


def flatness_integral(rate, half_window: float, n_quadrature: int = 1025) -> float:
    """Composite-Simpson mean of ``(rate(t) / rate(0) - 1)**2`` over ``|t| <= half_window``.

    ``rate`` is evaluated on an array of offsets; an even ``n_quadrature``
    is bumped to the next odd count so the rule stays composite Simpson.
    """
    if n_quadrature < 3:
        raise InvalidArgumentError("n_quadrature must be >= 3")
    if n_quadrature % 2 == 0:
        n_quadrature += 1
    t = np.linspace(-half_window, half_window, n_quadrature)
    ref = float(np.asarray(rate(np.array([0.0])))[0])
    if not ref > 0:
        raise DegenerateDesignError("design generates no pairs at the working temperature")
    values = np.asarray(rate(t), dtype=float)
    return float(simpson((values / ref - 1.0) ** 2, x=t) / (2 * half_window))


def flatness_metric(design: Design, spec: RobustnessSpec, coeffs: SensitivityCoefficients,
                    n_quadrature: int = 1025) -> float:
    """Mean squared relative departure of the pair rate from its working-point value."""
    return flatness_integral(lambda dT: mu_curve(design, epsilon_from(coeffs, Axis.TEMPERATURE, dT)),
                             spec.half_window, n_quadrature)


def _scan_bounds(scan_range) -> tuple[float, float]:
    if np.ndim(scan_range) == 0:
        half = abs(float(scan_range))
        return -half, half
    lo, hi = (float(v) for v in scan_range)
    return lo, hi


def sweep(design: Design, axis: Axis | str, coeffs: SensitivityCoefficients, scan_range, points: int) -> SweepTable:
    axis = Axis(axis)
    lo, hi = _scan_bounds(scan_range)
    if lo == hi:
        dev = np.array([lo])
    else:
        if points < 3:
            raise InvalidArgumentError("a sweep needs at least 3 points")
        dev = np.linspace(lo, hi, points)
    mu = mu_curve(design, epsilon_from(coeffs, axis, dev))
    peak = mu.max()
    norm = mu / peak if peak > 0 else np.zeros_like(mu)
    return SweepTable(dev, mu, norm, axis)


def width_from_samples(x: np.ndarray, y: np.ndarray, level: float = 0.9) -> float:
    """Full width of the contiguous region around the maximum where y >= level * max."""
    i = int(np.argmax(y))
    threshold = level * y[i]
    j = i
    while j > 0 and y[j - 1] >= threshold:
        j -= 1
    k = i
    while k < len(y) - 1 and y[k + 1] >= threshold:
        k += 1
    if j == 0 or k == len(y) - 1:
        raise InsufficientRangeError("90% crossings lie outside the scanned range")
    left = x[j - 1] + (threshold - y[j - 1]) * (x[j] - x[j - 1]) / (y[j] - y[j - 1])
    right = x[k] + (y[k] - threshold) * (x[k + 1] - x[k]) / (y[k] - y[k + 1])
    return float(right - left)


def width_90(design: Design, axis: Axis | str, coeffs: SensitivityCoefficients, scan_range,
             scan_points: int = 481) -> float:
    table = sweep(design, axis, coeffs, scan_range, scan_points)
    return width_from_samples(table.deviation, table.mu)


def auto_width_90(design: Design, axis: Axis | str, coeffs: SensitivityCoefficients,
                  points_per_pp_width: int = 40) -> float:
    """``width_90`` with a scan range grown from the phase-matched width until it suffices.

    The grid spacing is pinned to a fraction of the width of a uniform crystal
    of the same length, so fine features stay resolved as the range grows.
    """
    axis = Axis(axis)
    base = 2 * width90_epsilon(design.total_length, design.mean_omega) / abs(coeffs.coefficient(axis))
    half = 2 * base
    for _ in range(8):
        points = int(2 * half / base * points_per_pp_width) | 1
        try:
            return width_90(design, axis, coeffs, half, points)
        except InsufficientRangeError:
            half *= 2
    raise InsufficientRangeError("could not bracket the 90% crossings")


def reference_design(design: Design) -> Design:
    """Perfectly quasi-phase-matched crystal of the same length and coupling."""
    return periodically_poled(design.total_length, design.mean_omega, work_temperature=design.work_temperature)


def efficiency_ratio(design: Design) -> float:
    return design_mu(design, 0.0) / design_mu(reference_design(design), 0.0)


def scale_design(design: Design, r: float) -> Design:
    """Stretch lengths by ``r`` while dividing detunings and coupling by ``r``.

    The pump power of the scaled design is lower by ``r**2``; its response at
    detuning error ``eps / r`` equals the original response at ``eps``.
    """
    if not r > 0 or not math.isfinite(r):
        raise InvalidArgumentError("scale factor must be positive")
    if r == 1:
        return design
    segs = tuple(Segment(s.omega / r, s.delta_k / r, s.length * r) for s in design.segments)
    return Design(segs, name=design.name, work_temperature=design.work_temperature, metadata=dict(design.metadata))


def matching_intensity_factor(design: Design, reference_length: float) -> float:
    """Pump-intensity multiplier that lets a shorter phase-matched crystal match ``design``.

    The reference crystal has length ``reference_length`` and coupling
    ``sqrt(q) * omega``; the returned ``q`` makes its pair rate equal that of
    ``design`` at the working point.
    """
    if not reference_length > 0:
        raise InvalidArgumentError("reference_length must be positive")
    target = design_mu(design, 0.0)
    if target <= 0:
        raise DegenerateDesignError("design generates no pairs")
    omega = design.mean_omega

    def excess(q):
        return design_mu(periodically_poled(reference_length, math.sqrt(q) * omega), 0.0) - target

    hi = 1.0
    while excess(hi) < 0:
        hi *= 2.0
    return float(brentq(excess, 0.0, hi, xtol=1e-14, rtol=1e-13))


def width_matched_length(design: Design, coeffs: SensitivityCoefficients) -> float:
    """Length of the phase-matched crystal whose temperature width equals that of ``design``."""
    ratio = auto_width_90(design, Axis.TEMPERATURE, coeffs) / auto_width_90(reference_design(design),
                                                                             Axis.TEMPERATURE, coeffs)
    # In the weak-pump limit the width scales inversely with length.
    return design.total_length / ratio
