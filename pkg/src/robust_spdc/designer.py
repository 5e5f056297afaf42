"""Search for anti-symmetric composite designs with a flat pair rate.

Every member of the family is fixed by ``N/2`` detunings and one uniform
coupling: segment ``N + 1 - j`` carries the opposite detuning of segment
``j`` and each segment is a quarter of a harmonic-regime oscillation long.
The detunings are tuned until the low-order derivatives of the pair rate
with respect to a common detuning error vanish.
"""

from __future__ import annotations

import math
import warnings
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares, minimize
from scipy.stats import qmc

from .errors import DegenerateDesignError, InvalidArgumentError, RegimeViolationError
from .robustness import (RobustnessReport, RobustnessSpec, auto_width_90, beta2_derivatives,
                         efficiency_ratio, flatness_metric, reference_design)
from .sensitivity import SensitivityCoefficients, default_coefficients
from .su11 import Design, Segment
from .taylor import mu_derivatives

# Margin above the hyperbolic/harmonic boundary |dk| = 2 omega kept by the search.
_REGIME_MARGIN = 0.01
CONVERGENCE_TOL = 1e-9
_DUPLICATE_RTOL = 1e-4


@dataclass(frozen=True)
class AntisymmetricFamily:
    half_detunings: tuple[float, ...]
    omega: float

    def __post_init__(self):
        object.__setattr__(self, "half_detunings", tuple(float(v) for v in self.half_detunings))
        if not self.half_detunings:
            raise InvalidArgumentError("need at least one detuning")
        if self.omega < 0:
            raise InvalidArgumentError("omega must be >= 0")

    @property
    def n_segments(self) -> int:
        return 2 * len(self.half_detunings)

    @property
    def detunings(self) -> list[float]:
        h = list(self.half_detunings)
        return h + [-v for v in reversed(h)]


@dataclass(frozen=True)
class DesignConstraints:
    min_domain_width: float | None = None
    efficiency_floor: float = 0.1
    flatness: RobustnessSpec = field(default_factory=RobustnessSpec)
    max_total_length: float = 20e-3
    delta_k_material: float | None = None

    def __post_init__(self):
        if self.min_domain_width is not None and not self.min_domain_width > 0:
            raise InvalidArgumentError("min_domain_width must be positive")
        if not self.max_total_length > 0:
            raise InvalidArgumentError("max_total_length must be positive")


def quarter_period_length(delta_k: float, omega: float) -> float:
    g2 = (delta_k / 2.0) ** 2 - omega**2
    if g2 <= 0:
        raise RegimeViolationError(
            f"detuning {delta_k:g} rad/m is not in the harmonic regime for omega {omega:g} rad/m")
    return math.pi / (2.0 * math.sqrt(g2))


def build_family(family: AntisymmetricFamily, name: str = "dmcs", work_temperature: float = 37.0) -> Design:
    segs = tuple(Segment(family.omega, dk, quarter_period_length(dk, family.omega)) for dk in family.detunings)
    meta = {"family": "antisymmetric", "half_detunings_rad_per_m": list(family.half_detunings)}
    return Design(segs, name=name, work_temperature=work_temperature, metadata=meta)


def residuals(family: AntisymmetricFamily, order: int = 2) -> np.ndarray:
    """Pair-rate derivatives of orders 1..order, each divided by ``mu(0) * L**m``."""
    design = build_family(family)
    d = mu_derivatives(design, order)
    if d[0] <= 0:
        raise DegenerateDesignError("family member generates no pairs")
    length = design.total_length
    return np.array([d[m] / (d[0] * length**m) for m in range(1, order + 1)])


def validate(design: Design, constraints: DesignConstraints,
             coeffs: SensitivityCoefficients | None = None) -> RobustnessReport:
    """Evaluate every design constraint; failures are reported, never raised."""
    coeffs = coeffs or default_coefficients()
    spec = constraints.flatness
    try:
        derivs = beta2_derivatives(design, min(spec.order, 4), check=False)
    except Exception:  # noqa: BLE001
        derivs = []
    try:
        flat = flatness_metric(design, spec, coeffs)
    except DegenerateDesignError:
        flat = math.inf
    ref = reference_design(design)
    widths, ref_widths = {}, {}
    for axis in coeffs.calibrated_axes():
        try:
            widths[axis.value] = auto_width_90(design, axis, coeffs)
        except Exception:  # noqa: BLE001
            widths[axis.value] = math.nan
        ref_widths[axis.value] = auto_width_90(ref, axis, coeffs)
    eff = efficiency_ratio(design)
    verdicts = {
        "flatness": flat < spec.flatness_threshold,
        "efficiency": eff >= constraints.efficiency_floor,
        "length": design.total_length <= constraints.max_total_length * (1 + 1e-9),
        "fabrication": fabrication_ok(design, constraints),
    }
    return RobustnessReport(derivs, flat, widths, ref_widths, eff, verdicts)


def fabrication_ok(design: Design, constraints: DesignConstraints) -> bool | None:
    """Whether every segment's poling half-period is realizable; None if unspecified."""
    if constraints.delta_k_material is None or constraints.min_domain_width is None:
        return None
    for seg in design.segments:
        k_grating = constraints.delta_k_material - seg.delta_k
        if k_grating <= 0 or math.pi / k_grating < constraints.min_domain_width:
            return False
    return True


@dataclass
class SolveResult:
    candidates: list[Design]
    reports: list[RobustnessReport]
    diagnostics: dict

    def __len__(self):
        return len(self.candidates)

    def __iter__(self):
        return iter(self.candidates)

    def __getitem__(self, i):
        return self.candidates[i]

    @property
    def summary(self) -> str:
        d = self.diagnostics
        text = f"{d['starts']} starts, {d['converged']} converged, {len(self.candidates)} accepted"
        if not self.candidates:
            if d["converged"] == 0:
                text += "; no start satisfied the derivative conditions"
            else:
                text += f"; dominant failing constraint: {d['dominant_failure']}"
        return text


def _start_points(n_half: int, starts: int, seed: int, lo: float, hi: float) -> list[np.ndarray]:
    sampler = qmc.Sobol(d=n_half, scramble=True, seed=seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        unit = sampler.random(starts)
    mags = np.exp(np.log(lo) + unit * (np.log(hi) - np.log(lo)))
    out = []
    for i, m in enumerate(mags):
        pattern = i % (2**n_half)
        signs = np.array([-1.0 if pattern >> b & 1 else 1.0 for b in range(n_half)])
        out.append(signs * m)
    return out


def _refine(start: np.ndarray, omega: float, order: int, target_length: float, dk_max: float,
            flatness_objective=None):
    """Drive one start onto the derivative-zero set, then slide along it to minimize flatness."""
    signs = np.sign(start)
    lower = math.log(2 * omega * (1 + _REGIME_MARGIN))
    upper = math.log(dk_max)
    x0 = np.clip(np.log(np.abs(start)), lower + 1e-9, upper - 1e-9)

    def family(x):
        return AntisymmetricFamily(tuple(signs * np.exp(x)), omega)

    def conditions(x):
        fam = family(x)
        try:
            r = residuals(fam, order)
        except (DegenerateDesignError, RegimeViolationError):
            return np.full(order + 1, 1e6)
        return np.append(r, build_family(fam).total_length / target_length - 1.0)

    def project(x):
        sol = least_squares(conditions, x, bounds=(lower, upper), method="trf", xtol=1e-15, ftol=1e-15,
                            gtol=1e-15, max_nfev=400)
        return sol.x, bool(np.max(np.abs(sol.fun)) < CONVERGENCE_TOL)

    x, converged = project(x0)
    if converged and flatness_objective is not None and len(x) > order // 2 + 1:
        # The conditions leave a manifold of solutions when there are more
        # detunings than independent conditions; pick its flattest point.
        def objective(y):
            try:
                return flatness_objective(build_family(family(y)))
            except (DegenerateDesignError, RegimeViolationError):
                return 1e6

        # Odd orders vanish identically and would make the constraint Jacobian singular.
        active = [m - 1 for m in range(2, order + 1, 2)] + [order]
        opt = minimize(objective, x, method="SLSQP", bounds=[(lower, upper)] * len(x),
                       constraints=[{"type": "eq", "fun": lambda y: conditions(y)[active]}],
                       options={"ftol": 1e-16, "maxiter": 200})
        y, ok = project(opt.x)
        if ok and objective(y) <= objective(x):
            x = y
    return signs * np.exp(x), converged


def solve(n_segments: int, omega: float, constraints: DesignConstraints | None = None, order: int = 2,
          starts: int = 64, seed: int = 0, coeffs: SensitivityCoefficients | None = None,
          initial: list | None = None, dk_max: float | None = None, workers: int = 1,
          optimize_flatness: bool = True) -> SolveResult:
    """Multi-start least squares over the half detunings.

    Each start minimizes the normalized derivative residuals together with the
    relative mismatch between total length and ``constraints.max_total_length``.
    Because odd derivatives vanish identically for this family, order ``M``
    imposes only ``M // 2`` independent conditions; with ``optimize_flatness``
    the remaining freedom is spent minimizing the flatness metric while the
    conditions are held as equality constraints.  Converged candidates are
    validated and those passing every evaluated constraint are returned
    sorted by flatness.  ``initial`` replaces the low-discrepancy start points.
    """
    if n_segments not in (2, 4, 6, 8):
        raise InvalidArgumentError("n_segments must be 2, 4, 6 or 8")
    if starts < 1:
        raise InvalidArgumentError("starts must be >= 1")
    if not omega > 0:
        raise InvalidArgumentError("omega must be positive")
    constraints = constraints or DesignConstraints()
    coeffs = coeffs or default_coefficients()
    n_half = n_segments // 2
    target = constraints.max_total_length
    dk_max = dk_max or 200 * math.pi / target
    lo = max(2 * omega * (1 + 2 * _REGIME_MARGIN), math.pi / target)

    if initial is not None:
        points = [np.asarray(p, dtype=float) for p in initial][:starts]
    else:
        points = _start_points(n_half, starts, seed, lo, dk_max)

    flatness_objective = None
    if optimize_flatness and coeffs.dk_dT:
        spec = constraints.flatness
        flatness_objective = lambda d: flatness_metric(d, spec, coeffs, n_quadrature=65)  # noqa: E731

    def run(p):
        return _refine(p, omega, order, target, dk_max, flatness_objective)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, points))
    else:
        results = [run(p) for p in points]

    # Starts that slid to the same optimum agree only to solver tolerance;
    # cluster them in canonical order so the outcome ignores start ordering.
    converged = sorted(((tuple(float(v) for v in h), index) for index, (h, ok) in enumerate(results) if ok))
    seen = {}
    for key, index in converged:
        if not any(np.allclose(key, other, rtol=_DUPLICATE_RTOL, atol=0) for other in seen):
            seen[key] = (index, np.array(key))

    failures = Counter()
    accepted = []
    for key, (index, h) in seen.items():
        design = build_family(AntisymmetricFamily(tuple(h), omega),
                              work_temperature=constraints.flatness.work_temperature)
        report = validate(design, constraints, coeffs)
        for name, verdict in report.verdicts.items():
            if verdict is False:
                failures[name] += 1
        if report.passed:
            accepted.append((report.flatness, key, h, index, report))

    # Mirror-image designs tie in flatness up to rounding noise; compare it
    # at 6 significant digits so the canonical key decides such ties.
    accepted.sort(key=lambda item: (float(f"{item[0]:.6g}"), item[1]))
    candidates, reports = [], []
    for rank, (flat, key, h, index, report) in enumerate(accepted, start=1):
        meta = {
            "family": "antisymmetric",
            "half_detunings_rad_per_m": [float(v) for v in h],
            "omega_rad_per_m": float(omega),
            "order": order,
            "seed": seed,
            "start_index": index,
            "rank": rank,
        }
        design = build_family(AntisymmetricFamily(tuple(h), omega), name=f"dmcs-n{n_segments}-rank{rank}",
                              work_temperature=constraints.flatness.work_temperature)
        candidates.append(Design(design.segments, name=design.name, work_temperature=design.work_temperature,
                                 metadata=meta))
        reports.append(report)
    diagnostics = {
        "starts": len(points),
        "converged": len(seen),
        "failures": dict(failures),
        "dominant_failure": failures.most_common(1)[0][0] if failures else None,
    }
    return SolveResult(candidates, reports, diagnostics)
