"""Linear maps from laboratory deviations to the common detuning error.

Coefficients are calibrated from single-point robustness data: the deviation
at which a perfectly phase-matched crystal drops to 90% of its peak pair rate.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

from scipy.optimize import brentq

from .errors import CalibrationError, ConfigurationError, InvalidArgumentError
from .su11 import Segment, pair_mean, segment_matrix

# Weak-pump coupling of the 60 mW, 40 um waist, 532 nm -> 1064 nm KTP setup.
# Any value with omega * L << 1 gives the same calibration to ~1e-5 relative.
DEFAULT_OMEGA = 1.0  # rad/m
REFERENCE_LENGTH = 20e-3  # m
REFERENCE_TEMPERATURE = 37.0  # deg C


class Axis(str, enum.Enum):
    TEMPERATURE = "temperature"
    WAVELENGTH = "wavelength"
    ANGLE = "angle"
    EPSILON = "epsilon"


UNITS = {Axis.TEMPERATURE: "degC", Axis.WAVELENGTH: "nm", Axis.ANGLE: "deg", Axis.EPSILON: "rad/m"}


@dataclass(frozen=True)
class CalibrationDatum:
    crystal_length: float
    omega: float
    width_value: float
    axis: Axis

    def __post_init__(self):
        object.__setattr__(self, "axis", Axis(self.axis))
        if not self.crystal_length > 0:
            raise InvalidArgumentError("crystal_length must be positive")
        if not self.width_value > 0:
            raise InvalidArgumentError("width_value must be positive")
        if self.axis is Axis.EPSILON:
            raise InvalidArgumentError("the epsilon axis needs no calibration")


@dataclass(frozen=True)
class SensitivityCoefficients:
    dk_dT: float | None = None
    dk_dlambda: float | None = None
    dk_dtheta: float | None = None
    reference: tuple[CalibrationDatum, ...] = field(default=(), compare=False)

    def __post_init__(self):
        for name in ("dk_dT", "dk_dlambda", "dk_dtheta"):
            value = getattr(self, name)
            if value is not None and not math.isfinite(value):
                raise InvalidArgumentError(f"{name} must be finite")

    def coefficient(self, axis: Axis | str) -> float:
        axis = Axis(axis)
        if axis is Axis.EPSILON:
            return 1.0
        value = getattr(self, _FIELD[axis])
        if value is None or value == 0:
            raise ConfigurationError(f"axis {axis.value!r} is not calibrated")
        return value

    def with_coefficient(self, axis: Axis | str, value: float, datum: CalibrationDatum | None = None):
        axis = Axis(axis)
        ref = self.reference + ((datum,) if datum is not None else ())
        return replace(self, reference=ref, **{_FIELD[axis]: value})

    def calibrated_axes(self) -> list[Axis]:
        return [a for a, f in _FIELD.items() if getattr(self, f)]


_FIELD = {Axis.TEMPERATURE: "dk_dT", Axis.WAVELENGTH: "dk_dlambda", Axis.ANGLE: "dk_dtheta"}


def width90_epsilon(crystal_length: float, omega: float) -> float:
    """Half-width in detuning at which a phase-matched crystal falls to 90% of its peak."""
    if not (crystal_length > 0 and omega > 0):
        raise InvalidArgumentError("crystal_length and omega must be positive")
    seg = Segment(omega, 0.0, crystal_length)
    peak = pair_mean(segment_matrix(seg, 0.0))

    def excess(eps):
        return pair_mean(segment_matrix(seg, eps)) / peak - 0.9

    hi = 1.0 / crystal_length
    for _ in range(60):
        if excess(hi) < 0:
            break
        hi *= 2.0
    else:
        raise CalibrationError("no 90% crossing found")
    return brentq(excess, 0.0, hi, xtol=1e-14, rtol=1e-15, maxiter=500)


def calibrate(datum: CalibrationDatum) -> float:
    """Detuning per unit deviation (rad/m per degC, nm or degree)."""
    return width90_epsilon(datum.crystal_length, datum.omega) / datum.width_value


def calibrate_all(data) -> SensitivityCoefficients:
    coeffs = SensitivityCoefficients()
    for datum in data:
        coeffs = coeffs.with_coefficient(datum.axis, calibrate(datum), datum)
    return coeffs


def epsilon_from(coeffs: SensitivityCoefficients, axis: Axis | str, deviation: float) -> float:
    return coeffs.coefficient(axis) * deviation


# Reference robustness of the 20 mm periodically poled KTP crystal.
REFERENCE_DATA = (
    CalibrationDatum(REFERENCE_LENGTH, DEFAULT_OMEGA, 0.445, Axis.TEMPERATURE),
    CalibrationDatum(REFERENCE_LENGTH, DEFAULT_OMEGA, 10.64, Axis.WAVELENGTH),
    CalibrationDatum(REFERENCE_LENGTH, DEFAULT_OMEGA, 0.227, Axis.ANGLE),
)


def default_coefficients() -> SensitivityCoefficients:
    return calibrate_all(REFERENCE_DATA)
