"""Undepleted-pump SU(1,1) propagation for segmented chi(2) crystals.

A segment is described by its coupling ``omega`` (rad/m), phase mismatch
``delta_k`` (rad/m) and ``length`` (m).  The signal/idler amplitudes
``(A_s, A_i*)`` evolve under

    d/dz A_s  = -i omega exp(-i phi(z)) A_i*
    d/dz A_i* = +i omega exp(+i phi(z)) A_s

where ``phi(z)`` is the accumulated mismatch phase.  A common detuning error
``epsilon`` is added to the mismatch of every segment.

Composite designs keep ``phi`` continuous across segment boundaries, which is
what a poling pattern with uninterrupted domain alternation produces.  Each
segment's closed-form propagator is therefore referenced to the mismatch
phase accumulated at its entrance before the product is taken.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import constants

from .errors import InvalidArgumentError, InvalidSegmentError

# Below this |g^2| z^2 the cosh/sinh (or cos/sin) forms lose accuracy and the
# truncated Taylor series is used instead.
_SERIES_THRESHOLD = 1e-12


@dataclass(frozen=True)
class Segment:
    omega: float
    delta_k: float
    length: float

    def __post_init__(self):
        if not (self.length > 0) or not math.isfinite(self.length):
            raise InvalidSegmentError(f"segment length must be positive, got {self.length!r}")
        if not (self.omega >= 0) or not math.isfinite(self.omega):
            raise InvalidSegmentError(f"segment omega must be >= 0, got {self.omega!r}")
        if not math.isfinite(self.delta_k):
            raise InvalidSegmentError(f"segment delta_k must be finite, got {self.delta_k!r}")


@dataclass(frozen=True)
class Su11Matrix:
    """Propagator ``[[alpha, beta], [conj(beta), conj(alpha)]]``."""

    alpha: complex
    beta: complex

    @classmethod
    def identity(cls) -> "Su11Matrix":
        return cls(1.0 + 0j, 0j)

    def as_array(self) -> np.ndarray:
        a, b = self.alpha, self.beta
        return np.array([[a, b], [b.conjugate(), a.conjugate()]], dtype=complex)

    def __matmul__(self, other: "Su11Matrix") -> "Su11Matrix":
        a1, b1, a2, b2 = self.alpha, self.beta, other.alpha, other.beta
        return Su11Matrix(a1 * a2 + b1 * b2.conjugate(), a1 * b2 + b1 * a2.conjugate())

    def inverse(self) -> "Su11Matrix":
        return Su11Matrix(self.alpha.conjugate(), -self.beta)

    @property
    def pseudo_unitarity_defect(self) -> float:
        return abs(abs(self.alpha) ** 2 - abs(self.beta) ** 2 - 1.0)


@dataclass(frozen=True)
class Design:
    segments: tuple[Segment, ...]
    name: str = "design"
    work_temperature: float = 37.0
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise InvalidArgumentError("a design needs at least one segment")
        object.__setattr__(self, "segments", segs)

    @property
    def total_length(self) -> float:
        return math.fsum(s.length for s in self.segments)

    @property
    def n_segments(self) -> int:
        return len(self.segments)

    @property
    def mean_omega(self) -> float:
        """Length-weighted coupling, used when comparing against a uniform crystal."""
        return math.fsum(s.omega * s.length for s in self.segments) / self.total_length


@dataclass(frozen=True)
class PumpPhysics:
    chi2: float
    n_s: float
    n_i: float
    n_p: float
    omega_s: float
    omega_i: float
    omega_p: float
    pump_amplitude: float = 1.0

    def __post_init__(self):
        if abs(self.omega_p - self.omega_s - self.omega_i) > 1e-9 * abs(self.omega_p):
            raise InvalidArgumentError("pump frequency must equal signal + idler frequency")

    @property
    def omega(self) -> float:
        return abs(self.pump_amplitude * compute_kappa(self))


@dataclass(frozen=True)
class PhotonNumberDistribution:
    p: float
    n_max: int
    probabilities: np.ndarray
    mean: float
    variance: float


@dataclass(frozen=True)
class HyperboloidPoint:
    u: float
    v: float
    w: float

    @property
    def defect(self) -> float:
        return abs(self.u**2 + self.v**2 - (self.w + 1.0) ** 2 + 1.0)


@dataclass(frozen=True)
class TrajectorySample:
    z: float
    mu: float
    point: HyperboloidPoint


def _cosh_and_sinhc(g2: float, z: float) -> tuple[float, float]:
    """Return ``cosh(g z)`` and ``sinh(g z) / g`` for ``g = sqrt(g2)``.

    Both are entire functions of ``g2``; negative ``g2`` selects the harmonic
    forms ``cos`` and ``sin / g'`` without touching a complex square root.
    """
    q = g2 * z * z
    if abs(q) < _SERIES_THRESHOLD:
        return 1.0 + q / 2.0, z * (1.0 + q / 6.0)
    if g2 > 0:
        g = math.sqrt(g2)
        return math.cosh(g * z), math.sinh(g * z) / g
    g = math.sqrt(-g2)
    return math.cos(g * z), math.sin(g * z) / g


def segment_matrix(segment: Segment, epsilon: float = 0.0, entrance_phase: float = 0.0) -> Su11Matrix:
    """Closed-form propagator of one segment with detuning error ``epsilon``.

    ``entrance_phase`` is the mismatch phase already accumulated when the
    segment starts; it only rotates ``beta``.  With the default of zero this
    is the textbook single-crystal solution.
    """
    if not isinstance(segment, Segment):
        raise InvalidSegmentError("expected a Segment")
    dk = segment.delta_k + epsilon
    z = segment.length
    g2 = segment.omega**2 - (dk / 2.0) ** 2
    c, s = _cosh_and_sinhc(g2, z)
    phase = complex(math.cos(dk * z / 2.0), -math.sin(dk * z / 2.0))
    alpha = phase * complex(c, dk / 2.0 * s)
    beta = -1j * phase * segment.omega * s
    if entrance_phase:
        beta *= complex(math.cos(entrance_phase), -math.sin(entrance_phase))
    return Su11Matrix(alpha, beta)


def compose(matrices: Sequence[Su11Matrix]) -> Su11Matrix:
    """Product ``M_N ... M_2 M_1`` of matrices given in propagation order."""
    matrices = list(matrices)
    if not matrices:
        raise InvalidArgumentError("compose needs at least one matrix")
    out = matrices[0]
    for m in matrices[1:]:
        out = m @ out
    return out


def segment_matrices(design: Design, epsilon: float = 0.0) -> list[Su11Matrix]:
    """Phase-referenced propagators of every segment, in propagation order."""
    out = []
    phi = 0.0
    for seg in design.segments:
        out.append(segment_matrix(seg, epsilon, phi))
        phi += (seg.delta_k + epsilon) * seg.length
    return out


def design_matrix(design: Design, epsilon: float = 0.0) -> Su11Matrix:
    return compose(segment_matrices(design, epsilon))


def _segment_entries(omega: float, dk: np.ndarray, z: float) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized ``segment_matrix`` entries over an array of detunings."""
    g2 = omega**2 - (dk / 2.0) ** 2
    q = g2 * z * z
    hyper = q > 0
    series = np.abs(q) < _SERIES_THRESHOLD
    g = np.sqrt(np.abs(g2))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        c = np.where(hyper, np.cosh(np.where(hyper, g * z, 0.0)), np.cos(g * z))
        s = np.where(hyper, np.sinh(np.where(hyper, g * z, 0.0)), np.sin(g * z)) / g
    c = np.where(series, 1.0 + q / 2.0, c)
    s = np.where(series, z * (1.0 + q / 6.0), s)
    phase = np.exp(-0.5j * dk * z)
    return phase * (c + 0.5j * dk * s), -1j * phase * omega * s


def mu_curve(design: Design, epsilons) -> np.ndarray:
    """Pair mean ``|beta(eps)|^2`` of a design evaluated on an array of detuning errors."""
    eps = np.asarray(epsilons, dtype=float)
    alpha = np.ones(eps.shape, dtype=complex)
    beta = np.zeros(eps.shape, dtype=complex)
    phi = np.zeros(eps.shape)
    for seg in design.segments:
        dk = seg.delta_k + eps
        a, b = _segment_entries(seg.omega, dk, seg.length)
        b = b * np.exp(-1j * phi)
        alpha, beta = a * alpha + b * beta.conj(), a * beta + b * alpha.conj()
        phi = phi + dk * seg.length
    return np.abs(beta) ** 2


def pair_mean(matrix: Su11Matrix) -> float:
    return abs(matrix.beta) ** 2


def design_mu(design: Design, epsilon: float = 0.0) -> float:
    return pair_mean(design_matrix(design, epsilon))


def photon_statistics(matrix: Su11Matrix, n_max: int) -> PhotonNumberDistribution:
    if n_max < 1:
        raise InvalidArgumentError("n_max must be >= 1")
    mu = pair_mean(matrix)
    p = mu / (1.0 + mu)
    n = np.arange(n_max + 1)
    probs = (1.0 - p) * p**n
    return PhotonNumberDistribution(p=p, n_max=n_max, probabilities=probs, mean=mu, variance=mu * (mu + 1.0))


def multi_pair_probability(matrix: Su11Matrix) -> float:
    mu = pair_mean(matrix)
    p = mu / (1.0 + mu)
    return p * p


def hyperboloid_point(matrix: Su11Matrix) -> HyperboloidPoint:
    cross = 2.0 * matrix.alpha * matrix.beta.conjugate()
    return HyperboloidPoint(cross.real, cross.imag, 2.0 * pair_mean(matrix))


def trajectory(design: Design, epsilon: float = 0.0, samples_per_segment: int = 16) -> list[TrajectorySample]:
    """Cumulative state sampled at ``samples_per_segment`` equal steps per segment.

    The first sample is the crystal entrance (z = 0), so a design with N
    segments yields ``samples_per_segment * N + 1`` samples.
    """
    if samples_per_segment < 2:
        raise InvalidArgumentError("samples_per_segment must be >= 2")
    ident = Su11Matrix.identity()
    samples = [TrajectorySample(0.0, 0.0, hyperboloid_point(ident))]
    cumulative = ident
    z0 = 0.0
    phi = 0.0
    for seg in design.segments:
        for k in range(1, samples_per_segment + 1):
            part = Segment(seg.omega, seg.delta_k, seg.length * k / samples_per_segment)
            m = segment_matrix(part, epsilon, phi) @ cumulative
            samples.append(TrajectorySample(z0 + part.length, pair_mean(m), hyperboloid_point(m)))
        cumulative = segment_matrix(seg, epsilon, phi) @ cumulative
        phi += (seg.delta_k + epsilon) * seg.length
        z0 += seg.length
    return samples


def compute_kappa(physics: PumpPhysics) -> float:
    """Coupling per unit pump amplitude for first-order quasi-phase-matching."""
    ns, ni, npump = physics.n_s, physics.n_i, physics.n_p
    ws, wi, wp = physics.omega_s, physics.omega_i, physics.omega_p
    if min(ns, ni, npump) <= 0:
        raise InvalidArgumentError("refractive indices must be positive")
    if min(ws, wi, wp) <= 0:
        raise InvalidArgumentError("angular frequencies must be positive")
    prefactor = 2.0 * physics.chi2 / (math.pi * constants.hbar * constants.c)
    return -prefactor * math.sqrt(ws * wi * wp / (ns * ni * npump))


def uniform_design(omega: float, delta_ks: Iterable[float], lengths: Iterable[float], **kwargs) -> Design:
    return Design(tuple(Segment(omega, dk, l) for dk, l in zip(delta_ks, lengths)), **kwargs)


def periodically_poled(length: float, omega: float, name: str = "PP", work_temperature: float = 37.0) -> Design:
    """Perfectly quasi-phase-matched single-period crystal."""
    return Design((Segment(omega, 0.0, length),), name=name, work_temperature=work_temperature)
