"""Exact Taylor coefficients of the composite propagator in the detuning error.

Every segment propagator (stripped of its diagonal mismatch-phase factor,
which cannot change |beta|) is

    U(eps) = C(x) * I + S(x) * M(eps),     x = omega^2 - ((delta_k + eps) / 2)^2

with ``C(x) = cosh(sqrt(x) l)``, ``S(x) = sinh(sqrt(x) l) / sqrt(x)`` and
``M(eps) = [[i dk'/2, -i omega], [i omega, -i dk'/2]]``.  ``C`` and ``S`` are
entire in ``x`` and their x-derivatives are spherical Bessel ratios, so the
coefficients of U in powers of eps follow from Faa di Bruno on a quadratic
inner function.  Products of segments are Cauchy products of coefficient
arrays.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import spherical_in, spherical_jn

from .su11 import Design, Segment

_SERIES_LIMIT = 1.0


def _double_factorial_odd(n: int) -> float:
    # (2n + 1)!!
    return float(math.prod(range(1, 2 * n + 2, 2)))


def _bessel_ratio(n: int, q: float) -> float:
    """``i_n(t) / t**n`` with ``t = sqrt(q)``, continued analytically to q < 0."""
    if abs(q) < _SERIES_LIMIT:
        total = 0.0
        term = 1.0 / _double_factorial_odd(n)
        k = 0
        while True:
            total += term
            k += 1
            term *= (q / 2.0) / (k * (2 * n + 2 * k + 1))
            if abs(term) < 1e-18 * abs(total) or k > 60:
                return total + term
    if q > 0:
        t = math.sqrt(q)
        return float(spherical_in(n, t)) / t**n
    y = math.sqrt(-q)
    return float(spherical_jn(n, y)) / y**n


def sinhc_derivatives(x: float, length: float, order: int) -> np.ndarray:
    """d^n/dx^n of ``sinh(sqrt(x) l) / sqrt(x)`` for n = 0..order."""
    q = x * length * length
    return np.array([length * (length * length / 2.0) ** n * _bessel_ratio(n, q) for n in range(order + 1)])


def cosh_derivatives(x: float, length: float, order: int) -> np.ndarray:
    """d^n/dx^n of ``cosh(sqrt(x) l)`` for n = 0..order."""
    q = x * length * length
    if q >= 0:
        c0 = math.cosh(math.sqrt(q))
    else:
        c0 = math.cos(math.sqrt(-q))
    out = np.empty(order + 1)
    out[0] = c0
    if order:
        out[1:] = 0.5 * length * sinhc_derivatives(x, length, order - 1)
    return out


def cauchy(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Truncated product of two matrix-valued coefficient arrays, ``a(eps) @ b(eps)``."""
    out = np.zeros_like(a)
    for k in range(len(a)):
        for i in range(k + 1):
            out[k] += a[i] @ b[k - i]
    return out


def _compose_scalar(derivs: np.ndarray, inner: np.ndarray) -> np.ndarray:
    """Coefficients of f(x0 + d(eps)) given f^(n)(x0) and the shift d (d[0] == 0)."""
    order = len(inner) - 1
    out = np.zeros(order + 1)
    power = np.zeros(order + 1)
    power[0] = 1.0
    for n in range(order + 1):
        out += derivs[n] / math.factorial(n) * power
        power = np.convolve(power, inner)[: order + 1]
    return out


def segment_jet(segment: Segment, order: int) -> np.ndarray:
    """Taylor coefficients of the frame-stripped segment propagator, shape (order+1, 2, 2)."""
    dk, om, l = segment.delta_k, segment.omega, segment.length
    x0 = om * om - dk * dk / 4.0
    inner = np.zeros(order + 1)
    if order >= 1:
        inner[1] = -dk / 2.0
    if order >= 2:
        inner[2] = -0.25
    c = _compose_scalar(cosh_derivatives(x0, l, order), inner)
    s = _compose_scalar(sinhc_derivatives(x0, l, order), inner)
    m = np.zeros((order + 1, 2, 2), dtype=complex)
    m[0] = [[0.5j * dk, -1j * om], [1j * om, -0.5j * dk]]
    if order >= 1:
        m[1] = [[0.5j, 0], [0, -0.5j]]
    jet = _scalar_times_matrix(s, m)
    jet[:, 0, 0] += c
    jet[:, 1, 1] += c
    return jet


def _scalar_times_matrix(s: np.ndarray, m: np.ndarray) -> np.ndarray:
    order = len(s) - 1
    out = np.zeros_like(m)
    for k in range(order + 1):
        for i in range(k + 1):
            out[k] += s[i] * m[k - i]
    return out


def design_jet(design: Design, order: int) -> np.ndarray:
    jet = None
    for seg in design.segments:
        sj = segment_jet(seg, order)
        jet = sj if jet is None else cauchy(sj, jet)
    return jet


def mu_taylor(design: Design, order: int) -> np.ndarray:
    """Taylor coefficients of |beta(eps)|^2 about eps = 0, orders 0..order."""
    b = design_jet(design, order)[:, 0, 1]
    out = np.zeros(order + 1)
    for k in range(order + 1):
        out[k] = sum((b[i] * b[k - i].conjugate()).real for i in range(k + 1))
    return out


def mu_derivatives(design: Design, order: int) -> np.ndarray:
    """d^m |beta|^2 / d eps^m at eps = 0 for m = 0..order."""
    coeffs = mu_taylor(design, order)
    return np.array([math.factorial(k) * c for k, c in enumerate(coeffs)])
