"""Brute-force integration of the coupled signal/idler equations.

Used only as an independent check on the closed-form propagators: nothing
here shares code with ``su11.segment_matrix``.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp

from .errors import OracleError
from .su11 import Design, Su11Matrix


def _integrate(design: Design, epsilon: float, rtol: float, step_count: int | None) -> np.ndarray:
    y = np.eye(2, dtype=complex).ravel()
    phi0 = 0.0
    for seg in design.segments:
        dk = seg.delta_k + epsilon
        om = seg.omega

        def rhs(z, y, dk=dk, om=om, phi0=phi0):
            e = np.exp(-1j * (phi0 + dk * z))
            a00, a01, a10, a11 = y
            # d/dz A = K A with K = [[0, -i om e], [i om conj(e), 0]]
            return np.array([
                -1j * om * e * a10,
                -1j * om * e * a11,
                1j * om * e.conjugate() * a00,
                1j * om * e.conjugate() * a01,
            ])

        max_step = seg.length / step_count if step_count else np.inf
        sol = solve_ivp(rhs, (0.0, seg.length), y, method="DOP853", rtol=rtol,
                        atol=rtol * 1e-3, max_step=max_step)
        if not sol.success:
            raise OracleError(sol.message)
        y = sol.y[:, -1]
        phi0 += dk * seg.length
    return y.reshape(2, 2)


def ode_oracle(design: Design, epsilon: float = 0.0, step_count: int | None = None,
               rtol: float = 1e-11, tolerance: float = 1e-8) -> Su11Matrix:
    """Propagator obtained by adaptive Runge-Kutta integration.

    The design is integrated twice, at ``rtol`` and at ``rtol / 100``; if the
    two runs disagree entrywise by more than ``tolerance`` (relative to the
    largest entry) the oracle refuses to answer.  ``step_count`` optionally
    caps the step size at ``length / step_count`` within each segment.
    """
    coarse = _integrate(design, epsilon, rtol, step_count)
    fine = _integrate(design, epsilon, rtol * 1e-2, step_count)
    scale = np.abs(fine).max()
    if np.abs(coarse - fine).max() > tolerance * scale:
        raise OracleError(
            f"successive refinements differ by {np.abs(coarse - fine).max() / scale:.3e} (relative)")
    return Su11Matrix(complex(fine[0, 0]), complex(fine[0, 1]))
