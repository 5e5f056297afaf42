"""Domain-wall layouts that realize a composite design by quasi-phase-matching.

Inside segment ``j`` the local mismatch ``delta_k_j`` is left over after the
grating compensates part of the material mismatch, so the grating wavenumber
is ``delta_k_material - delta_k_j`` and every domain is half a period wide.
The domain sign keeps alternating across segment boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DesignFileError, FabricationError, InvalidArgumentError
from .su11 import Design, Segment

# Slack when deciding that two emitted widths are equal: positions are
# written with 12 significant digits, so widths carry an absolute error of
# order 1e-12 of the crystal length.
_WIDTH_RTOL = 1e-9
_POSITION_DIGITS_TOL = 1e-11


@dataclass(frozen=True)
class PolingPattern:
    """Domain start positions ``domain_walls`` (the first is 0) and their signs."""

    base_mismatch: float
    domain_walls: np.ndarray
    domain_signs: np.ndarray
    total_length: float

    def __post_init__(self):
        walls = np.asarray(self.domain_walls, dtype=float)
        signs = np.asarray(self.domain_signs, dtype=int)
        object.__setattr__(self, "domain_walls", walls)
        object.__setattr__(self, "domain_signs", signs)
        if walls.ndim != 1 or walls.shape != signs.shape or walls.size == 0:
            raise InvalidArgumentError("walls and signs must be equal-length 1-D arrays")
        if np.any(np.diff(walls) <= 0) or walls[-1] >= self.total_length:
            raise InvalidArgumentError("domain walls must increase strictly inside the crystal")
        if not set(np.unique(signs)) <= {-1, 1} or np.any(signs[1:] == signs[:-1]):
            raise InvalidArgumentError("domain signs must alternate between +1 and -1")

    @property
    def widths(self) -> np.ndarray:
        return np.diff(np.append(self.domain_walls, self.total_length))

    def __len__(self):
        return len(self.domain_walls)


def poling_pattern(design: Design, delta_k_material: float, min_domain_width: float) -> PolingPattern:
    """Lay out domains segment by segment.

    Each segment holds ``floor(l_j / (Lambda_j / 2))`` domains (at least one);
    whatever length is left is added to its last domain, so segment
    boundaries and the total length are reproduced exactly.
    """
    if not min_domain_width > 0:
        raise InvalidArgumentError("min_domain_width must be positive")
    walls, signs = [], []
    start, sign = 0.0, 1
    for j, seg in enumerate(design.segments, start=1):
        grating = delta_k_material - seg.delta_k
        if not grating > 0:
            raise FabricationError(f"segment {j}: poling period undefined (grating wavenumber {grating:g} rad/m)")
        half = math.pi / grating
        if half < min_domain_width:
            raise FabricationError(
                f"segment {j}: domain width {half:.4g} m below the fabrication limit {min_domain_width:.4g} m")
        count = max(1, math.floor(seg.length / half + 1e-9))
        for i in range(count):
            walls.append(start + i * half)
            signs.append(sign)
            sign = -sign
        start += seg.length
    return PolingPattern(delta_k_material, np.array(walls), np.array(signs), design.total_length)


def recover_segments(pattern: PolingPattern) -> list[tuple[float, float]]:
    """Rebuild ``(delta_k, length)`` per segment from the wall spacing alone.

    Runs of equal widths form a segment; a single odd width that is not
    followed by another of the same size is the residual domain closing the
    run.  Segments must contain at least two regular domains to be separable.
    """
    widths = pattern.widths
    atol = _POSITION_DIGITS_TOL * pattern.total_length
    same = lambda a, b: abs(a - b) <= _WIDTH_RTOL * max(a, b) + atol  # noqa: E731
    groups = []
    i = 0
    while i < len(widths):
        w = widths[i]
        j = i + 1
        while j < len(widths) and same(widths[j], w):
            j += 1
        regular = float(np.mean(widths[i:j]))
        length = float(np.sum(widths[i:j]))
        closes_run = j < len(widths) and not (j + 1 < len(widths) and same(widths[j + 1], widths[j]))
        if closes_run:
            length += widths[j]
            j += 1
        groups.append((pattern.base_mismatch - math.pi / regular, length))
        i = j
    return groups


def pattern_design(pattern: PolingPattern, omega: float, name: str = "recovered") -> Design:
    segs = tuple(Segment(omega, dk, length) for dk, length in recover_segments(pattern))
    return Design(segs, name=name)


def format_pattern(pattern: PolingPattern) -> str:
    lines = [
        "# position_m sign",
        f"# base_mismatch_rad_per_m {pattern.base_mismatch:.12g}",
        f"# total_length_m {pattern.total_length:.12g}",
    ]
    lines += [f"{z:.12g} {s:+d}" for z, s in zip(pattern.domain_walls, pattern.domain_signs)]
    return "\n".join(lines) + "\n"


def parse_pattern(text: str) -> PolingPattern:
    header, walls, signs = {}, [], []
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] in ("base_mismatch_rad_per_m", "total_length_m"):
                header[parts[0]] = float(parts[1])
            continue
        try:
            z, s = line.split()
            walls.append(float(z))
            signs.append(int(s))
        except ValueError:
            raise DesignFileError(f"expected '<position> <sign>', got {line!r}", field=f"line {number}") from None
    for key in ("base_mismatch_rad_per_m", "total_length_m"):
        if key not in header:
            raise DesignFileError("missing header entry", field=key)
    try:
        return PolingPattern(header["base_mismatch_rad_per_m"], np.array(walls), np.array(signs),
                             header["total_length_m"])
    except InvalidArgumentError as exc:
        raise DesignFileError(str(exc), field="domains") from None
