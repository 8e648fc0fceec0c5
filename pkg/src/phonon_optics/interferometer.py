"""Mach-Zehnder interferometer on the two vibrational modes.

The interferometer is temporal: a 50/50 splitter, a phase phi on the
center-of-mass mode, and a second 50/50 splitter, all realized as
exp(+i (pi/2) Jx) e^{i phi a+ a} exp(+i (pi/2) Jx).  The phonon-number
difference (Jz) of the output carries the phase; the report estimates the
phase error by error propagation with a numerical derivative, so it works
for arbitrary input states rather than only the coherent-input closed form.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from .fockspace import MotionalState, Truncation, expect
from .operators import UnitaryOperator, apply, beam_splitter, phase_shifter

DEFAULT_FD_STEP = 1e-4

SWEEP_CSV_HEADER = "phi,mean_jz,mean_jz2,var_jz,dmeanjz_dphi,delta_phi"


@dataclass(frozen=True)
class InterferometerReport:
    """Output statistics at one phase setting.

    delta_phi is sqrt(var_jz) / |d<Jz>/dphi|, or +inf where the signal slope
    vanishes (|slope| below 1e-14).
    """

    phi: float
    mean_jz: float
    mean_jz2: float
    var_jz: float
    dmeanjz_dphi: float
    delta_phi: float

    def __post_init__(self) -> None:
        if self.var_jz < -1e-12:
            raise ValueError(f"variance {self.var_jz} below roundoff floor")


@lru_cache(maxsize=None)
def _half_splitter(trunc: Truncation) -> UnitaryOperator:
    # exp(+i (pi/2) Jx), used twice per pass.
    return beam_splitter("b1", -math.pi / 2.0, trunc)


def mz_output(in_state: MotionalState, phi: float) -> MotionalState:
    """Push a motional state through the interferometer at phase phi."""
    half = _half_splitter(in_state.trunc)
    s = apply(half, in_state)
    s = apply(phase_shifter("c", phi, in_state.trunc), s)
    return apply(half, s)


def _mean_jz(in_state: MotionalState, phi: float) -> float:
    return expect(mz_output(in_state, phi), "jz")


def mz_report(
    in_state: MotionalState, phi: float, fd_step: float = DEFAULT_FD_STEP
) -> InterferometerReport:
    """Statistics of the output Jz plus the propagated phase error.

    The derivative is a central finite difference with step fd_step
    (restricted to (0, 0.1]); its O(step^2) bias is far below the
    tolerances used downstream.
    """
    if not 0.0 < fd_step <= 0.1:
        raise ValueError(f"fd_step must lie in (0, 0.1], got {fd_step}")
    out = mz_output(in_state, phi)
    mean_jz = expect(out, "jz")
    mean_jz2 = expect(out, "jz2")
    var = mean_jz2 - mean_jz**2
    slope = (_mean_jz(in_state, phi + fd_step) - _mean_jz(in_state, phi - fd_step)) / (
        2.0 * fd_step
    )
    if abs(slope) < 1e-14:
        delta_phi = math.inf
    else:
        delta_phi = math.sqrt(max(var, 0.0)) / abs(slope)
    return InterferometerReport(phi, mean_jz, mean_jz2, var, slope, delta_phi)


def phase_sweep(
    in_state: MotionalState,
    phis: Sequence[float],
    fd_step: float = DEFAULT_FD_STEP,
    workers: int = 1,
) -> list[InterferometerReport]:
    """One report per grid point, ordered like the grid."""
    grid = list(phis)
    if not grid:
        raise ValueError("phase grid must be nonempty")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda p: mz_report(in_state, p, fd_step), grid))
    return [mz_report(in_state, p, fd_step) for p in grid]


def sweep_to_csv(reports: Iterable[InterferometerReport]) -> str:
    lines = [SWEEP_CSV_HEADER]
    for r in reports:
        lines.append(
            f"{r.phi:.17g},{r.mean_jz:.17g},{r.mean_jz2:.17g},"
            f"{r.var_jz:.17g},{r.dmeanjz_dphi:.17g},{r.delta_phi:.17g}"
        )
    return "\n".join(lines) + "\n"
