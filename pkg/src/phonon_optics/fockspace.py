"""Truncated two-mode Fock space for the vibrational modes of two trapped ions.

The first index m counts phonons of the center-of-mass mode (label ``c``),
the second index n counts phonons of the breathing mode (label ``r``).
States live on the triangular basis {|m, n> : m + n <= n_total_max},
enumerated in lexicographic (total, m) order so that every fixed-total
subspace is one contiguous block.  Keeping complete total-number blocks is
what makes number-conserving unitaries exactly unitary on the truncated
space, with no leakage at the cutoff.

Qubit registers use the convention sigma_z |g> = -|g>, sigma_z |e> = +|e>,
with basis index 0 = |g> and 1 = |e>.

Everything here is immutable after construction and all operations are pure
functions, so concurrent read access needs no synchronization.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

# States whose discarded probability exceeds this are flagged but usable.
DEFAULT_TAIL_TOLERANCE = 1e-10

_NORM_TOL = 1e-12

_OBSERVABLES = ("jx", "jy", "jz", "jz2", "nc", "nr")


@lru_cache(maxsize=None)
def _mode_numbers(n_total_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Arrays (ms, ns) listing the basis pairs in (total, m) order."""
    ms = np.concatenate(
        [np.arange(total + 1) for total in range(n_total_max + 1)]
    ).astype(np.int64)
    totals = np.concatenate(
        [np.full(total + 1, total) for total in range(n_total_max + 1)]
    ).astype(np.int64)
    ns = totals - ms
    ms.setflags(write=False)
    ns.setflags(write=False)
    return ms, ns


@dataclass(frozen=True)
class Truncation:
    """Total-phonon cutoff: basis pairs (m, n) with m + n <= n_total_max."""

    n_total_max: int

    def __post_init__(self) -> None:
        if self.n_total_max < 0:
            raise ValueError(f"n_total_max must be >= 0, got {self.n_total_max}")

    @property
    def dim(self) -> int:
        return (self.n_total_max + 1) * (self.n_total_max + 2) // 2

    def contains(self, m: int, n: int) -> bool:
        return m >= 0 and n >= 0 and m + n <= self.n_total_max

    def index(self, m: int, n: int) -> int:
        """Flat index of |m, n>; rejects pairs outside the truncation."""
        if not self.contains(m, n):
            raise ValueError(
                f"(m, n) = ({m}, {n}) outside truncation: need m, n >= 0 and "
                f"m + n <= {self.n_total_max}"
            )
        total = m + n
        return total * (total + 1) // 2 + m

    def block(self, total: int) -> slice:
        """Slice of the flat array holding the m + n = total subspace."""
        if not 0 <= total <= self.n_total_max:
            raise ValueError(f"no block for total = {total}")
        return slice(total * (total + 1) // 2, (total + 1) * (total + 2) // 2)

    def mode_numbers(self) -> tuple[np.ndarray, np.ndarray]:
        return _mode_numbers(self.n_total_max)


@dataclass(frozen=True)
class MotionalState:
    """Pure two-mode motional state on a triangular truncated basis.

    Attributes
    ----------
    trunc : Truncation
        The basis cutoff.
    amps : np.ndarray
        Complex amplitudes c_mn in (total, m) order, unit norm within 1e-12.
    tail_mass : float
        Probability discarded when the state was truncated at construction.
    flagged : bool
        True when tail_mass exceeded the tolerance configured at construction.
    """

    trunc: Truncation
    amps: np.ndarray
    tail_mass: float = 0.0
    flagged: bool = False

    def __post_init__(self) -> None:
        amps = np.ascontiguousarray(self.amps, dtype=np.complex128)
        if amps.shape != (self.trunc.dim,):
            raise ValueError(
                f"amplitude array has shape {amps.shape}, expected ({self.trunc.dim},)"
            )
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > _NORM_TOL:
            raise ValueError(f"state not normalized: sum |c|^2 = {norm2!r}")
        if not 0.0 <= self.tail_mass <= 1.0:
            raise ValueError(f"tail_mass must lie in [0, 1], got {self.tail_mass}")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    def amplitude(self, m: int, n: int) -> complex:
        return complex(self.amps[self.trunc.index(m, n)])

    def with_amps(self, amps: np.ndarray) -> "MotionalState":
        """Same truncation and bookkeeping, new amplitudes."""
        return MotionalState(self.trunc, amps, self.tail_mass, self.flagged)


def make_fock(m: int, n: int, trunc: Truncation) -> MotionalState:
    """Number state |m, n>."""
    amps = np.zeros(trunc.dim, dtype=np.complex128)
    amps[trunc.index(m, n)] = 1.0
    return MotionalState(trunc, amps)


def _coherent_mode_amps(alpha: complex, n_max: int) -> np.ndarray:
    """Amplitudes <k|alpha> for k = 0..n_max, built by stable recurrence."""
    out = np.empty(n_max + 1, dtype=np.complex128)
    out[0] = math.exp(-0.5 * abs(alpha) ** 2)
    for k in range(1, n_max + 1):
        out[k] = out[k - 1] * alpha / math.sqrt(k)
    return out


def _coherent_overlap(a: complex, b: complex) -> complex:
    """Exact <a|b> for coherent states."""
    return np.exp(-0.5 * (abs(a) ** 2 + abs(b) ** 2) + np.conj(a) * b)


def coherent_superposition(
    terms: Sequence[tuple[complex, complex, complex]],
    trunc: Truncation,
    tail_tol: float = DEFAULT_TAIL_TOLERANCE,
) -> MotionalState:
    """Normalized truncation of sum_k w_k |alpha_k>_c |beta_k>_r.

    Parameters
    ----------
    terms : sequence of (weight, alpha, beta)
        Weights are the exact (untruncated) expansion coefficients.
    trunc : Truncation
    tail_tol : float
        Discarded-probability threshold above which the state is flagged.

    The discarded probability is computed against the exact norm of the
    untruncated superposition (closed-form coherent overlaps), so tail_mass
    is meaningful for non-orthogonal superpositions such as cat states.
    """
    ms, ns = trunc.mode_numbers()
    vec = np.zeros(trunc.dim, dtype=np.complex128)
    for w, alpha, beta in terms:
        ca = _coherent_mode_amps(complex(alpha), trunc.n_total_max)
        cb = _coherent_mode_amps(complex(beta), trunc.n_total_max)
        vec += complex(w) * ca[ms] * cb[ns]

    exact_norm2 = 0.0
    for wj, aj, bj in terms:
        for wk, ak, bk in terms:
            exact_norm2 += (
                np.conj(complex(wj))
                * complex(wk)
                * _coherent_overlap(aj, ak)
                * _coherent_overlap(bj, bk)
            ).real
    if exact_norm2 <= 1e-300:
        raise ValueError("superposition has zero norm")

    retained = float(np.vdot(vec, vec).real)
    if retained <= 0.0:
        raise ValueError("all amplitude mass lies outside the truncation")
    tail = min(1.0, max(0.0, 1.0 - retained / exact_norm2))
    return MotionalState(trunc, vec / math.sqrt(retained), tail, tail > tail_tol)


def make_coherent(
    alpha: complex,
    beta: complex,
    trunc: Truncation,
    tail_tol: float = DEFAULT_TAIL_TOLERANCE,
) -> MotionalState:
    """Product coherent state |alpha>_c |beta>_r, renormalized after truncation."""
    return coherent_superposition([(1.0, alpha, beta)], trunc, tail_tol)


def make_cat(
    alpha: complex,
    parity: str,
    mode: str,
    trunc: Truncation,
    tail_tol: float = DEFAULT_TAIL_TOLERANCE,
) -> MotionalState:
    """Even or odd coherent superposition in one mode, vacuum in the other.

    The state is N (|alpha> + s |-alpha>) with s = +1 for parity ``"even"``
    and s = -1 for ``"odd"``; N = [2 (1 + s exp(-2|alpha|^2))]^(-1/2).  Even
    cats have support only on even phonon numbers, odd cats only on odd ones.
    """
    if parity not in ("even", "odd"):
        raise ValueError(f"parity must be 'even' or 'odd', got {parity!r}")
    if mode not in ("c", "r"):
        raise ValueError(f"mode must be 'c' or 'r', got {mode!r}")
    sign = 1.0 if parity == "even" else -1.0
    norm2 = 2.0 * (1.0 + sign * math.exp(-2.0 * abs(alpha) ** 2))
    if norm2 <= 1e-300:
        raise ValueError("odd cat with alpha = 0 is the zero vector")
    weight = 1.0 / math.sqrt(norm2)
    if mode == "c":
        terms = [(weight, alpha, 0.0), (sign * weight, -alpha, 0.0)]
    else:
        terms = [(weight, 0.0, alpha), (sign * weight, 0.0, -alpha)]
    return coherent_superposition(terms, trunc, tail_tol)


def inner(a: MotionalState, b: MotionalState) -> complex:
    """<a|b>; both states must share a truncation."""
    if a.trunc != b.trunc:
        raise ValueError(
            f"truncation mismatch: {a.trunc.n_total_max} vs {b.trunc.n_total_max}"
        )
    return complex(np.vdot(a.amps, b.amps))


def fidelity(a: MotionalState, b: MotionalState) -> float:
    """|<a|b>|^2, the phase-insensitive overlap."""
    return abs(inner(a, b)) ** 2


@dataclass(frozen=True)
class JointDistribution:
    """Joint and marginal phonon-number distributions of a motional state."""

    p_mn: np.ndarray  # square (n_total_max+1)^2 array, zero outside the triangle
    p_m: np.ndarray
    p_n: np.ndarray
    mean_jz: float

    def __post_init__(self) -> None:
        for name in ("p_mn", "p_m", "p_n"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def to_csv(self) -> str:
        """Rows "m,n,p" for every basis pair, in (total, m) order."""
        lines = ["m,n,p"]
        size = self.p_m.shape[0]
        for total in range(size):
            for m in range(total + 1):
                lines.append(f"{m},{total - m},{self.p_mn[m, total - m]:.17g}")
        return "\n".join(lines) + "\n"


def number_distributions(s: MotionalState) -> JointDistribution:
    """Joint p_mn = |c_mn|^2 with marginals and the mean of (Nc - Nr)/2."""
    ms, ns = s.trunc.mode_numbers()
    size = s.trunc.n_total_max + 1
    p_mn = np.zeros((size, size), dtype=np.float64)
    p_mn[ms, ns] = np.abs(s.amps) ** 2
    p_m = p_mn.sum(axis=1)
    p_n = p_mn.sum(axis=0)
    k = np.arange(size)
    mean_jz = 0.5 * (float(k @ p_m) - float(k @ p_n))
    return JointDistribution(p_mn, p_m, p_n, mean_jz)


@lru_cache(maxsize=None)
def _hop_tables(n_total_max: int):
    """Index/coefficient tables for a+b and a b+ on the triangular basis.

    Returns (src_up, dst_up, coef_up, src_dn, dst_dn, coef_dn) where "up"
    moves a phonon r -> c (a+ b) and "dn" moves c -> r (a b+).
    """
    trunc = Truncation(n_total_max)
    ms, ns = trunc.mode_numbers()
    up = np.nonzero(ns >= 1)[0]
    dst_up = np.array(
        [trunc.index(ms[i] + 1, ns[i] - 1) for i in up], dtype=np.int64
    )
    coef_up = np.sqrt((ms[up] + 1.0) * ns[up])
    dn = np.nonzero(ms >= 1)[0]
    dst_dn = np.array(
        [trunc.index(ms[i] - 1, ns[i] + 1) for i in dn], dtype=np.int64
    )
    coef_dn = np.sqrt(ms[dn] * (ns[dn] + 1.0))
    return up, dst_up, coef_up, dn, dst_dn, coef_dn


def _apply_jx(amps: np.ndarray, trunc: Truncation) -> np.ndarray:
    up, dst_up, cu, dn, dst_dn, cd = _hop_tables(trunc.n_total_max)
    out = np.zeros_like(amps)
    out[dst_up] += 0.5 * cu * amps[up]
    out[dst_dn] += 0.5 * cd * amps[dn]
    return out


def _apply_jy(amps: np.ndarray, trunc: Truncation) -> np.ndarray:
    up, dst_up, cu, dn, dst_dn, cd = _hop_tables(trunc.n_total_max)
    out = np.zeros_like(amps)
    out[dst_up] += -0.5j * cu * amps[up]
    out[dst_dn] += 0.5j * cd * amps[dn]
    return out


def expect(s: MotionalState, obs: str) -> float:
    """Expectation value of a Schwinger or number observable.

    obs is one of ``jx``, ``jy``, ``jz``, ``jz2``, ``nc``, ``nr`` (case
    insensitive).  All are Hermitian, so the result is real.
    """
    key = obs.strip().lower()
    if key not in _OBSERVABLES:
        raise ValueError(f"unknown observable {obs!r}; expected one of {_OBSERVABLES}")
    ms, ns = s.trunc.mode_numbers()
    p = np.abs(s.amps) ** 2
    if key == "nc":
        return float(ms @ p)
    if key == "nr":
        return float(ns @ p)
    if key == "jz":
        return float((0.5 * (ms - ns)) @ p)
    if key == "jz2":
        return float((0.25 * (ms - ns) ** 2) @ p)
    if key == "jx":
        val = np.vdot(s.amps, _apply_jx(s.amps, s.trunc))
    else:
        val = np.vdot(s.amps, _apply_jy(s.amps, s.trunc))
    return float(val.real)


def reduced_purity(s: MotionalState) -> float:
    """Purity of either single-mode reduced density matrix (they coincide)."""
    ms, ns = s.trunc.mode_numbers()
    size = s.trunc.n_total_max + 1
    coeff = np.zeros((size, size), dtype=np.complex128)
    coeff[ms, ns] = s.amps
    gram = coeff.conj().T @ coeff
    return float(np.sum(np.abs(gram) ** 2))


# ---------------------------------------------------------------------------
# qubit registers and joint ion-motion states
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QubitState:
    """Internal two-level state, amplitudes ordered (g, e)."""

    amps: np.ndarray

    def __post_init__(self) -> None:
        amps = np.ascontiguousarray(self.amps, dtype=np.complex128)
        if amps.shape != (2,):
            raise ValueError("qubit state needs exactly two amplitudes")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > _NORM_TOL:
            raise ValueError(f"qubit state not normalized: |a_g|^2+|a_e|^2 = {norm2!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def of(cls, g: complex, e: complex) -> "QubitState":
        return cls(np.array([g, e], dtype=np.complex128))

    @classmethod
    def ground(cls) -> "QubitState":
        return cls.of(1.0, 0.0)

    @classmethod
    def excited(cls) -> "QubitState":
        return cls.of(0.0, 1.0)

    @classmethod
    def plus(cls) -> "QubitState":
        """sigma_x = +1 eigenstate (|g> + |e>)/sqrt(2)."""
        inv = 1.0 / math.sqrt(2.0)
        return cls.of(inv, inv)

    @classmethod
    def minus(cls) -> "QubitState":
        """sigma_x = -1 eigenstate (|g> - |e>)/sqrt(2)."""
        inv = 1.0 / math.sqrt(2.0)
        return cls.of(inv, -inv)

    def sigma_x_eigenvalue(self, atol: float = 1e-12) -> int | None:
        """+1 or -1 when the state is a sigma_x eigenstate, else None."""
        g, e = self.amps
        if abs(g - e) <= atol:
            return 1
        if abs(g + e) <= atol:
            return -1
        return None


@dataclass(frozen=True)
class JointState:
    """One or two qubit registers tensored with a motional state.

    ``ions`` records which physical ions carry a register, in increasing
    order, e.g. (2,) or (1, 2).  ``amps`` has shape (2,)*len(ions) + (dim,),
    qubit axes first (ion 1 before ion 2), motional axis last.
    """

    trunc: Truncation
    ions: tuple[int, ...]
    amps: np.ndarray
    tail_mass: float = 0.0
    flagged: bool = False

    def __post_init__(self) -> None:
        if tuple(sorted(set(self.ions))) != self.ions or not set(self.ions) <= {1, 2}:
            raise ValueError(f"ions must be a sorted subset of (1, 2), got {self.ions}")
        amps = np.ascontiguousarray(self.amps, dtype=np.complex128)
        want = (2,) * len(self.ions) + (self.trunc.dim,)
        if amps.shape != want:
            raise ValueError(f"amplitude tensor has shape {amps.shape}, expected {want}")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > _NORM_TOL:
            raise ValueError(f"joint state not normalized: norm^2 = {norm2!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @property
    def qubit_count(self) -> int:
        return len(self.ions)

    def axis_of(self, ion: int) -> int:
        if ion not in self.ions:
            raise ValueError(f"ion {ion} carries no qubit register in this state")
        return self.ions.index(ion)

    def with_amps(self, amps: np.ndarray) -> "JointState":
        return JointState(self.trunc, self.ions, amps, self.tail_mass, self.flagged)

    def ground_probability(self, ion: int) -> float:
        """Probability of finding the given ion in |g>."""
        a = np.moveaxis(self.amps, self.axis_of(ion), 0)
        return float(np.vdot(a[0], a[0]).real)

    def reduced_qubit(self, ion: int) -> np.ndarray:
        """2x2 reduced density matrix of one ion's register."""
        a = np.moveaxis(self.amps, self.axis_of(ion), 0).reshape(2, -1)
        return a @ a.conj().T

    def qubit_fidelity(self, ion: int, target: QubitState) -> float:
        """<target| rho_ion |target>."""
        rho = self.reduced_qubit(ion)
        return float((target.amps.conj() @ rho @ target.amps).real)

    def expect_sigma_x(self, ion: int) -> float:
        rho = self.reduced_qubit(ion)
        return float(2.0 * rho[1, 0].real)

    def motional_fidelity(self, target: MotionalState) -> float:
        """<target| rho_motional |target>, i.e. fidelity with a pure target."""
        if target.trunc != self.trunc:
            raise ValueError("truncation mismatch between joint state and target")
        flat = self.amps.reshape(-1, self.trunc.dim)
        overlaps = flat @ target.amps.conj()
        return float(np.sum(np.abs(overlaps) ** 2))


def joint_state(
    motional: MotionalState,
    ion1: QubitState | None = None,
    ion2: QubitState | None = None,
) -> JointState:
    """Tensor qubit registers onto a motional state (ion 1 axis first)."""
    ions: list[int] = []
    amps = motional.amps
    factors: list[np.ndarray] = []
    if ion1 is not None:
        ions.append(1)
        factors.append(ion1.amps)
    if ion2 is not None:
        ions.append(2)
        factors.append(ion2.amps)
    for q in reversed(factors):
        amps = np.multiply.outer(q, amps)
    return JointState(
        motional.trunc, tuple(ions), amps, motional.tail_mass, motional.flagged
    )


# ---------------------------------------------------------------------------
# truncation sizing and serialization
# ---------------------------------------------------------------------------


def truncation_for_coherent(
    alpha: complex, beta: complex, tail_tol: float = 1e-12
) -> Truncation:
    """Smallest truncation keeping a product coherent state's tail below tol.

    The total phonon number of |alpha>_c |beta>_r is Poisson with mean
    |alpha|^2 + |beta|^2, so the discarded mass is a single Poisson tail.
    """
    lam = abs(alpha) ** 2 + abs(beta) ** 2
    term = math.exp(-lam)
    cdf = term
    n = 0
    while 1.0 - cdf > tail_tol:
        n += 1
        term *= lam / n
        cdf += term
        if n > 100000:
            raise ValueError("truncation search did not converge")
    return Truncation(n)


def state_to_json(s: MotionalState) -> str:
    """Dump format: {"n_total_max", "amps": [[m, n, re, im], ...], "tail_mass"}."""
    ms, ns = s.trunc.mode_numbers()
    rows = [
        [int(m), int(n), float(a.real), float(a.imag)]
        for m, n, a in zip(ms, ns, s.amps)
    ]
    return json.dumps(
        {"n_total_max": s.trunc.n_total_max, "amps": rows, "tail_mass": s.tail_mass}
    )


def state_from_json(text: str) -> MotionalState:
    data = json.loads(text)
    trunc = Truncation(int(data["n_total_max"]))
    amps = np.zeros(trunc.dim, dtype=np.complex128)
    for m, n, re, im in data["amps"]:
        amps[trunc.index(int(m), int(n))] = complex(re, im)
    tail = float(data.get("tail_mass", 0.0))
    return MotionalState(trunc, amps, tail, tail > DEFAULT_TAIL_TOLERANCE)
