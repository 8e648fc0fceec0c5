"""Exact unitaries on the truncated two-mode space.

Beam splitters are SU(2) rotations generated by the Schwinger operators

    Jx = (a+ b + a b+)/2,   Jy = (a+ b - a b+)/2i,   Jz = (a+ a - b+ b)/2,

with a, b the center-of-mass and breathing-mode annihilation operators.
Sign conventions, fixed here once and used everywhere:

* beam splitters rotate as exp(-i theta J), i.e. ``beam_splitter("b1", t)``
  is exp(-i t Jx) and ``beam_splitter("b2", t)`` is exp(-i t Jy);
* phase shifters advance as exp(+i phi n), i.e. ``phase_shifter("c", phi)``
  multiplies |m, n> by exp(i phi m);
* the joint ion-motion propagators condition the rotation sense on ion 1's
  sigma_x eigenvalue (the +1 component sees +theta), and the conditional
  phase multiplies |g>_2 (x) |m, n> by exp(+i chi_t m / 2) because
  sigma_z |g> = -|g>.

Beam splitters conserve the total phonon number, so they are built block by
block: the generator restricted to the (m + n = N) subspace is a tridiagonal
Hermitian matrix, exponentiated by eigendecomposition.  This keeps every
block exactly unitary and costs O(sum N^3) instead of O(dim^3).  The dense
matrix-exponential oracle exists for tests only; production paths never
call it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .fockspace import JointState, MotionalState, Truncation

KIND_BLOCK = "block-number-conserving"
KIND_DIAGONAL = "diagonal-phase"
KIND_JCM = "jcm-block"
KIND_DENSE = "dense"

# Qubit basis order (g, e) with sigma_z |g> = -|g>.
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
SIGMA_Z = np.array([[-1.0, 0.0], [0.0, 1.0]], dtype=np.complex128)
SIGMA_PLUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=np.complex128)  # |e><g|
SIGMA_MINUS = SIGMA_PLUS.T.copy()

DEFAULT_ORACLE_CAP = 512

_SQRT_HALF = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class JcmPairs:
    """Coupled basis pairs of a Jaynes-Cummings block unitary.

    ``g_index[k]`` is the motional index of the |g>-side state, ``e_index[k]``
    the motional index of its |e>-side partner, and ``angle[k]`` the Rabi
    rotation angle of that 2x2 block.  Basis states without a partner inside
    the truncation are stationary.
    """

    kind: str  # 'single' | 'two'
    mode: str  # 'c' | 'r' (ignored for the two-mode kind)
    g_index: np.ndarray
    e_index: np.ndarray
    angle: np.ndarray


@dataclass
class UnitaryOperator:
    """Exact unitary in one of four structural forms.

    kind ``block-number-conserving``: ``blocks[N]`` acts on the m + n = N
    subspace.  kind ``diagonal-phase``: ``diag`` holds unit-modulus entries.
    kind ``dense``: a single matrix (oracle output).  kind ``jcm-block``:
    2x2 rotations between |g, m, n> and its lowered |e, ...> partner; applies
    to a JointState with an ion-2 register.
    """

    kind: str
    trunc: Truncation | None
    blocks: tuple[np.ndarray, ...] = ()
    diag: np.ndarray | None = None
    matrix: np.ndarray | None = None
    jcm: JcmPairs | None = None

    def apply(self, state):
        if self.kind == KIND_JCM:
            if not isinstance(state, JointState):
                raise TypeError("a jcm-block unitary acts on a JointState")
            return _apply_jcm(self, state)
        if not isinstance(state, MotionalState):
            raise TypeError(f"a {self.kind} unitary acts on a MotionalState")
        if self.trunc is not None and state.trunc != self.trunc:
            raise ValueError(
                f"truncation mismatch: operator has n_total_max = "
                f"{self.trunc.n_total_max}, state has {state.trunc.n_total_max}"
            )
        if self.kind == KIND_BLOCK:
            out = np.empty_like(state.amps)
            for total, block in enumerate(self.blocks):
                sl = state.trunc.block(total)
                out[sl] = block @ state.amps[sl]
            return state.with_amps(out)
        if self.kind == KIND_DIAGONAL:
            return state.with_amps(self.diag * state.amps)
        if self.kind == KIND_DENSE:
            if self.matrix.shape[0] != state.amps.shape[0]:
                raise ValueError("dense operator dimension does not match state")
            return state.with_amps(self.matrix @ state.amps)
        raise ValueError(f"unknown operator kind {self.kind!r}")

    def unitarity_defect(self) -> float:
        """max |U+ U - 1| over the operator's blocks."""
        if self.kind == KIND_BLOCK:
            return max(
                float(np.max(np.abs(b.conj().T @ b - np.eye(b.shape[0]))))
                for b in self.blocks
            )
        if self.kind == KIND_DIAGONAL:
            return float(np.max(np.abs(np.abs(self.diag) ** 2 - 1.0)))
        if self.kind == KIND_DENSE:
            m = self.matrix
            return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))
        if self.kind == KIND_JCM:
            defect = 0.0
            for theta in self.jcm.angle:
                b = _jcm_block(float(theta))
                defect = max(defect, float(np.max(np.abs(b.conj().T @ b - np.eye(2)))))
            return defect
        raise ValueError(f"unknown operator kind {self.kind!r}")

    def as_matrix(self) -> np.ndarray:
        """Dense matrix form; jcm-block yields the (2 dim) joint matrix
        ordered (ion-2 qubit axis first, motional axis last)."""
        if self.kind == KIND_DENSE:
            return self.matrix.copy()
        if self.kind == KIND_DIAGONAL:
            return np.diag(self.diag)
        if self.kind == KIND_BLOCK:
            dim = self.trunc.dim
            out = np.zeros((dim, dim), dtype=np.complex128)
            for total, block in enumerate(self.blocks):
                sl = self.trunc.block(total)
                out[sl, sl] = block
            return out
        dim = self.trunc.dim
        out = np.eye(2 * dim, dtype=np.complex128)
        for gi, ei, theta in zip(self.jcm.g_index, self.jcm.e_index, self.jcm.angle):
            rows = np.array([gi, dim + ei])
            out[np.ix_(rows, rows)] = _jcm_block(float(theta))
        return out

    def to_json(self) -> str:
        """Debug dump; not a stability-guaranteed format."""
        nmax = None if self.trunc is None else self.trunc.n_total_max
        if self.kind == KIND_BLOCK:
            payload = {
                "kind": self.kind,
                "n_total_max": nmax,
                "blocks": [
                    {
                        "N": total,
                        "matrix": [
                            [float(z.real), float(z.imag)] for z in block.ravel()
                        ],
                    }
                    for total, block in enumerate(self.blocks)
                ],
            }
        elif self.kind == KIND_DIAGONAL:
            payload = {
                "kind": self.kind,
                "n_total_max": nmax,
                "diag": [[float(z.real), float(z.imag)] for z in self.diag],
            }
        else:
            m = self.as_matrix()
            payload = {
                "kind": self.kind,
                "n_total_max": nmax,
                "matrix": [[float(z.real), float(z.imag)] for z in m.ravel()],
            }
        return json.dumps(payload)


def _jcm_block(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)


def _block_generator(total: int, which: str) -> np.ndarray:
    """Jx or Jy restricted to the (m + n = total) subspace, indexed by m."""
    size = total + 1
    mat = np.zeros((size, size), dtype=np.complex128)
    for m in range(total):
        hop = 0.5 * math.sqrt((m + 1) * (total - m))  # <m+1, n-1| a+ b |m, n> / 2
        if which == "jx":
            mat[m + 1, m] = hop
            mat[m, m + 1] = hop
        else:
            mat[m + 1, m] = -1j * hop
            mat[m, m + 1] = 1j * hop
    return mat


def _exp_block(generator: np.ndarray, theta: float) -> np.ndarray:
    w, v = np.linalg.eigh(generator)
    return (v * np.exp(-1j * theta * w)) @ v.conj().T


def beam_splitter(kind: str, theta: float, trunc: Truncation) -> UnitaryOperator:
    """exp(-i theta Jx) for kind ``b1`` or exp(-i theta Jy) for kind ``b2``.

    Both conserve the total phonon number, so the result is one exact
    rotation per total-number block; theta = pi/2 is the 50/50 splitter.
    """
    key = kind.strip().lower()
    if key not in ("b1", "b2"):
        raise ValueError(f"beam splitter kind must be 'b1' or 'b2', got {kind!r}")
    which = "jx" if key == "b1" else "jy"
    blocks = tuple(
        _exp_block(_block_generator(total, which), theta)
        for total in range(trunc.n_total_max + 1)
    )
    return UnitaryOperator(KIND_BLOCK, trunc, blocks=blocks)


def phase_shifter(mode: str, phi: float, trunc: Truncation) -> UnitaryOperator:
    """exp(+i phi a+ a) on mode ``c`` or exp(+i phi b+ b) on mode ``r``."""
    if mode not in ("c", "r"):
        raise ValueError(f"mode must be 'c' or 'r', got {mode!r}")
    ms, ns = trunc.mode_numbers()
    k = ms if mode == "c" else ns
    return UnitaryOperator(KIND_DIAGONAL, trunc, diag=np.exp(1j * phi * k))


def apply(u: UnitaryOperator, s: MotionalState) -> MotionalState:
    """U |s>; norm is preserved and tail bookkeeping is carried through."""
    return u.apply(s)


def _apply_blocks(blocks, arr: np.ndarray, trunc: Truncation, dagger: bool) -> np.ndarray:
    """Apply a block unitary (or its adjoint) along the last axis."""
    out = np.empty_like(arr)
    for total, block in enumerate(blocks):
        sl = trunc.block(total)
        mat = block.conj() if dagger else block.T
        out[..., sl] = arr[..., sl] @ mat
    return out


def joint_bs_propagator(kind: str, theta: float, js: JointState) -> JointState:
    """Ion-motion propagator conditioning a beam splitter on ion 1.

    kind ``u1`` uses the Jx splitter, kind ``u2`` the Jy splitter; theta is
    the accumulated rotation angle (twice the coupling times the interaction
    time).  In the sigma_x1 eigenbasis the +1 component receives B(theta)
    and the -1 component B(-theta), so sigma_x1 eigenstates stay factorized
    with their internal state untouched.
    """
    key = kind.strip().lower()
    if key not in ("u1", "u2"):
        raise ValueError(f"propagator kind must be 'u1' or 'u2', got {kind!r}")
    axis = js.axis_of(1)
    bs = beam_splitter("b1" if key == "u1" else "b2", theta, js.trunc)
    a = np.moveaxis(js.amps, axis, 0)
    plus = (a[0] + a[1]) * _SQRT_HALF
    minus = (a[0] - a[1]) * _SQRT_HALF
    plus = _apply_blocks(bs.blocks, plus, js.trunc, dagger=False)
    minus = _apply_blocks(bs.blocks, minus, js.trunc, dagger=True)  # B(-theta) = B+
    out = np.stack([(plus + minus) * _SQRT_HALF, (plus - minus) * _SQRT_HALF])
    return js.with_amps(np.moveaxis(out, 0, axis))


def conditional_phase(mode: str, chi_t: float, js: JointState) -> JointState:
    """Number-dependent phase on one mode, conditioned on ion 2.

    |g>_2 (x) |m, n> gains exp(+i chi_t k / 2) and |e>_2 (x) |m, n> gains
    exp(-3 i chi_t k / 2), with k the phonon number of the chosen mode.
    With ion 2 prepared in |g> this realizes the plain phase shifter at
    phi = chi_t / 2.
    """
    if mode not in ("c", "r"):
        raise ValueError(f"mode must be 'c' or 'r', got {mode!r}")
    axis = js.axis_of(2)
    ms, ns = js.trunc.mode_numbers()
    k = ms if mode == "c" else ns
    a = np.moveaxis(js.amps, axis, 0).copy()
    a[0] = a[0] * np.exp(0.5j * chi_t * k)
    a[1] = a[1] * np.exp(-1.5j * chi_t * k)
    return js.with_amps(np.moveaxis(a, 0, axis))


def carrier_half_pulse(js: JointState, ion: int = 2, phase: float = -0.5 * math.pi) -> JointState:
    """pi/2 carrier rotation on one ion, |g> -> (|g> + e^{i phase} |e>)/sqrt(2).

    The default phase of -pi/2 sends |g> to (|g> - i |e>)/sqrt(2); flipping
    the sign of the phase flips the sign of the sigma_x readout in the
    direct phonon-number measurement.
    """
    axis = js.axis_of(ion)
    ph = np.exp(1j * phase)
    a = np.moveaxis(js.amps, axis, 0)
    g = (a[0] - np.conj(ph) * a[1]) * _SQRT_HALF
    e = (ph * a[0] + a[1]) * _SQRT_HALF
    return js.with_amps(np.moveaxis(np.stack([g, e]), 0, axis))


def _apply_jcm(u: UnitaryOperator, js: JointState) -> JointState:
    axis = js.axis_of(2)
    a = np.moveaxis(js.amps, axis, 0)
    g = a[0].copy()
    e = a[1].copy()
    pairs = u.jcm
    if pairs.g_index.size:
        c = np.cos(pairs.angle)
        s = np.sin(pairs.angle)
        g_act = a[0][..., pairs.g_index]
        e_act = a[1][..., pairs.e_index]
        g[..., pairs.g_index] = c * g_act - 1j * s * e_act
        e[..., pairs.e_index] = -1j * s * g_act + c * e_act
    return js.with_amps(np.moveaxis(np.stack([g, e]), 0, axis))


# ---------------------------------------------------------------------------
# dense helpers and the matrix-exponential oracle
# ---------------------------------------------------------------------------


def dense_annihilation(trunc: Truncation, mode: str) -> np.ndarray:
    """Dense annihilation matrix of one mode on the triangular basis."""
    if mode not in ("c", "r"):
        raise ValueError(f"mode must be 'c' or 'r', got {mode!r}")
    ms, ns = trunc.mode_numbers()
    out = np.zeros((trunc.dim, trunc.dim), dtype=np.complex128)
    for i in range(trunc.dim):
        m, n = int(ms[i]), int(ns[i])
        if mode == "c" and m >= 1:
            out[trunc.index(m - 1, n), i] = math.sqrt(m)
        elif mode == "r" and n >= 1:
            out[trunc.index(m, n - 1), i] = math.sqrt(n)
    return out


def dense_number(trunc: Truncation, mode: str) -> np.ndarray:
    ms, ns = trunc.mode_numbers()
    return np.diag((ms if mode == "c" else ns).astype(np.complex128))


def _dense_hops(trunc: Truncation) -> tuple[np.ndarray, np.ndarray]:
    # a+ b and a b+ conserve the total, so composing lowering-first keeps
    # every intermediate inside the triangular basis.
    ac = dense_annihilation(trunc, "c")
    ar = dense_annihilation(trunc, "r")
    return ac.conj().T @ ar, ar.conj().T @ ac


def dense_jx(trunc: Truncation) -> np.ndarray:
    up, down = _dense_hops(trunc)
    return 0.5 * (up + down)


def dense_jy(trunc: Truncation) -> np.ndarray:
    up, down = _dense_hops(trunc)
    return (up - down) / 2j


def dense_jz(trunc: Truncation) -> np.ndarray:
    return 0.5 * (dense_number(trunc, "c") - dense_number(trunc, "r"))


def expm_oracle(
    generator: np.ndarray, t: float, cap: int = DEFAULT_ORACLE_CAP
) -> UnitaryOperator:
    """Dense exponential test oracle.

    For a Hermitian generator H the result is exp(-i H t) via
    eigendecomposition; for an anti-Hermitian generator A it is exp(A t) via
    scaling and squaring (equivalently exp(-i (iA) t)).  Rejects matrices
    larger than ``cap`` on a side; this path is for cross-checks only.
    """
    g = np.ascontiguousarray(generator, dtype=np.complex128)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise ValueError("generator must be a square matrix")
    if g.shape[0] > cap:
        raise ValueError(f"oracle dimension {g.shape[0]} exceeds cap {cap}")
    scale = max(1.0, float(np.max(np.abs(g))))
    if np.max(np.abs(g - g.conj().T)) <= 1e-12 * scale:
        w, v = np.linalg.eigh(g)
        u = (v * np.exp(-1j * t * w)) @ v.conj().T
    elif np.max(np.abs(g + g.conj().T)) <= 1e-12 * scale:
        u = scipy.linalg.expm(t * g)
    else:
        raise ValueError("generator is neither Hermitian nor anti-Hermitian")
    return UnitaryOperator(KIND_DENSE, None, matrix=u)


# ---------------------------------------------------------------------------
# laboratory parameters
# ---------------------------------------------------------------------------

_BREATHING_RATIO = 3.0 ** (-0.25)  # eta_r / eta for the linear two-ion trap


@dataclass(frozen=True)
class LabParams:
    """Laser and trap parameters driving the effective interactions.

    Omega, Omega_r are Rabi frequencies (rad/s); eta, eta_r the Lamb-Dicke
    parameters of the center-of-mass and breathing modes; Delta, Delta_r the
    dispersive detunings (rad/s); t the interaction time (s).
    """

    Omega: float
    eta: float
    eta_r: float
    Delta: float
    Delta_r: float
    Omega_r: float
    t: float

    @classmethod
    def linked(
        cls,
        Omega: float,
        eta: float,
        Delta: float,
        Delta_r: float,
        Omega_r: float,
        t: float,
    ) -> "LabParams":
        """Constructor enforcing eta_r = 3^(-1/4) eta of the shared trap."""
        return cls(Omega, eta, _BREATHING_RATIO * eta, Delta, Delta_r, Omega_r, t)

    def has_linked_modes(self, atol: float = 1e-12) -> bool:
        return abs(self.eta_r - _BREATHING_RATIO * self.eta) <= atol


@dataclass(frozen=True)
class EffectiveAngles:
    """Dimensionless angles and rates of the effective dynamics.

    theta is the beam-splitter rotation angle, phi and phi_r the phase-shift
    angles, chi and chi_r the dispersive shift rates (rad/s), lam the
    red-sideband coupling (rad/s) and g the two-mode sideband coupling
    (rad/s).
    """

    theta: float
    phi: float
    phi_r: float
    chi: float
    chi_r: float
    lam: float
    g: float


def lab_to_angles(p: LabParams) -> EffectiveAngles:
    """Convert laboratory parameters to the effective angles.

    theta = 2 Omega eta eta_r t, chi = eta^2 Omega^2 / (2 Delta),
    phi = chi t / 2, and likewise for the breathing mode;
    lam = eta Omega / 2 and g = Omega eta eta_r.
    """
    if p.Delta == 0.0 or p.Delta_r == 0.0:
        raise ValueError("detunings must be nonzero for the dispersive phases")
    chi = p.eta**2 * p.Omega**2 / (2.0 * p.Delta)
    chi_r = p.eta_r**2 * p.Omega_r**2 / (2.0 * p.Delta_r)
    return EffectiveAngles(
        theta=2.0 * p.Omega * p.eta * p.eta_r * p.t,
        phi=chi * p.t / 2.0,
        phi_r=chi_r * p.t / 2.0,
        chi=chi,
        chi_r=chi_r,
        lam=p.eta * p.Omega / 2.0,
        g=p.Omega * p.eta * p.eta_r,
    )
