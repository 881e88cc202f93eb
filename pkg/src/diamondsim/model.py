"""Pulse envelopes, the diamond Hamiltonian and its coherence-vector coupling.

Units are reduced: hbar = 1, time in reduced units, Rabi amplitudes and the
detuning in inverse reduced time.  Level couplings::

    |0> --alpha1-- |1> --beta1-- |2> --alpha2-- |3> --beta2-- |0>

with no (0,2) or (1,3) coupling.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SpecError
from .lie_algebra import GeneratorSet, StructureTensor, decompose

SHAPES = ("gaussian", "flat-top", "custom-table")
PULSE_NAMES = ("alpha1", "beta1", "alpha2", "beta2")


@dataclass(frozen=True)
class PulseEnvelope:
    """One Rabi-frequency envelope.

    For ``custom-table`` the tabulated profile (``table_times``,
    ``table_values``) is scaled by ``amplitude`` and linearly interpolated;
    it is zero outside the table range.
    """

    shape: str = "gaussian"
    amplitude: float = 0.0
    center: float = 0.0
    width: float = 1.0
    table_times: tuple = ()
    table_values: tuple = ()

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise SpecError(f"unknown pulse shape {self.shape!r}")
        if not (math.isfinite(self.width) and self.width > 0):
            raise SpecError(f"pulse width must be > 0, got {self.width}")
        if not (math.isfinite(self.amplitude) and self.amplitude >= 0):
            raise SpecError(f"pulse amplitude must be >= 0, got {self.amplitude}")
        if not math.isfinite(self.center):
            raise SpecError("pulse center must be finite")
        if self.shape == "custom-table":
            t = np.asarray(self.table_times, dtype=float)
            v = np.asarray(self.table_values, dtype=float)
            if t.ndim != 1 or t.shape != v.shape or len(t) < 2:
                raise SpecError("custom table needs matching time/value lists of length >= 2")
            if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
                raise SpecError("custom table entries must be finite")
            if np.any(v < 0):
                raise SpecError("custom table values must be non-negative")
            if np.any(np.diff(t) <= 0):
                raise SpecError("custom table times must be strictly increasing")
            object.__setattr__(self, "table_times", tuple(float(x) for x in t))
            object.__setattr__(self, "table_values", tuple(float(x) for x in v))

    def profile_key(self):
        """Everything except the amplitude; equal keys mean identical time dependence."""
        return (self.shape, self.center, self.width, self.table_times, self.table_values)


def pulse_value(env: PulseEnvelope, t):
    """Envelope value at ``t`` (scalar or array)."""
    t = np.asarray(t, dtype=float)
    if env.shape == "gaussian":
        out = env.amplitude * np.exp(-((t - env.center) ** 2) / (2 * env.width**2))
    elif env.shape == "flat-top":
        ramp = env.width / 4
        x = np.abs(t - env.center) - env.width
        inside = np.clip(x / ramp, 0.0, 1.0)
        out = env.amplitude * 0.5 * (1 + np.cos(np.pi * inside))
        out = np.where(x >= ramp, 0.0, out)
    else:
        out = env.amplitude * np.interp(t, env.table_times, env.table_values, left=0.0, right=0.0)
    # exp underflow and ±inf inputs can land on nan for gaussians at inf
    out = np.where(np.isfinite(out), out, 0.0)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class PulseSchedule:
    alpha1: PulseEnvelope
    beta1: PulseEnvelope
    alpha2: PulseEnvelope
    beta2: PulseEnvelope
    delta: float = 0.0
    hbar: float = field(default=1.0, init=False)

    def __post_init__(self):
        if self.alpha1.profile_key() != self.beta1.profile_key():
            raise SpecError("alpha1 and beta1 must share shape, center and width")
        if self.alpha2.profile_key() != self.beta2.profile_key():
            raise SpecError("alpha2 and beta2 must share shape, center and width")
        if self.alpha2.center < self.alpha1.center:
            raise SpecError("pulse pair 2 must not be centered before pair 1")
        if not math.isfinite(self.delta):
            raise SpecError("detuning must be finite")

    @property
    def envelopes(self):
        return (self.alpha1, self.beta1, self.alpha2, self.beta2)

    def values(self, t):
        """Envelope values ``(alpha1, beta1, alpha2, beta2)``; shape (4,) or (4, len(t))."""
        return np.array([pulse_value(e, t) for e in self.envelopes])


def gaussian_schedule(amplitudes, centers, width, delta=0.0) -> PulseSchedule:
    """Two Gaussian pulse pairs with amplitudes ``(a1, b1, a2, b2)``."""
    a1, b1, a2, b2 = amplitudes
    c1, c2 = centers
    return PulseSchedule(
        PulseEnvelope("gaussian", a1, c1, width),
        PulseEnvelope("gaussian", b1, c1, width),
        PulseEnvelope("gaussian", a2, c2, width),
        PulseEnvelope("gaussian", b2, c2, width),
        delta,
    )


def default_schedule() -> PulseSchedule:
    """Demonstration schedule: Gaussian pairs at t=2 and t=6, sigma 0.8."""
    return gaussian_schedule((1.5, 1.0, 0.8, 1.6), (2.0, 6.0), 0.8, delta=0.5)


def diamond_hamiltonian(a1, b1, a2, b2, delta, hbar=1.0) -> np.ndarray:
    return 0.5 * hbar * np.array(
        [
            [0, a1, 0, b2],
            [a1, 2 * delta, b1, 0],
            [0, b1, 0, a2],
            [b2, 0, a2, 2 * delta],
        ],
        dtype=complex,
    )


def hamiltonian_at(sched: PulseSchedule, t) -> np.ndarray:
    a1, b1, a2, b2 = sched.values(t)
    return diamond_hamiltonian(a1, b1, a2, b2, sched.delta, sched.hbar)


def gamma_coefficients(H, gens: GeneratorSet, hbar=1.0) -> np.ndarray:
    """Generator-basis coefficients ``Tr(H G_a) / hbar``."""
    _, coeffs = decompose(H, gens)
    return coeffs / hbar


def g_matrix(gamma, f: StructureTensor) -> np.ndarray:
    """``g[b, a] = sum_c gamma_c f_{c b a}`` (0-based positions)."""
    gamma = np.asarray(gamma, dtype=float)
    if gamma.shape != (f.dimension,):
        raise SpecError(f"gamma has shape {gamma.shape}, tensor needs ({f.dimension},)")
    return np.einsum("c,cba->ba", gamma, f.dense())


# -- cross-check against the printed block form --------------------------------

def printed_blocks(a1, b1, a2, b2, delta):
    """The M (6x6) and K (6x3) blocks as printed in the source derivation."""
    s3, s6 = math.sqrt(3), math.sqrt(6)
    M = np.array(
        [
            [-delta, 0, -b1, 0, -b2, 0],
            [0, delta, a1, 0, a2, 0],
            [-b1, a1, 0, -a2, 0, -b2],
            [0, 0, -a2, -delta, -a1, 0],
            [b2, -a2, 0, a1, 0, b2],
            [0, 0, b2, 0, b2, -delta],
        ],
        dtype=float,
    )
    K = np.array(
        [
            [-2 * a1, 0, 0],
            [b1, -s3 * b1, 0],
            [0, 0, 0],
            [-b2, -s3 / 3 * b2, -2 * s6 / 3 * b2],
            [0, 0, 0],
            [0, -2 * s3 / 3 * a2, 2 * s6 / 3 * a2],
        ],
        dtype=float,
    )
    return M, K


def printed_g(a1, b1, a2, b2, delta) -> np.ndarray:
    M, K = printed_blocks(a1, b1, a2, b2, delta)
    g = np.zeros((15, 15))
    g[0:6, 6:12] = M
    g[6:12, 0:6] = -M.T
    g[6:12, 12:15] = K
    g[12:15, 6:12] = -K.T
    return g


@dataclass
class BlockDiscrepancy:
    row: int  # 1-based generator label
    col: int
    derived: float
    printed: float


def compare_paper_blocks(sched: PulseSchedule, t, f: StructureTensor, gens: GeneratorSet, tol=1e-9):
    """List entries where the derived flow matrix differs from the printed one.

    Both sides are compared as the matrix ``A`` of ``dv/dt = A v``: the
    derived ``A`` is :func:`flow_matrix` of the first-principles ``g``, the
    printed one is ``g_printed / 2``.  Purely diagnostic.
    """
    from .dynamics import flow_matrix

    vals = sched.values(t)
    H = hamiltonian_at(sched, t)
    derived = flow_matrix(g_matrix(gamma_coefficients(H, gens, sched.hbar), f))
    printed = 0.5 * printed_g(*vals, sched.delta)
    out = []
    for r, c in zip(*np.nonzero(np.abs(derived - printed) > tol)):
        out.append(BlockDiscrepancy(int(r) + 1, int(c) + 1, float(derived[r, c]), float(printed[r, c])))
    return out
