"""Time evolution in the density-matrix and coherence-vector pictures.

Both pictures use classical fixed-step RK4.  The density picture integrates

    d rho / dt = (i/hbar) [rho, H(t)] - D(rho)

and the coherence picture integrates ``dv/dt = A(t) v`` with
``A = COHERENCE_FLOW_SIGN * g(t)^T``; for a Hamiltonian flow the two are
linearly conjugate, so RK4 on a shared grid gives the same trajectory to
round-off.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GridError, IntegrityError, IntervalError, SpecError, StateError
from .lie_algebra import GeneratorSet, StructureTensor, build_generators, decompose, structure_constants
from .model import PulseSchedule, diamond_hamiltonian

N_LEVELS = 4

# Fixed by the picture-equivalence test: d<G_a>/dt = + sum_{b,c} Gamma_c f_{cba} <G_b>.
COHERENCE_FLOW_SIGN = 1

POSITIVITY_ABORT = -1e-6
TRACE_ABORT = 1e-8
_CHUNK = 2048


def flow_matrix(g) -> np.ndarray:
    """Matrix ``A`` of ``dv/dt = A v`` for a coupling matrix ``g``."""
    return COHERENCE_FLOW_SIGN * np.asarray(g).T


@dataclass(frozen=True)
class QuantumState:
    rho: np.ndarray
    coherence: np.ndarray

    @classmethod
    def from_rho(cls, rho, gens: GeneratorSet | None = None):
        gens = gens or build_generators(N_LEVELS)
        _, v = decompose(rho, gens)
        return cls(np.asarray(rho, dtype=complex), v)

    @property
    def populations(self):
        return self.rho.diagonal().real.copy()

    @property
    def purity(self):
        return float(np.trace(self.rho @ self.rho).real)


def basis_state(index, n=N_LEVELS) -> np.ndarray:
    rho = np.zeros((n, n), dtype=complex)
    rho[index, index] = 1.0
    return rho


def validate_density(rho, tol=1e-10) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (N_LEVELS, N_LEVELS):
        raise StateError(f"density matrix must be {N_LEVELS}x{N_LEVELS}, got {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise StateError("density matrix has non-finite entries")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise StateError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1) > tol:
        raise StateError(f"density matrix trace is {np.trace(rho).real}, expected 1")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise StateError("density matrix is not positive semidefinite")
    return rho


@dataclass(frozen=True)
class DissipationSpec:
    """Relaxation rates.

    ``gamma_pop[k, m]`` is the population decay rate from ``|m>`` into
    ``|k>`` (second index decays into the first).  ``gamma_deph`` holds pure
    dephasing rates, ``gamma_diag`` the state decay rates that enter the
    coherence bracket.  ``mode`` is ``"paper-literal"`` or ``"lindblad"``.
    """

    gamma_pop: np.ndarray = field(default_factory=lambda: np.zeros((4, 4)))
    gamma_deph: np.ndarray = field(default_factory=lambda: np.zeros((4, 4)))
    gamma_diag: np.ndarray = field(default_factory=lambda: np.zeros(4))
    mode: str = "paper-literal"

    def __post_init__(self):
        pop = np.array(self.gamma_pop, dtype=float)
        deph = np.array(self.gamma_deph, dtype=float)
        diag = np.array(self.gamma_diag, dtype=float)
        if pop.shape != (4, 4) or deph.shape != (4, 4) or diag.shape != (4,):
            raise SpecError("rate arrays must be 4x4, 4x4 and length 4")
        for name, arr in (("gamma_pop", pop), ("gamma_deph", deph), ("gamma_diag", diag)):
            if not np.all(np.isfinite(arr)):
                raise SpecError(f"{name} has non-finite entries")
            if np.any(arr < 0):
                raise SpecError(f"{name} has negative rates")
        if np.any(np.diag(pop) != 0):
            raise SpecError("gamma_pop must have a zero diagonal")
        if np.any(deph != deph.T) or np.any(np.diag(deph) != 0):
            raise SpecError("gamma_deph must be symmetric with zero diagonal")
        if self.mode not in ("paper-literal", "lindblad"):
            raise SpecError(f"unknown dissipation mode {self.mode!r}")
        for name, arr in (("gamma_pop", pop), ("gamma_deph", deph), ("gamma_diag", diag)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def preserves_trace(self) -> bool:
        return self.mode == "lindblad" or not np.any(self.gamma_diag)


def total_decoherence_rates(diss: DissipationSpec) -> np.ndarray:
    """``Gamma_mn = Gamma^d_mn + 1/2 sum_{k != m,n} (gamma_km + gamma_kn)``."""
    pop = diss.gamma_pop
    out = np.zeros((4, 4))
    for m in range(4):
        for n in range(4):
            if m == n:
                continue
            feed = sum(pop[k, m] + pop[k, n] for k in range(4) if k not in (m, n))
            out[m, n] = diss.gamma_deph[m, n] + 0.5 * feed
    return out


def _dissipation_parts(diss: DissipationSpec):
    """Elementwise rate matrix R and population transfer matrix T.

    ``D(rho) = R * rho + diag(T @ diag(rho))``.
    """
    d = diss.gamma_diag
    R = 0.5 * (d[:, None] + d[None, :]) + total_decoherence_rates(diss)
    T = np.zeros((4, 4))
    if diss.mode == "lindblad":
        np.fill_diagonal(R, 0.0)
        T = np.diag(diss.gamma_pop.sum(axis=0)) - diss.gamma_pop
    return R, T


def dissipator_apply(diss: DissipationSpec, rho) -> np.ndarray:
    R, T = _dissipation_parts(diss)
    rho = np.asarray(rho, dtype=complex)
    return R * rho + np.diag(T @ rho.diagonal())


def superoperator_matrices(H, diss: DissipationSpec | None = None):
    """Coherent part L and dissipator G on row-major ``vec(rho)``.

    ``(i/hbar) L vec(rho) - G vec(rho)`` is the density-picture right-hand
    side, i.e. ``L_{mn,jk} = delta_mj H*_nk - H_mj delta_nk``.
    """
    H = np.asarray(H, dtype=complex)
    eye = np.eye(4)
    # row-major: vec(A rho B) = kron(A, B^T) vec(rho)
    L = np.kron(eye, H.T) - np.kron(H, eye)
    G = np.zeros((16, 16), dtype=complex)
    if diss is not None:
        R, T = _dissipation_parts(diss)
        G += np.diag(R.reshape(-1))
        for m in range(4):
            for j in range(4):
                G[m * 5, j * 5] += T[m, j]
    return L, G


@dataclass(frozen=True)
class TimeGrid:
    t_start: float = 0.0
    t_end: float = 10.0
    step: float = 1e-3
    sample_stride: int = 1

    def __post_init__(self):
        if not all(math.isfinite(x) for x in (self.t_start, self.t_end, self.step)):
            raise GridError("grid bounds and step must be finite")
        if self.t_end <= self.t_start:
            raise GridError("t_end must exceed t_start")
        if not self.step > 0:
            raise GridError("step must be positive")
        if self.step > self.t_end - self.t_start:
            raise GridError("step exceeds the integration interval")
        if int(self.sample_stride) != self.sample_stride or self.sample_stride < 1:
            raise GridError("sample_stride must be an integer >= 1")

    @property
    def n_steps(self) -> int:
        return _n_steps(self.t_end - self.t_start, self.step)

    @property
    def h(self) -> float:
        return (self.t_end - self.t_start) / self.n_steps

    def sample_indices(self) -> np.ndarray:
        idx = np.arange(0, self.n_steps + 1, self.sample_stride)
        if idx[-1] != self.n_steps:
            idx = np.append(idx, self.n_steps)
        return idx

    def sample_times(self) -> np.ndarray:
        return self.t_start + self.sample_indices() * self.h


def _n_steps(span, step):
    return max(1, math.ceil(span / step - 1e-9))


@dataclass
class Trajectory:
    times: np.ndarray  # (S,)
    rho: np.ndarray  # (S, 4, 4)
    coherence: np.ndarray  # (S, 15)
    pulse_samples: np.ndarray  # (S, 4)

    def __len__(self):
        return len(self.times)

    @property
    def states(self):
        return [QuantumState(r, v) for r, v in zip(self.rho, self.coherence)]

    @property
    def populations(self):
        return np.einsum("sii->si", self.rho).real

    @property
    def traces(self):
        return np.einsum("sii->s", self.rho).real

    @property
    def purities(self):
        return np.einsum("sij,sji->s", self.rho, self.rho).real

    @property
    def min_eigenvalues(self):
        herm = 0.5 * (self.rho + self.rho.conj().transpose(0, 2, 1))
        return np.linalg.eigvalsh(herm).min(axis=1)


def _rk4_linear(y0, grid: TimeGrid, ops_at, apply):
    """Fixed-step RK4 for ``dy/dt = A(t) y`` with stored samples.

    ``ops_at(times)`` returns the operators at an array of times (stacked on
    axis 0); ``apply(op, y)`` returns the derivative.
    """
    n, h = grid.n_steps, grid.h
    stride = grid.sample_stride
    y = np.array(y0)
    samples = [y.copy()]
    for start in range(0, n, _CHUNK):
        stop = min(n, start + _CHUNK)
        # ops at t_k, t_k + h/2 for k in [start, stop], on a half-step lattice
        half = grid.t_start + np.arange(2 * start, 2 * stop + 1) * (h / 2)
        ops = ops_at(half)
        for k in range(stop - start):
            a0, am, a1 = ops[2 * k], ops[2 * k + 1], ops[2 * k + 2]
            k1 = apply(a0, y)
            k2 = apply(am, y + 0.5 * h * k1)
            k3 = apply(am, y + 0.5 * h * k2)
            k4 = apply(a1, y + h * k3)
            y = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
            step = start + k + 1
            if step % stride == 0 or step == n:
                samples.append(y.copy())
    return np.array(samples)


def _hamiltonians(sched: PulseSchedule, times) -> np.ndarray:
    a1, b1, a2, b2 = sched.values(times)
    times = np.atleast_1d(times)
    H = np.zeros((len(times), 4, 4), dtype=complex)
    H[:, 0, 1] = H[:, 1, 0] = a1
    H[:, 1, 2] = H[:, 2, 1] = b1
    H[:, 2, 3] = H[:, 3, 2] = a2
    H[:, 0, 3] = H[:, 3, 0] = b2
    H[:, 1, 1] = H[:, 3, 3] = 2 * sched.delta
    return 0.5 * sched.hbar * H


def _gammas(sched: PulseSchedule, times, gens: GeneratorSet) -> np.ndarray:
    H = _hamiltonians(sched, times)
    return np.einsum("tij,aji->ta", H, gens.generators).real / sched.hbar


def _pulses(sched, grid):
    return sched.values(grid.sample_times()).T


def evolve_coherence(v0, sched: PulseSchedule, grid: TimeGrid, gens: GeneratorSet | None = None,
                     f: StructureTensor | None = None) -> Trajectory:
    gens = gens or build_generators(N_LEVELS)
    f = f or structure_constants(gens)
    v0 = np.asarray(v0, dtype=float)
    if v0.shape != (len(gens),):
        raise StateError(f"coherence vector must have {len(gens)} entries")
    fd = f.dense()

    def ops_at(times):
        # A[t, a, b] = s * g[b, a] = s * sum_c Gamma_c f[c, b, a]
        return COHERENCE_FLOW_SIGN * np.einsum("tc,cba->tab", _gammas(sched, times, gens), fd)

    vs = _rk4_linear(v0, grid, ops_at, lambda A, v: A @ v)
    rho = np.eye(4) / 4 + 0.5 * np.einsum("sa,aij->sij", vs, gens.generators)
    return Trajectory(grid.sample_times(), rho, vs, _pulses(sched, grid))


def evolve_density(rho0, sched: PulseSchedule, grid: TimeGrid, diss: DissipationSpec | None = None,
                   gens: GeneratorSet | None = None, check: bool = True) -> Trajectory:
    """Integrate the (optionally dissipative) Liouville equation.

    With ``check`` set, a smallest eigenvalue below -1e-6, or trace drift
    above 1e-8 for a trace-preserving setup, raises :class:`IntegrityError`.
    """
    rho0 = validate_density(rho0)
    gens = gens or build_generators(N_LEVELS)
    ihb = 1j / sched.hbar

    if diss is None:
        def apply(H, rho):
            return ihb * (rho @ H - H @ rho)
    else:
        R, T = _dissipation_parts(diss)
        lindblad = bool(np.any(T))

        def apply(H, rho):
            out = ihb * (rho @ H - H @ rho) - R * rho
            if lindblad:
                out[np.diag_indices(4)] -= T @ rho.diagonal()
            return out

    rhos = _rk4_linear(rho0, grid, lambda t: _hamiltonians(sched, t), apply)
    coh = np.einsum("sij,aji->sa", rhos, gens.generators).real
    traj = Trajectory(grid.sample_times(), rhos, coh, _pulses(sched, grid))
    if check:
        check_integrity(traj, trace_preserving=diss is None or diss.preserves_trace)
    return traj


def check_integrity(traj: Trajectory, trace_preserving=True):
    if not np.all(np.isfinite(traj.rho)):
        raise IntegrityError("non-finite density matrix entries", {})
    mins = traj.min_eigenvalues
    worst = int(np.argmin(mins))
    if mins[worst] < POSITIVITY_ABORT:
        raise IntegrityError(
            f"positivity violated at t={traj.times[worst]:.6g} (min eigenvalue {mins[worst]:.3g})",
            {"t": float(traj.times[worst]), "min_eigenvalue": float(mins[worst]),
             "rho": np.stack([traj.rho[worst].real, traj.rho[worst].imag], -1).tolist()},
        )
    if trace_preserving:
        drift = np.abs(traj.traces - 1)
        worst = int(np.argmax(drift))
        if drift[worst] > TRACE_ABORT:
            raise IntegrityError(
                f"trace drift {drift[worst]:.3g} at t={traj.times[worst]:.6g}",
                {"t": float(traj.times[worst]), "trace_drift": float(drift[worst])},
            )


def propagator(sched: PulseSchedule, t0, t1, step=1e-3) -> np.ndarray:
    """Time-ordered product of midpoint exponentials ``exp(-i H(t_mid) dt / hbar)``.

    Column ``j`` holds the amplitudes evolved from ``|j>``.  Intervals are
    split into ``ceil((t1 - t0) / step)`` equal steps, so propagators over
    adjacent intervals compose exactly when the split point lies on the grid.
    """
    if t1 < t0:
        raise IntervalError(f"t1={t1} precedes t0={t0}")
    if not step > 0:
        raise IntervalError("step must be positive")
    U = np.eye(4, dtype=complex)
    if t1 == t0:
        return U
    n = _n_steps(t1 - t0, step)
    dt = (t1 - t0) / n
    mids = t0 + (np.arange(n) + 0.5) * dt
    w, V = np.linalg.eigh(_hamiltonians(sched, mids))
    steps = np.einsum("tij,tj,tkj->tik", V, np.exp(-1j * w * dt / sched.hbar), V.conj())
    for S in steps:
        U = S @ U
    return U


def constant_propagator(H, duration, hbar=1.0) -> np.ndarray:
    w, V = np.linalg.eigh(np.asarray(H, dtype=complex))
    return (V * np.exp(-1j * w * duration / hbar)) @ V.conj().T


__all__ = [
    "COHERENCE_FLOW_SIGN", "DissipationSpec", "QuantumState", "TimeGrid", "Trajectory",
    "basis_state", "check_integrity", "constant_propagator", "diamond_hamiltonian",
    "dissipator_apply", "evolve_coherence", "evolve_density", "flow_matrix", "propagator",
    "superoperator_matrices", "total_decoherence_rates", "validate_density",
]
