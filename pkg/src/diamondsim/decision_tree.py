"""Two-layer decision tree over the four basis states.

The root is the initial basis state.  Layer 1 holds the populations after
the first pulse pair; layer 2 holds, for each layer-1 branch, the
distribution after the second pair.  Layer 2 is either one shared vector
(the same distribution under every branch) or four per-branch conditionals.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import (DimensionError, IntegrityError, NormalizationError, QueryError, RangeError,
                     UnitarityError)

SUM_TOL = 2e-2
NEG_DUST = 1e-9


def populations_at(traj, t) -> np.ndarray:
    """Diagonal of rho at ``t``, linearly interpolated between samples."""
    times = traj.times
    if not times[0] <= t <= times[-1]:
        raise RangeError(f"t={t} outside trajectory range [{times[0]}, {times[-1]}]")
    pops = traj.populations
    i = int(np.searchsorted(times, t))
    if times[min(i, len(times) - 1)] == t:
        p = pops[i].copy()
    else:
        w = (t - times[i - 1]) / (times[i] - times[i - 1])
        p = (1 - w) * pops[i - 1] + w * pops[i]
    p = np.clip(p, 0.0, 1.0)
    total = math.fsum(p)
    if abs(total - 1) > 1e-6:
        raise IntegrityError(f"populations at t={t} sum to {total}", {"t": float(t), "sum": total})
    return p / total if total != 1.0 else p


def _normalize(vec, name):
    v = np.asarray(vec, dtype=float)
    if v.shape != (4,):
        raise DimensionError(f"{name} must have 4 entries, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise NormalizationError(f"{name} has non-finite entries")
    if np.any(v < -NEG_DUST):
        raise NormalizationError(f"{name} has negative entries: {v.tolist()}")
    v = np.clip(v, 0.0, None)
    total = math.fsum(v)
    if abs(total - 1) > SUM_TOL:
        raise NormalizationError(f"{name} sums to {total:.4f}, expected 1 within {SUM_TOL}")
    return v / total if total != 1.0 else v


@dataclass(frozen=True)
class DecisionTree:
    root: int
    layer1: np.ndarray  # (4,)
    layer2: np.ndarray  # (4, 4); row m is the distribution under branch m
    shared: bool

    def leaves(self):
        """``((root, m, k), p)`` for all 16 leaves."""
        return [((self.root, m, k), float(self.layer1[m] * self.layer2[m, k]))
                for m in range(4) for k in range(4)]

    def to_dict(self):
        return {
            "root": self.root,
            "layer1": self.layer1.tolist(),
            "layer2": self.layer2[0].tolist() if self.shared else self.layer2.tolist(),
            "leaves": [{"path": list(path), "p": p} for path, p in self.leaves()],
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    def to_dot(self):
        lines = ["digraph decision_tree {", '  node [shape=circle];',
                 f'  root [label="{self.root}"];']
        for m in range(4):
            lines.append(f'  n{m} [label="{m}"];')
            lines.append(f'  root -> n{m} [label="{self.layer1[m]:.2f}"];')
        for m in range(4):
            for k in range(4):
                lines.append(f'  n{m}_{k} [label="{k}"];')
                lines.append(f'  n{m} -> n{m}_{k} [label="{self.layer2[m, k]:.2f}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_tree(layer1, layer2, root=0) -> DecisionTree:
    if root not in range(4):
        raise QueryError(f"root label {root} not in 0..3")
    l1 = _normalize(layer1, "layer1")
    l2 = np.asarray(layer2, dtype=float)
    if l2.shape == (4,):
        row = _normalize(l2, "layer2")
        return DecisionTree(root, l1, np.tile(row, (4, 1)), True)
    if l2.shape == (4, 4):
        rows = np.array([_normalize(r, f"layer2[{m}]") for m, r in enumerate(l2)])
        return DecisionTree(root, l1, rows, False)
    raise DimensionError(f"layer2 must be a 4-vector or 4x4, got shape {l2.shape}")


def _check_path(tree, path):
    if len(path) != 3:
        raise QueryError("a path has exactly three labels: root, layer-1 node, leaf")
    if any(int(x) != x or x not in range(4) for x in path):
        raise QueryError(f"labels must be in 0..3, got {list(path)}")
    if path[0] != tree.root:
        raise QueryError(f"path starts at {path[0]} but the tree root is {tree.root}")


def path_probability(tree: DecisionTree, path) -> float:
    """Product of edge probabilities along ``root -> m -> k``."""
    _check_path(tree, path)
    _, m, k = path
    return float(tree.layer1[m] * tree.layer2[m, k])


def return_probability(tree: DecisionTree, target) -> float:
    """Total probability of ending in ``target``: sum over the layer-1 branches."""
    if target not in range(4):
        raise QueryError(f"target label {target} not in 0..3")
    return math.fsum(path_probability(tree, (tree.root, m, target)) for m in range(4))


def _check_unitary(U, name, tol=1e-8):
    U = np.asarray(U, dtype=complex)
    if U.shape != (4, 4):
        raise DimensionError(f"{name} must be 4x4")
    dev = np.max(np.abs(U.conj().T @ U - np.eye(4)))
    if dev > tol:
        raise UnitarityError(f"{name} is not unitary (deviation {dev:.3g})")
    return U


def transition_matrix(U1, U2):
    """Coherent and classical two-step transition probabilities.

    ``coherent[k, j] = |(U2 U1)_kj|^2`` sums amplitudes over the intermediate
    state; ``classical[k, j] = sum_m |U2_km|^2 |U1_mj|^2`` multiplies
    probabilities along each path.  ``gap`` is their difference.
    """
    U1 = _check_unitary(U1, "U1")
    U2 = _check_unitary(U2, "U2")
    coherent = np.abs(U2 @ U1) ** 2
    classical = (np.abs(U2) ** 2) @ (np.abs(U1) ** 2)
    return coherent, classical, coherent - classical


def tree_from_trajectory(traj, t_first, t_second, root=0) -> DecisionTree:
    """Tree with the populations at two instants; layer 2 shared across branches."""
    return build_tree(populations_at(traj, t_first), populations_at(traj, t_second), root)


def tree_from_propagators(U1, U2, root=0) -> DecisionTree:
    """Conditional tree: branch m carries the distribution reached from ``|m>``."""
    U1 = _check_unitary(U1, "U1")
    U2 = _check_unitary(U2, "U2")
    return build_tree(np.abs(U1[:, root]) ** 2, (np.abs(U2) ** 2).T, root)
