"""SU(N) generators, structure constants and trace projections.

Generator ordering (stable across versions). For a dimension N the basis is

* the symmetric pair generators ``|j><k| + |k><j|``,
* the antisymmetric pair generators with entry ``(j, k) = +i`` and
  ``(k, j) = -i`` for ``j < k``, in the same pair order,
* the N-1 diagonal generators
  ``-sqrt(2/(l(l+1))) * (sum_{j<l} |j><j| - l |l><l|)`` for ``l = 1..N-1``.

The pair order is (0,1), (1,2), (0,2), then (0,3), (1,3), (2,3), then all
pairs ending in 4 in ascending order, and so on.  For N = 4 this reproduces
the usual SU(4) listing G_1 ... G_15 (G_13 = diag(-1, 1, 0, 0)).

Generator *labels* are 1-based (G_1 is ``gens[0]``); structure-constant
triples use labels, arrays use 0-based positions.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, HermiticityError, InvalidDimensionError

DROP_TOL = 1e-12
VERIFY_TOL = 1e-10


def pair_order(n: int) -> list[tuple[int, int]]:
    """Off-diagonal index pairs in generator order."""
    pairs = []
    for k in range(1, n):
        if k == 2:
            pairs += [(1, 2), (0, 2)]
        else:
            pairs += [(j, k) for j in range(k)]
    return pairs


@dataclass(frozen=True)
class GeneratorSet:
    dimension: int
    generators: np.ndarray  # (N^2 - 1, N, N) complex, read-only

    def __len__(self):
        return len(self.generators)

    def __getitem__(self, label):
        """Generator by 1-based label."""
        if not 1 <= label <= len(self.generators):
            raise IndexError(f"generator label {label} out of range")
        return self.generators[label - 1]


def build_generators(n: int) -> GeneratorSet:
    if int(n) != n or n < 2:
        raise InvalidDimensionError(f"dimension must be an integer >= 2, got {n}")
    n = int(n)
    pairs = pair_order(n)
    gens = []
    for j, k in pairs:
        g = np.zeros((n, n), dtype=complex)
        g[j, k] = g[k, j] = 1.0
        gens.append(g)
    for j, k in pairs:
        g = np.zeros((n, n), dtype=complex)
        g[j, k] = 1j
        g[k, j] = -1j
        gens.append(g)
    for l in range(1, n):
        d = np.zeros(n)
        d[:l] = 1.0
        d[l] = -l
        gens.append(np.diag(-np.sqrt(2.0 / (l * (l + 1))) * d).astype(complex))
    arr = np.array(gens)
    arr.setflags(write=False)
    return GeneratorSet(n, arr)


def _perm_sign(p):
    sign = 1
    p = list(p)
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                sign = -sign
    return sign


@dataclass(frozen=True)
class StructureTensor:
    """Sparse totally antisymmetric tensor f_{abc}.

    Only canonical triples ``a < b < c`` (1-based labels) are stored; lookups
    of any permutation return the value times the permutation sign.
    """

    dimension: int
    entries: dict = field(default_factory=dict)

    def __getitem__(self, labels):
        a, b, c = labels
        if len({a, b, c}) < 3:
            return 0.0
        order = sorted(range(3), key=lambda i: labels[i])
        key = tuple(labels[i] for i in order)
        return _perm_sign(order) * self.entries.get(key, 0.0)

    def __len__(self):
        return len(self.entries)

    def triples(self):
        """Canonical triples with values, lexicographically sorted."""
        return sorted(self.entries.items())

    def dense(self) -> np.ndarray:
        d = self.dimension
        out = np.zeros((d, d, d))
        for (a, b, c), v in self.entries.items():
            for perm in itertools.permutations(range(3)):
                idx = tuple((a, b, c)[p] - 1 for p in perm)
                out[idx] = _perm_sign(perm) * v
        return out


def _raw_structure(gens: GeneratorSet) -> np.ndarray:
    g = gens.generators
    comm = np.einsum("aij,bjk->abik", g, g) - np.einsum("bij,ajk->abik", g, g)
    # Tr([G_a, G_b] G_c) / 4i
    return (np.einsum("abij,cji->abc", comm, g) / 4j).real


def structure_constants(gens: GeneratorSet) -> StructureTensor:
    raw = _raw_structure(gens)
    d = len(gens)
    entries = {}
    for a, b, c in itertools.combinations(range(d), 3):
        v = raw[a, b, c]
        if abs(v) >= DROP_TOL:
            entries[(a + 1, b + 1, c + 1)] = float(v)
    return StructureTensor(d, entries)


@dataclass
class AlgebraReport:
    dimension: int
    orthonormality: float
    antisymmetry: float
    closure: float
    table_matched: int | None = None
    table_total: int | None = None
    table_rows: list = field(default_factory=list)
    unexpected_triples: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        ok = max(self.orthonormality, self.antisymmetry, self.closure) <= VERIFY_TOL
        if self.table_total is not None:
            ok = ok and self.table_matched == self.table_total and not self.unexpected_triples
        return ok

    def lines(self):
        yield f"SU({self.dimension}): orthonormality {self.orthonormality:.4g}, " \
              f"antisymmetry {self.antisymmetry:.4g}, closure {self.closure:.4g}"
        if self.table_total is not None:
            yield f"{self.table_matched}/{self.table_total} table triples matched"
            for t in self.unexpected_triples:
                yield f"  unexpected triple {t}"


def verify_algebra(gens: GeneratorSet, f: StructureTensor) -> AlgebraReport:
    """Check orthonormality, antisymmetry and commutator closure.

    Closure compares ``[G_a, G_b]`` against ``2i sum_c f_abc G_c`` using the
    supplied ``f``, so a corrupted tensor shows up as a residual.  For N = 4
    the tensor is also compared row by row with the reference SU(4) table.
    """
    from ._reference import SU4_TABLE

    g = gens.generators
    gram = np.einsum("aij,bji->ab", g, g)
    ortho = float(np.max(np.abs(gram - 2 * np.eye(len(g)))))

    fd = f.dense()
    anti = 0.0
    for perm in itertools.permutations(range(3)):
        anti = max(anti, float(np.max(np.abs(np.transpose(fd, perm) - _perm_sign(perm) * fd))))

    comm = np.einsum("aij,bjk->abik", g, g) - np.einsum("bij,ajk->abik", g, g)
    predicted = 2j * np.einsum("abc,cij->abij", fd, g)
    closure = float(np.max(np.abs(comm - predicted)))

    report = AlgebraReport(gens.dimension, ortho, anti, closure)
    if gens.dimension == 4:
        matched = 0
        for triple, expected in SU4_TABLE.items():
            got = f[triple]
            ok = abs(got - expected) <= VERIFY_TOL
            matched += ok
            report.table_rows.append((triple, got, expected, ok))
        report.table_matched = matched
        report.table_total = len(SU4_TABLE)
        report.unexpected_triples = [t for t in f.entries if t not in SU4_TABLE]
    return report


def _check_hermitian(m, tol=1e-10):
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if dev > tol:
        raise HermiticityError(f"matrix is not Hermitian (deviation {dev:.3g})")
    return m


def decompose(m, gens: GeneratorSet):
    """Return ``(Tr m, [Tr(m G_a)])`` for a Hermitian matrix ``m``."""
    m = _check_hermitian(m)
    if m.shape[0] != gens.dimension:
        raise DimensionError(f"matrix is {m.shape[0]}x{m.shape[0]}, generators are N={gens.dimension}")
    coeffs = np.einsum("ij,aji->a", m, gens.generators)
    scale = max(1.0, float(np.max(np.abs(m))))
    if np.max(np.abs(coeffs.imag)) > 1e-12 * scale * gens.dimension:
        raise HermiticityError("projection has a non-negligible imaginary part")
    return float(np.trace(m).real), coeffs.real.copy()


def recompose(trace_part, coeffs, gens: GeneratorSet) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (len(gens),):
        raise DimensionError(f"expected {len(gens)} coefficients, got shape {coeffs.shape}")
    n = gens.dimension
    return trace_part / n * np.eye(n, dtype=complex) + 0.5 * np.einsum("a,aij->ij", coeffs, gens.generators)


def dump_algebra(n: int) -> dict:
    """JSON-ready document with generators and canonical structure constants."""
    gens = build_generators(n)
    f = structure_constants(gens)
    return {
        "n": gens.dimension,
        "generators": [
            [[[float(z.real), float(z.imag)] for z in row] for row in g] for g in gens.generators
        ],
        "structure_constants": [
            {"i": a, "j": b, "k": c, "f": v} for (a, b, c), v in f.triples()
        ],
    }


def write_dump(n: int, path) -> dict:
    doc = dump_algebra(n)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
    return doc
