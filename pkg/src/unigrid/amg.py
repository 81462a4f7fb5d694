"""Classical (Ruge-Stuben) AMG setup.

Builds the strength graph, a two-pass C/F splitting, classical interpolation
and Galerkin coarse operators, then precomputes what the unigrid cycles need:
composite interpolants to the finest grid and the diagonals of the composite
Galerkin operators.
"""

import heapq
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .sparse import as_csr, galerkin_product, transpose

__all__ = [
    "StrengthGraph",
    "CfSplit",
    "Level",
    "Hierarchy",
    "strength_graph",
    "cf_split",
    "check_split",
    "build_interpolation",
    "coarsen_level",
    "build_hierarchy",
    "composite_interpolant",
]

C_PT, F_PT = 1, 0


@dataclass
class StrengthGraph:
    """Strong connections: row ``i`` of ``S`` holds the set ``S_i``.

    ``sym`` is the undirected adjacency (``j in S_i`` or ``i in S_j``) used
    for the independent-set pass.
    """
    S: sp.csr_matrix
    sym: sp.csr_matrix

    @property
    def n(self):
        return self.S.shape[0]

    def neighbors(self, i):
        return self.S.indices[self.S.indptr[i]:self.S.indptr[i + 1]]


@dataclass
class CfSplit:
    labels: np.ndarray  # 1 for C, 0 for F
    first_pass: np.ndarray  # labels after the independent-set pass

    @property
    def coarse_index(self):
        """Map fine index -> coarse index (-1 for F points)."""
        idx = np.full(len(self.labels), -1, dtype=np.int64)
        c = np.flatnonzero(self.labels == C_PT)
        idx[c] = np.arange(len(c))
        return idx

    @property
    def n_coarse(self):
        return int(np.count_nonzero(self.labels == C_PT))


@dataclass
class Level:
    A: sp.csr_matrix
    P: sp.csr_matrix = None
    R: sp.csr_matrix = None
    split: CfSplit = None


@dataclass
class Hierarchy:
    """Levels finest first.  ``composite[k]`` maps level ``k`` to level 0
    (``composite[0]`` is the identity); ``galerkin_diagonals[k][j]`` is
    ``<A d, d>`` for column ``d`` of ``composite[k]``.
    """
    levels: list
    composite: list = field(default_factory=list)
    galerkin_diagonals: list = field(default_factory=list)
    # CSC copies of composite[k] and of A @ composite[k] for the directional updates
    composite_csc: list = field(default_factory=list)
    applied: list = field(default_factory=list)

    @property
    def n_levels(self):
        return len(self.levels)

    def summary(self):
        A0 = self.levels[0].A
        nnz = [lvl.A.nnz for lvl in self.levels]
        sizes = [lvl.A.shape[0] for lvl in self.levels]
        return {
            "levels": [{"n": n, "nnz": z} for n, z in zip(sizes, nnz)],
            "operator_complexity": sum(nnz) / max(A0.nnz, 1),
            "grid_complexity": sum(sizes) / A0.shape[0],
        }


def strength_graph(A, theta=0.25):
    """Classical strength of connection.

    ``j`` is in ``S_i`` iff ``-a_ij >= theta * max_{k != i} (-a_ik)``.  Rows
    with no negative off-diagonal get an empty ``S_i``; positive entries are
    never strong.
    """
    if not (0.0 < theta <= 1.0):
        raise ValueError(f"theta must lie in (0, 1], got {theta}")
    A = as_csr(A)
    if A.shape[0] != A.shape[1]:
        raise ValueError("strength graph needs a square matrix")
    n = A.shape[0]
    rows = np.repeat(np.arange(n), np.diff(A.indptr))
    cols = A.indices
    neg = np.where(rows != cols, -A.data, -np.inf)
    row_max = np.full(n, -np.inf)
    np.maximum.at(row_max, rows, neg)
    strong = (rows != cols) & (row_max[rows] > 0) & (neg > 0) & (neg >= theta * row_max[rows])
    S = sp.csr_matrix((np.ones(np.count_nonzero(strong)), (rows[strong], cols[strong])),
                      shape=(n, n))
    S.sort_indices()
    sym = as_csr(((S + S.T) > 0).astype(np.float64))
    return StrengthGraph(S, sym)


def _greedy_mis(sg):
    n = sg.n
    label = np.full(n, -1, dtype=np.int64)
    ptr, idx = sg.sym.indptr, sg.sym.indices
    for i in range(n):
        if label[i] == -1:
            label[i] = C_PT
            nbrs = idx[ptr[i]:ptr[i + 1]]
            label[nbrs[label[nbrs] == -1]] = F_PT
    return label


def _weighted_mis(sg):
    """Independent set visiting points by the classical RS measure ``lambda``."""
    n = sg.n
    S, ST = sg.S, sg.S.T.tocsr()
    ptr, idx = sg.sym.indptr, sg.sym.indices
    lam = np.diff(ST.indptr).astype(np.int64)
    label = np.full(n, -1, dtype=np.int64)
    heap = [(-lam[i], i) for i in range(n)]
    heapq.heapify(heap)
    while heap:
        neg_l, i = heapq.heappop(heap)
        if label[i] != -1 or -neg_l != lam[i]:
            continue
        label[i] = C_PT
        for j in idx[ptr[i]:ptr[i + 1]]:
            if label[j] != -1:
                continue
            label[j] = F_PT
            for k in S.indices[S.indptr[j]:S.indptr[j + 1]]:
                if label[k] == -1:
                    lam[k] += 1
                    heapq.heappush(heap, (-lam[k], k))
    return label


def cf_split(sg, first_pass="greedy"):
    """Two-pass C/F splitting.

    The first pass is a maximal independent set over the symmetrized strong
    graph, scanning points in index order (``"greedy"``) or by the classical
    influence measure (``"rs"``).  The second pass visits F points in index
    order; an F point with no strong C neighbor becomes C, and for every
    strong F neighbor ``k`` of ``i`` that shares no strong C point with
    ``i``, the smaller of ``i`` and ``k`` becomes C.
    """
    if first_pass == "greedy":
        label = _greedy_mis(sg)
    elif first_pass == "rs":
        label = _weighted_mis(sg)
    else:
        raise ValueError(f"unknown first pass {first_pass!r}")
    first = label.copy()

    S = sg.S
    for i in range(sg.n):
        if label[i] != F_PT:
            continue
        Si = S.indices[S.indptr[i]:S.indptr[i + 1]]
        Ci = set(Si[label[Si] == C_PT].tolist())
        if not Ci:
            label[i] = C_PT
            continue
        for k in Si[label[Si] == F_PT]:
            Sk = S.indices[S.indptr[k]:S.indptr[k + 1]]
            if Ci.isdisjoint(Sk.tolist()):
                if i < k:
                    label[i] = C_PT
                    break
                label[k] = C_PT
                Ci.add(int(k))
    return CfSplit(label, first)


def check_split(sg, split):
    """List invariant violations of a splitting (empty list when valid)."""
    problems = []
    label = split.labels
    sym = sg.sym
    first = split.first_pass
    for i in range(sg.n):
        nbrs = sym.indices[sym.indptr[i]:sym.indptr[i + 1]]
        if first[i] == C_PT and np.any(first[nbrs] == C_PT):
            problems.append(("not independent", i))
        if first[i] == F_PT and not np.any(first[nbrs] == C_PT):
            problems.append(("not maximal", i))
    S = sg.S
    for i in np.flatnonzero(label == F_PT):
        Si = S.indices[S.indptr[i]:S.indptr[i + 1]]
        Ci = set(Si[label[Si] == C_PT].tolist())
        if not Ci:
            problems.append(("no strong C neighbor", int(i)))
        for k in Si[label[Si] == F_PT]:
            Sk = S.indices[S.indptr[k]:S.indptr[k + 1]]
            if Ci.isdisjoint(Sk.tolist()):
                problems.append(("no common C point", int(i), int(k)))
    return problems


def build_interpolation(A, sg, split):
    """Classical interpolation ``P`` (one column per C point).

    F rows use
    ``(a_ii + sum_W a_il) e_i = -sum_{j in C_i} (a_ij + sum_{k in F_i} a_ik a_kj / sum_{m in C_i} a_km) e_j``
    with weak connections lumped onto the diagonal.
    """
    A = as_csr(A)
    n = A.shape[0]
    label = split.labels
    cidx = split.coarse_index
    nc = split.n_coarse
    S = sg.S
    ptr, ind, val = A.indptr, A.indices, A.data

    rows, cols, vals = [], [], []
    for i in range(n):
        if label[i] == C_PT:
            rows.append(i)
            cols.append(cidx[i])
            vals.append(1.0)
            continue
        strong = set(S.indices[S.indptr[i]:S.indptr[i + 1]].tolist())
        Ci, Fi = {}, {}
        diag = 0.0
        lumped = 0.0
        for p in range(ptr[i], ptr[i + 1]):
            j, a = ind[p], val[p]
            if j == i:
                diag = a
            elif j in strong:
                (Ci if label[j] == C_PT else Fi)[j] = a
            else:
                lumped += a
        if not Ci:
            raise ValueError(f"F point {i} has no strong C neighbor")
        num = dict(Ci)
        for k, a_ik in Fi.items():
            row_k = {ind[p]: val[p] for p in range(ptr[k], ptr[k + 1])}
            denom = sum(row_k.get(m, 0.0) for m in Ci)
            if denom == 0.0:
                raise ValueError(f"zero distribution denominator for F point {k} in row {i}")
            for j in Ci:
                a_kj = row_k.get(j, 0.0)
                if a_kj != 0.0:
                    num[j] += a_ik * a_kj / denom
        lhs = diag + lumped
        if lhs == 0.0:
            raise ValueError(f"zero interpolation denominator in row {i}")
        for j in sorted(num):
            rows.append(i)
            cols.append(cidx[j])
            vals.append(-num[j] / lhs)
    P = sp.csr_matrix((vals, (rows, cols)), shape=(n, nc))
    return as_csr(P)


def coarsen_level(A, theta=0.25, first_pass="greedy"):
    """One coarsening step; returns ``(Level, A_coarse)``."""
    A = as_csr(A)
    sg = strength_graph(A, theta)
    split = cf_split(sg, first_pass)
    P = build_interpolation(A, sg, split)
    R = transpose(P)
    Ac = galerkin_product(R, A, P)
    return Level(A, P, R, split), Ac


def composite_interpolant(levels, k):
    """``I_k^0 = P_0 P_1 ... P_{k-1}`` (identity for ``k = 0``)."""
    if not 0 <= k < len(levels):
        raise ValueError(f"level {k} out of range 0..{len(levels) - 1}")
    n0 = levels[0].A.shape[0]
    I = sp.identity(n0, format="csr")
    for lvl in levels[:k]:
        I = I @ lvl.P
    return as_csr(I)


def build_hierarchy(A, theta=0.25, first_pass="greedy", max_levels=50):
    """Recursive coarsening until the next grid would have at most one point
    or coarsening stagnates.  No level is factored."""
    A = as_csr(A)
    levels = []
    while len(levels) < max_levels - 1 and A.shape[0] > 1:
        sg = strength_graph(A, theta)
        split = cf_split(sg, first_pass)
        nc = split.n_coarse
        if nc <= 1 or nc == A.shape[0]:
            break
        P = build_interpolation(A, sg, split)
        R = transpose(P)
        levels.append(Level(A, P, R, split))
        A = galerkin_product(R, A, P)
    levels.append(Level(A))

    A0 = levels[0].A
    composite, composite_csc, diags, applied = [], [], [], []
    I = sp.identity(A0.shape[0], format="csr")
    for k, lvl in enumerate(levels):
        if k > 0:
            I = as_csr(I @ levels[k - 1].P)
        AI = as_csr(A0 @ I)
        composite.append(I)
        composite_csc.append(_csc(I))
        applied.append(_csc(AI))
        diags.append(np.asarray(AI.multiply(I).sum(axis=0)).ravel())
    return Hierarchy(levels, composite, diags, composite_csc, applied)


def _csc(M):
    M = M.tocsc()
    M.sort_indices()
    return M
