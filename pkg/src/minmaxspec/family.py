"""Finite matrix families closed under row interchange.

A family is stored as one list of candidate rows per state; the set of
matrices it stands for (one candidate per row, every combination) has the
product property by construction and is only materialised by
:func:`enumerate_closure`.  A *policy* is a tuple holding one choice index per
row and names a single matrix of that set.
"""
import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from ._pykernels import _log_products, _log_weights
from .classgraph import EPS_SPR, check_matrix, classify
from .errors import ClosureTooLarge, MinMaxError, NilpotentError
from .perron import cluster_values, growth_descriptors

EPS_TIE = 1e-12
DEFAULT_CAP = 4096
MODES = ("min", "max")


@dataclass(frozen=True, eq=False)
class RowChoiceFamily:
    """Per-row candidate sets.  ``rows[i]`` is an ``(m_i, n)`` array."""

    rows: tuple

    def __post_init__(self):
        rows = tuple(np.atleast_2d(np.asarray(r, dtype=float)) for r in self.rows)
        n = len(rows)
        if n < 1:
            raise ValueError("family needs at least one state")
        for i, r in enumerate(rows):
            if r.shape[0] < 1 or r.shape[1] != n:
                raise ValueError(f"row {i}: expected (m>=1, {n}) choices, got {r.shape}")
            if not np.all(np.isfinite(r)) or np.any(r < 0):
                raise ValueError(f"row {i}: choices must be finite and nonnegative")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_rows(cls, rows, dedup=True):
        """Build from nested lists; exact duplicate choices are dropped (first kept)."""
        out = []
        for choices in rows:
            arr = np.atleast_2d(np.asarray(choices, dtype=float))
            if dedup:
                seen = {}
                for c in arr:
                    seen.setdefault(c.tobytes(), c)
                arr = np.array(list(seen.values()))
            out.append(arr)
        return cls(tuple(out))

    @property
    def n(self):
        return len(self.rows)

    @property
    def choice_counts(self):
        return tuple(r.shape[0] for r in self.rows)

    @property
    def closure_size(self):
        size = 1
        for m in self.choice_counts:
            size *= m
        return size

    @cached_property
    def stacked(self):
        """``(rows, offsets)`` in the layout the kernels expect."""
        offsets = np.zeros(self.n + 1, dtype=np.intp)
        offsets[1:] = np.cumsum(self.choice_counts)
        return np.ascontiguousarray(np.vstack(self.rows)), offsets

    def matrix(self, policy):
        return np.array([self.rows[i][c] for i, c in enumerate(policy)])

    def restrict(self, states, keep=None):
        """Family on ``states`` (rows and columns); returns ``(family, index_map)``.

        ``keep(i, choice_row)`` may drop choices; ``index_map[k]`` lists the
        original choice indices of the new row ``k``.  Duplicates that appear
        after dropping columns are kept so indices stay aligned.
        """
        states = list(states)
        new_rows, index_map = [], []
        for i in states:
            idx = [c for c, row in enumerate(self.rows[i]) if keep is None or keep(i, row)]
            if not idx:
                raise MinMaxError(f"state {i} has no admissible choice")
            new_rows.append(self.rows[i][np.ix_(idx, states)])
            index_map.append(idx)
        return RowChoiceFamily(tuple(new_rows)), index_map


def family_from_matrices(matrices):
    """Row-interchange closure of a list of same-size nonnegative matrices."""
    mats = [check_matrix(M) for M in matrices]
    if not mats:
        raise ValueError("need at least one matrix")
    n = mats[0].shape[0]
    if any(M.shape != (n, n) for M in mats):
        raise ValueError("matrices differ in dimension")
    return RowChoiceFamily.from_rows([[M[i] for M in mats] for i in range(n)])


def single(A):
    """The one-matrix family ``{A}``."""
    A = check_matrix(A)
    return RowChoiceFamily(tuple(A[i : i + 1] for i in range(A.shape[0])))


def _check_mode(mode):
    if mode not in MODES:
        raise ValueError(f"mode must be 'min' or 'max', got {mode!r}")
    return mode == "max"


def apply(F, v, mode="min"):
    """``f_K(v)`` (mode ``"min"``) or ``g_K(v)`` (mode ``"max"``), componentwise."""
    maximize = _check_mode(mode)
    rows, offsets = F.stacked
    return kernels.apply_rows(rows, offsets, np.asarray(v, dtype=float), maximize)


def _tie_tol(F, v, eps_tie):
    rows, _ = F.stacked
    return eps_tie * max(np.max(np.abs(v)), 1e-300) * max(1.0, rows.sum(axis=1).max())


def optimal_choices(F, v, mode="min", eps_tie=EPS_TIE):
    """Per row, the list of choice indices within the tie tolerance of the optimum."""
    maximize = _check_mode(mode)
    tol = _tie_tol(F, v, eps_tie)
    out = []
    for r in F.rows:
        vals = r @ v
        best = vals.max() if maximize else vals.min()
        out.append([int(c) for c in np.nonzero(np.abs(vals - best) <= tol)[0]])
    return out


def select_policy(F, v, mode="min", incumbent=None, eps_tie=EPS_TIE):
    """A policy attaining ``apply(F, v, mode)`` in every row.

    Ties keep the incumbent's choice when it is optimal, else the lowest index.
    """
    opt = optimal_choices(F, np.asarray(v, dtype=float), mode, eps_tie)
    policy = []
    for i, cands in enumerate(opt):
        if incumbent is not None and incumbent[i] in cands:
            policy.append(incumbent[i])
        else:
            policy.append(cands[0])
    return tuple(policy)


def enumerate_closure(F, cap=DEFAULT_CAP):
    """Iterator over every ``(policy, matrix)`` of the closure, in lexicographic order.

    Raises :class:`ClosureTooLarge` up front when the closure exceeds ``cap``.
    """
    size = F.closure_size
    if size > cap:
        raise ClosureTooLarge(size, cap)
    return ((p, F.matrix(p)) for p in itertools.product(*(range(m) for m in F.choice_counts)))


def _keys(descs):
    return tuple((d.beta, d.k) for d in descs)


def descriptor_table(matrices, eps_spr=EPS_SPR):
    """Descriptor vectors of several matrices on one shared radius clustering."""
    structures = [classify(M, eps_spr) for M in matrices]
    canon = cluster_values([r for cs in structures for r in cs.class_spr], eps_spr)
    return [growth_descriptors(None, eps_spr, cs, canon) for cs in structures]


def _least(keys, maximize):
    """Index of the first key vector that is componentwise optimal, or None."""
    pick = max if maximize else min
    target = tuple(pick(col) for col in zip(*keys))
    for idx, kv in enumerate(keys):
        if kv == target:
            return idx
    return None


def _extremal_brute(F, maximize, cap, eps_spr):
    policies, mats = zip(*enumerate_closure(F, cap))
    keys = [_keys(d) for d in descriptor_table(mats, eps_spr)]
    idx = _least(keys, maximize)
    if idx is None:
        raise MinMaxError("closure has no extremal element (tolerance too loose?)")
    return policies[idx]


def _greedy_pool(F, maximize, steps):
    """Distinct greedy policies along a log-domain value iteration of ``F``."""
    rows, offsets = F.stacked
    logw = _log_weights(rows)
    trace = kernels.log_trace(rows, offsets, np.zeros(F.n), steps, maximize)
    pool = {}
    prev = None
    for x in trace:
        vals = _log_products(logw, x)
        policy = []
        for i in range(F.n):
            seg = vals[offsets[i] : offsets[i + 1]]
            finite = np.isfinite(seg)
            if maximize:
                best = seg.max()
            else:
                best = seg.min()
            if np.isfinite(best):
                tol = 1e-12 * max(1.0, abs(best))
                cands = [c for c in range(seg.size) if finite[c] and abs(seg[c] - best) <= tol]
            else:
                cands = [c for c in range(seg.size) if seg[c] == best]
            keep = prev is not None and prev[i] in cands
            policy.append(prev[i] if keep else cands[0])
        prev = tuple(policy)
        pool.setdefault(prev, None)
    return list(pool)


def _peel(F, maximize, eps_spr):
    """One level of the merge construction on ``F``.

    Returns ``(policy, peeled)``: a policy from the candidate pool whose set of
    globally extremal states is largest (after pairwise row merges), and that
    set.
    """
    pool = _greedy_pool(F, maximize, steps=48 + 12 * F.n)
    descs = descriptor_table([F.matrix(p) for p in pool], eps_spr)
    keys = [_keys(d) for d in descs]
    flat = [k for kv in keys for k in kv]
    target = max(flat) if maximize else min(flat)

    def peeled(kv):
        return frozenset(i for i, k in enumerate(kv) if k == target)

    cands = {p: peeled(kv) for p, kv in zip(pool, keys) if target in kv}
    changed = True
    while changed:
        changed = False
        items = list(cands.items())
        for (pb, sb), (pd, sd) in itertools.permutations(items, 2):
            if sd <= sb:
                continue
            merged = tuple(pb[i] if i in sb else pd[i] for i in range(F.n))
            if merged in cands:
                continue
            kv = _keys(descriptor_table([F.matrix(merged)], eps_spr)[0])
            s = peeled(kv)
            if target in kv and s >= sb | sd:
                cands[merged] = s
                changed = True
    best = max(cands, key=lambda p: (len(cands[p]), [-c for c in p]))
    return best, cands[best]


def _extremal_recursive(F, maximize, eps_spr):
    policy, top = _peel(F, maximize, eps_spr)
    rest = [i for i in range(F.n) if i not in top]
    if not rest:
        return policy
    if maximize:
        # a state that could reach the peeled set would itself be peeled
        sub, index_map = F.restrict(rest, keep=lambda i, row: not row[list(top)].any())
    else:
        sub, index_map = F.restrict(rest)
    sub_policy = _extremal_recursive(sub, maximize, eps_spr)
    merged = list(policy)
    for k, i in enumerate(rest):
        merged[i] = index_map[k][sub_policy[k]]
    return tuple(merged)


def extremal_matrix(F, mode="min", strategy="auto", cap=DEFAULT_CAP, eps_spr=EPS_SPR):
    """A growth-extremal matrix of the family: ``(policy, matrix)``.

    For ``mode="min"`` every state's growth descriptor under the result is no
    larger than under any other matrix of the family (``"max"``: no smaller).

    ``strategy="brute"`` enumerates the closure and picks the componentwise
    least descriptor vector.  ``"recursive"`` follows the merge construction:
    peel off the states of globally extremal growth using the largest such set
    found among greedy value-iteration policies and their row merges, then
    recurse on the remaining states.  ``"auto"`` is brute up to ``cap``.
    """
    maximize = _check_mode(mode)
    if strategy == "auto":
        strategy = "brute" if F.closure_size <= cap else "recursive"
    if strategy == "brute":
        policy = _extremal_brute(F, maximize, cap, eps_spr)
    elif strategy == "recursive":
        policy = _extremal_recursive(F, maximize, eps_spr)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    M = F.matrix(policy)
    if classify(M, eps_spr).spr == 0:
        raise NilpotentError(f"the {mode}-extremal matrix is nilpotent")
    return policy, M


@dataclass(frozen=True)
class MinimalPartition:
    partition: tuple
    lam: float
    nu: int
    policy: tuple


def minimal_partition(F, strategy="auto", cap=DEFAULT_CAP, eps_spr=EPS_SPR):
    """Principal partition, spectral radius and degree of a growth-minimal matrix."""
    policy, B = extremal_matrix(F, "min", strategy, cap, eps_spr)
    cs = classify(B, eps_spr)
    return MinimalPartition(cs.principal_partition, cs.spr, cs.degree, policy)
