"""Perron-Frobenius theory of a single nonnegative matrix.

Everything here is numeric on top of :mod:`minmaxspec.classgraph`: spectral
radii, strictly positive eigenvectors, the Cesaro limit ``A*`` with its
fundamental system, nonnegative generalized eigenvector chains and per-state
growth descriptors ``(beta, k)`` meaning ``(A^n v)_i ~ n^(k-1) beta^n``.
"""
import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from ._spectral import SPR_TOL, block_spr, irreducible_spr
from .classgraph import EPS_SPR, check_matrix, classes, classify
from .errors import (
    ConvergenceError,
    NilpotentError,
    NotIrreducibleError,
    PreconditionError,
    SingularSystemError,
)

ZERO_TOL = 1e-12
POS_TOL = 1e-9
SHIFT_MARGIN = 1e-6
FLOOR_TOL = 1e-9  # accepted squaring change when roundoff stalls the limit


@dataclass(frozen=True, order=False)
class GrowthDescriptor:
    """``component ~ n^(k-1) * beta^n``; ``(0, 1)`` means eventually zero."""

    beta: float
    k: int = 1

    def compare(self, other, eps=EPS_SPR):
        """-1, 0 or 1, comparing ``beta`` up to relative ``eps`` and then ``k``."""
        if not _close(self.beta, other.beta, eps):
            return -1 if self.beta < other.beta else 1
        return (self.k > other.k) - (self.k < other.k)

    def __lt__(self, other):
        return self.compare(other) < 0

    def __le__(self, other):
        return self.compare(other) <= 0

    def __gt__(self, other):
        return self.compare(other) > 0

    def __ge__(self, other):
        return self.compare(other) >= 0

    def matches(self, other, eps=EPS_SPR):
        return self.compare(other, eps) == 0

    def as_tuple(self):
        return (self.beta, self.k)


def _close(a, b, eps):
    return abs(a - b) <= eps * max(abs(a), abs(b))


def cluster_values(values, eps=EPS_SPR):
    """Map each value to a cluster representative (the cluster maximum).

    Sorted values are swept once; a new cluster starts whenever the next value
    exceeds the running cluster maximum by more than relative ``eps``.  Zero is
    always its own cluster.
    """
    mapping = {}
    cluster = []
    for x in sorted(set(float(v) for v in values)):
        if cluster and x > 0 and x - cluster[-1] <= eps * x:
            cluster.append(x)
            continue
        for y in cluster:
            mapping[y] = cluster[-1]
        cluster = [x]
    for y in cluster:
        mapping[y] = cluster[-1]
    return mapping


def spectral_radius(A, eps=SPR_TOL):
    """Spectral radius as the largest class radius (each by shifted power iteration)."""
    A = check_matrix(A)
    parts, _ = classes(A)
    if eps == SPR_TOL:
        return max(block_spr(A[np.ix_(p, p)]) for p in parts)
    return max(irreducible_spr(A[np.ix_(p, p)], tol=eps)[0] for p in parts)


def perron_vector(A, eps=SPR_TOL):
    """Strictly positive eigenvector (max entry 1) of an irreducible matrix."""
    A = check_matrix(A)
    cs = classify(A)
    if len(cs.classes) != 1:
        raise NotIrreducibleError(f"matrix has {len(cs.classes)} classes")
    if A.shape[0] == 1:
        return np.ones(1)
    return irreducible_spr(A, tol=eps)[1]


def _left_perron(block):
    return perron_vector(np.asarray(block).T)


def positive_eigenvector_single(A, eps_spr=EPS_SPR):
    """``(spr, v)`` with ``v > 0`` and ``Av = spr v``, or None if no such ``v`` exists.

    Exists exactly when the basic classes are the final classes.  ``v`` is the
    Perron vector on each final class, extended to the other states through
    ``(spr I - A22)^-1 A21 v1``.
    """
    A = check_matrix(A)
    cs = classify(A, eps_spr)
    if not cs.basic_equals_final:
        return None
    return cs.spr, _extend_from_final(A, cs)


def _extend_from_final(A, cs):
    lam = cs.spr
    n = A.shape[0]
    v = np.zeros(n)
    top = []
    for c in cs.final_classes:
        part = list(cs.classes[c])
        v[part] = perron_vector(A[np.ix_(part, part)])
        top.extend(part)
    rest = sorted(set(range(n)) - set(top))
    if rest:
        M = lam * np.eye(len(rest)) - A[np.ix_(rest, rest)]
        rhs = A[np.ix_(rest, top)] @ v[top]
        try:
            v[rest] = np.linalg.solve(M, rhs)
        except np.linalg.LinAlgError as exc:
            raise SingularSystemError("nonfinal block has spectral radius lam") from exc
    if not np.all(v > 0):
        raise ConvergenceError("extended eigenvector is not strictly positive", estimate=v)
    return v / v.max()


def class_period(block):
    """Period (gcd of cycle lengths) of an irreducible block."""
    block = np.asarray(block)
    n = block.shape[0]
    level = {0: 0}
    queue = [0]
    g = 0
    for u in queue:
        for w in np.nonzero(block[u] > 0)[0]:
            w = int(w)
            if w not in level:
                level[w] = level[u] + 1
                queue.append(w)
            else:
                g = math.gcd(g, level[u] + 1 - level[w])
    if len(level) != n:
        raise NotIrreducibleError("block is not irreducible")
    return abs(g) if g else 1


def dual_matrix(A, eps=1e-13, max_squarings=200, eps_spr=EPS_SPR):
    """Cesaro limit ``A* = lim (1/(n+1)) sum_{i<=n} (A/spr)^i``.

    Averaging a whole period window at a large power gives the same limit
    with geometric instead of ``O(1/n)`` convergence: with ``P`` the lcm of
    the periods of the basic classes and ``Q = lim_m (A/spr)^(mP)`` (computed
    by repeated squaring), ``A* = (1/P) sum_{i<P} (A/spr)^i Q``.
    """
    A = check_matrix(A)
    cs = classify(A, eps_spr)
    if not cs.basic_equals_final:
        raise PreconditionError("A has no strictly positive eigenvector")
    lam = cs.spr
    if lam == 0:
        raise NilpotentError("dual matrix undefined for a nilpotent matrix")
    n = A.shape[0]
    periods = [
        class_period(A[np.ix_(cs.classes[c], cs.classes[c])]) for c in cs.basic_classes
    ]
    P = reduce(math.lcm, periods, 1)
    B = A / lam
    window = np.zeros((n, n))
    power = np.eye(n)
    for _ in range(P):
        window += power
        power = power @ B
    # Squaring doubles any error in lam, so once the roundoff floor is reached
    # the differences grow again; stop there and keep the best iterate.
    Q = power
    prev = np.inf
    for _ in range(max_squarings):
        Q2 = Q @ Q
        diff = np.max(np.abs(Q2 - Q)) / max(1.0, np.max(np.abs(Q)))
        if diff <= eps:
            Q = Q2
            break
        if diff >= prev and prev <= FLOOR_TOL:
            break
        prev, Q = diff, Q2
    else:
        raise ConvergenceError("Cesaro window did not converge", estimate=window @ Q / P)
    return window @ Q / P


def fundamental_solve(A, Astar, lam, b, eps=1e-8):
    """Solve ``(lam I - A + A*) x = b``; raises if the system is numerically singular."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    M = lam * np.eye(A.shape[0]) - A + Astar
    if np.linalg.cond(M) > 1e12:
        raise SingularSystemError("fundamental system is singular; A* inconsistent with A")
    x = np.linalg.solve(M, b)
    scale = max(np.max(np.abs(b), initial=0.0), 1e-300)
    if np.max(np.abs(M @ x - b), initial=0.0) > eps * scale:
        raise SingularSystemError("fundamental system residual too large")
    return x


def solve_nested_linear(B, lam, Bstar, r, eps=1e-8):
    """Unique solution of the nested linear system for one policy matrix ``B``.

    Solves ``B v_t = lam v_t``, ``B v_i + r_i = lam v_i + v_{i+1}`` for
    ``i = 1..t-1`` and ``B* v_1 = 0``, where ``t = len(r) + 1``.  Returns the
    list ``[v_1, ..., v_t]``.
    """
    r = [np.asarray(x, dtype=float) for x in r]
    if not r:
        raise ValueError("need at least one forcing vector (t >= 2)")
    t = len(r) + 1
    v = [None] * (t + 1)  # 1-based
    v[t] = Bstar @ r[t - 2]
    for i in range(t - 1, 0, -1):
        rhs = r[i - 1] - v[i + 1]
        if i >= 2:
            rhs = rhs + Bstar @ r[i - 2]
        v[i] = fundamental_solve(B, Bstar, lam, rhs, eps)
    return v[1:]


@dataclass(frozen=True, eq=False)
class EigenChain:
    """Nonnegative generalized eigenvectors ``v^(1..nu)`` for eigenvalue ``lam``.

    ``vectors[0]`` is ``v^(1)``.  ``partition`` is the principal partition the
    sign pattern refers to: ``v^(i)`` is positive on ``S_i..S_nu`` and zero on
    ``S_0..S_{i-1}``.
    """

    lam: float
    vectors: tuple
    partition: tuple

    @property
    def nu(self):
        return len(self.vectors)

    @property
    def scale(self):
        return max((np.max(np.abs(v)) for v in self.vectors), default=1.0)

    def normalized(self):
        s = self.scale
        return EigenChain(self.lam, tuple(v / s for v in self.vectors), self.partition)

    def residual(self, op):
        """Largest ``|op(v^(i)) - lam v^(i) - v^(i+1)|`` relative to the chain scale."""
        worst = 0.0
        for i, v in enumerate(self.vectors):
            nxt = self.vectors[i + 1] if i + 1 < self.nu else 0.0
            worst = max(worst, np.max(np.abs(op(v) - self.lam * v - nxt)))
        return worst / self.scale

    def sign_pattern_ok(self, zero_tol=ZERO_TOL, pos_tol=POS_TOL):
        s = self.scale
        for i, v in enumerate(self.vectors, start=1):
            for level, states in enumerate(self.partition):
                vals = v[list(states)] / s
                if level < i and np.any(np.abs(vals) >= zero_tol):
                    return False
                if level >= i and np.any(vals <= pos_tol):
                    return False
        return True


def positivity_shift(vectors, states, margin=SHIFT_MARGIN, max_log2=30):
    """Apply ``w_i = sum_k alpha^k v_{i+k}`` with the smallest workable alpha.

    The map preserves every chain relation ``op(v_i) = lam v_i + v_{i+1}`` for
    a linear ``op``.  Tries ``alpha = 0, 1, 2, 4, ..., 2^max_log2`` and keeps
    the first making every vector exceed ``margin * scale`` on ``states``.
    Returns ``(alpha, shifted)``.
    """
    states = list(states)
    for alpha in [0.0] + [2.0**e for e in range(max_log2 + 1)]:
        shifted = shift_chain(vectors, alpha)
        scale = max(np.max(np.abs(w)) for w in shifted)
        if all(np.min(w[states], initial=np.inf) > margin * scale for w in shifted):
            return alpha, shifted
    raise ConvergenceError("no alpha restores strict positivity", estimate=vectors)


def shift_chain(vectors, alpha):
    t = len(vectors)
    out = []
    for i in range(t):
        w = np.array(vectors[i], dtype=float)
        coef = 1.0
        for k in range(i + 1, t):
            coef *= alpha
            if coef == 0:
                break
            w = w + coef * vectors[k]
        out.append(w)
    return out


def rothblum_chain(A, eps_spr=EPS_SPR):
    """Nonnegative generalized eigenvector chain of ``A`` for ``spr(A)``.

    Built level by level over the principal partition: ``v^(1)`` starts as
    the positive eigenvector of the ``S_1`` block; each higher level ``S_t``
    is filled in by the nested linear system of its diagonal block, with the
    already-built lower vectors as forcing terms, then shifted for positivity.
    """
    A = check_matrix(A)
    cs = classify(A, eps_spr)
    lam = cs.spr
    if lam == 0:
        raise NilpotentError("spectral radius is 0; no Perron chain")
    n = A.shape[0]
    P = cs.principal_partition
    S1 = list(P[1])
    sub = positive_eigenvector_single(A[np.ix_(S1, S1)], eps_spr)
    if sub is None:
        raise ConvergenceError("S_1 block lacks a positive eigenvector (eps_spr too tight?)")
    v1 = np.zeros(n)
    v1[S1] = sub[1]
    chain = [v1]
    for t in range(2, cs.degree + 1):
        St = list(P[t])
        Bt = A[np.ix_(St, St)]
        Bstar = dual_matrix(Bt, eps_spr=eps_spr)
        r = [A[St, :] @ u for u in chain]
        x = solve_nested_linear(Bt, lam, Bstar, r)
        new = []
        for i in range(t):
            w = chain[i].copy() if i < t - 1 else np.zeros(n)
            w[St] = x[i]
            new.append(w)
        _, chain = positivity_shift(new, St)
    return EigenChain(lam, tuple(chain), P).normalized()


def growth_descriptors(A, eps_spr=EPS_SPR, cs=None, canon=None):
    """Growth descriptor of every state of ``A``.

    ``beta`` is the largest class radius reachable from the state's class and
    ``k`` the largest number of classes of radius ``beta`` on one chain from
    it.  ``canon`` maps raw class radii to cluster representatives so equal
    radii compare exactly; by default the matrix's own radii are clustered.
    """
    if cs is None:
        cs = classify(A, eps_spr)
    if canon is None:
        canon = cluster_values(cs.class_spr, eps_spr)
    rho = [canon[r] for r in cs.class_spr]
    m = len(cs.classes)
    beta = [0.0] * m
    kk = [0] * m
    for c in reversed(cs.topo_order):
        succ = np.nonzero(cs.reach[c])[0]
        b = max([rho[c]] + [beta[d] for d in succ])
        k = max((kk[d] for d in succ if beta[d] == b), default=0)
        beta[c] = b
        kk[c] = k + (rho[c] == b)
    out = []
    for s in range(cs.n):
        c = cs.class_of[s]
        out.append(GrowthDescriptor(0.0, 1) if beta[c] == 0 else GrowthDescriptor(beta[c], kk[c]))
    return out


def growth_descriptor(A, i, eps_spr=EPS_SPR):
    return growth_descriptors(A, eps_spr)[i]


def combine_growth(lam, d, eps_spr=EPS_SPR):
    """Growth of ``sum_{i<n} lam^(n-i) a_i`` when ``a_n`` has descriptor ``d``."""
    if _close(d.beta, lam, eps_spr):
        return GrowthDescriptor(lam, d.k + 1)
    if d.beta > lam:
        return d
    return GrowthDescriptor(lam, 1)


__all__ = [
    "GrowthDescriptor",
    "EigenChain",
    "block_spr",
    "class_period",
    "cluster_values",
    "combine_growth",
    "dual_matrix",
    "fundamental_solve",
    "growth_descriptor",
    "growth_descriptors",
    "perron_vector",
    "positive_eigenvector_single",
    "positivity_shift",
    "rothblum_chain",
    "shift_chain",
    "solve_nested_linear",
    "spectral_radius",
]
