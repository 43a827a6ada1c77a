"""Eigen-theory of the min operator ``f_K(v) = min_{A in K} Av``.

Policy iteration for a strictly positive eigenvector, the nested
functional-equation solver (a Howard-style improvement loop over a chain of
linear systems), the generalized eigenvector chain of ``f_K`` and the
per-state growth descriptors of ``f_K^n`` / ``g_K^n``.

All operations work on a :class:`~minmaxspec.family.RowChoiceFamily` and never
materialise the closure except where a brute-force check is explicitly
requested.
"""
from dataclasses import dataclass

import numpy as np

from .classgraph import EPS_SPR, classify
from .errors import (
    ConvergenceError,
    NonterminationError,
    NotIrreducibleError,
    PreconditionError,
    SingularSystemError,
)
from .family import (
    DEFAULT_CAP,
    EPS_TIE,
    apply,
    enumerate_closure,
    extremal_matrix,
    select_policy,
)
from .perron import (
    EigenChain,
    GrowthDescriptor,
    _close,
    _extend_from_final,
    dual_matrix,
    growth_descriptors,
    perron_vector,
    positivity_shift,
    shift_chain,
    solve_nested_linear,
)

NESTED_TIE = 1e-9
RESIDUAL_TOL = 1e-8
SINGULAR_TOL = 1e-10
POS_MARGIN = 1e-12


# ---------------------------------------------------------------------------
# strictly positive eigenvector


def _policy_step_cap(F):
    # every policy can appear at most once along a strictly improving run
    return F.closure_size + 1


def _improve_eigenvector(F, policy, lam, v, eps_tie):
    """Policy iteration with eigenvector update; returns ``(policy, v, steps)``.

    ``v`` must be a strictly positive eigenvector of ``F.matrix(policy)`` for
    ``lam``.  Each step keeps ``v`` on the final classes of the improved
    policy ``D`` and re-solves ``(lam I - D22) u2 = D21 v1`` on the rest.
    """
    cap = _policy_step_cap(F)
    for step in range(cap):
        D = select_policy(F, v, "min", incumbent=policy, eps_tie=eps_tie)
        if D == policy:
            return policy, v, step
        Dm = F.matrix(D)
        cs = classify(Dm)
        top = sorted(s for c in cs.final_classes for s in cs.classes[c])
        rest = sorted(set(range(F.n)) - set(top))
        u = v.copy()
        if rest:
            M = lam * np.eye(len(rest)) - Dm[np.ix_(rest, rest)]
            if np.linalg.cond(M) * SINGULAR_TOL > 1.0:
                raise SingularSystemError(
                    "nonfinal block of the improved policy has radius lam "
                    "(eps_spr misclassification?)"
                )
            u[rest] = np.linalg.solve(M, Dm[np.ix_(rest, top)] @ v[top])
        if not np.all(u > 0):
            raise ConvergenceError("policy update lost strict positivity", estimate=u)
        policy, v = D, u / u.max()
    raise NonterminationError(
        f"policy iteration did not stabilise within {cap} steps", estimate=v, iterations=cap
    )


@dataclass(frozen=True, eq=False)
class PositiveEigenvector:
    """``f_K(vector) = lam * vector`` with ``vector > 0`` (max entry 1)."""

    lam: float
    vector: np.ndarray
    policy: tuple
    steps: int = 0
    unique: bool = None

    def __iter__(self):  # unpack as ``lam, v = ...``
        return iter((self.lam, self.vector))


def positive_eigenvector_min(F, strategy="auto", cap=DEFAULT_CAP, eps_spr=EPS_SPR,
                             eps_tie=EPS_TIE, start_policy=None):
    """Strictly positive eigenvector of ``f_K``, or None when none exists.

    One exists exactly when a growth-minimal matrix ``B`` has its basic
    classes equal to its final classes.  Starting from ``B`` and its positive
    eigenvector, the policy is improved until it minimises ``Av`` itself.

    ``start_policy`` replaces the extremal search (it must name a
    growth-minimal matrix).  Returns a :class:`PositiveEigenvector`, which
    unpacks as ``(lam, v)``.
    """
    if start_policy is None:
        start_policy, B = extremal_matrix(F, "min", strategy, cap, eps_spr)
    else:
        start_policy = tuple(start_policy)
        B = F.matrix(start_policy)
    cs = classify(B, eps_spr)
    if not cs.basic_equals_final:
        return None
    lam = cs.spr
    v = _extend_from_final(B, cs)
    policy, v, steps = _improve_eigenvector(F, start_policy, lam, v, eps_tie)
    return PositiveEigenvector(lam, v, policy, steps)


def _all_irreducible(F, cap):
    if F.closure_size <= cap:
        return all(len(classify(M).classes) == 1 for _, M in enumerate_closure(F, cap))
    # conservative: one shared zero pattern per row means one shared digraph
    for r in F.rows:
        if np.any((r > 0) != (r[0] > 0)):
            return False
    return len(classify(F.matrix((0,) * F.n)).classes) == 1


def irreducible_eigenvector_min(F, cap=DEFAULT_CAP, eps_tie=EPS_TIE):
    """Positive eigenvector of ``f_K`` when every matrix of the closure is irreducible.

    The eigenvalue is ``min_{A in K} spr(A)`` and the eigenvector is unique
    up to scale; uniqueness is checked by running the iteration from two
    different start policies and comparing the normalised results.

    Irreducibility is verified on every closure matrix when the closure has
    at most ``cap`` elements, otherwise by requiring all choices of a row to
    share one zero pattern.
    """
    if not _all_irreducible(F, cap):
        raise NotIrreducibleError("some matrix of the closure is reducible")
    runs = []
    for start in ((0,) * F.n, tuple(m - 1 for m in F.choice_counts)):
        policy = start
        for _ in range(_policy_step_cap(F)):
            P = F.matrix(policy)
            lam, v = classify(P).spr, perron_vector(P)
            D = select_policy(F, v, "min", incumbent=policy, eps_tie=eps_tie)
            if D == policy:
                break
            policy = D
        else:
            raise NonterminationError("policy iteration did not stabilise", estimate=v)
        runs.append(PositiveEigenvector(lam, v, policy))
    a, b = runs
    unique = _close(a.lam, b.lam, EPS_SPR) and np.allclose(a.vector, b.vector, rtol=1e-8, atol=1e-12)
    return PositiveEigenvector(a.lam, a.vector, a.policy, unique=bool(unique))


# ---------------------------------------------------------------------------
# nested functional equations


def tabulate_row_terms(F, r, t):
    """Per-choice table of the forcing terms ``r_1..r_{t-1}``.

    ``r`` is either a callable ``policy -> [r_1, ..., r_{t-1}]`` (vectors of
    length ``n``) or already a table.  A table is a list over ``i`` of
    per-row arrays: ``table[i][j][c]`` is row ``j`` of ``r_{i+1}`` when row
    ``j`` uses choice ``c``.  A callable is probed one choice at a time and
    must be row-local (row ``j`` of its output may depend only on row ``j``'s
    choice); a violation raises :class:`PreconditionError`.
    """
    if not callable(r):
        table = [[np.asarray(col, dtype=float) for col in level] for level in r]
        if len(table) != t - 1:
            raise ValueError(f"expected {t - 1} forcing terms, got {len(table)}")
        for level in table:
            if len(level) != F.n or any(col.shape != (m,) for col, m in zip(level, F.choice_counts)):
                raise ValueError("forcing table does not match the family's choice counts")
        return table
    base = (0,) * F.n
    ref = [np.asarray(x, dtype=float) for x in r(base)]
    if len(ref) != t - 1:
        raise ValueError(f"expected {t - 1} forcing terms, got {len(ref)}")
    table = [[np.empty(m) for m in F.choice_counts] for _ in range(t - 1)]
    for j, m in enumerate(F.choice_counts):
        for c in range(m):
            probe = list(base)
            probe[j] = c
            out = [np.asarray(x, dtype=float) for x in r(tuple(probe))]
            for i in range(t - 1):
                others = np.delete(out[i] - ref[i], j)
                if np.any(others != 0):
                    raise PreconditionError("forcing terms are not row-local")
                table[i][j][c] = out[i][j]
    return table


@dataclass(frozen=True, eq=False)
class NestedSolution:
    """Solution ``v^(1..t)`` of the nested equations and the optimal policy.

    ``shrinking_sets[k]`` lists, per row, the choices still optimal after
    equations ``t, t-1, ..., t-k`` (so index 0 is ``K_t`` and the last entry
    is the innermost set).
    """

    t: int
    vectors: tuple
    policy: tuple
    shrinking_sets: tuple
    steps: int = 0


def _row_values(F, table, vectors, level):
    """Per-row arrays of ``a . v^(level) + r_level(a)`` (``level`` is 1-based)."""
    v = vectors[level - 1]
    out = []
    for j, rows in enumerate(F.rows):
        vals = rows @ v
        if level < len(vectors):
            vals = vals + table[level - 1][j]
        out.append(vals)
    return out


def _shrinking_sets(F, table, vectors, eps_tie):
    """Choices attaining the minimum of equations ``t, t-1, ..., 1`` in turn."""
    t = len(vectors)
    maxrow = max(1.0, max(r.sum(axis=1).max() for r in F.rows))
    cands = [list(range(m)) for m in F.choice_counts]
    sets = []
    for level in range(t, 0, -1):
        vals = _row_values(F, table, vectors, level)
        scale = np.max(np.abs(vectors[level - 1])) * maxrow
        if level < t:
            scale += np.max(np.abs(vectors[level]))
            scale += max((np.max(np.abs(col)) for col in table[level - 1]), default=0.0)
        tol = eps_tie * max(scale, 1e-300)
        new = []
        for j in range(F.n):
            best = min(vals[j][c] for c in cands[j])
            new.append([c for c in cands[j] if vals[j][c] - best <= tol])
        cands = new
        sets.append(tuple(tuple(c) for c in cands))
    return sets


def _lex_progress(old, new, tol):
    """Check the lexicographic decrease of the improvement step (top level first)."""
    for v, u in zip(reversed(old), reversed(new)):
        scale = tol * max(np.max(np.abs(v)), np.max(np.abs(u)), 1.0)
        if np.any(u > v + scale):
            return False
        if np.max(np.abs(u - v)) > scale:
            return True
    return True


def nested_policy_iteration(F, t, r, start_policy=None, strategy="auto", cap=DEFAULT_CAP,
                            eps_spr=EPS_SPR, eps_tie=NESTED_TIE, eps=RESIDUAL_TOL):
    """Solve the nested functional equations by policy iteration.

    Finds ``v^(1..t)`` with ``min_{A in K} A v^(t) = lam v^(t)`` and, for
    ``i = t-1..1``, ``min over K_{i+1} of {A v^(i) + r_i(A)} = lam v^(i) +
    v^(i+1)``, where ``K_t, K_{t-1}, ...`` are the successively shrinking
    sets of minimisers.  Each step solves the linear system of the incumbent
    policy, then improves row by row through the equations from the top,
    keeping the incumbent's choice whenever it is still optimal.

    ``r`` is a row-local forcing specification (see
    :func:`tabulate_row_terms`).  The start policy must be growth-minimal
    with a strictly positive eigenvector; by default it is the extremal
    matrix.  Raises :class:`PreconditionError` when ``B* r_{t-1}(B)`` is not
    strictly positive at the start.
    """
    if t < 1:
        raise ValueError("t must be >= 1")
    if t == 1:
        res = positive_eigenvector_min(F, strategy, cap, eps_spr, start_policy=start_policy)
        if res is None:
            raise PreconditionError("no growth-minimal matrix has a positive eigenvector")
        sets = _shrinking_sets(F, [], [res.vector], eps_tie)
        return NestedSolution(1, (res.vector,), res.policy, tuple(sets), res.steps)

    table = tabulate_row_terms(F, r, t)
    if start_policy is None:
        start_policy, _ = extremal_matrix(F, "min", strategy, cap, eps_spr)
    policy = tuple(start_policy)
    B = F.matrix(policy)
    cs = classify(B, eps_spr)
    if not cs.basic_equals_final:
        raise PreconditionError("start policy has no strictly positive eigenvector")
    lam = cs.spr

    def solve(p):
        M = F.matrix(p)
        forcing = [np.array([table[i][j][c] for j, c in enumerate(p)]) for i in range(t - 1)]
        return solve_nested_linear(M, lam, dual_matrix(M, eps_spr=eps_spr), forcing, eps)

    vectors = solve(policy)
    top = vectors[-1]
    if not np.all(top > POS_MARGIN * max(np.max(np.abs(top)), 1e-300)):
        raise PreconditionError("B* r_{t-1}(B) is not strictly positive for the start policy")

    step_cap = _policy_step_cap(F)
    for step in range(step_cap):
        sets = _shrinking_sets(F, table, vectors, eps_tie)
        innermost = sets[-1]
        D = tuple(p if p in innermost[j] else innermost[j][0] for j, p in enumerate(policy))
        if D == policy:
            return NestedSolution(t, tuple(vectors), policy, tuple(sets), step)
        new = solve(D)
        if not _lex_progress(vectors, new, 1e-7):
            raise ConvergenceError(
                "nested policy iteration lost monotone progress", estimate=new, iterations=step
            )
        if not np.all(new[-1] > 0):
            raise ConvergenceError("top vector lost strict positivity", estimate=new)
        policy, vectors = D, new
    raise NonterminationError(
        f"nested policy iteration did not stabilise within {step_cap} steps",
        estimate=vectors,
        iterations=step_cap,
    )



# ---------------------------------------------------------------------------
# generalized eigenvector chain of f_K


def chain_residual(F, vectors, lam, mode="min"):
    """Largest ``|apply(F, v^(i)) - lam v^(i) - v^(i+1)|`` over the full family."""
    worst = 0.0
    for i, v in enumerate(vectors):
        nxt = vectors[i + 1] if i + 1 < len(vectors) else 0.0
        worst = max(worst, float(np.max(np.abs(apply(F, v, mode) - lam * v - nxt))))
    return worst


def generalized_chain_min(F, strategy="auto", cap=DEFAULT_CAP, eps_spr=EPS_SPR,
                          eps_residual=RESIDUAL_TOL, max_log2=30):
    """Nonnegative generalized eigenvectors of ``f_K`` for ``lam``.

    Returns an :class:`EigenChain` with ``min_{A in K} A v^(nu) = lam v^(nu)``
    and ``min_{A in K} A v^(i) = lam v^(i) + v^(i+1)``; ``v^(i)`` is positive
    exactly on ``S_i, ..., S_nu`` of the principal partition of a
    growth-minimal matrix.

    Levels are built bottom-up.  Rows of ``S_t`` may only use choices that
    vanish on the higher levels.  Level 1 is the positive eigenvector of its
    block family; each higher level solves the nested equations with forcing
    ``r_i(a) = a|_lower . u^(i)`` from the chain built so far, followed by a
    positivity shift.  A final shift ``w^(i) = sum_k alpha^k v^(i+k)`` turns the
    minima over the shrinking sets into minima over the whole family.
    """
    policy, B = extremal_matrix(F, "min", strategy, cap, eps_spr)
    cs = classify(B, eps_spr)
    lam = cs.spr
    parts = cs.principal_partition
    nu = cs.degree
    level = np.empty(F.n, dtype=int)
    for lv, S in enumerate(parts):
        level[list(S)] = lv

    chain = []
    for t in range(1, nu + 1):
        St = list(parts[t])
        higher = np.flatnonzero(level > t)
        lower = np.flatnonzero(level < t)
        sub, index_map = F.restrict(St, keep=lambda i, row: not row[higher].any())
        start = tuple(index_map[k].index(policy[j]) for k, j in enumerate(St))
        if t == 1:
            sol = nested_policy_iteration(sub, 1, None, start_policy=start, eps_spr=eps_spr)
        else:
            table = [
                [F.rows[j][index_map[k]][:, lower] @ u[lower] for k, j in enumerate(St)]
                for u in chain
            ]
            sol = nested_policy_iteration(sub, t, table, start_policy=start, eps_spr=eps_spr)
        new = [u.copy() for u in chain] + [np.zeros(F.n)]
        for i, x in enumerate(sol.vectors):
            new[i][St] = x
        _, chain = positivity_shift(new, St, max_log2=max_log2)
        scale = max(np.max(np.abs(u)) for u in chain)
        chain = [u / scale for u in chain]

    for alpha in [0.0] + [2.0**e for e in range(max_log2 + 1)]:
        shifted = shift_chain(chain, alpha)
        result = EigenChain(lam, tuple(shifted), parts).normalized()
        if (chain_residual(F, result.vectors, lam) <= eps_residual
                and result.sign_pattern_ok()):
            return result
    raise ConvergenceError(
        "no shift makes the chain equations hold over the whole family",
        estimate=EigenChain(lam, tuple(chain), parts),
    )


# ---------------------------------------------------------------------------
# growth and characterisation


def growth_all(F, mode="min", strategy="auto", cap=DEFAULT_CAP, eps_spr=EPS_SPR):
    """Growth descriptor of every component of ``f_K^n(v)`` (``"max"``: ``g_K^n``)."""
    _, B = extremal_matrix(F, mode, strategy, cap, eps_spr)
    return growth_descriptors(B, eps_spr)


def growth(F, mode, i, strategy="auto", cap=DEFAULT_CAP, eps_spr=EPS_SPR):
    """Growth descriptor of component ``i`` of the min (or max) iteration."""
    return growth_all(F, mode, strategy, cap, eps_spr)[i]


@dataclass(frozen=True)
class Characterization:
    """The four equivalent conditions for a positive eigenvector of ``f_K``.

    a: a positive eigenvector was found; b: the growth-minimal matrix has
    basic classes equal to final classes; c: every component grows like
    ``lam^n``; d: all components grow alike.
    """

    a: bool
    b: bool
    c: bool
    d: bool
    lam: float

    @property
    def consistent(self):
        return self.a == self.b == self.c == self.d


def characterize(F, strategy="auto", cap=DEFAULT_CAP, eps_spr=EPS_SPR):
    """Evaluate the four conditions independently and report whether they agree."""
    _, B = extremal_matrix(F, "min", strategy, cap, eps_spr)
    cs = classify(B, eps_spr)
    lam = cs.spr
    found = positive_eigenvector_min(F, strategy, cap, eps_spr)
    a = False
    if found is not None:
        v = found.vector
        a = bool(
            np.all(v > 0)
            and np.max(np.abs(apply(F, v, "min") - found.lam * v)) <= 1e-9 * np.max(v)
        )
    descs = growth_descriptors(B, eps_spr)
    target = GrowthDescriptor(lam, 1)
    c = all(d.matches(target, eps_spr) for d in descs)
    d = all(x.matches(descs[0], eps_spr) for x in descs)
    return Characterization(a=a, b=bool(cs.basic_equals_final), c=c, d=d, lam=lam)


__all__ = [
    "Characterization",
    "NestedSolution",
    "PositiveEigenvector",
    "chain_residual",
    "characterize",
    "generalized_chain_min",
    "growth",
    "growth_all",
    "irreducible_eigenvector_min",
    "nested_policy_iteration",
    "positive_eigenvector_min",
    "solve_nested_linear",
    "tabulate_row_terms",
]
