"""Independent reference implementations used only by the tests.

Nothing here imports the package's numerical code: class structure comes
from networkx, spectral radii from dense eigenvalues of irreducible blocks
(whose Perron root is simple, so eigvals is accurate), the dual matrix from
the spectral-projector formula, and f_K / g_K from explicit closure
enumeration.
"""
import itertools
from functools import lru_cache

import networkx as nx
import numpy as np

EPS = 1e-9


def block_radius(block):
    if block.shape[0] == 1:
        return float(block[0, 0])
    return float(np.max(np.abs(np.linalg.eigvals(block))))


def structure(A, eps=EPS):
    """Classes, class radii, basic/final flags, depths and principal partition."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    G = nx.DiGraph()
    G.add_nodes_from(range(n))
    G.add_edges_from((int(i), int(j)) for i, j in zip(*np.nonzero(A > 0)))
    C = nx.condensation(G)
    members = {c: sorted(C.nodes[c]["members"]) for c in C.nodes}
    rad = {c: block_radius(A[np.ix_(m, m)]) for c, m in members.items()}
    spr = max(rad.values())
    basic = {c: abs(rad[c] - spr) <= eps * spr for c in C.nodes}
    final = {c: C.out_degree(c) == 0 for c in C.nodes}

    @lru_cache(maxsize=None)
    def depth(c):
        return int(basic[c]) + max((depth(d) for d in C.successors(c)), default=0)

    nu = max(depth(c) for c in C.nodes)
    partition = [[] for _ in range(nu + 1)]
    for c, m in members.items():
        partition[depth(c)].extend(m)
    return dict(
        spr=spr,
        classes=sorted(tuple(m) for m in members.values()),
        members=members,
        radius=rad,
        basic=basic,
        final=final,
        degree=nu,
        partition=tuple(tuple(sorted(S)) for S in partition),
        dag=C,
        basic_equals_final=all(basic[c] == final[c] for c in C.nodes),
    )


def cluster(values, eps=EPS):
    """Canonical representative (cluster maximum) for each value; mirrors a sweep."""
    out = {}
    group = []
    for x in sorted(set(values)):
        if group and x > 0 and x - group[-1] <= eps * x:
            group.append(x)
            continue
        out.update({y: group[-1] for y in group})
        group = [x]
    out.update({y: group[-1] for y in group})
    return out


def descriptors(st, canon):
    """Per-state (beta, k) by explicit path enumeration on the condensation DAG."""
    C = st["dag"]
    rho = {c: canon[st["radius"][c]] for c in C.nodes}
    res = {}
    for c in C.nodes:
        reach = nx.descendants(C, c) | {c}
        beta = max(rho[d] for d in reach)
        if beta == 0:
            res[c] = (0.0, 1)
            continue
        # longest path counting classes of radius beta (DAG, so enumerate simple paths)
        sub = C.subgraph(reach)
        best = 0
        for target in sub.nodes:
            if target == c:
                paths = [[c]]
            else:
                paths = nx.all_simple_paths(sub, c, target)
            for p in paths:
                best = max(best, sum(rho[d] == beta for d in p))
        res[c] = (beta, best)
    n = sum(len(m) for m in st["members"].values())
    out = [None] * n
    for c, m in st["members"].items():
        for s in m:
            out[s] = res[c]
    return tuple(out)


def closure(rows):
    """All matrices of the row-interchange closure (lexicographic policy order)."""
    rows = [np.atleast_2d(np.asarray(r, dtype=float)) for r in rows]
    for policy in itertools.product(*(range(r.shape[0]) for r in rows)):
        yield policy, np.array([rows[i][c] for i, c in enumerate(policy)])


def closure_descriptors(matrices, eps=EPS):
    sts = [structure(M, eps) for M in matrices]
    canon = cluster([r for st in sts for r in st["radius"].values()], eps)
    return [descriptors(st, canon) for st in sts], sts


def brute_apply(rows, v, mode="min"):
    vals = [np.asarray(r, dtype=float) @ v for r in rows]
    return np.array([x.min() if mode == "min" else x.max() for x in vals])


def spectral_projector(A):
    """A* as the sum over final basic classes C of r_C l_C^T / (l_C^T r_C).

    Requires basic classes = final classes.  ``l_C`` is the left Perron vector
    of the block on C (a left eigenvector of A because C is final); ``r_C`` is
    the block's Perron vector extended to the states that reach C.
    """
    A = np.asarray(A, dtype=float)
    st = structure(A)
    lam = st["spr"]
    n = A.shape[0]
    G = _graph(A)
    P = np.zeros((n, n))
    for c, m in st["members"].items():
        if not st["basic"][c]:
            continue
        w, V = np.linalg.eig(A[np.ix_(m, m)])
        r = np.zeros(n)
        r[m] = np.abs(np.real(V[:, np.argmax(np.real(w))]))
        above = sorted(s for s in range(n) if s not in m and nx.descendants(G, s) & set(m))
        if above:
            M = lam * np.eye(len(above)) - A[np.ix_(above, above)]
            r[above] = np.linalg.solve(M, A[np.ix_(above, m)] @ r[m])
        wl, VL = np.linalg.eig(A[np.ix_(m, m)].T)
        l = np.zeros(n)
        l[m] = np.abs(np.real(VL[:, np.argmax(np.real(wl))]))
        P += np.outer(r, l) / (l @ r)
    return P


def _graph(A):
    G = nx.DiGraph()
    G.add_nodes_from(range(A.shape[0]))
    G.add_edges_from((int(i), int(j)) for i, j in zip(*np.nonzero(A > 0)))
    return G
