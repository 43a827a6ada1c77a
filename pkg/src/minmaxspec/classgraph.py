"""Combinatorial structure of a single nonnegative matrix.

States are numbered ``0..n-1``.  A *class* is a strongly connected component of
the digraph with an edge ``i -> j`` whenever ``A[i, j] > 0`` (every state is in
some class; a lone state without a self-loop is a class of spectral radius 0).
"""
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from ._spectral import block_spr

EPS_SPR = 1e-9


def check_matrix(A):
    """Return ``A`` as a float array after validating it is square, finite and >= 0."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValueError(f"expected a nonempty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    if np.any(A < 0):
        raise ValueError("matrix has negative entries")
    return A


def _reachability(adj):
    """Transitive closure (paths of length >= 1) of a boolean adjacency matrix."""
    reach = adj.copy()
    n = reach.shape[0]
    for k in range(n):
        reach |= reach[:, k : k + 1] & reach[k : k + 1, :]
    return reach


def classes(A):
    """Classes of ``A`` and the access relation between them.

    Returns ``(parts, access)`` where ``parts`` is a list of sorted state tuples
    ordered by smallest member, and ``access`` is the set of pairs ``(c, d)``,
    ``c != d``, such that class ``c`` has access to class ``d`` (transitively
    closed).
    """
    A = check_matrix(A)
    n = A.shape[0]
    _, labels = connected_components(A > 0, directed=True, connection="strong")
    order = {}
    for state in range(n):
        order.setdefault(labels[state], len(order))
    parts = [[] for _ in order]
    for state in range(n):
        parts[order[labels[state]]].append(state)
    class_of = np.array([order[labels[s]] for s in range(n)])

    m = len(parts)
    adj = np.zeros((m, m), dtype=bool)
    rows, cols = np.nonzero(A)
    adj[class_of[rows], class_of[cols]] = True
    np.fill_diagonal(adj, False)
    reach = _reachability(adj)
    access = {(int(c), int(d)) for c, d in zip(*np.nonzero(reach))}
    return [tuple(p) for p in parts], access


@dataclass(frozen=True, eq=False)
class ClassStructure:
    """Classes, access DAG, basic/final flags, depths and principal partition.

    ``principal_partition[i]`` holds the states of depth ``i``; index 0 may be
    empty.  ``topo_order`` lists class indices so that a class comes before
    every class it has access to.
    """

    n: int
    spr: float
    classes: tuple
    access: frozenset
    class_spr: tuple
    is_basic: tuple
    is_final: tuple
    depth: tuple
    degree: int
    principal_partition: tuple
    class_of: np.ndarray
    reach: np.ndarray
    topo_order: tuple

    @property
    def basic_classes(self):
        return [c for c, b in enumerate(self.is_basic) if b]

    @property
    def final_classes(self):
        return [c for c, f in enumerate(self.is_final) if f]

    def successors(self, c):
        return [int(d) for d in np.nonzero(self.reach[c])[0]]

    def states_at_or_above(self, level):
        """Union of ``S_level, ..., S_degree`` as a sorted list."""
        return sorted(s for S in self.principal_partition[level:] for s in S)

    @property
    def basic_equals_final(self):
        return self.is_basic == self.is_final

    def frobenius_order(self):
        """State permutation putting the matrix in block upper-triangular form."""
        return [s for c in self.topo_order for s in self.classes[c]]


def classify(A, eps_spr=EPS_SPR):
    """Full class structure of ``A``.

    Class spectral radii come from power iteration on each irreducible block;
    a class is basic when its radius is within relative ``eps_spr`` of the
    largest one.
    """
    if not eps_spr > 0:
        raise ValueError("eps_spr must be positive")
    A = check_matrix(A)
    n = A.shape[0]
    parts, access = classes(A)
    m = len(parts)
    class_of = np.empty(n, dtype=int)
    for c, part in enumerate(parts):
        class_of[list(part)] = c
    reach = np.zeros((m, m), dtype=bool)
    for c, d in access:
        reach[c, d] = True

    class_spr = tuple(block_spr(A[np.ix_(p, p)]) for p in parts)
    spr = max(class_spr)
    is_basic = tuple(abs(r - spr) <= eps_spr * spr for r in class_spr)
    is_final = tuple(not reach[c].any() for c in range(m))

    # a class reaches strictly more classes than any class it accesses
    topo = tuple(sorted(range(m), key=lambda c: (-int(reach[c].sum()), c)))
    depth = [0] * m
    for c in reversed(topo):
        below = max((depth[d] for d in np.nonzero(reach[c])[0]), default=0)
        depth[c] = below + int(is_basic[c])
    degree = max(depth)
    partition = [[] for _ in range(degree + 1)]
    for c, part in enumerate(parts):
        partition[depth[c]].extend(part)

    return ClassStructure(
        n=n,
        spr=spr,
        classes=tuple(parts),
        access=frozenset(access),
        class_spr=class_spr,
        is_basic=is_basic,
        is_final=is_final,
        depth=tuple(depth),
        degree=degree,
        principal_partition=tuple(tuple(sorted(S)) for S in partition),
        class_of=class_of,
        reach=reach,
        topo_order=topo,
    )
