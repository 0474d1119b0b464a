"""Killed (Dirichlet) transition operators on finite domains.

`assemble` builds the substochastic transition matrix P_H of a walk or a
conductance environment restricted to a domain: transitions leaving the
domain are dropped, so row deficits equal one-step exit probabilities.  The
generator is I - P_H.  `symmetrize` produces the measure-conjugated
symmetric form used by the positive-definite solvers; its spectrum and the
trace of its inverse match the raw generator exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .domains import Domain
from .walks import ConductanceEnvironment, StepSet

REVERSIBILITY_TOL = 1e-12


class OperatorError(ValueError):
    pass


@dataclass(eq=False)
class DirichletOperator:
    """Sparse killed transition kernel P_H with its vertex measure."""

    domain: Domain
    transition: sparse.csr_matrix  # P_H, rows sum to <= 1
    measure: np.ndarray  # m(x), strictly positive
    walk_label: str
    laziness: float

    def __post_init__(self):
        self._symmetrized = None

    @property
    def n(self) -> int:
        return self.transition.shape[0]

    def generator(self) -> sparse.csr_matrix:
        """I - P_H with sorted, deduplicated indices."""
        gen = (sparse.identity(self.n, format="csr") - self.transition).tocsr()
        gen.sum_duplicates()
        gen.sort_indices()
        return gen

    def row_deficits(self) -> np.ndarray:
        """One-step exit (killing) probability per vertex."""
        return 1.0 - np.asarray(self.transition.sum(axis=1)).ravel()

    def matvec(self, v: np.ndarray) -> np.ndarray:
        """Apply the generator: (I - P_H) v."""
        v = np.asarray(v, dtype=np.float64)
        if v.shape[0] != self.n:
            raise OperatorError(f"vector length {v.shape[0]} != {self.n}")
        return v - self.transition @ v

    def to_dense(self) -> np.ndarray:
        """Dense generator I - P_H."""
        return np.eye(self.n) - self.transition.toarray()

    def is_reversible(self, tol: float = REVERSIBILITY_TOL) -> bool:
        """Check m(x) P(x,y) = m(y) P(y,x) entrywise."""
        m = sparse.diags(self.measure)
        flux = (m @ self.transition).tocsr()
        gap = (flux - flux.T).tocsr()
        if gap.nnz == 0:
            return True
        return float(np.abs(gap.data).max()) <= tol * float(self.measure.max())

    def symmetrized(self) -> "SymmetrizedOperator":
        """Cached measure-conjugated symmetric form."""
        if self._symmetrized is None:
            self._symmetrized = symmetrize(self)
        return self._symmetrized

    def export_coo(self, fh) -> None:
        """Write the generator in coordinate text format: row col value."""
        gen = self.generator().tocoo()
        order = np.lexsort((gen.col, gen.row))
        for r, c, v in zip(gen.row[order], gen.col[order], gen.data[order]):
            fh.write(f"{r} {c} {float(v)!r}\n")


@dataclass(eq=False)
class SymmetrizedOperator:
    """S = M^(1/2) (I - P_H) M^(-1/2); symmetric positive definite."""

    matrix: sparse.csr_matrix
    scale: np.ndarray  # sqrt of the vertex measure
    source: DirichletOperator = field(repr=False)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        if v.shape[0] != self.n:
            raise OperatorError(f"vector length {v.shape[0]} != {self.n}")
        return self.matrix @ v

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal()


def matvec(op, v: np.ndarray) -> np.ndarray:
    """Apply the generator of either operator form to a dense field."""
    return op.matvec(v)


def _assemble_walk(walk: StepSet, dom: Domain) -> DirichletOperator:
    alpha = walk.laziness
    offsets = [(int(dx), int(dy)) for dx, dy, _ in walk.steps]
    probs = [(1.0 - alpha) * float(p) for _, _, p in walk.steps]

    rows, cols, vals = [], [], []
    for i in range(dom.n):
        x, y = (int(v) for v in dom.vertices[i])
        if alpha > 0.0:
            rows.append(i)
            cols.append(i)
            vals.append(alpha)
        for (dx, dy), p in zip(offsets, probs):
            j = dom.index.get((x + dx, y + dy))
            if j is not None:
                rows.append(i)
                cols.append(j)
                vals.append(p)
    transition = sparse.coo_matrix((vals, (rows, cols)), shape=(dom.n, dom.n)).tocsr()
    transition.sum_duplicates()
    transition.sort_indices()
    return DirichletOperator(
        domain=dom,
        transition=transition,
        measure=np.ones(dom.n),
        walk_label=walk.name,
        laziness=alpha,
    )


def _assemble_environment(env: ConductanceEnvironment, dom: Domain) -> DirichletOperator:
    alpha = env.laziness
    measure = np.empty(dom.n)
    rows, cols, vals = [], [], []
    for i in range(dom.n):
        x, y = (int(v) for v in dom.vertices[i])
        if not env.contains(x, y):
            raise OperatorError(f"domain vertex {(x, y)} outside environment extent")
        m = env.vertex_measure(x, y)
        if m <= 0.0:
            raise OperatorError(f"vertex {(x, y)} has zero measure")
        measure[i] = m
        if alpha > 0.0:
            rows.append(i)
            cols.append(i)
            vals.append(alpha)
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            w = env.edge_weight((x, y), (x + dx, y + dy))
            if w == 0.0:
                continue
            j = dom.index.get((x + dx, y + dy))
            if j is not None:
                rows.append(i)
                cols.append(j)
                vals.append((1.0 - alpha) * w / m)
    transition = sparse.coo_matrix((vals, (rows, cols)), shape=(dom.n, dom.n)).tocsr()
    transition.sum_duplicates()
    transition.sort_indices()
    return DirichletOperator(
        domain=dom,
        transition=transition,
        measure=measure,
        walk_label=f"rcm(seed={env.seed})",
        laziness=alpha,
    )


def assemble(walk_or_env, dom: Domain) -> DirichletOperator:
    """Build the killed transition operator of a walk or environment on a domain.

    Raises when no killing occurs anywhere (the generator would be singular)
    or when a domain vertex falls outside an environment's extent.
    """
    if dom.n == 0:
        raise OperatorError("empty domain")
    if isinstance(walk_or_env, StepSet):
        op = _assemble_walk(walk_or_env, dom)
    elif isinstance(walk_or_env, ConductanceEnvironment):
        op = _assemble_environment(walk_or_env, dom)
    else:
        raise OperatorError(f"cannot assemble from {type(walk_or_env).__name__}")
    deficits = op.row_deficits()
    if deficits.max() <= REVERSIBILITY_TOL:
        raise OperatorError(
            "no transition leaves the domain anywhere; the killed generator is singular"
        )
    return op


def symmetrize(op: DirichletOperator) -> SymmetrizedOperator:
    """Conjugate the generator by the square root of the vertex measure.

    Requires reversibility; the result is forced exactly symmetric by
    averaging with its transpose (the asymmetry is pure roundoff).
    """
    if np.any(op.measure <= 0.0):
        raise OperatorError("vertex measure must be strictly positive")
    if not op.is_reversible():
        raise OperatorError("operator is not reversible with respect to its measure")
    scale = np.sqrt(op.measure)
    d = sparse.diags(scale)
    d_inv = sparse.diags(1.0 / scale)
    s = (sparse.identity(op.n, format="csr") - d @ op.transition @ d_inv).tocsr()
    s = ((s + s.T) * 0.5).tocsr()
    s.sum_duplicates()
    s.sort_indices()
    return SymmetrizedOperator(matrix=s, scale=scale, source=op)
