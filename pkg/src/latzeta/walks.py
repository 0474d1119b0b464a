"""Step distributions of translation-invariant lattice walks and random
conductance environments.

A walk is defined by its jump offsets with conditional probabilities plus a
holding (laziness) weight; weighted walks are defined by a conductance field
on the edges of a lattice rectangle.  Everything here is immutable after
construction and safe to share across threads.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

MASS_TOL = 1e-12


class WalkError(ValueError):
    """Invalid walk definition or unknown builtin name."""


def _as_float(p) -> float:
    return float(p)


@dataclass(frozen=True)
class StepSet:
    """Translation-invariant walk on the square lattice.

    ``steps`` holds the conditional jump distribution given that the walk
    moves: tuples ``(dx, dy, prob)`` with probabilities summing to one.
    ``laziness`` is the holding probability; the full one-step distribution
    places mass ``laziness`` on (0, 0) and ``(1 - laziness) * prob`` on each
    offset.  Probabilities may be exact ``Fraction`` values (all builtins use
    them) or floats; they are converted to float at operator assembly.
    """

    steps: tuple
    laziness: float = 0.0
    name: str = "custom"

    def __post_init__(self):
        if not (0.0 <= self.laziness < 1.0):
            raise WalkError(f"laziness must lie in [0, 1), got {self.laziness}")
        if not self.steps:
            raise WalkError("a walk needs at least one jump offset")
        seen = set()
        total = Fraction(0)
        mx = my = Fraction(0)
        exact = True
        for dx, dy, p in self.steps:
            if (dx, dy) == (0, 0):
                raise WalkError("holding is expressed only through laziness, not a (0,0) step")
            if (dx, dy) in seen:
                raise WalkError(f"duplicate offset {(dx, dy)}")
            seen.add((dx, dy))
            if not isinstance(p, Fraction):
                exact = False
            if not (0 < _as_float(p) <= 1):
                raise WalkError(f"step probability {p} outside (0, 1]")
            if exact:
                total += p
                mx += p * dx
                my += p * dy
        if exact:
            if total != 1:
                raise WalkError(f"step probabilities sum to {total}, expected 1")
            if mx != 0 or my != 0:
                raise WalkError(f"walk has nonzero mean step ({mx}, {my})")
        else:
            probs = np.array([_as_float(p) for _, _, p in self.steps])
            dxs = np.array([dx for dx, _, _ in self.steps], dtype=float)
            dys = np.array([dy for _, dy, _ in self.steps], dtype=float)
            if abs(probs.sum() - 1.0) > MASS_TOL:
                raise WalkError(f"step probabilities sum to {probs.sum()!r}, expected 1")
            if abs(probs @ dxs) > MASS_TOL or abs(probs @ dys) > MASS_TOL:
                raise WalkError("walk has nonzero mean step")

    # -- views ---------------------------------------------------------

    def offsets(self) -> np.ndarray:
        """Jump offsets as an (k, 2) int array, in declaration order."""
        return np.array([(dx, dy) for dx, dy, _ in self.steps], dtype=np.int64)

    def probabilities(self) -> np.ndarray:
        """Conditional jump probabilities as floats, matching offsets()."""
        return np.array([_as_float(p) for _, _, p in self.steps], dtype=np.float64)

    def one_step_distribution(self) -> dict:
        """Full one-step law including the holding mass at (0, 0)."""
        alpha = self.laziness
        dist = {}
        if alpha > 0:
            dist[(0, 0)] = alpha
        for dx, dy, p in self.steps:
            dist[(dx, dy)] = (1.0 - alpha) * _as_float(p)
        return dist

    @property
    def max_step(self) -> int:
        """Largest coordinate displacement of a single jump."""
        return max(max(abs(dx), abs(dy)) for dx, dy, _ in self.steps)

    def is_symmetric(self) -> bool:
        """True when the jump law is invariant under negation of offsets."""
        table = {(dx, dy): _as_float(p) for dx, dy, p in self.steps}
        return all(
            abs(table.get((-dx, -dy), -1.0) - p) <= MASS_TOL for (dx, dy), p in table.items()
        )

    def reversed_steps(self) -> "StepSet":
        """The walk with all offsets negated (time reversal)."""
        return StepSet(
            steps=tuple((-dx, -dy, p) for dx, dy, p in self.steps),
            laziness=self.laziness,
            name=self.name + "-reversed",
        )

    def with_laziness(self, alpha: float) -> "StepSet":
        return StepSet(steps=self.steps, laziness=alpha, name=self.name)


_NN = ((1, 0), (-1, 0), (0, 1), (0, -1))
_KING = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1))
_TRIANGULAR = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))
_KNIGHT = ((2, 1), (2, -1), (-2, 1), (-2, -1), (1, 2), (1, -2), (-1, 2), (-1, -2))

_BUILTINS = {
    "lsrw": (_NN, Fraction(1, 2)),
    "srw": (_NN, Fraction(0)),
    "king": (_KING, Fraction(0)),
    "triangular": (_TRIANGULAR, Fraction(0)),
    "knight": (_KNIGHT, Fraction(0)),
}

BUILTIN_NAMES = tuple(_BUILTINS)


def builtin_walk(name: str, laziness_override: float | None = None) -> StepSet:
    """Construct one of the named walks.

    ``lsrw`` holds with probability 1/2 and otherwise steps to a uniform
    nearest neighbour; all other builtins are non-lazy by default.
    """
    try:
        offs, alpha = _BUILTINS[name]
    except KeyError:
        raise WalkError(f"unknown walk {name!r}; choose from {', '.join(_BUILTINS)}") from None
    if laziness_override is not None:
        alpha = laziness_override
    p = Fraction(1, len(offs))
    return StepSet(
        steps=tuple((dx, dy, p) for dx, dy in offs),
        laziness=float(alpha),
        name=name,
    )


def path_walk() -> StepSet:
    """Simple +/-1 walk on the integers, embedded on the x axis."""
    return StepSet(
        steps=((1, 0, Fraction(1, 2)), (-1, 0, Fraction(1, 2))),
        laziness=0.0,
        name="path-srw",
    )


@dataclass(frozen=True)
class CovarianceMatrix:
    """Per-step covariance of the full one-step law (lattice units squared)."""

    sxx: float
    sxy: float
    syy: float

    def __post_init__(self):
        if self.sxx <= 0 or self.syy <= 0 or self.det <= 0:
            raise WalkError(f"covariance must be positive definite, got {self}")

    @property
    def det(self) -> float:
        return self.sxx * self.syy - self.sxy * self.sxy

    def as_matrix(self) -> np.ndarray:
        return np.array([[self.sxx, self.sxy], [self.sxy, self.syy]])


def covariance(walk: StepSet) -> CovarianceMatrix:
    """Covariance of the full one-step distribution, laziness included.

    Holding contributes nothing, so the result is (1 - laziness) times the
    covariance of the conditional jump law.
    """
    offs = walk.offsets().astype(np.float64)
    probs = walk.probabilities()
    scale = 1.0 - walk.laziness
    sxx = scale * float(probs @ (offs[:, 0] * offs[:, 0]))
    sxy = scale * float(probs @ (offs[:, 0] * offs[:, 1]))
    syy = scale * float(probs @ (offs[:, 1] * offs[:, 1]))
    return CovarianceMatrix(sxx, sxy, syy)


def heat_constant(cov: CovarianceMatrix) -> float:
    """Long-time on-diagonal constant: limit of t * p_t(x, x) in 2D.

    Equals 1 / (2 pi sqrt(det Sigma)) for a mean-zero walk with step
    covariance Sigma.
    """
    det = cov.det
    if det <= 0:
        raise WalkError("covariance determinant must be positive")
    return 1.0 / (2.0 * np.pi * np.sqrt(det))


def sample_steps(walk: StepSet, count: int, seed: int) -> np.ndarray:
    """Draw ``count`` one-step displacements (holding included) as (n, 2) ints.

    Uses the Philox counter-based generator so draws reproduce across
    platforms for a given seed.
    """
    rng = np.random.Generator(np.random.Philox(key=seed))
    offs = walk.offsets()
    probs = walk.probabilities() * (1.0 - walk.laziness)
    support = np.vstack([np.zeros((1, 2), dtype=np.int64), offs])
    weights = np.concatenate([[walk.laziness], probs])
    weights = weights / weights.sum()
    picks = rng.choice(len(support), size=count, p=weights)
    return support[picks]


# -- random conductance environments ------------------------------------


class ConductanceError(ValueError):
    """Invalid conductance environment specification."""


@dataclass(eq=False)
class ConductanceEnvironment:
    """I.i.d. uniformly elliptic edge weights on a lattice rectangle.

    The graph has vertex set {0..nx-1} x {0..ny-1} with nearest-neighbour
    edges.  ``horizontal[i, j]`` weights the edge (i, j)-(i+1, j) and
    ``vertical[i, j]`` the edge (i, j)-(i, j+1).  The vertex measure is the
    sum of incident weights.  ``laziness`` is the holding probability of the
    induced walk (default 1/2, the lazy convention used throughout).
    """

    extent: tuple
    c1: float
    c2: float
    seed: int
    horizontal: np.ndarray = field(repr=False)
    vertical: np.ndarray = field(repr=False)
    laziness: float = 0.5

    def __post_init__(self):
        nx, ny = self.extent
        if self.horizontal.shape != (nx - 1, ny) or self.vertical.shape != (nx, ny - 1):
            raise ConductanceError("weight arrays do not match extent")
        lo = min(self.horizontal.min(), self.vertical.min())
        hi = max(self.horizontal.max(), self.vertical.max())
        if lo < self.c1 - MASS_TOL or hi > self.c2 + MASS_TOL:
            raise ConductanceError(
                f"weights [{lo}, {hi}] escape the elliptic interval [{self.c1}, {self.c2}]"
            )
        if not (0.0 <= self.laziness < 1.0):
            raise ConductanceError("laziness must lie in [0, 1)")

    @property
    def nx(self) -> int:
        return self.extent[0]

    @property
    def ny(self) -> int:
        return self.extent[1]

    def contains(self, x: int, y: int) -> bool:
        return 0 <= x < self.nx and 0 <= y < self.ny

    def edge_weight(self, a: tuple, b: tuple) -> float:
        """Weight of the edge between lattice points a and b (0 if absent)."""
        (ax, ay), (bx, by) = a, b
        if not (self.contains(ax, ay) and self.contains(bx, by)):
            return 0.0
        if abs(ax - bx) + abs(ay - by) != 1:
            return 0.0
        if ax != bx:
            i = min(ax, bx)
            return float(self.horizontal[i, ay])
        j = min(ay, by)
        return float(self.vertical[ax, j])

    def vertex_measure(self, x: int, y: int) -> float:
        """m(x) = sum of weights of edges incident to (x, y)."""
        m = 0.0
        for dx, dy in _NN:
            m += self.edge_weight((x, y), (x + dx, y + dy))
        return m

    def all_weights(self) -> np.ndarray:
        return np.concatenate([self.horizontal.ravel(), self.vertical.ravel()])

    # -- persistence -----------------------------------------------------

    def save_csv(self, path) -> None:
        """Dump weights with a reconstruction header (extent, c1, c2, seed)."""
        with open(path, "w", newline="") as fh:
            fh.write(f"# extent={self.nx}x{self.ny} c1={self.c1!r} c2={self.c2!r} "
                     f"seed={self.seed} laziness={self.laziness!r}\n")
            writer = csv.writer(fh)
            writer.writerow(["orientation", "i", "j", "weight"])
            for (i, j), w in np.ndenumerate(self.horizontal):
                writer.writerow(["h", i, j, repr(float(w))])
            for (i, j), w in np.ndenumerate(self.vertical):
                writer.writerow(["v", i, j, repr(float(w))])

    @classmethod
    def load_csv(cls, path) -> "ConductanceEnvironment":
        with open(path, newline="") as fh:
            header = fh.readline()
            if not header.startswith("#"):
                raise ConductanceError("missing environment header line")
            meta = dict(tok.split("=", 1) for tok in header[1:].split())
            nx, ny = (int(v) for v in meta["extent"].split("x"))
            horizontal = np.empty((nx - 1, ny))
            vertical = np.empty((nx, ny - 1))
            reader = csv.reader(fh)
            next(reader)  # column header
            for orientation, i, j, w in reader:
                (horizontal if orientation == "h" else vertical)[int(i), int(j)] = float(w)
        return cls(
            extent=(nx, ny),
            c1=float(meta["c1"]),
            c2=float(meta["c2"]),
            seed=int(meta["seed"]),
            horizontal=horizontal,
            vertical=vertical,
            laziness=float(meta.get("laziness", 0.5)),
        )


def sample_environment(
    extent,
    c1: float,
    c2: float,
    seed: int,
    laziness: float = 0.5,
) -> ConductanceEnvironment:
    """Draw i.i.d. Uniform[c1, c2] weights on the rectangle's edges.

    ``extent`` is a side length or an (nx, ny) pair.  Reconstruction is
    deterministic in ``seed`` (Philox counter-based generator).
    """
    if isinstance(extent, int):
        extent = (extent, extent)
    nx, ny = extent
    if nx < 2 or ny < 2:
        raise ConductanceError("extent must be at least 2x2")
    if not (0 < c1 <= c2):
        raise ConductanceError(f"need 0 < c1 <= c2, got c1={c1}, c2={c2}")
    rng = np.random.Generator(np.random.Philox(key=seed))
    horizontal = rng.uniform(c1, c2, size=(nx - 1, ny))
    vertical = rng.uniform(c1, c2, size=(nx, ny - 1))
    return ConductanceEnvironment(
        extent=(nx, ny),
        c1=float(c1),
        c2=float(c2),
        seed=int(seed),
        horizontal=horizontal,
        vertical=vertical,
        laziness=laziness,
    )
