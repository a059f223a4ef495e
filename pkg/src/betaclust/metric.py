"""Pairwise node distances and a checker for the metric axioms."""

from __future__ import annotations

import weakref
from dataclasses import dataclass, field
from itertools import islice

import numpy as np
from scipy.spatial.distance import cdist

from .dataset import Dataset
from .errors import DataError

EUCLIDEAN_ALL = "euclidean_all_features"
EUCLIDEAN_FOI = "euclidean_foi_only"
PRECOMPUTED = "precomputed_matrix"
KINDS = (EUCLIDEAN_ALL, EUCLIDEAN_FOI, PRECOMPUTED)

CACHE_LIMIT = 20000
_ONE_HOT_SCALE = 1.0 / np.sqrt(2.0)


class DistanceMetric:
    """Distance over the nodes of a dataset.

    ``weights`` holds one non-negative weight per schema feature and scales
    that feature's squared contribution.  For ``precomputed_matrix`` the
    ``matrix`` argument is an n x n array and the dataset only fixes n.

    Full n x n matrices are cached per dataset when n <= ``cache_limit``;
    larger datasets get distances computed block by block on demand.
    """

    def __init__(self, kind=EUCLIDEAN_ALL, weights=None, matrix=None, cache_limit=CACHE_LIMIT):
        if kind not in KINDS:
            raise ValueError(f"unknown metric kind {kind!r}; expected one of {KINDS}")
        if kind == PRECOMPUTED:
            if matrix is None:
                raise ValueError("precomputed_matrix metric needs a matrix")
            matrix = np.array(matrix, dtype=float)
            if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
                raise ValueError(f"precomputed matrix must be square, got shape {matrix.shape}")
            matrix.setflags(write=False)
        if weights is not None:
            weights = np.asarray(weights, dtype=float)
            if (weights < 0).any():
                raise ValueError("feature weights must be non-negative")
        self.kind = kind
        self.weights = weights
        self._matrix = matrix
        self.cache_limit = cache_limit
        self._cache: dict[int, tuple[weakref.ref, np.ndarray]] = {}
        self._emb_cache: dict[int, tuple[weakref.ref, np.ndarray]] = {}

    def __repr__(self):
        return f"DistanceMetric({self.kind!r})"

    @property
    def is_pseudometric(self) -> bool:
        # a zero weight ignores a feature, so nodes differing only there coincide
        zero_weight = self.weights is not None and bool((self.weights == 0).any())
        return self.kind == EUCLIDEAN_FOI or (self.kind == EUCLIDEAN_ALL and zero_weight)

    def embedding(self, d: Dataset) -> np.ndarray:
        hit = self._emb_cache.get(id(d))
        if hit is not None and hit[0]() is d:
            return hit[1]
        if self.kind == EUCLIDEAN_ALL:
            emb = d.embedding
            if self.weights is not None:
                w = self._check_weights(d)
                emb = emb * np.sqrt(w[d.embedding_owner])[None, :]
        elif self.kind == EUCLIDEAN_FOI:
            blocks = []
            for j, fi in enumerate(d.schema.foi_index):
                onehot = np.zeros((d.n, len(d.item_labels[j])))
                onehot[np.arange(d.n), d.item_codes[:, j]] = _ONE_HOT_SCALE
                if self.weights is not None:
                    onehot *= np.sqrt(self._check_weights(d)[fi])
                blocks.append(onehot)
            emb = np.hstack(blocks)
        else:
            raise TypeError("precomputed metrics have no embedding")
        self._emb_cache[id(d)] = (weakref.ref(d), emb)
        return emb

    def _check_weights(self, d: Dataset) -> np.ndarray:
        if len(self.weights) != len(d.schema.features):
            raise ValueError(
                f"{len(self.weights)} weights given for {len(d.schema.features)} features"
            )
        return self.weights

    def _check_size(self, d: Dataset):
        if self.kind == PRECOMPUTED and self._matrix.shape[0] != d.n:
            raise DataError(
                f"precomputed matrix is {self._matrix.shape[0]}x{self._matrix.shape[0]} "
                f"but the dataset has {d.n} nodes"
            )

    def matrix(self, d: Dataset) -> np.ndarray | None:
        """The full cached distance matrix, or None when n exceeds the cache limit."""
        self._check_size(d)
        if self.kind == PRECOMPUTED:
            return self._matrix
        if d.n > self.cache_limit:
            return None
        hit = self._cache.get(id(d))
        if hit is not None and hit[0]() is d:
            return hit[1]
        emb = self.embedding(d)
        full = cdist(emb, emb)
        full.setflags(write=False)
        self._cache[id(d)] = (weakref.ref(d), full)
        return full

    def block(self, d: Dataset, rows, cols) -> np.ndarray:
        """Distances between node ids ``rows`` and ``cols`` as a 2-D array."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        full = self.matrix(d)
        if full is not None:
            return full[np.ix_(rows, cols)]
        emb = self.embedding(d)
        return cdist(emb[rows], emb[cols])

    def to_many(self, d: Dataset, u: int, ids) -> np.ndarray:
        return self.block(d, [u], ids)[0]


def distance(m: DistanceMetric, d: Dataset, u: int, v: int) -> float:
    for x in (u, v):
        if not 0 <= x < d.n:
            raise IndexError(f"node id {x} out of range for {d.n} nodes")
    return float(m.block(d, [u], [v])[0, 0])


def load_matrix_csv(path) -> np.ndarray:
    try:
        mat = np.loadtxt(path, delimiter=",", ndmin=2)
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot read distance matrix {path}: {exc}") from exc
    if mat.shape[0] != mat.shape[1]:
        raise DataError(f"distance matrix in {path} is not square: {mat.shape}")
    return mat


@dataclass
class Violation:
    axiom: str
    witness: tuple
    amount: float


@dataclass
class MetricReport:
    exhaustive: bool
    checked_triples: int
    violations: list[Violation] = field(default_factory=list)
    warnings: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_metric(
    m: DistanceMetric,
    d: Dataset,
    exhaustive: bool | None = None,
    samples: int = 100_000,
    seed: int = 0,
    max_witnesses: int = 20,
    tol: float = 1e-9,
) -> MetricReport:
    """Check non-negativity, zero self-distance, symmetry, identity of
    indiscernibles and the triangle inequality.

    Violations are returned in the report, never raised.  The triangle check
    is exhaustive for n <= 200 unless ``exhaustive`` says otherwise; above
    that, ``samples`` random triples are drawn.  ``tol`` is relative to the
    largest distance and absorbs float rounding.
    """
    n = d.n
    if exhaustive is None:
        exhaustive = n <= 200
    D = m.matrix(d)
    if D is None:
        # too large to cache: only the sampled check is affordable
        exhaustive = False
    report = MetricReport(exhaustive=exhaustive, checked_triples=0)
    if D is not None:
        scale = max(1.0, float(np.abs(D).max())) * tol
        neg = np.argwhere(D < 0)
        report.violations += [Violation("non_negativity", (int(u), int(v)), float(D[u, v])) for u, v in islice(neg, max_witnesses)]
        diag = np.flatnonzero(np.abs(np.diag(D)) > scale)
        report.violations += [Violation("zero_self_distance", (int(u),), float(D[u, u])) for u in diag[:max_witnesses]]
        asym = np.argwhere(np.triu(np.abs(D - D.T) > scale))
        report.violations += [Violation("symmetry", (int(u), int(v)), float(D[u, v] - D[v, u])) for u, v in islice(asym, max_witnesses)]
        zero = np.argwhere(np.triu(np.abs(D) <= scale, k=1))
        for u, v in zero:
            if d.nodes[u].values != d.nodes[v].values:
                w = Violation("identity_of_indiscernibles", (int(u), int(v)), 0.0)
                # pseudometrics and precomputed matrices may legitimately merge distinct nodes
                if m.is_pseudometric or m.kind == PRECOMPUTED:
                    report.warnings.append(w)
                else:
                    report.violations.append(w)
                if len(report.warnings) + len(report.violations) > 2 * max_witnesses:
                    break
    else:
        scale = tol

    found = 0
    if exhaustive:
        for u in range(n):
            via = D[u][:, None] + D  # via[v, w] = d(u,v) + d(v,w)
            excess = D[u][None, :] - via
            bad = np.argwhere(excess > scale)
            report.checked_triples += n * n
            for v, w in bad:
                if found >= max_witnesses:
                    break
                report.violations.append(Violation("triangle", (u, int(v), int(w)), float(excess[v, w])))
                found += 1
    else:
        rng = np.random.default_rng(seed)
        tri = rng.integers(0, n, size=(samples, 3))
        for start in range(0, samples, 10_000):
            chunk = tri[start : start + 10_000]
            if D is not None:
                duv, dvw, duw = D[chunk[:, 0], chunk[:, 1]], D[chunk[:, 1], chunk[:, 2]], D[chunk[:, 0], chunk[:, 2]]
            else:
                emb = m.embedding(d)
                dist = lambda a, b: np.linalg.norm(emb[a] - emb[b], axis=1)  # noqa: E731
                duv, dvw, duw = dist(chunk[:, 0], chunk[:, 1]), dist(chunk[:, 1], chunk[:, 2]), dist(chunk[:, 0], chunk[:, 2])
            excess = duw - (duv + dvw)
            report.checked_triples += len(chunk)
            for i in np.flatnonzero(excess > scale):
                if found >= max_witnesses:
                    break
                report.violations.append(Violation("triangle", tuple(int(x) for x in chunk[i]), float(excess[i])))
                found += 1
    return report
