"""Datasets of nodes carrying feature values and a feature-of-interest label.

A :class:`Dataset` is immutable.  Numeric features are min-max scaled into
``[0, 1]`` when the embedding is built; categorical features are one-hot
encoded with a ``1/sqrt(2)`` factor so that one disagreement costs exactly 1.
Continuous FoI columns are binned at construction time, so everything
downstream sees a finite set of FoI values.
"""

from __future__ import annotations

import bisect
import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import DataError, SchemaError

NUMERIC = "numeric"
CATEGORICAL = "categorical"
_KINDS = (NUMERIC, CATEGORICAL)
_ONE_HOT_SCALE = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class Feature:
    name: str
    kind: str = NUMERIC


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered features plus the designation of the features of interest.

    ``foi_bins`` maps a numeric FoI feature name to sorted bin edges
    ``e0 < e1 < ... < em``; the bins are ``[e0,e1), ..., [e(m-1), em]``.
    """

    features: tuple[Feature, ...]
    foi_index: tuple[int, ...]
    foi_bins: Mapping[str, tuple[float, ...]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        if isinstance(self.foi_index, int):
            object.__setattr__(self, "foi_index", (self.foi_index,))
        object.__setattr__(self, "foi_index", tuple(self.foi_index))
        bins = {k: tuple(float(e) for e in v) for k, v in (self.foi_bins or {}).items()}
        object.__setattr__(self, "foi_bins", bins)

        names = [f.name for f in self.features]
        if not names:
            raise SchemaError("schema declares no features")
        if any(not isinstance(n, str) or not n for n in names):
            raise SchemaError("feature names must be non-empty strings")
        if len(set(names)) != len(names):
            raise SchemaError(f"duplicate feature names in {names}")
        for f in self.features:
            if f.kind not in _KINDS:
                raise SchemaError(f"feature {f.name!r} has unknown kind {f.kind!r}")
        if not self.foi_index:
            raise SchemaError("at least one feature of interest is required")
        if len(set(self.foi_index)) != len(self.foi_index):
            raise SchemaError("feature of interest listed twice")
        for i in self.foi_index:
            if not 0 <= i < len(self.features):
                raise SchemaError(f"foi_index {i} does not point at a feature")
        for name, edges in bins.items():
            if name not in self.foi_names:
                raise SchemaError(f"bins given for {name!r}, which is not a feature of interest")
            if self.features[names.index(name)].kind != NUMERIC:
                raise SchemaError(f"bins given for categorical feature {name!r}")
            if len(edges) < 2 or any(b <= a for a, b in zip(edges, edges[1:])):
                raise SchemaError(f"bin edges for {name!r} must be strictly increasing, got {edges}")

    @property
    def names(self) -> list[str]:
        return [f.name for f in self.features]

    @property
    def foi_names(self) -> list[str]:
        return [self.features[i].name for i in self.foi_index]

    @classmethod
    def build(cls, features, foi, bins=None) -> "FeatureSchema":
        """Convenience constructor: ``features`` is a list of (name, kind) and
        ``foi`` a feature name or a list of names."""
        feats = tuple(Feature(n, k) for n, k in features)
        if isinstance(foi, str):
            foi = [foi]
        names = [f.name for f in feats]
        missing = [n for n in foi if n not in names]
        if missing:
            raise SchemaError(f"unknown feature(s) of interest: {missing}")
        return cls(feats, tuple(names.index(n) for n in foi), bins or {})

    def to_dict(self) -> dict:
        return {
            "features": [{"name": f.name, "kind": f.kind} for f in self.features],
            "foi": self.foi_names,
            "bins": {k: list(v) for k, v in self.foi_bins.items()},
        }

    @classmethod
    def from_dict(cls, raw: Mapping) -> "FeatureSchema":
        try:
            feats = [(f["name"], f.get("kind", NUMERIC)) for f in raw["features"]]
            foi = raw["foi"]
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"schema is missing field {exc}") from exc
        return cls.build(feats, foi, raw.get("bins") or {})

    @classmethod
    def from_json(cls, path) -> "FeatureSchema":
        try:
            with open(path, encoding="utf-8") as fh:
                return cls.from_dict(json.load(fh))
        except OSError as exc:
            raise DataError(f"cannot read schema {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise SchemaError(f"schema {path} is not valid JSON: {exc}") from exc


@dataclass(frozen=True)
class Node:
    id: int
    values: tuple
    foi_value: object


def _fmt(x: float) -> str:
    return format(x, "g")


def bin_labels(edges: Sequence[float]) -> list[str]:
    labels = [f"[{_fmt(a)},{_fmt(b)})" for a, b in zip(edges, edges[1:])]
    labels[-1] = labels[-1][:-1] + "]"
    return labels


def bin_index(value: float, edges: Sequence[float]) -> int | None:
    """Index of the half-open bin holding ``value``; the last bin is closed."""
    if value < edges[0] or value > edges[-1] or math.isnan(value):
        return None
    if value == edges[-1]:
        return len(edges) - 2
    return bisect.bisect_right(edges, value) - 1


class Dataset:
    """Immutable table of nodes with a designated feature of interest.

    Attributes of interest:

    ``foi_values``  the ordered, finite FoI value set F (only observed values)
    ``foi_counts``  number of nodes per FoI value
    ``foi_codes``   int array, ``foi_values[foi_codes[i]]`` is node i's value
    ``item_codes``  (n, |A|) int array of per-FoI-feature value codes
    ``embedding``   (n, dims) float array used by the Euclidean metrics

    ``normalize=False`` keeps raw numeric values in the embedding.
    """

    def __init__(self, schema: FeatureSchema, rows: Sequence[Sequence], normalize: bool = True):
        self.schema = schema
        self.normalize = normalize
        nfeat = len(schema.features)
        clean_rows = []
        for r, row in enumerate(rows, start=1):
            row = tuple(row)
            if len(row) != nfeat:
                raise DataError(f"row {r}: expected {nfeat} values, got {len(row)}")
            vals = []
            for feat, v in zip(schema.features, row):
                if feat.kind == NUMERIC:
                    try:
                        v = float(v)
                    except (TypeError, ValueError):
                        raise DataError(f"row {r}, column {feat.name!r}: cannot parse {v!r} as a number") from None
                    if not math.isfinite(v):
                        raise DataError(f"row {r}, column {feat.name!r}: non-finite value {v!r}")
                else:
                    v = str(v)
                vals.append(v)
            clean_rows.append(tuple(vals))
        if not clean_rows:
            raise DataError("dataset has no rows")

        # per-FoI-feature item labels and their ordering
        self.item_labels: list[list[str]] = []
        item_codes = np.zeros((len(clean_rows), len(schema.foi_index)), dtype=np.int64)
        for j, fi in enumerate(schema.foi_index):
            feat = schema.features[fi]
            column = [row[fi] for row in clean_rows]
            if feat.name in schema.foi_bins:
                edges = schema.foi_bins[feat.name]
                labels = bin_labels(edges)
                codes = []
                for r, v in enumerate(column, start=1):
                    b = bin_index(v, edges)
                    if b is None:
                        raise DataError(
                            f"row {r}, column {feat.name!r}: FoI value {_fmt(v)} outside bins "
                            f"[{_fmt(edges[0])},{_fmt(edges[-1])}]"
                        )
                    codes.append(b)
                used = sorted(set(codes))
                remap = {b: i for i, b in enumerate(used)}
                self.item_labels.append([labels[b] for b in used])
                item_codes[:, j] = [remap[b] for b in codes]
            else:
                uniq = sorted(set(column))
                remap = {v: i for i, v in enumerate(uniq)}
                self.item_labels.append([_fmt(v) if feat.kind == NUMERIC else v for v in uniq])
                item_codes[:, j] = [remap[v] for v in column]

        # F is the observed part of the cross product, in lexicographic code order
        combos = sorted(set(map(tuple, item_codes.tolist())))
        combo_index = {c: i for i, c in enumerate(combos)}
        if len(schema.foi_index) == 1:
            self.foi_values = tuple(self.item_labels[0][c[0]] for c in combos)
        else:
            self.foi_values = tuple(
                tuple(self.item_labels[j][c[j]] for j in range(len(c))) for c in combos
            )
        codes = np.array([combo_index[tuple(c)] for c in item_codes.tolist()], dtype=np.int64)
        codes.setflags(write=False)
        item_codes.setflags(write=False)
        self.foi_codes = codes
        self.item_codes = item_codes
        counts = np.bincount(codes, minlength=len(self.foi_values))
        self.foi_counts = {v: int(c) for v, c in zip(self.foi_values, counts)}
        self._count_array = counts
        # rank 0 = globally most frequent value; ties by value order
        self.freq_rank = np.empty(len(counts), dtype=np.int64)
        self.freq_rank[np.lexsort((np.arange(len(counts)), -counts))] = np.arange(len(counts))
        self.freq_rank.setflags(write=False)
        self.nodes = tuple(
            Node(i, row, self.foi_values[codes[i]]) for i, row in enumerate(clean_rows)
        )
        self.embedding = self._embed(clean_rows)
        self.embedding.setflags(write=False)

    def _embed(self, rows) -> np.ndarray:
        blocks = []
        self.embedding_owner: list[int] = []
        for fi, feat in enumerate(self.schema.features):
            column = [row[fi] for row in rows]
            if feat.kind == NUMERIC:
                col = np.asarray(column, dtype=float)
                lo, hi = col.min(), col.max()
                if self.normalize:
                    col = (col - lo) / (hi - lo) if hi > lo else np.zeros_like(col)
                blocks.append(col[:, None])
                self.embedding_owner.append(fi)
            else:
                uniq = sorted(set(column))
                idx = {v: i for i, v in enumerate(uniq)}
                onehot = np.zeros((len(rows), len(uniq)))
                onehot[np.arange(len(rows)), [idx[v] for v in column]] = _ONE_HOT_SCALE
                blocks.append(onehot)
                self.embedding_owner.extend([fi] * len(uniq))
        return np.hstack(blocks)

    def __len__(self) -> int:
        return len(self.nodes)

    def __repr__(self) -> str:
        return f"Dataset(n={len(self)}, features={self.schema.names}, F={list(self.foi_values)})"

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def num_values(self) -> int:
        return len(self.foi_values)

    def value_code(self, value) -> int:
        try:
            return self.foi_values.index(value)
        except ValueError:
            raise KeyError(f"{value!r} is not an FoI value of this dataset") from None

    def count_of(self, code: int) -> int:
        return int(self._count_array[code])

    def codes_by_frequency(self) -> list[int]:
        """FoI value codes sorted by global count (descending), then value order."""
        return np.argsort(self.freq_rank).tolist()

    def rows(self) -> list[tuple]:
        return [node.values for node in self.nodes]


def foi_partition(d: Dataset) -> dict:
    """Map each FoI value to the frozenset of node ids carrying it."""
    groups: dict[int, list[int]] = {c: [] for c in range(d.num_values)}
    for i, c in enumerate(d.foi_codes.tolist()):
        groups[c].append(i)
    return {d.foi_values[c]: frozenset(ids) for c, ids in groups.items()}


def load_csv(path, schema: FeatureSchema, normalize: bool = True) -> Dataset:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path} is empty") from None
        header = [h.strip() for h in header]
        if sorted(header) != sorted(schema.names) or len(header) != len(set(header)):
            raise DataError(f"header {header} does not match schema features {schema.names}")
        order = [header.index(name) for name in schema.names]
        rows = []
        for lineno, raw in enumerate(reader, start=2):
            if not raw:
                continue
            if len(raw) != len(header):
                raise DataError(f"line {lineno}: expected {len(header)} cells, got {len(raw)}")
            rows.append([raw[j] for j in order])
    try:
        return Dataset(schema, rows, normalize=normalize)
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from None


def to_csv(d: Dataset, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(d.schema.names)
        for node in d.nodes:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in node.values])


def infer_schema(path, foi, bins=None) -> FeatureSchema:
    """Guess feature kinds from a CSV: a column is numeric if every cell parses."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path} is empty") from None
        numeric = [True] * len(header)
        for raw in reader:
            for j, cell in enumerate(raw[: len(header)]):
                if numeric[j]:
                    try:
                        float(cell)
                    except ValueError:
                        numeric[j] = False
    feats = [(h, NUMERIC if ok else CATEGORICAL) for h, ok in zip(header, numeric)]
    return FeatureSchema.build(feats, foi, bins)


def _largest_remainder(n: int, weights: Sequence[float]) -> list[int]:
    quotas = [n * w for w in weights]
    counts = [int(math.floor(q)) for q in quotas]
    order = sorted(range(len(weights)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[: n - sum(counts)]:
        counts[i] += 1
    return counts


def synthesize(
    n: int,
    num_features: int,
    foi_cardinality: int,
    foi_mix: Sequence[float] | None = None,
    cluster_structure: int = 5,
    seed: int = 0,
    foi_noise: float = 0.3,
    continuous_foi: bool = False,
) -> Dataset:
    """Planted Gaussian blobs with an FoI column ``foi``.

    FoI labels are correlated with the blobs: each blob prefers one value and
    a ``foi_noise`` fraction of labels is shuffled.  Value counts follow
    ``foi_mix`` exactly (largest-remainder rounding).

    With ``continuous_foi`` the column is numeric (a per-blob level plus
    noise) and the schema bins it at the count boundaries, so the binned
    values still follow ``foi_mix`` exactly.
    """
    if foi_cardinality < 1 or n < foi_cardinality:
        raise DataError(f"need n >= foi_cardinality >= 1, got n={n}, |F|={foi_cardinality}")
    if num_features < 1 or cluster_structure < 1:
        raise DataError("num_features and cluster_structure must be positive")
    if foi_mix is None:
        foi_mix = [1.0 / foi_cardinality] * foi_cardinality
    foi_mix = [float(p) for p in foi_mix]
    if len(foi_mix) != foi_cardinality:
        raise DataError(f"foi_mix has {len(foi_mix)} entries, expected {foi_cardinality}")
    if any(p < 0 for p in foi_mix) or abs(sum(foi_mix) - 1.0) > 1e-9:
        raise DataError(f"foi_mix must be non-negative and sum to 1, got {foi_mix}")
    counts = _largest_remainder(n, foi_mix)
    if min(counts) == 0:
        raise DataError(f"infeasible proportions: {foi_mix} leaves some FoI value with 0 of {n} nodes")

    rng = np.random.default_rng(seed)
    centers = rng.uniform(0.0, 10.0, size=(cluster_structure, num_features))
    blob = rng.integers(0, cluster_structure, size=n)
    points = centers[blob] + rng.normal(0.0, 0.6, size=(n, num_features))

    names = [f"x{j}" for j in range(num_features)]
    if continuous_foi:
        level = rng.uniform(0.0, 100.0, size=cluster_structure)
        raw = level[blob] + rng.normal(0.0, 8.0, size=n)
        n_noise = int(round(foi_noise * n))
        if n_noise > 1:
            picked = rng.choice(n, size=n_noise, replace=False)
            raw[picked] = rng.uniform(raw.min(), raw.max(), size=n_noise)
        raw = np.round(raw, 6)
        srt = np.sort(raw)
        if len(np.unique(srt)) < n:
            raw = raw + np.arange(n) * 1e-9
            srt = np.sort(raw)
        cuts = np.cumsum(counts)[:-1]
        edges = [float(srt[0])]
        edges += [float((srt[c - 1] + srt[c]) / 2.0) for c in cuts]
        edges.append(float(srt[-1]))
        schema = FeatureSchema.build(
            [(x, NUMERIC) for x in names] + [("foi", NUMERIC)], "foi", {"foi": edges}
        )
        rows = [tuple(float(v) for v in points[i]) + (float(raw[i]),) for i in range(n)]
        return Dataset(schema, rows)

    labels = np.repeat(np.arange(foi_cardinality), counts)
    preferred = blob % foi_cardinality
    order = np.lexsort((rng.random(n), preferred))
    assigned = np.empty(n, dtype=np.int64)
    assigned[order] = labels
    n_noise = int(round(foi_noise * n))
    if n_noise > 1:
        picked = rng.choice(n, size=n_noise, replace=False)
        assigned[picked] = assigned[rng.permutation(picked)]

    schema = FeatureSchema.build([(x, NUMERIC) for x in names] + [("foi", CATEGORICAL)], "foi")
    rows = [
        tuple(float(v) for v in points[i]) + (f"f{assigned[i]}",) for i in range(n)
    ]
    return Dataset(schema, rows)


__all__ = [
    "CATEGORICAL",
    "NUMERIC",
    "Dataset",
    "Feature",
    "FeatureSchema",
    "Node",
    "bin_index",
    "bin_labels",
    "foi_partition",
    "infer_schema",
    "load_csv",
    "synthesize",
    "to_csv",
]
