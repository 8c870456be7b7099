"""0-dimensional sublevel-set persistence of sampled 1-D signals.

The signal is viewed as a function on the vertices of a path graph.  Sweeping
the level upwards, every local minimum starts a connected component; where two
components meet, the one with the larger birth value (the younger one) dies
and the older one absorbs it.  Ties between equal values are broken by sample
index: the lower index is processed first and is considered older.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, InvalidThreshold, NonFiniteSample, TooShort


class EssentialPolicy(enum.Enum):
    """What to do with the component born at the global minimum."""

    PAIR_WITH_GLOBAL_MAX = "pair-max"
    DROP = "drop"


class UnionFind:
    """Disjoint sets over ``0..n-1`` with path halving and union by size."""

    def __init__(self, n):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x):
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a, b):
        """Merge the sets holding ``a`` and ``b``; return the new root."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return ra


@dataclass(frozen=True)
class PersistenceDiagram:
    """Multiset of (birth, death) pairs, stored as an ``(n, 2)`` array.

    Rows are sorted by birth, then death.
    """

    pairs: np.ndarray
    channel: object = None
    essential_policy: EssentialPolicy = EssentialPolicy.PAIR_WITH_GLOBAL_MAX

    def __post_init__(self):
        pairs = np.asarray(self.pairs, dtype=np.float64).reshape(-1, 2)
        if np.any(pairs[:, 1] < pairs[:, 0]):
            raise ValueError("death must not precede birth")
        order = np.lexsort((pairs[:, 1], pairs[:, 0]))
        pairs = pairs[order]
        pairs.setflags(write=False)
        object.__setattr__(self, "pairs", pairs)

    def __len__(self):
        return len(self.pairs)

    @property
    def births(self):
        return self.pairs[:, 0]

    @property
    def deaths(self):
        return self.pairs[:, 1]

    @property
    def lifetimes(self):
        return self.pairs[:, 1] - self.pairs[:, 0]

    def as_tuples(self) -> list[tuple[float, float]]:
        return [(float(b), float(d)) for b, d in self.pairs]


def _validated(signal) -> np.ndarray:
    arr = np.asarray(signal, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError("signal must be one-dimensional")
    if arr.size < 2:
        raise TooShort(f"signal has {arr.size} samples, need at least 2")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteSample("signal contains NaN or infinite samples")
    return arr


def collapse_ties(signal) -> np.ndarray:
    """Merge runs of consecutive equal samples into a single vertex."""
    arr = np.asarray(signal, dtype=np.float64)
    if arr.size == 0:
        return arr
    keep = np.empty(arr.size, dtype=bool)
    keep[0] = True
    np.not_equal(arr[1:], arr[:-1], out=keep[1:])
    return arr[keep]


def count_local_minima(signal) -> int:
    """Strict local minima of the tie-collapsed signal, endpoints included."""
    v = collapse_ties(signal)
    if v.size == 1:
        return 1
    left = np.r_[np.inf, v[:-1]]
    right = np.r_[v[1:], np.inf]
    return int(np.count_nonzero((v < left) & (v < right)))


def sublevel_persistence(signal, policy=EssentialPolicy.PAIR_WITH_GLOBAL_MAX, channel=None):
    """Elder-rule union-find sweep over the sublevel filtration of ``signal``.

    Returns a :class:`PersistenceDiagram`.  Under ``PAIR_WITH_GLOBAL_MAX``
    the essential component is reported as ``(min, max)``; under ``DROP`` it
    is omitted.
    """
    arr = _validated(signal)
    values = collapse_ties(arr)
    n = values.size
    order = np.argsort(values, kind="stable")
    vals = values.tolist()

    uf = UnionFind(n)
    seen = [False] * n
    # per-root data: position in sweep order of the component's minimum
    elder_pos = [0] * n
    elder_val = [0.0] * n
    births, deaths = [], []

    for pos, i in enumerate(order.tolist()):
        seen[i] = True
        roots = []
        if i > 0 and seen[i - 1]:
            roots.append(uf.find(i - 1))
        if i + 1 < n and seen[i + 1]:
            roots.append(uf.find(i + 1))
        if not roots:
            elder_pos[i] = pos
            elder_val[i] = vals[i]
            continue
        keep = roots[0]
        if len(roots) == 2:
            young = roots[1]
            if elder_pos[keep] > elder_pos[young]:
                keep, young = young, keep
            births.append(elder_val[young])
            deaths.append(vals[i])
            uf.union(keep, young)
        pos_k, val_k = elder_pos[keep], elder_val[keep]
        root = uf.union(keep, i)
        elder_pos[root] = pos_k
        elder_val[root] = val_k

    if policy is EssentialPolicy.PAIR_WITH_GLOBAL_MAX:
        births.append(vals[int(order[0])])
        deaths.append(vals[int(order[-1])])
    pairs = np.column_stack([births, deaths]) if births else np.empty((0, 2))
    return PersistenceDiagram(pairs, channel=channel, essential_policy=policy)


def sublevel_persistence_bruteforce(signal, policy=EssentialPolicy.PAIR_WITH_GLOBAL_MAX, channel=None):
    """Reference implementation: recompute components at every level.

    For each distinct sample value ``alpha`` (ascending) the sublevel set
    ``{i : f(i) <= alpha}`` is split into maximal runs; each run is owned by
    its lowest sample (lowest index on ties).  An owner that stops owning a
    run dies at ``alpha``.  Quadratic in the signal length.
    """
    arr = _validated(signal)
    if arr.size > 4096:
        raise ValueError("brute-force persistence is limited to 4096 samples")
    alive = {}
    births, deaths = [], []
    for alpha in np.unique(arr):
        mask = arr <= alpha
        edges = np.flatnonzero(np.diff(np.r_[0, mask.astype(np.int8), 0]))
        owners = set()
        for start, stop in zip(edges[::2], edges[1::2]):
            owners.add(start + int(np.argmin(arr[start:stop])))
        for owner in list(alive):
            if owner not in owners:
                births.append(alive.pop(owner))
                deaths.append(float(alpha))
        for owner in owners:
            alive.setdefault(owner, float(arr[owner]))
    assert len(alive) == 1
    if policy is EssentialPolicy.PAIR_WITH_GLOBAL_MAX:
        births.append(next(iter(alive.values())))
        deaths.append(float(arr.max()))
    pairs = np.column_stack([births, deaths]) if births else np.empty((0, 2))
    return PersistenceDiagram(pairs, channel=channel, essential_policy=policy)


def threshold_diagram(diagram: PersistenceDiagram, t: float) -> PersistenceDiagram:
    """Drop pairs whose lifetime is below ``t``."""
    if not t >= 0:
        raise InvalidThreshold(f"threshold must be nonnegative, got {t}")
    keep = diagram.lifetimes >= t
    return PersistenceDiagram(diagram.pairs[keep], diagram.channel, diagram.essential_policy)


def write_diagram_csv(path, diagram: PersistenceDiagram) -> None:
    lines = ["birth,death"]
    lines += [f"{b!r},{d!r}" for b, d in diagram.as_tuples()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_diagram_csv(path) -> PersistenceDiagram:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip().lower() != "birth,death":
        raise FormatError(f"{path}: expected header 'birth,death'")
    try:
        rows = [tuple(float(x) for x in ln.split(",")) for ln in lines[1:] if ln.strip()]
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    return PersistenceDiagram(np.array(rows, dtype=np.float64).reshape(-1, 2))
