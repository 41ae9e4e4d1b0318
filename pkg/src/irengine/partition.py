"""Fold construction: splitting a measure subset into replicated folds.

Four modes are supported:

* ``disjoint`` -- shuffle then round-robin; folds are pairwise disjoint,
  within one of each other in size, and their multiset union is exactly the
  input.  ``n_requested = 1`` is the identity partition (single fold equal
  to the input, unshuffled), which reduces the whole pipeline to a
  traditional single-computation one.
* ``partial`` -- a seeded without-replacement sample of a fraction of the
  subset is taken first, then split as in disjoint mode.
* ``with_replacement`` -- bootstrap-style folds: every fold draws exactly
  ``fold_size`` members uniformly with replacement, each fold from its own
  child stream of the seed.
* ``incremental`` -- records are assigned to folds as they arrive, keeping
  the fold sizes within one of each other after every single add.

The fold count degrades instead of failing: ``n_effective`` is
``min(n_requested, floor(usable / min_fold_size))`` clamped to at least 1,
so small subsets simply produce fewer folds.

All modes are pure functions of (member list, config); the generator is the
SplitMix64 stream documented in :mod:`irengine.rng`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .dataset import MeasureSubset
from .errors import ValidationError
from .rng import SplitMix64

PARTITION_MODES = ("disjoint", "partial", "with_replacement", "incremental")

DEFAULT_N = 5             # no meaningful gain has been observed past ~10 folds
DEFAULT_MIN_FOLD_SIZE = 25


@dataclass(frozen=True)
class PartitionConfig:
    n_requested: int = DEFAULT_N
    min_fold_size: int = DEFAULT_MIN_FOLD_SIZE
    mode: str = "disjoint"
    fraction: Optional[float] = None      # partial mode, in (0, 1]
    fold_size: Optional[int] = None       # with_replacement mode
    seed: int = 0

    def __post_init__(self):
        if self.mode not in PARTITION_MODES:
            raise ValidationError(f"unknown partition mode {self.mode!r}")
        if not isinstance(self.n_requested, int) or self.n_requested < 1:
            raise ValidationError("n_requested must be an integer >= 1")
        if not isinstance(self.min_fold_size, int) or self.min_fold_size < 1:
            raise ValidationError("min_fold_size must be an integer >= 1")
        if not isinstance(self.seed, int) or not (0 <= self.seed < 2 ** 64):
            raise ValidationError("seed must be a 64-bit unsigned integer")
        if self.mode == "partial":
            if self.fraction is None or not (0.0 < self.fraction <= 1.0):
                raise ValidationError("partial mode needs fraction in (0, 1]")
        if self.mode == "with_replacement":
            if self.fold_size is None or not isinstance(self.fold_size, int):
                raise ValidationError("with_replacement mode needs an integer fold_size")
            if self.fold_size < self.min_fold_size:
                raise ValidationError("fold_size must be >= min_fold_size")

    @classmethod
    def from_dict(cls, d: dict) -> "PartitionConfig":
        if not isinstance(d, dict):
            raise ValidationError("partition config must be an object")
        known = {"n", "n_requested", "min_fold_size", "mode", "fraction", "fold_size", "seed"}
        unknown = set(d) - known
        if unknown:
            raise ValidationError(f"unknown partition config keys: {sorted(unknown)}")
        return cls(
            n_requested=d.get("n", d.get("n_requested", DEFAULT_N)),
            min_fold_size=d.get("min_fold_size", DEFAULT_MIN_FOLD_SIZE),
            mode=d.get("mode", "disjoint"),
            fraction=d.get("fraction"),
            fold_size=d.get("fold_size"),
            seed=d.get("seed", 0),
        )

    def to_dict(self) -> dict:
        out = {"n": self.n_requested, "min_fold_size": self.min_fold_size,
               "mode": self.mode, "seed": self.seed}
        if self.fraction is not None:
            out["fraction"] = self.fraction
        if self.fold_size is not None:
            out["fold_size"] = self.fold_size
        return out


@dataclass(frozen=True)
class Fold:
    index: int
    member_row_ids: tuple[int, ...]   # ordered; a multiset in replacement mode

    @property
    def size(self) -> int:
        return len(self.member_row_ids)


@dataclass
class FoldSet:
    folds: list[Fold]
    n_effective: int
    config: PartitionConfig
    source: Optional[MeasureSubset] = None

    def __post_init__(self):
        if self.n_effective != len(self.folds):
            raise ValidationError("n_effective must equal the number of folds")

    def fold_sizes(self) -> list[int]:
        return [f.size for f in self.folds]

    def to_dict(self) -> dict:
        return {
            "n_effective": self.n_effective,
            "mode": self.config.mode,
            "seed": self.config.seed,
            "folds": [list(f.member_row_ids) for f in self.folds],
        }


def effective_fold_count(usable: int, config: PartitionConfig) -> int:
    """min(n_requested, floor(usable / min_fold_size)), clamped to >= 1."""
    return max(1, min(config.n_requested, usable // config.min_fold_size))


def _members_of(subset) -> list[int]:
    if isinstance(subset, MeasureSubset):
        return list(subset.member_row_ids)
    return list(subset)


def _source_of(subset) -> Optional[MeasureSubset]:
    return subset if isinstance(subset, MeasureSubset) else None


def _round_robin(members: list[int], n_eff: int, config: PartitionConfig,
                 source, rng: SplitMix64) -> FoldSet:
    """Shuffle then deal members round-robin; identity for n_requested = 1."""
    if config.n_requested == 1:
        folds = [Fold(0, tuple(members))]
        return FoldSet(folds=folds, n_effective=1, config=config, source=source)
    shuffled = rng.shuffle(list(members))
    folds = [Fold(j, tuple(shuffled[j::n_eff])) for j in range(n_eff)]
    return FoldSet(folds=folds, n_effective=n_eff, config=config, source=source)


def partition(subset, config: PartitionConfig) -> FoldSet:
    """Disjoint exhaustive partition: every member lands in exactly one fold
    and fold sizes differ by at most one.  Subsets smaller than
    ``n_requested * min_fold_size`` degrade ``n_effective`` rather than fail.
    """
    if config.mode != "disjoint":
        raise ValidationError(f"partition() requires disjoint mode, got {config.mode!r}")
    members = _members_of(subset)
    n_eff = effective_fold_count(len(members), config)
    return _round_robin(members, n_eff, config, _source_of(subset), SplitMix64(config.seed))


def partition_partial(subset, config: PartitionConfig) -> FoldSet:
    """Sample ceil(fraction * |subset|) members without replacement, then
    split the sample as in disjoint mode.  With fraction = 1.0 the sampling
    step is skipped entirely, so the result is identical to disjoint mode
    under the same seed."""
    if config.mode != "partial":
        raise ValidationError(f"partition_partial() requires partial mode, got {config.mode!r}")
    members = _members_of(subset)
    rng = SplitMix64(config.seed)
    k = math.ceil(config.fraction * len(members))
    if k < len(members):
        # selection sampling: partial Fisher-Yates, first k slots
        pool = list(members)
        for i in range(k):
            j = i + rng.below(len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
        members = pool[:k]
    n_eff = effective_fold_count(len(members), config)
    return _round_robin(members, n_eff, config, _source_of(subset), rng)


def partition_with_replacement(subset, config: PartitionConfig) -> FoldSet:
    """Bootstrap folds: exactly ``n_requested`` folds of exactly
    ``fold_size`` members each, drawn uniformly with replacement.  Each fold
    samples from its own child stream so fold j is unaffected by the sizes
    of earlier folds."""
    if config.mode != "with_replacement":
        raise ValidationError(
            f"partition_with_replacement() requires with_replacement mode, got {config.mode!r}")
    members = _members_of(subset)
    if not members:
        raise ValidationError("cannot sample with replacement from an empty subset")
    root = SplitMix64(config.seed)
    folds = []
    for j in range(config.n_requested):
        stream = root.spawn()
        folds.append(Fold(j, tuple(members[stream.below(len(members))]
                                   for _ in range(config.fold_size))))
    return FoldSet(folds=folds, n_effective=config.n_requested, config=config,
                   source=_source_of(subset))


class IncrementalPartitioner:
    """Assigns records to folds as they arrive, keeping every fold within
    one record of every other at all times.

    Arrivals are consumed in blocks of ``n_requested``: at each block start a
    fresh permutation of the fold indices is drawn from the seeded stream,
    and the block's arrivals are dealt in that order.  Each fold therefore
    receives exactly one record per complete block, which gives the <= 1
    size spread after every single add.  Snapshots are copies and stay valid
    while feeding continues.
    """

    def __init__(self, config: PartitionConfig):
        if config.mode != "incremental":
            raise ValidationError(
                f"IncrementalPartitioner requires incremental mode, got {config.mode!r}")
        self.config = config
        self.arrivals_seen = 0
        self._folds: list[list[int]] = [[] for _ in range(config.n_requested)]
        self._rng = SplitMix64(config.seed)
        self._block: list[int] = []

    def add(self, row_id: int) -> None:
        n = self.config.n_requested
        if self.arrivals_seen % n == 0:
            self._block = self._rng.shuffle(list(range(n)))
        self._folds[self._block[self.arrivals_seen % n]].append(row_id)
        self.arrivals_seen += 1

    def add_many(self, row_ids: Sequence[int]) -> None:
        for rid in row_ids:
            self.add(rid)

    def snapshot(self) -> FoldSet:
        """FoldSet over the records seen so far.  Before any arrival this is
        ``n_requested`` empty folds; the metrics layer reports emptiness as
        undefined statistics rather than an error."""
        folds = [Fold(j, tuple(m)) for j, m in enumerate(self._folds)]
        return FoldSet(folds=folds, n_effective=self.config.n_requested,
                       config=self.config, source=None)


def run_partition(subset, config: PartitionConfig) -> FoldSet:
    """Dispatch on ``config.mode`` for the one-shot modes."""
    if config.mode == "disjoint":
        return partition(subset, config)
    if config.mode == "partial":
        return partition_partial(subset, config)
    if config.mode == "with_replacement":
        return partition_with_replacement(subset, config)
    raise ValidationError(
        "incremental mode is stateful; use IncrementalPartitioner instead of run_partition()")
