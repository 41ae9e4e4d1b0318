"""Seeded synthetic dataset generators.

These power the demos and the verification suite without any external data.
Generation is a pure function of the spec (including its seed): the same
spec always yields the same rows, and growing ``size`` extends the row
sequence without changing the prefix, which is what the incremental feeding
endpoints rely on.

Kinds:

* ``binary_population(p, size)`` -- one boolean column ``positive``.
* ``noisy_linear(slope, intercept, noise_sd, x_range, size)`` -- numeric
  ``x`` uniform over the range and ``y = slope*x + intercept + N(0, sd)``.
* ``null_association_table(features, rows, outcome_p)`` -- boolean feature
  columns ``f0..f{k-1}`` each drawn independently of the boolean ``outcome``
  column, so every observed association is noise by construction.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .dataset import Dataset
from .errors import ValidationError
from .rng import SplitMix64

GENERATOR_KINDS = ("binary_population", "noisy_linear", "null_association_table")


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    size: int = 100
    seed: int = 0
    p: float = 0.5                      # binary_population
    slope: float = 1.0                  # noisy_linear
    intercept: float = 0.0
    noise_sd: float = 1.0
    x_range: tuple = (0.0, 10.0)
    features: int = 10                  # null_association_table
    outcome_p: float = 0.5

    def __post_init__(self):
        if self.kind not in GENERATOR_KINDS:
            raise ValidationError(f"unknown generator kind {self.kind!r}")
        if not isinstance(self.size, int) or self.size < 1:
            raise ValidationError("size must be an integer >= 1")
        for name in ("p", "outcome_p"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValidationError(f"{name} must be in [0, 1]")
        if self.noise_sd < 0:
            raise ValidationError("noise_sd must be >= 0")
        if self.kind == "null_association_table" and self.features < 1:
            raise ValidationError("features must be >= 1")
        if len(self.x_range) != 2 or not self.x_range[0] < self.x_range[1]:
            raise ValidationError("x_range must be (low, high) with low < high")

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorSpec":
        if not isinstance(d, dict) or "kind" not in d:
            raise ValidationError("generator spec must be an object with a 'kind'")
        kwargs = dict(d)
        if "rows" in kwargs:  # null_association_table row count alias
            kwargs["size"] = kwargs.pop("rows")
        if "x_range" in kwargs:
            kwargs["x_range"] = tuple(kwargs["x_range"])
        known = {f.name for f in cls.__dataclass_fields__.values()}  # type: ignore[attr-defined]
        unknown = set(kwargs) - known
        if unknown:
            raise ValidationError(f"unknown generator spec keys: {sorted(unknown)}")
        return cls(**kwargs)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "size": self.size, "seed": self.seed}
        if self.kind == "binary_population":
            out["p"] = self.p
        elif self.kind == "noisy_linear":
            out.update(slope=self.slope, intercept=self.intercept,
                       noise_sd=self.noise_sd, x_range=list(self.x_range))
        else:
            out.update(features=self.features, outcome_p=self.outcome_p)
        return out


def _schema_for(spec: GeneratorSpec) -> list[tuple[str, str]]:
    if spec.kind == "binary_population":
        return [("positive", "boolean")]
    if spec.kind == "noisy_linear":
        return [("x", "number"), ("y", "number")]
    return [(f"f{i}", "boolean") for i in range(spec.features)] + [("outcome", "boolean")]


def generate(spec: GeneratorSpec, name: Optional[str] = None) -> Dataset:
    """Materialize the spec as a Dataset; deterministic per seed."""
    rng = SplitMix64(spec.seed)
    rows: list[list] = []
    if spec.kind == "binary_population":
        for _ in range(spec.size):
            rows.append([rng.next_float() < spec.p])
    elif spec.kind == "noisy_linear":
        lo, hi = spec.x_range
        for _ in range(spec.size):
            x = lo + (hi - lo) * rng.next_float()
            # the gauss draw happens even at sd 0 so that the x sequence does
            # not depend on the noise setting; 0.0 * g contributes exactly 0
            y = spec.slope * x + spec.intercept + spec.noise_sd * rng.gauss()
            rows.append([x, y])
    else:
        for _ in range(spec.size):
            row = [rng.next_float() < 0.5 for _ in range(spec.features)]
            row.append(rng.next_float() < spec.outcome_p)
            rows.append(row)
    return Dataset(name=name or f"synth-{spec.kind}", schema=_schema_for(spec), rows=rows)


def _cell_text(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    return repr(v) if isinstance(v, float) else str(v)


def write_csv(dataset: Dataset, path) -> None:
    """Write a dataset back out as UTF-8 CSV; floats use repr so a re-ingest
    reproduces the exact same values."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([c for c, _ in dataset.schema])
        for row in dataset.rows:
            writer.writerow([_cell_text(v) for v in row])
