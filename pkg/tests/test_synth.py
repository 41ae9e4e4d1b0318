"""Synthetic generator contracts."""

import math

import pytest

from irengine.dataset import ingest_csv
from irengine.errors import ValidationError
from irengine.metrics import metric_binary_association
from irengine.synth import GeneratorSpec, generate, write_csv


class TestBinaryPopulation:
    def test_observed_proportion_near_p(self):
        ds = generate(GeneratorSpec(kind="binary_population", p=0.5, size=10000, seed=1))
        observed = sum(1 for row in ds.rows if row[0]) / ds.row_count
        assert abs(observed - 0.5) < 0.02

    def test_deterministic_per_seed(self):
        a = generate(GeneratorSpec(kind="binary_population", p=0.3, size=50, seed=4))
        b = generate(GeneratorSpec(kind="binary_population", p=0.3, size=50, seed=4))
        assert a.rows == b.rows

    def test_prefix_stability_when_grown(self):
        small = generate(GeneratorSpec(kind="binary_population", p=0.3, size=50, seed=4))
        large = generate(GeneratorSpec(kind="binary_population", p=0.3, size=80, seed=4))
        assert large.rows[:50] == small.rows


class TestNoisyLinear:
    def test_zero_noise_is_exactly_on_line(self):
        ds = generate(GeneratorSpec(kind="noisy_linear", slope=2.0, intercept=1.0,
                                    noise_sd=0.0, size=200, seed=2))
        assert all(y == 2.0 * x + 1.0 for x, y in ds.rows)

    def test_x_within_range(self):
        ds = generate(GeneratorSpec(kind="noisy_linear", x_range=(5.0, 6.0), size=500))
        assert all(5.0 <= x < 6.0 for x, _ in ds.rows)

    def test_noise_scale(self):
        ds = generate(GeneratorSpec(kind="noisy_linear", slope=0.0, intercept=0.0,
                                    noise_sd=2.0, size=20000, seed=3))
        ys = [y for _, y in ds.rows]
        var = sum(y * y for y in ys) / len(ys)
        assert abs(math.sqrt(var) - 2.0) < 0.05


class TestNullAssociationTable:
    def test_shape(self):
        ds = generate(GeneratorSpec(kind="null_association_table", features=1000,
                                    size=10, seed=0))
        assert len(ds.schema) == 1001
        assert ds.schema[-1] == ("outcome", "boolean")
        assert ds.row_count == 10

    def test_rows_alias(self):
        spec = GeneratorSpec.from_dict(
            {"kind": "null_association_table", "features": 3, "rows": 25})
        assert spec.size == 25

    def test_independence_by_construction(self):
        # mean |phi| over many independent features shrinks with row count
        ds = generate(GeneratorSpec(kind="null_association_table", features=50,
                                    size=2000, seed=5))
        out_idx = len(ds.schema) - 1
        outcomes = [row[out_idx] for row in ds.rows]
        phis = []
        for j in range(50):
            feats = [row[j] for row in ds.rows]
            values, _, _, _ = metric_binary_association(feats, outcomes)
            phis.append(abs(values["phi"]))
        assert sum(phis) / len(phis) < 0.05


class TestSpecValidation:
    @pytest.mark.parametrize("kw", [
        dict(kind="bogus"),
        dict(kind="binary_population", p=1.5),
        dict(kind="binary_population", size=0),
        dict(kind="noisy_linear", noise_sd=-1),
        dict(kind="noisy_linear", x_range=(3.0, 3.0)),
        dict(kind="null_association_table", features=0),
    ])
    def test_invalid(self, kw):
        with pytest.raises(ValidationError):
            GeneratorSpec(**kw)

    def test_unknown_keys_rejected(self):
        with pytest.raises(ValidationError):
            GeneratorSpec.from_dict({"kind": "binary_population", "zap": 1})


class TestCsvRoundTrip:
    def test_floats_reingest_exactly(self, tmp_path):
        ds = generate(GeneratorSpec(kind="noisy_linear", size=100, seed=9))
        path = tmp_path / "round.csv"
        write_csv(ds, path)
        back = ingest_csv(path)
        assert back.schema == ds.schema
        assert back.rows == ds.rows

    def test_booleans_reingest(self, tmp_path):
        ds = generate(GeneratorSpec(kind="binary_population", size=30, seed=9))
        path = tmp_path / "round.csv"
        write_csv(ds, path)
        back = ingest_csv(path)
        assert back.rows == ds.rows
