"""Ingest, filter, and group-by behavior."""

import json

import pytest

from irengine.dataset import (FilterPredicate, apply_filter, group_measures,
                              ingest_csv, ingest_csv_text)
from irengine.errors import IngestError, ValidationError


def make_csv(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestIngest:
    def test_two_number_columns(self, tmp_path):
        ds = ingest_csv(make_csv(tmp_path, "x,y\n1,2\n3,4\n"))
        assert ds.row_count == 2
        assert ds.schema == [("x", "integer"), ("y", "integer")]
        assert ds.rows == [[1, 2], [3, 4]]

    def test_float_inference(self, tmp_path):
        ds = ingest_csv(make_csv(tmp_path, "x\n1.5\n2\n"))
        assert ds.schema == [("x", "number")]
        assert ds.rows == [[1.5], [2.0]]

    def test_empty_cell_is_missing(self, tmp_path):
        ds = ingest_csv(make_csv(tmp_path, "x,y\n1,\n2,3\n"))
        assert ds.rows[0] == [1, None]

    def test_row_with_extra_cell_names_line(self, tmp_path):
        with pytest.raises(IngestError, match="line 3"):
            ingest_csv(make_csv(tmp_path, "x,y\n1,2\n1,2,3\n"))

    def test_hinted_kind_parse_failure_names_column_and_line(self, tmp_path):
        path = make_csv(tmp_path, "x\nhello\n")
        with pytest.raises(IngestError, match="line 2.*'x'"):
            ingest_csv(path, schema_hint={"x": "number"})

    def test_boolean_inference(self, tmp_path):
        ds = ingest_csv(make_csv(tmp_path, "flag\ntrue\nfalse\nTRUE\n"))
        assert ds.schema == [("flag", "boolean")]
        assert ds.rows == [[True], [False], [True]]

    def test_quoted_commas(self, tmp_path):
        ds = ingest_csv(make_csv(tmp_path, 'name,n\n"a,b",1\n'))
        assert ds.rows == [["a,b", 1]]

    def test_row_ids_are_positions(self, tmp_path):
        ds = ingest_csv(make_csv(tmp_path, "x\n10\n20\n30\n"))
        assert [ds.record(i).row_id for i in range(3)] == [0, 1, 2]

    def test_schema_hint_unknown_column(self, tmp_path):
        with pytest.raises(ValidationError):
            ingest_csv(make_csv(tmp_path, "x\n1\n"), schema_hint={"zzz": "number"})

    def test_text_ingest_matches_file_ingest(self, tmp_path):
        text = "a,b\n1,x\n2,y\n"
        from_file = ingest_csv(make_csv(tmp_path, text))
        from_text = ingest_csv_text(text)
        assert from_file.schema == from_text.schema
        assert from_file.rows == from_text.rows


class TestFilter:
    @pytest.fixture
    def ds(self, tmp_path):
        return ingest_csv(make_csv(tmp_path, "x,tag\n1,a\n2,b\n3,a\n"))

    def test_gt(self, ds):
        view = apply_filter(ds, [FilterPredicate("x", "gt", 1)])
        assert view.row_ids == [1, 2]

    def test_empty_predicates_is_identity(self, ds):
        view = apply_filter(ds, [])
        assert view.row_ids == [0, 1, 2]

    def test_unknown_column_rejected(self, ds):
        with pytest.raises(ValidationError):
            apply_filter(ds, [FilterPredicate("nope", "eq", 1)])

    def test_kind_mismatch_rejected(self, ds):
        with pytest.raises(ValidationError):
            apply_filter(ds, [FilterPredicate("x", "eq", "one")])

    def test_conjunction(self, ds):
        view = apply_filter(ds, [FilterPredicate("x", "gte", 1),
                                 FilterPredicate("tag", "eq", "a")])
        assert view.row_ids == [0, 2]

    def test_in_and_between(self, ds):
        assert apply_filter(ds, [FilterPredicate("tag", "in", ["a"])]).row_ids == [0, 2]
        assert apply_filter(ds, [FilterPredicate("x", "between", [2, 3])]).row_ids == [1, 2]

    def test_idempotent(self, ds):
        preds = [FilterPredicate("x", "lte", 2)]
        once = apply_filter(ds, preds)
        again = apply_filter(ds, preds)
        assert once.row_ids == again.row_ids

    def test_missing_never_matches(self, tmp_path):
        ds = ingest_csv(make_csv(tmp_path, "x,y\n1,0\n,0\n3,0\n"))
        view = apply_filter(ds, [FilterPredicate("x", "lt", 10)])
        assert view.row_ids == [0, 2]

    def test_original_row_ids_preserved(self, ds):
        view = apply_filter(ds, [FilterPredicate("tag", "eq", "b")])
        assert view.row_ids == [1]
        assert view.base.rows[1] == [2, "b"]


class TestGroup:
    @pytest.fixture
    def view(self, tmp_path):
        ds = ingest_csv(make_csv(
            tmp_path, "gender,age\nM,30\nF,40\nM,50\nF,20\n"))
        return apply_filter(ds, [])

    def test_two_groups_partition_the_view(self, view):
        subsets = group_measures(view, ["gender"])
        assert len(subsets) == 2
        key_to_members = {s.label: s.member_row_ids for s in subsets}
        assert key_to_members == {"gender=F": [1, 3], "gender=M": [0, 2]}

    def test_empty_group_by_is_single_subset(self, view):
        subsets = group_measures(view, [])
        assert len(subsets) == 1
        assert subsets[0].member_row_ids == [0, 1, 2, 3]
        assert subsets[0].group_key == []

    def test_empty_view_yields_no_subsets(self, view):
        empty = apply_filter(view.base, [FilterPredicate("age", "gt", 1000)])
        assert group_measures(empty, ["gender"]) == []

    def test_continuous_column_rejected(self, tmp_path):
        ds = ingest_csv(make_csv(tmp_path, "v\n1.5\n2.5\n"))
        with pytest.raises(ValidationError, match="continuous"):
            group_measures(apply_filter(ds, []), ["v"])

    def test_every_row_in_exactly_one_subset(self, tmp_path):
        # randomized completeness check over a categorical grouping
        from irengine.rng import SplitMix64
        g = SplitMix64(11)
        rows = "\n".join(f"{'abc'[g.below(3)]},{g.below(5)}" for _ in range(200))
        ds = ingest_csv(make_csv(tmp_path, "tag,v\n" + rows + "\n"))
        view = apply_filter(ds, [])
        subsets = group_measures(view, ["tag", "v"])
        seen = sorted(rid for s in subsets for rid in s.member_row_ids)
        assert seen == view.row_ids

    def test_deterministic_serialization(self, tmp_path):
        text = "tag,v\nb,1\na,2\nb,3\n"
        def run():
            ds = ingest_csv(make_csv(tmp_path, text, name=f"d.csv"))
            subsets = group_measures(apply_filter(ds, []), ["tag"])
            return json.dumps([[s.group_key_dict(), s.member_row_ids] for s in subsets])
        assert run() == run()
