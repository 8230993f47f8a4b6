import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import privfog as pf
from privfog import CsvFormatError, ShardAssemblyError

from conftest import make_noisy, same_content


class TestSchema:
    def test_rejects_duplicate_names(self):
        with pytest.raises(ValueError):
            pf.Schema(("x", "x"), ((0, 1), (0, 1)), ("a", "b"))

    def test_rejects_single_class(self):
        with pytest.raises(ValueError):
            pf.Schema(("x",), ((0, 1),), ("a",))

    def test_rejects_inverted_bounds(self):
        with pytest.raises(ValueError):
            pf.Schema(("x",), ((2.0, 1.0),), ("a", "b"))

    def test_labels_sorted_and_deduped(self):
        s = pf.Schema(("x",), ((0, 1),), ("b", "a", "b"))
        assert s.class_labels == ("a", "b")


class TestLoadCsv:
    def write(self, tmp_path, text):
        p = tmp_path / "data.csv"
        p.write_text(text, encoding="utf-8")
        return p

    def test_well_formed_file(self, tmp_path, two_class_schema):
        p = self.write(tmp_path, "x,y,label\n0.1,0.2,a\n0.3,0.4,b\n0.5,0.6,a\n")
        ds = pf.load_csv(p, two_class_schema)
        assert ds.n_rows == 3
        assert ds.labels == ("a", "b", "a")
        assert np.array_equal(ds.features[1], np.array([0.3, 0.4]))

    def test_missing_file(self, two_class_schema, tmp_path):
        with pytest.raises(FileNotFoundError):
            pf.load_csv(tmp_path / "nope.csv", two_class_schema)

    def test_unknown_label_names_row_and_value(self, tmp_path, two_class_schema):
        p = self.write(tmp_path, "x,y,label\n0.1,0.2,a\n0.3,0.4,versicolour\n")
        with pytest.raises(CsvFormatError, match=r"row 2.*'versicolour'"):
            pf.load_csv(p, two_class_schema)

    def test_non_numeric_cell_names_row_and_column(self, tmp_path, two_class_schema):
        p = self.write(tmp_path, "x,y,label\n0.1,oops,a\n")
        with pytest.raises(CsvFormatError, match=r"row 1, column 'y'"):
            pf.load_csv(p, two_class_schema)

    def test_header_mismatch(self, tmp_path, two_class_schema):
        p = self.write(tmp_path, "x,z,label\n0.1,0.2,a\n")
        with pytest.raises(CsvFormatError, match="header"):
            pf.load_csv(p, two_class_schema)

    def test_iris_dimensions(self, iris_full):
        assert iris_full.n_rows == 150
        assert iris_full.features.shape == (150, 4)
        assert set(iris_full.labels) == {"setosa", "versicolor", "virginica"}


class TestVerticalPartition:
    def test_one_column_per_fog_when_m_equals_s(self):
        d = make_noisy(np.arange(12.0).reshape(4, 3))
        shards = pf.vertical_partition(d, 3)
        assert [s.column_indices for s in shards] == [(1,), (2,), (3,)]
        assert np.array_equal(shards[1].values[:, 0], d.features[:, 1])

    def test_round_robin_wraps(self):
        d = make_noisy(np.zeros((2, 5)))
        shards = pf.vertical_partition(d, 2)
        assert shards[0].column_indices == (1, 3, 5)
        assert shards[1].column_indices == (2, 4)

    def test_more_fogs_than_columns_gives_empty_shard(self):
        d = make_noisy(np.zeros((2, 2)))
        shards = pf.vertical_partition(d, 3)
        assert shards[2].column_indices == ()
        assert shards[2].values.shape == (2, 0)

    def test_zero_fog_count_rejected(self):
        with pytest.raises(ValueError):
            pf.vertical_partition(make_noisy(np.zeros((1, 1))), 0)

    def test_columns_cover_exactly_once(self):
        d = make_noisy(np.zeros((3, 7)))
        shards = pf.vertical_partition(d, 3)
        cols = [c for s in shards for c in s.column_indices]
        assert sorted(cols) == list(range(1, 8))

    def test_shards_carry_no_labels(self):
        shards = pf.vertical_partition(make_noisy(np.zeros((2, 2))), 2)
        for s in shards:
            assert not hasattr(s, "labels")


class TestReassemble:
    def roundtrip(self, d, s):
        shards = pf.vertical_partition(d, s)
        return pf.reassemble(shards, d.schema, dict(zip(d.row_keys, d.labels)))

    @pytest.mark.parametrize("s", [1, 2, 3, 4])
    def test_round_trip_identity(self, s):
        d = make_noisy(np.random.default_rng(s).normal(size=(4, 3)))
        back = self.roundtrip(d, s)
        assert same_content(d, back)

    def test_single_shard_is_identity(self):
        d = make_noisy(np.random.default_rng(0).normal(size=(5, 2)))
        assert same_content(d, self.roundtrip(d, 1))

    def test_missing_column_named(self):
        d = make_noisy(np.zeros((2, 3)))
        shards = pf.vertical_partition(d, 3)
        with pytest.raises(ShardAssemblyError, match=r"missing columns: \[2\]"):
            pf.reassemble(
                [shards[0], shards[2]], d.schema, dict(zip(d.row_keys, d.labels))
            )

    def test_duplicate_column_named(self):
        d = make_noisy(np.zeros((2, 2)))
        shards = pf.vertical_partition(d, 2)
        with pytest.raises(ShardAssemblyError, match="column 1"):
            pf.reassemble(
                [shards[0], shards[0], shards[1]],
                d.schema,
                dict(zip(d.row_keys, d.labels)),
            )

    def test_inconsistent_row_keys_named(self):
        d = make_noisy(np.zeros((2, 2)))
        shards = pf.vertical_partition(d, 2)
        bad = pf.Shard(
            fog_id=2,
            column_indices=(2,),
            row_keys=((9, 0), (9, 1)),
            values=np.zeros((2, 1)),
        )
        with pytest.raises(ShardAssemblyError, match="row keys"):
            pf.reassemble([shards[0], bad], d.schema, dict(zip(d.row_keys, d.labels)))

    def test_missing_label_named(self):
        d = make_noisy(np.zeros((2, 2)))
        shards = pf.vertical_partition(d, 2)
        with pytest.raises(ShardAssemblyError, match=r"label.*\(1, 1\)"):
            pf.reassemble(shards, d.schema, {(1, 0): "a"})

    @given(
        r=st.integers(1, 20),
        m=st.integers(1, 8),
        s=st.integers(1, 10),
        seed=st.integers(0, 2**31 - 1),
    )
    @settings(max_examples=60, deadline=None)
    def test_round_trip_property(self, r, m, s, seed):
        d = make_noisy(np.random.default_rng(seed).normal(size=(r, m)))
        assert same_content(d, self.roundtrip(d, s))


class TestUnionOwners:
    def two(self, two_class_schema):
        a = pf.NoisyDataset(
            features=np.array([[0.1, 0.2], [0.3, 0.4]]),
            labels=("a", "b"),
            row_keys=((1, 0), (1, 1)),
            schema=two_class_schema,
        )
        b = pf.NoisyDataset(
            features=np.array([[0.5, 0.6], [0.7, 0.8], [0.9, 1.0]]),
            labels=("b", "a", "b"),
            row_keys=((2, 0), (2, 1), (2, 2)),
            schema=two_class_schema,
        )
        return a, b

    def test_single_dataset_is_identity(self, two_class_schema):
        a, _ = self.two(two_class_schema)
        assert same_content(a, pf.union_owners([a]))

    def test_concatenates_and_preserves_owner_tags(self, two_class_schema):
        a, b = self.two(two_class_schema)
        u = pf.union_owners([a, b])
        assert u.n_rows == 5
        assert u.owner_ids == (1, 2)
        assert u.row_keys[:2] == ((1, 0), (1, 1))

    def test_canonical_order_regardless_of_input_order(self, two_class_schema):
        a, b = self.two(two_class_schema)
        assert same_content(pf.union_owners([a, b]), pf.union_owners([b, a]))

    def test_associative_up_to_ordering(self, two_class_schema):
        a, b = self.two(two_class_schema)
        c = pf.NoisyDataset(
            features=np.array([[0.0, 0.0]]),
            labels=("a",),
            row_keys=((3, 0),),
            schema=two_class_schema,
        )
        left = pf.union_owners([pf.union_owners([a, b]), c])
        right = pf.union_owners([a, pf.union_owners([b, c])])
        assert same_content(left, right)

    def test_schema_mismatch_rejected(self, two_class_schema):
        a, _ = self.two(two_class_schema)
        other = pf.Schema(("q", "r"), ((0, 1), (0, 1)), ("a", "b"))
        b = pf.NoisyDataset(
            features=np.array([[0.1, 0.2]]),
            labels=("a",),
            row_keys=((2, 0),),
            schema=other,
        )
        with pytest.raises(ValueError, match="schema"):
            pf.union_owners([a, b])

    def test_colliding_row_keys_rejected(self, two_class_schema):
        a, _ = self.two(two_class_schema)
        with pytest.raises(ValueError, match="collide"):
            pf.union_owners([a, a])
