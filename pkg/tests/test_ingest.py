"""CSV ingestion: validation errors, normalization, round-trips."""

import numpy as np
import pytest

from varsel import ConfigError, IngestError, ingest_csv, write_dataset_csv


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestIngest:
    def test_three_column_file(self, tmp_path):
        path = write(tmp_path, "a,b,y\n1,2,3\n4,5,6\n7,8,10\n")
        ds = ingest_csv(path, "y")
        assert ds.n_features == 2
        assert ds.labels == ("a", "b")
        assert ds.n_rows == 3
        np.testing.assert_array_equal(ds.target, [3.0, 6.0, 10.0])
        assert ds.target_label == "y"

    def test_target_position_does_not_matter(self, tmp_path):
        path = write(tmp_path, "y,a,b\n3,1,2\n6,4,5\n10,7,8\n")
        ds = ingest_csv(path, "y")
        assert ds.labels == ("a", "b")
        np.testing.assert_array_equal(ds.features[:, 0], [1.0, 4.0, 7.0])

    def test_blank_cell_names_row_and_column(self, tmp_path):
        path = write(tmp_path, "a,b,y\n1,2,3\n4,,6\n7,8,9\n")
        with pytest.raises(IngestError, match=r"line 3.*'b'.*missing"):
            ingest_csv(path, "y")

    def test_non_numeric_cell_names_column(self, tmp_path):
        path = write(tmp_path, "a,b,y\n1,2,3\n4,oops,6\n7,8,9\n")
        with pytest.raises(IngestError, match=r"'b'.*non-numeric|non-numeric.*'b'"):
            ingest_csv(path, "y")

    def test_non_finite_rejected(self, tmp_path):
        path = write(tmp_path, "a,y\n1,2\nnan,4\n5,6\n")
        with pytest.raises(IngestError, match="non-finite"):
            ingest_csv(path, "y")

    def test_duplicate_header_rejected(self, tmp_path):
        path = write(tmp_path, "a,a,y\n1,2,3\n4,5,6\n7,8,9\n")
        with pytest.raises(IngestError, match="duplicate"):
            ingest_csv(path, "y")

    def test_ragged_row_names_line(self, tmp_path):
        path = write(tmp_path, "a,b,y\n1,2,3\n4,5\n")
        with pytest.raises(IngestError, match="line 3"):
            ingest_csv(path, "y")

    def test_missing_target_is_config_error(self, tmp_path):
        path = write(tmp_path, "a,b,y\n1,2,3\n")
        with pytest.raises(ConfigError, match="target"):
            ingest_csv(path, "z")

    def test_missing_file(self, tmp_path):
        with pytest.raises(IngestError, match="not found"):
            ingest_csv(tmp_path / "absent.csv", "y")

    def test_drop_columns_excluded_from_features(self, tmp_path):
        path = write(tmp_path, "a,b,extra,y\n1,2,9,3\n4,5,9,6\n7,8,9,10\n")
        ds = ingest_csv(path, "y", drop_columns=["extra"])
        assert ds.labels == ("a", "b")
        with pytest.raises(ConfigError, match="drop"):
            ingest_csv(path, "y", drop_columns=["nope"])

    def test_custom_delimiter(self, tmp_path):
        path = write(tmp_path, "a;b;y\n1;2;3\n4;5;6\n7;8;10\n")
        ds = ingest_csv(path, "y", delimiter=";")
        assert ds.labels == ("a", "b")

    def test_too_few_rows_rejected(self, tmp_path):
        path = write(tmp_path, "a,b,y\n1,2,3\n4,5,6\n")
        with pytest.raises(ConfigError, match="R\\+1"):
            ingest_csv(path, "y")

    def test_zscore_normalization(self, tmp_path):
        path = write(tmp_path, "a,y\n1,1\n2,2\n3,3\n4,4\n")
        ds = ingest_csv(path, "y", normalize="zscore")
        assert ds.features[:, 0].mean() == pytest.approx(0.0, abs=1e-12)
        assert ds.features[:, 0].std() == pytest.approx(1.0, rel=1e-12)
        np.testing.assert_array_equal(ds.target, [1, 2, 3, 4])  # target untouched

    def test_minmax_normalization(self, tmp_path):
        path = write(tmp_path, "a,y\n2,1\n4,2\n10,3\n")
        ds = ingest_csv(path, "y", normalize="minmax")
        assert ds.features[:, 0].min() == 0.0
        assert ds.features[:, 0].max() == 1.0


class TestRoundTrip:
    def test_ingest_write_reingest_is_bit_identical(self, tmp_path):
        rng = np.random.default_rng(5)
        lines = ["f1,f2,f3,target"]
        for _ in range(10):
            lines.append(",".join(repr(float(v)) for v in rng.normal(size=4)))
        path = write(tmp_path, "\n".join(lines) + "\n")
        ds = ingest_csv(path, "target")
        out = tmp_path / "copy.csv"
        write_dataset_csv(ds, out)
        again = ingest_csv(out, "target")
        assert again.labels == ds.labels
        np.testing.assert_array_equal(again.features, ds.features)
        np.testing.assert_array_equal(again.target, ds.target)
        assert (again.features == ds.features).all()

    def test_round_trip_after_normalization(self, tmp_path):
        rng = np.random.default_rng(6)
        lines = ["f1,f2,y"]
        for _ in range(8):
            lines.append(",".join(repr(float(v)) for v in rng.normal(size=3)))
        path = write(tmp_path, "\n".join(lines) + "\n")
        ds = ingest_csv(path, "y", normalize="zscore")
        out = tmp_path / "norm.csv"
        write_dataset_csv(ds, out)
        again = ingest_csv(out, "y", normalize="none")
        np.testing.assert_array_equal(again.features, ds.features)
        np.testing.assert_array_equal(again.target, ds.target)
