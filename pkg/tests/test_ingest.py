"""CSV loading: header detection, 1-based error positions, fingerprints."""

import hashlib

import numpy as np
import pytest

from l1line.core import ContractError
from l1line.ingest import CsvParseError, load_csv_bytes, load_csv_file


def test_plain_numeric_csv():
    got = load_csv_bytes(b"1,2\n3,4\n")
    assert got.header is None
    assert np.array_equal(got.data.x, [[1.0, 2.0], [3.0, 4.0]])
    assert got.fingerprint == hashlib.sha256(b"1,2\n3,4\n").hexdigest()


def test_header_row_is_detected_and_kept():
    got = load_csv_bytes(b"alpha,beta\n1,2\n3,4\n")
    assert got.header == ["alpha", "beta"]
    assert got.data.n == 2


def test_scientific_notation_and_whitespace():
    got = load_csv_bytes(b" 1e3 , -2.5E-1\n+4,.5\n")
    assert np.array_equal(got.data.x, [[1000.0, -0.25], [4.0, 0.5]])


def test_utf8_bom_is_stripped():
    got = load_csv_bytes(b"\xef\xbb\xbf1,2\n3,4\n")
    assert got.data.n == 2


def test_trailing_blank_lines_tolerated_interior_rejected():
    assert load_csv_bytes(b"1,2\n3,4\n\n\n").data.n == 2
    with pytest.raises(CsvParseError) as err:
        load_csv_bytes(b"1,2\n\n3,4\n")
    assert err.value.row == 2


def test_bad_cell_reported_one_based():
    with pytest.raises(CsvParseError) as err:
        load_csv_bytes(b"h1,h2\n1,2\n3,oops\n")
    assert (err.value.row, err.value.column) == (3, 2)
    assert "not a number" in str(err.value)


def test_ragged_row_rejected():
    with pytest.raises(CsvParseError) as err:
        load_csv_bytes(b"1,2\n3\n")
    assert err.value.row == 2


def test_empty_inputs_rejected():
    with pytest.raises(CsvParseError):
        load_csv_bytes(b"")
    with pytest.raises(CsvParseError):
        load_csv_bytes(b"only,a,header\n")


def test_single_column_fails_matrix_validation():
    with pytest.raises(ContractError):
        load_csv_bytes(b"1\n2\n")


def test_load_csv_file_round_trip(tmp_path):
    p = tmp_path / "pts.csv"
    p.write_bytes(b"c1,c2\n5,6\n7,8\n")
    got = load_csv_file(str(p))
    assert got.header == ["c1", "c2"]
    assert np.array_equal(got.data.x, [[5.0, 6.0], [7.0, 8.0]])
    with pytest.raises(OSError):
        load_csv_file(str(tmp_path / "absent.csv"))