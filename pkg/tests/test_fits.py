import numpy as np
import pytest
from numpy.testing import assert_array_equal

from skypix import fits
from skypix.errors import BoundsError, DomainError, FormatError, SchemaError


@pytest.fixture
def small_map(tmp_path):
    """12-row nside=1 map whose I column equals the row index."""
    path = tmp_path / "small.fits"
    table = {"I": np.arange(1, 13, dtype=np.float32),
             "TMASK": np.zeros(12, dtype=np.int32)}
    fits.write_map(path, table, nside=1, ordering="nested")
    return path


def test_header_cards(small_map):
    src = fits.open_map(small_map)
    assert src.nside == 1
    assert src.ordering == "nested"
    assert src.row_count == 12
    assert src.row_bytes == 8
    assert src.header.column_names == ["I", "TMASK"]


def test_open_reads_no_payload(small_map):
    src = fits.open_map(small_map)
    assert src.payload_reads == []
    assert src.payload_bytes_read == 0


def test_nside_card_values(tmp_path):
    path = tmp_path / "n64.fits"
    fits.write_map(path, {"I": np.zeros(12 * 64 * 64, dtype=np.float32)},
                   nside=64, ordering="ring")
    src = fits.open_map(path)
    assert src.nside == 64 and src.ordering == "ring"


def test_nside_inferred_when_card_missing(tmp_path):
    path = tmp_path / "bare.fits"
    fits.write_map(path, {"I": np.zeros(48, dtype=np.float32)})
    assert fits.open_map(path).nside == 2


def test_open_fails_on_non_4k_rowcount_without_card(tmp_path):
    path = tmp_path / "odd.fits"
    fits.write_map(path, {"I": np.zeros(10, dtype=np.float32)})
    with pytest.raises(FormatError):
        fits.open_map(path)


def test_read_all_round_trip(small_map):
    src = fits.open_map(small_map)
    out = src.read_all()
    assert_array_equal(out["I"], np.arange(1, 13, dtype=np.float32))
    assert_array_equal(out["TMASK"], np.zeros(12, dtype=np.int32))


def test_selective_read_equals_full_read(small_map):
    src = fits.open_map(small_map)
    rows = np.array([1, 2, 4, 7, 11])
    partial = src.read_rows(rows, ["I"])
    full = src.read_all(["I"])
    assert_array_equal(partial["I"], full["I"][rows - 1])


def test_read_single_row(small_map):
    src = fits.open_map(small_map)
    out = src.read_rows([5])
    assert out["I"][0] == 5.0


def test_bytes_touched_stay_within_requested_rows(small_map):
    src = fits.open_map(small_map)
    src.read_rows([1, 2, 4, 7, 11], ["I"])
    extents = [(1, 2), (4, 4), (7, 7), (11, 11)]  # coalesced runs
    assert len(src.payload_reads) == len(extents)
    for (off, length), (a, b) in zip(src.payload_reads, extents):
        assert off == src.data_start + (a - 1) * src.row_bytes
        assert length == (b - a + 1) * src.row_bytes
    assert src.payload_bytes_read == 5 * src.row_bytes


def test_big_endian_float_pattern(tmp_path):
    # hand-build a row so decoding is pinned to the byte level
    path = tmp_path / "pattern.fits"
    fits.write_map(path, {"I": np.array([1.0], dtype=np.float32)}, nside=1)
    blob = path.read_bytes()
    payload = blob[2 * fits.BLOCK:2 * fits.BLOCK + 4]
    assert payload == bytes.fromhex("3F800000")
    assert fits.open_map(path).read_rows([1])["I"][0] == 1.0


def test_row_and_column_errors(small_map):
    src = fits.open_map(small_map)
    with pytest.raises(BoundsError):
        src.read_rows([0])
    with pytest.raises(BoundsError):
        src.read_rows([13])
    with pytest.raises(SchemaError):
        src.read_rows([1], ["Q"])
    with pytest.raises(DomainError):
        src.read_rows([3, 2])


def test_empty_column_selection(small_map):
    src = fits.open_map(small_map)
    out = src.read_rows([1, 2], columns=[])
    assert out == {}


def test_sample_rows_deterministic(small_map):
    src = fits.open_map(small_map)
    t1, rows1 = src.sample_rows(4, seed=123)
    t2, rows2 = src.sample_rows(4, seed=123)
    assert_array_equal(rows1, rows2)
    assert_array_equal(t1["I"], t2["I"])
    assert len(np.unique(rows1)) == 4
    assert np.all(np.diff(rows1) > 0)


def test_sample_all_rows_is_full_set(small_map):
    src = fits.open_map(small_map)
    _, rows = src.sample_rows(12, seed=9)
    assert_array_equal(rows, np.arange(1, 13))


def test_sample_oversize_rejected(small_map):
    src = fits.open_map(small_map)
    with pytest.raises(DomainError):
        src.sample_rows(13, seed=0)


def test_sample_touches_few_bytes(tmp_path):
    path = tmp_path / "mid.fits"
    n = 64
    fits.write_map(path, {"I": np.random.default_rng(0).normal(
        size=12 * n * n).astype(np.float32)}, nside=n, ordering="ring")
    src = fits.open_map(path)
    _, rows = src.sample_rows(100, seed=5)
    # coalescing merges adjacent rows but never widens the extent
    assert src.payload_bytes_read == 100 * src.row_bytes
    assert src.payload_bytes_read < 0.05 * (12 * n * n * src.row_bytes)


def test_file_size_block_arithmetic(tmp_path):
    path = tmp_path / "size.fits"
    rows = 1000
    written = fits.write_map(path, {"I": np.zeros(rows, dtype=np.float32),
                                    "M": np.zeros(rows, dtype=np.int16)})
    row_bytes = 6
    expect = fits.BLOCK + fits.BLOCK + ((rows * row_bytes + fits.BLOCK - 1)
                                        // fits.BLOCK) * fits.BLOCK
    assert written == expect == path.stat().st_size
    assert path.stat().st_size % fits.BLOCK == 0


def test_write_rejects_unsupported_dtype(tmp_path):
    with pytest.raises(FormatError):
        fits.write_map(tmp_path / "bad.fits",
                       {"I": np.zeros(4, dtype=np.uint8)})


def test_all_supported_dtypes_round_trip(tmp_path):
    path = tmp_path / "mixed.fits"
    table = {
        "A": np.array([1.5, -2.25, 3.0], dtype=np.float32),
        "B": np.array([7, -9, 2 ** 30], dtype=np.int32),
        "C": np.array([1e-300, 2.0, -4.5], dtype=np.float64),
        "D": np.array([-3, 0, 255], dtype=np.int16),
    }
    fits.write_map(path, table, nside=1)
    out = fits.open_map(path).read_all()
    for name, arr in table.items():
        assert_array_equal(out[name], arr)


def test_open_rejects_missing_bintable(tmp_path):
    path = tmp_path / "primary_only.fits"
    header = (fits._format_card("SIMPLE", True)
              + fits._format_card("BITPIX", 8)
              + fits._format_card("NAXIS", 0)
              + "END".ljust(fits.CARD))
    path.write_bytes(fits._pad_block(header.encode("ascii")))
    with pytest.raises(FormatError):
        fits.open_map(path)


def test_open_rejects_truncated_header(tmp_path):
    path = tmp_path / "trunc.fits"
    path.write_bytes(b"SIMPLE  =                    T")
    with pytest.raises(FormatError):
        fits.open_map(path)


def test_open_rejects_unsupported_tform(tmp_path, small_map):
    blob = bytearray(small_map.read_bytes())
    pos = blob.find(b"1J")
    blob[pos:pos + 2] = b"3A"
    bad = tmp_path / "badform.fits"
    bad.write_bytes(bytes(blob))
    with pytest.raises(FormatError):
        fits.open_map(bad)


def test_missing_file(tmp_path):
    with pytest.raises(FormatError):
        fits.open_map(tmp_path / "nope.fits")
