"""Reading and writing sky maps stored as FITS binary tables.

Only the layout used by full-sky map products is supported: a header-only
primary HDU followed by one BINTABLE extension holding fixed-width
big-endian rows.  Files are addressed by byte offset so that selected rows
can be pulled out of a multi-hundred-megabyte map without reading the
payload; opening a file touches the header blocks only, and every payload
access is recorded on the source for inspection.

Structure recap: 2880-byte logical blocks; headers are 80-character ASCII
cards ``KEYWORD = value / comment`` ended by ``END``; the table payload
follows the extension header, zero-padded to a block boundary.
"""

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import BoundsError, DomainError, FormatError, SchemaError
from .rng import sample_without_replacement

BLOCK = 2880
CARD = 80

# TFORM repeat-1 codes accepted for map columns -> numpy big-endian dtypes
_TFORM_DTYPES = {"E": ">f4", "J": ">i4", "D": ">f8", "I": ">i2"}
_DTYPE_TFORMS = {np.dtype("float32"): "E", np.dtype("int32"): "J",
                 np.dtype("float64"): "D", np.dtype("int16"): "I"}


@dataclass
class Column:
    name: str
    tform: str

    @property
    def dtype(self):
        return np.dtype(_TFORM_DTYPES[self.tform])

    @property
    def nbytes(self):
        return self.dtype.itemsize


@dataclass
class FitsHeader:
    """Parsed header cards plus the table quantities derived from them."""

    cards: list
    nside: int | None = None
    ordering: str | None = None
    row_bytes: int = 0
    row_count: int = 0
    columns: list = field(default_factory=list)

    def value(self, keyword, default=None):
        for key, val, _ in self.cards:
            if key == keyword:
                return val
        return default

    @property
    def column_names(self):
        return [c.name for c in self.columns]


def _parse_card(raw):
    key = raw[:8].strip()
    if key in ("", "COMMENT", "HISTORY") or raw[8:10] != "= ":
        return key, None, raw[8:].strip()
    body = raw[10:]
    comment = ""
    if body.lstrip().startswith("'"):
        start = body.index("'")
        end = start + 1
        while True:
            end = body.index("'", end)
            if body[end + 1:end + 2] == "'":   # escaped quote
                end += 2
                continue
            break
        value = body[start + 1:end].replace("''", "'").rstrip()
        rest = body[end + 1:]
    else:
        slash = body.find("/")
        token = (body if slash < 0 else body[:slash]).strip()
        rest = "" if slash < 0 else body[slash:]
        if token == "T":
            value = True
        elif token == "F":
            value = False
        elif token == "":
            value = None
        else:
            try:
                value = int(token)
            except ValueError:
                try:
                    value = float(token.replace("D", "E"))
                except ValueError:
                    raise FormatError("unparseable card value %r" % token)
    slash = rest.find("/")
    if slash >= 0:
        comment = rest[slash + 1:].strip()
    return key, value, comment


def _read_header_blocks(fh):
    """Consume whole blocks until the END card; returns cards and bytes read."""
    cards = []
    consumed = 0
    while True:
        block = fh.read(BLOCK)
        consumed += len(block)
        if len(block) < BLOCK:
            raise FormatError("truncated header block")
        text = block.decode("ascii", errors="replace")
        done = False
        for i in range(0, BLOCK, CARD):
            raw = text[i:i + CARD]
            if raw[:8].strip() == "END":
                done = True
                break
            cards.append(_parse_card(raw))
        if done:
            return cards, consumed


def _infer_nside(row_count):
    nside2, rem = divmod(row_count, 12)
    if rem == 0 and nside2 > 0:
        nside = math.isqrt(nside2)
        if nside * nside == nside2 and nside & (nside - 1) == 0:
            return nside
    raise FormatError(
        "cannot infer nside: row count %d is not 12*4^k and no NSIDE card"
        % row_count)


class MapSource:
    """Lazily readable handle to the binary table of an opened map file.

    Immutable after open; row ``k`` (1-based) lives at byte offset
    ``data_start + (k-1)*row_bytes``.  ``payload_reads`` collects the
    ``(offset, length)`` extents of every payload access so tests (and
    curious users) can audit how much of the file was touched.
    """

    def __init__(self, path, header, data_start):
        self.path = path
        self.header = header
        self.data_start = data_start
        self.row_bytes = header.row_bytes
        self.row_count = header.row_count
        self.columns = list(header.columns)
        self.payload_reads = []
        self._offsets = np.cumsum([0] + [c.nbytes for c in self.columns])

    @property
    def nside(self):
        return self.header.nside

    @property
    def ordering(self):
        return self.header.ordering

    @property
    def payload_bytes_read(self):
        return sum(length for _, length in self.payload_reads)

    def _row_dtype(self):
        return np.dtype({"names": [c.name for c in self.columns],
                         "formats": [c.dtype for c in self.columns],
                         "offsets": [int(o) for o in self._offsets[:-1]],
                         "itemsize": self.row_bytes})

    def _check_columns(self, names):
        if names is None:
            return [c.name for c in self.columns]
        known = set(self.header.column_names)
        for name in names:
            if name not in known:
                raise SchemaError("unknown column %r; file has %s"
                                  % (name, sorted(known)))
        return list(names)

    def read_rows(self, rows, columns=None):
        """Decode the given 1-based rows (sorted, unique) into named arrays.

        Consecutive runs of requested rows coalesce into single reads, so
        the bytes touched stay within the requested rows' extents.
        """
        names = self._check_columns(columns)
        rows = np.asarray(rows, dtype=np.int64)
        if rows.size == 0:
            return {name: np.empty(0) for name in names}
        if np.any(rows < 1) or np.any(rows > self.row_count):
            raise BoundsError("row index out of range 1..%d" % self.row_count)
        if np.any(np.diff(rows) <= 0):
            raise DomainError("rows must be sorted and unique")
        dtype = self._row_dtype()
        raw = np.empty(rows.size, dtype=dtype)
        breaks = np.nonzero(np.diff(rows) > 1)[0] + 1
        run_starts = np.concatenate([[0], breaks, [rows.size]])
        with open(self.path, "rb") as fh:
            for a, b in zip(run_starts[:-1], run_starts[1:]):
                offset = self.data_start + (int(rows[a]) - 1) * self.row_bytes
                length = int(b - a) * self.row_bytes
                fh.seek(offset)
                chunk = fh.read(length)
                if len(chunk) < length:
                    raise FormatError("truncated payload")
                self.payload_reads.append((offset, length))
                raw[a:b] = np.frombuffer(chunk, dtype=dtype)
        return {name: raw[name].astype(raw[name].dtype.newbyteorder("="))
                for name in names}

    def read_all(self, columns=None):
        """Decode the whole table (still honouring column selection)."""
        return self.read_rows(np.arange(1, self.row_count + 1), columns)

    def sample_rows(self, sample_size, seed, columns=None):
        """Seeded simple random sample of rows, without replacement.

        Returns ``(table, row_indices)``; indices ascend and the bytes
        touched scale with the sample, not the table.
        """
        if not 0 < sample_size <= self.row_count:
            raise DomainError("sample size must be in 1..%d" % self.row_count)
        rows = sample_without_replacement(self.row_count, sample_size, seed)
        return self.read_rows(rows, columns), rows


def open_map(path):
    """Parse the headers of a map file; the payload is never touched."""
    if not os.path.exists(path):
        raise FormatError("no such file: %s" % path)
    with open(path, "rb") as fh:
        primary, consumed = _read_header_blocks(fh)
        pdict = dict((k, v) for k, v, _ in primary)
        if pdict.get("SIMPLE") is not True:
            raise FormatError("not a FITS file (missing SIMPLE = T)")
        # skip any primary data (BITPIX/NAXIS driven); map files carry none
        naxis = int(pdict.get("NAXIS", 0) or 0)
        if naxis:
            size = abs(int(pdict.get("BITPIX", 8))) // 8
            for i in range(1, naxis + 1):
                size *= int(pdict.get("NAXIS%d" % i, 0) or 0)
            consumed += ((size + BLOCK - 1) // BLOCK) * BLOCK
            fh.seek(consumed)
        ext, ext_bytes = _read_header_blocks(fh)
    edict = dict((k, v) for k, v, _ in ext)
    if str(edict.get("XTENSION", "")).strip() != "BINTABLE":
        raise FormatError("first extension is not a BINTABLE")
    try:
        row_bytes = int(edict["NAXIS1"])
        row_count = int(edict["NAXIS2"])
        tfields = int(edict["TFIELDS"])
    except KeyError as missing:
        raise FormatError("missing required card %s" % missing)
    columns = []
    for i in range(1, tfields + 1):
        tform = str(edict.get("TFORM%d" % i, "")).strip()
        name = str(edict.get("TTYPE%d" % i, "COL%d" % i)).strip()
        code = tform.lstrip("1")
        if tform not in _TFORM_DTYPES and (tform[:1] != "1" or
                                           code not in _TFORM_DTYPES):
            raise FormatError("unsupported TFORM %r (supported: 1E 1J 1D 1I)"
                              % tform)
        columns.append(Column(name, code))
    if sum(c.nbytes for c in columns) != row_bytes:
        raise FormatError("NAXIS1 does not match the declared column widths")

    ordering = edict.get("ORDERING")
    if ordering is not None:
        ordering = str(ordering).strip().lower()
        if ordering not in ("ring", "nested"):
            raise FormatError("unrecognised ORDERING %r" % ordering)
    nside = edict.get("NSIDE")
    nside = int(nside) if nside is not None else _infer_nside(row_count)

    header = FitsHeader(cards=primary + ext, nside=nside, ordering=ordering,
                        row_bytes=row_bytes, row_count=row_count,
                        columns=columns)
    return MapSource(path, header, consumed + ext_bytes)


# ---------------------------------------------------------------------------
# writing (fixture generation and export)

def _format_card(key, value, comment=""):
    if isinstance(value, bool):
        body = "%20s" % ("T" if value else "F")
    elif isinstance(value, (int, np.integer)):
        body = "%20d" % value
    elif isinstance(value, float):
        body = "%20s" % repr(value)
    elif isinstance(value, str):
        body = "'%-8s'" % value.replace("'", "''")
    else:
        raise FormatError("unsupported card value %r" % (value,))
    card = "%-8s= %s" % (key[:8], body)
    if comment:
        card += " / " + comment
    return card[:CARD].ljust(CARD)


def _pad_block(data):
    pad = (-len(data)) % BLOCK
    return data + b"\x00" * pad


def write_map(path, table, nside=None, ordering=None, extra_cards=()):
    """Write named columns as a primary HDU plus one BINTABLE extension.

    Column dtypes must be float32/int32/float64/int16; values are stored
    big-endian.  ``nside``/``ordering`` become NSIDE/ORDERING cards when
    given.  Returns the number of bytes written.
    """
    names = list(table)
    if not names:
        raise FormatError("cannot write a table with no columns")
    arrays = []
    length = None
    for name in names:
        arr = np.asarray(table[name])
        if arr.dtype not in _DTYPE_TFORMS:
            raise FormatError("unsupported column dtype %s (use f4/i4/f8/i2)"
                              % arr.dtype)
        if length is None:
            length = arr.size
        elif arr.size != length:
            raise FormatError("columns must have equal length")
        arrays.append(arr)

    header = "".join([
        _format_card("SIMPLE", True, "conforms to the FITS standard"),
        _format_card("BITPIX", 8),
        _format_card("NAXIS", 0),
        _format_card("EXTEND", True),
        "END".ljust(CARD),
    ])
    cards = [
        _format_card("XTENSION", "BINTABLE", "binary table extension"),
        _format_card("BITPIX", 8),
        _format_card("NAXIS", 2),
        _format_card("NAXIS1", int(sum(a.dtype.itemsize for a in arrays))),
        _format_card("NAXIS2", int(length)),
        _format_card("PCOUNT", 0),
        _format_card("GCOUNT", 1),
        _format_card("TFIELDS", len(names)),
    ]
    for i, (name, arr) in enumerate(zip(names, arrays), start=1):
        cards.append(_format_card("TTYPE%d" % i, name))
        cards.append(_format_card("TFORM%d" % i, "1" + _DTYPE_TFORMS[arr.dtype]))
    if nside is not None:
        cards.append(_format_card("NSIDE", int(nside), "grid resolution"))
    if ordering is not None:
        cards.append(_format_card("ORDERING", ordering.upper(),
                                  "pixel ordering scheme"))
    for key, value, comment in extra_cards:
        cards.append(_format_card(key, value, comment))
    cards.append("END".ljust(CARD))

    dtype = np.dtype([(name, ">" + np.dtype(arr.dtype).str[1:])
                      for name, arr in zip(names, arrays)])
    rows = np.empty(length, dtype=dtype)
    for name, arr in zip(names, arrays):
        rows[name] = arr

    blob = _pad_block(header.encode("ascii"))
    blob += _pad_block("".join(cards).encode("ascii"))
    blob += _pad_block(rows.tobytes())
    with open(path, "wb") as fh:
        fh.write(blob)
    return len(blob)
