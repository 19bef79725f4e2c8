"""Pixel-indexed columnar tables joining grid addressing with data columns.

A :class:`SkyFrame` keys every row by a pixel index under one scheme and
resolution.  Two modes exist: ``cmb`` frames have strictly unique pixel
keys and derive row coordinates from pixel centers on demand; ``hp``
frames allow repeated keys (several observations in one pixel) and may
carry explicit per-row coordinates.
"""

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from . import healpix
from .errors import (AddressingError, DomainError, SchemaError,
                     UniquenessError)
from .geom import WindowSet, sph2cart
from .rng import sample_without_replacement

_CHUNK = 1 << 20

CMB = "cmb"
HP = "hp"


@dataclass
class SkyFrame:
    pix: np.ndarray
    scheme: str
    nside: int
    columns: dict = field(default_factory=dict)
    mode: str = CMB
    windows: list = field(default_factory=list)
    coords: tuple | None = None   # explicit (theta, phi), hp mode only
    demoted: bool = False         # True when binding collided cmb keys

    def __post_init__(self):
        self.pix = np.asarray(self.pix, dtype=np.int64)
        healpix.Resolution(self.nside)
        if self.scheme not in healpix.SCHEMES:
            raise AddressingError("unknown scheme %r" % self.scheme)
        if self.pix.size and (self.pix.min() < 1
                              or self.pix.max() > healpix.npix(self.nside)):
            raise AddressingError("pixel index out of range")
        self.columns = {k: np.asarray(v) for k, v in self.columns.items()}
        for name, col in self.columns.items():
            if len(col) != len(self.pix):
                raise SchemaError("column %r length %d != %d rows"
                                  % (name, len(col), len(self.pix)))
        if self.mode == CMB:
            if len(np.unique(self.pix)) != len(self.pix):
                raise UniquenessError("cmb mode requires unique pixel keys")
            self.coords = None
        elif self.mode != HP:
            raise DomainError("mode must be 'cmb' or 'hp'")

    def __len__(self):
        return len(self.pix)

    @property
    def resolution(self):
        return healpix.Resolution(self.nside)

    @property
    def column_names(self):
        return list(self.columns)

    def angles(self):
        """Row coordinates ``(theta, phi)``; pixel centers unless explicit."""
        if self.coords is not None:
            return self.coords
        return healpix.pix2ang(self.nside, self.pix, self.scheme)

    def positions(self):
        """Row coordinates as unit vectors, shape (n, 3)."""
        if self.coords is not None:
            return sph2cart(*self.coords)
        return healpix.pix2vec(self.nside, self.pix, self.scheme)

    def with_scheme(self, scheme):
        """Same frame re-addressed under the other ordering scheme."""
        if scheme == self.scheme:
            return self
        if scheme == healpix.NESTED:
            pix = healpix.ring2nest(self.nside, self.pix)
        else:
            pix = healpix.nest2ring(self.nside, self.pix)
        return SkyFrame(pix, scheme, self.nside, dict(self.columns), self.mode,
                        list(self.windows), self.coords, self.demoted)

    def take(self, sel):
        cols = {k: v[sel] for k, v in self.columns.items()}
        coords = None
        if self.coords is not None:
            coords = (self.coords[0][sel], self.coords[1][sel])
        return SkyFrame(self.pix[sel], self.scheme, self.nside, cols,
                        self.mode, list(self.windows), coords, self.demoted)

    def column(self, name):
        if name not in self.columns:
            raise SchemaError("no column %r; frame has %s"
                              % (name, self.column_names))
        return self.columns[name]


def full_frame(nside, scheme=healpix.NESTED, columns=None):
    """cmb-mode frame covering every pixel at the given resolution."""
    pix = np.arange(1, healpix.npix(nside) + 1, dtype=np.int64)
    return SkyFrame(pix, scheme, nside, columns or {})


def frame_from_map(src, rows=None, sample_size=None, seed=0, columns=None):
    """Build a cmb frame from an opened map source.

    ``rows`` selects explicit 1-based row indices (sorted, unique);
    ``sample_size`` draws a seeded simple random sample instead.  Pixel
    indices equal the selected row indices under the header's ordering.
    """
    if rows is not None and sample_size is not None:
        raise DomainError("pass rows or sample_size, not both")
    scheme = src.ordering or healpix.RING
    if sample_size is not None:
        table, pix = src.sample_rows(sample_size, seed, columns)
    elif rows is not None:
        pix = np.asarray(rows, dtype=np.int64)
        table = src.read_rows(pix, columns)
    else:
        pix = np.arange(1, src.row_count + 1, dtype=np.int64)
        table = src.read_all(columns)
    return SkyFrame(pix, scheme, src.nside, table)


def assign_pixels(theta, phi, columns, nside, require_unique=False):
    """Key raw spherical points by the pixel holding each one.

    Rows whose points share a pixel make the result an hp frame with the
    original coordinates attached; fully unique keys yield a cmb frame.
    With ``require_unique`` a collision raises instead, listing the
    offending rows.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    phi = np.atleast_1d(np.asarray(phi, dtype=np.float64))
    xyz = sph2cart(theta, phi)
    pix = np.atleast_1d(healpix.nest_search(nside, xyz))
    unique, counts = np.unique(pix, return_counts=True)
    if len(unique) == len(pix):
        return SkyFrame(pix, healpix.NESTED, nside, columns, CMB)
    if require_unique:
        clashing = unique[counts > 1]
        rows = np.nonzero(np.isin(pix, clashing))[0]
        raise UniquenessError(
            "%d rows collide in %d pixels (rows %s...)"
            % (len(rows), len(clashing), list(rows[:10])))
    return SkyFrame(pix, healpix.NESTED, nside, columns, HP,
                    coords=(theta, phi))


def extract_window(frame, region):
    """Rows whose coordinates fall inside the region (pixel centers decide
    membership for cmb frames); the region is recorded as provenance."""
    if isinstance(region, (list, tuple)):
        region = WindowSet(tuple(region))
    if not isinstance(region, WindowSet):
        region = WindowSet((region,))
    keep = np.zeros(len(frame), dtype=bool)
    if frame.coords is not None:
        xyz_all = sph2cart(*frame.coords)
        for lo in range(0, len(frame), _CHUNK):
            hi = min(lo + _CHUNK, len(frame))
            keep[lo:hi] = region.contains(xyz_all[lo:hi])
    else:
        for lo in range(0, len(frame), _CHUNK):
            hi = min(lo + _CHUNK, len(frame))
            xyz = healpix.pix2vec(frame.nside, frame.pix[lo:hi], frame.scheme)
            keep[lo:hi] = region.contains(xyz)
    out = frame.take(keep)
    out.windows = list(frame.windows) + [region]
    return out


def sample_frame(frame, sample_size, seed):
    """Seeded without-replacement row sample; frames on the equal-area grid
    make this an approximately uniform spatial sample."""
    if not 0 < sample_size <= len(frame):
        raise DomainError("sample size must be in 1..%d" % len(frame))
    rows = sample_without_replacement(len(frame), sample_size, seed) - 1
    return frame.take(rows)


def geo_area(frame):
    """Area covered by the frame's pixels: distinct count times pixel area."""
    distinct = len(frame.pix) if frame.mode == CMB else len(np.unique(frame.pix))
    return distinct * healpix.pixel_area(frame.nside)


def bind_frames(frames, axis="rows"):
    """Concatenate frames by rows (same schema/addressing, keys may repeat,
    demoting to hp mode) or by columns (identical pixel key sequences)."""
    frames = list(frames)
    if not frames:
        raise DomainError("nothing to bind")
    first = frames[0]
    if axis == "rows":
        for f in frames[1:]:
            if f.column_names != first.column_names:
                raise SchemaError("row binding needs identical column schemas")
            if (f.nside, f.scheme) != (first.nside, first.scheme):
                raise AddressingError("row binding needs one scheme/resolution")
        pix = np.concatenate([f.pix for f in frames])
        cols = {name: np.concatenate([f.columns[name] for f in frames])
                for name in first.column_names}
        have_coords = any(f.coords is not None for f in frames)
        modes = {f.mode for f in frames}
        unique = len(np.unique(pix)) == len(pix)
        if unique and modes == {CMB}:
            return SkyFrame(pix, first.scheme, first.nside, cols, CMB)
        coords = None
        if have_coords or modes != {CMB}:
            thetas, phis = [], []
            for f in frames:
                t, p = f.angles()
                thetas.append(np.atleast_1d(t))
                phis.append(np.atleast_1d(p))
            coords = (np.concatenate(thetas), np.concatenate(phis))
        out = SkyFrame(pix, first.scheme, first.nside, cols, HP, coords=coords)
        out.demoted = not unique and modes == {CMB}
        return out
    if axis == "columns":
        for f in frames[1:]:
            if (f.nside, f.scheme) != (first.nside, first.scheme):
                raise AddressingError("column binding needs one scheme/resolution")
            if not np.array_equal(f.pix, first.pix):
                raise SchemaError("column binding needs identical pixel keys")
        cols = {}
        for f in frames:
            for name, arr in f.columns.items():
                if name in cols:
                    raise SchemaError("duplicate column %r" % name)
                cols[name] = arr
        return SkyFrame(first.pix.copy(), first.scheme, first.nside, cols,
                        first.mode, coords=first.coords)
    raise DomainError("axis must be 'rows' or 'columns'")


def _column_stats(values):
    values = np.asarray(values, dtype=np.float64)
    q1, med, q3 = np.quantile(values, [0.25, 0.5, 0.75])  # type-7 interpolation
    return {"min": float(values.min()), "q1": float(q1), "median": float(med),
            "mean": float(values.mean()), "q3": float(q3),
            "max": float(values.max())}


def summarize(frame):
    """Window provenance (kind + analytic area), covered area, and the
    six-number summary of every data column."""
    windows = []
    for region in frame.windows:
        windows.extend(region.describe())
    if len(frame) == 0:
        return {"rows": 0, "windows": windows, "covered_area": 0.0,
                "columns": {}}
    stats = {name: _column_stats(col) for name, col in frame.columns.items()
             if np.issubdtype(np.asarray(col).dtype, np.number)}
    return {"rows": len(frame), "windows": windows,
            "covered_area": geo_area(frame), "columns": stats,
            "nside": frame.nside, "ordering": frame.scheme, "mode": frame.mode}


# ---------------------------------------------------------------------------
# CSV + sidecar persistence

def _sidecar_path(path):
    return str(path) + ".meta.json"


def write_csv(frame, path):
    """Write ``pix,theta,phi`` plus data columns at full precision, with a
    JSON metadata sidecar next to the file."""
    theta, phi = frame.angles()
    theta = np.atleast_1d(theta)
    phi = np.atleast_1d(phi)
    names = frame.column_names
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pix", "theta", "phi"] + names)
        for i in range(len(frame)):
            row = [int(frame.pix[i]), repr(float(theta[i])), repr(float(phi[i]))]
            row += [repr(float(frame.columns[n][i])) for n in names]
            writer.writerow(row)
    meta = {"nside": frame.nside, "ordering": frame.scheme, "mode": frame.mode}
    with open(_sidecar_path(path), "w") as fh:
        json.dump(meta, fh, sort_keys=True)
        fh.write("\n")


def read_csv(path):
    """Load a frame written by :func:`write_csv` (sidecar required)."""
    try:
        with open(_sidecar_path(path)) as fh:
            meta = json.load(fh)
    except FileNotFoundError:
        raise SchemaError("missing metadata sidecar %s" % _sidecar_path(path))
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:3] != ["pix", "theta", "phi"]:
            raise SchemaError("frame CSV must start with pix,theta,phi")
        rows = list(reader)
    pix = np.array([int(r[0]) for r in rows], dtype=np.int64)
    theta = np.array([float(r[1]) for r in rows])
    phi = np.array([float(r[2]) for r in rows])
    cols = {name: np.array([float(r[3 + i]) for r in rows])
            for i, name in enumerate(header[3:])}
    mode = meta.get("mode", CMB)
    coords = (theta, phi) if mode == HP else None
    return SkyFrame(pix, meta["ordering"], int(meta["nside"]), cols, mode,
                    coords=coords)
