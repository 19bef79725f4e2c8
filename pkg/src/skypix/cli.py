"""Command line front end.

Exit codes: 0 success, 2 usage or input-parse failure, 3 network failure,
4 computation failure (the message names the failing stage).  Every
subcommand is deterministic given ``--seed``: identical invocations write
byte-identical CSV/JSON/SVG outputs.
"""

import json
import math
import sys

import click
import numpy as np

from . import download as dl
from . import fits as fitsio
from . import frame as skyframe
from . import geom, geostat, healpix, plotsvg
from .errors import (FormatError, NetworkError, SchemaError, SkypixError)

PARSE_ERRORS = (FormatError, SchemaError)


def _fail(stage, exc, code):
    click.echo("%s: %s" % (stage, exc), err=True)
    sys.exit(code)


def _guarded(stage, func):
    try:
        return func()
    except PARSE_ERRORS as exc:
        _fail(stage, exc, 2)
    except NetworkError as exc:
        _fail(stage, exc, 3)
    except (SkypixError, ValueError) as exc:
        _fail(stage, exc, 4)


def _json_out(payload, out):
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _load_frame(path, sample=None, seed=0, columns=None):
    """A frame from either a map file or a frame CSV, optionally sampled."""
    if str(path).endswith(".csv"):
        f = skyframe.read_csv(path)
        if columns:
            missing = [c for c in columns if c not in f.columns]
            if missing:
                raise SchemaError("missing columns %s" % missing)
    else:
        src = fitsio.open_map(path)
        if sample is not None:
            return skyframe.frame_from_map(src, sample_size=sample, seed=seed,
                                           columns=columns)
        f = skyframe.frame_from_map(src, columns=columns)
    if sample is not None:
        f = skyframe.sample_frame(f, sample, seed)
    return f


def _load_windows(paths):
    regions = []
    for p in paths:
        with open(p) as fh:
            spec = json.load(fh)
        regions.append(geom.WindowSet.from_spec(spec))
    return regions


@click.group()
def main():
    """Equal-area sky maps: inspection, windows, sampling and estimators."""


@main.command()
@click.argument("map_path", type=click.Path())
@click.option("-o", "--out", type=click.Path(), help="Write JSON here instead of stdout.")
def info(map_path, out):
    """Report header metadata of a map file."""
    def run():
        src = fitsio.open_map(map_path)
        area = healpix.pixel_area(src.nside)
        return {
            "nside": src.nside,
            "ordering": src.ordering,
            "rows": src.row_count,
            "row_bytes": src.row_bytes,
            "columns": [{"name": c.name, "tform": "1" + c.tform}
                        for c in src.columns],
            "resolution_arcmin": math.sqrt(area) * (180 / math.pi) * 60,
        }
    _json_out(_guarded("info", run), out)


@main.command()
@click.argument("out_path", type=click.Path())
@click.option("--nside", type=int, default=16, show_default=True)
@click.option("--scheme", type=click.Choice(["ring", "nested"]), default="nested",
              show_default=True)
@click.option("--columns", default="I", show_default=True,
              help="Comma-separated column names.")
@click.option("--pattern", type=click.Choice(["random", "index"]), default="random",
              show_default=True, help="random: seeded normals; index: row number.")
@click.option("--seed", type=int, default=0, show_default=True)
def mkfits(out_path, nside, scheme, columns, pattern, seed):
    """Generate a synthetic full-sky map file (test fixture)."""
    def run():
        n = healpix.npix(nside)
        rng = np.random.default_rng(seed)
        table = {}
        for name in columns.split(","):
            if pattern == "index":
                table[name] = np.arange(1, n + 1, dtype=np.float32)
            else:
                table[name] = rng.standard_normal(n).astype(np.float32)
        fitsio.write_map(out_path, table, nside=nside, ordering=scheme)
        fitsio.open_map(out_path)   # wrote-it-reads-back smoke check
        return {"path": out_path, "rows": n}
    _guarded("mkfits", run)


@main.command()
@click.argument("input_path", type=click.Path())
@click.option("--size", type=int, required=True, help="Sample size.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("-o", "--out", type=click.Path(), required=True,
              help="Output frame CSV.")
def sample(input_path, size, seed, out):
    """Draw a seeded random sample of rows into a frame CSV."""
    def run():
        f = _load_frame(input_path, sample=size, seed=seed)
        skyframe.write_csv(f, out)
        return {"rows": len(f)}
    _guarded("sample", run)


@main.command()
@click.argument("input_path", type=click.Path())
@click.option("--spec", "spec_path", type=click.Path(), required=True,
              help="Window JSON (object or list).")
@click.option("-o", "--out", type=click.Path(), help="Extracted frame CSV.")
@click.option("--report", type=click.Path(), help="Write the JSON report here.")
def window(input_path, spec_path, out, report):
    """Extract the rows inside a window region; print a summary report."""
    def run():
        region = _load_windows([spec_path])[0]
        f = _load_frame(input_path)
        sub = skyframe.extract_window(f, region)
        if out:
            skyframe.write_csv(sub, out)
        summary = skyframe.summarize(sub)
        return summary
    _json_out(_guarded("window", run), report)


def _curve_command(kind):
    @click.argument("input_path", type=click.Path())
    @click.option("--column", default="I", show_default=True)
    @click.option("--max-dist", type=float, default=math.pi, show_default=True)
    @click.option("--bins", type=int, default=30, show_default=True)
    @click.option("--sample", type=int, default=None,
                  help="Sample this many rows first.")
    @click.option("--seed", type=int, default=0, show_default=True)
    @click.option("--degrees", is_flag=True,
                  help="Interpret --max-dist in degrees.")
    @click.option("-o", "--out", type=click.Path(), required=True,
                  help="Output curve CSV (lag,value,count).")
    def run_command(input_path, column, max_dist, bins, sample, seed, degrees,
                    out):
        def run():
            nonlocal max_dist
            if degrees:
                max_dist = math.radians(max_dist)
            f = _load_frame(input_path, sample=sample, seed=seed,
                            columns=[column])
            if kind == "cov":
                curve = geostat.empirical_covariance(f, column, max_dist,
                                                     bins, seed=seed)
            else:
                curve = geostat.empirical_variogram(f, column, max_dist,
                                                    bins, seed=seed)
            curve.write_csv(out)
            return {"bins": int(curve.values.size)}
        _guarded(kind, run)
    return run_command


main.command("cov", help="Empirical covariance curve (bin 0 at lag zero).")(
    _curve_command("cov"))
main.command("variogram", help="Empirical variogram curve.")(
    _curve_command("variogram"))


@main.command()
@click.argument("curve_path", type=click.Path())
@click.option("--family", type=click.Choice(list(geostat.FAMILIES)),
              default="matern", show_default=True)
@click.option("--weights", type=click.Choice(["equal", "npairs", "cressie"]),
              default="equal", show_default=True)
@click.option("--fix-nugget/--free-nugget", default=True, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("-o", "--out", type=click.Path(), help="Write fit JSON here.")
def fit(curve_path, family, weights, fix_nugget, seed, out):
    """Fit a covariance-family variogram to an empirical curve."""
    def run():
        curve = geostat.EmpiricalCurve.read_csv(curve_path)
        result = geostat.fit_variogram(curve, family, weights=weights,
                                       fix_nugget=fix_nugget, seed=seed)
        return result.to_dict()
    _json_out(_guarded("fit", run), out)


@main.command()
@click.argument("spectrum_path", type=click.Path())
@click.option("--lmax", type=int, required=True)
@click.option("--points", type=int, default=1001, show_default=True,
              help="Angular grid size over [0, pi].")
@click.option("-o", "--out", type=click.Path(), required=True,
              help="Output CSV (cos_theta,value).")
def covps(spectrum_path, lmax, points, out):
    """Covariance estimate from an angular power spectrum CSV."""
    def run():
        ps = geostat.read_spectrum_csv(spectrum_path)
        grid = np.cos(np.linspace(0.0, math.pi, points))
        cov = geostat.cov_from_power_spectrum(ps, lmax, grid)
        with open(out, "w") as fh:
            fh.write("cos_theta,value\n")
            for x, v in zip(cov.cos_theta, cov.values):
                fh.write("%r,%r\n" % (float(x), float(v)))
        return {"lmax": cov.lmax, "diagnostics": cov.diagnostics}
    _json_out(_guarded("covps", run), None)


@main.command()
@click.argument("input_path", type=click.Path())
@click.option("--column", default="I", show_default=True)
@click.option("--bins", type=int, default=None,
              help="Histogram bins (default: Sturges).")
@click.option("--window", "window_path", type=click.Path(), default=None,
              help="Restrict to this window JSON first.")
def entropy(input_path, column, bins, window_path):
    """Histogram entropy of a column, in bits."""
    def run():
        f = _load_frame(input_path, columns=[column])
        if window_path:
            f = skyframe.extract_window(f, _load_windows([window_path])[0])
        return {"entropy_bits": geostat.entropy(f, column, bins)}
    _json_out(_guarded("entropy", run), None)


@main.command()
@click.argument("input_path", type=click.Path())
@click.option("--column", default="I", show_default=True)
@click.option("--alpha", type=float, default=0.0, show_default=True)
@click.option("--window", "window_path", type=click.Path(), default=None)
def fmf(input_path, column, alpha, window_path):
    """Excursion-set area: where the column exceeds the threshold."""
    def run():
        f = _load_frame(input_path, columns=[column])
        if window_path:
            f = skyframe.extract_window(f, _load_windows([window_path])[0])
        return {"area": geostat.first_minkowski(f, column, alpha)}
    _json_out(_guarded("fmf", run), None)


@main.command()
@click.argument("input_path", type=click.Path())
@click.option("--column", default="I", show_default=True)
@click.option("--qmin", type=float, default=1.01, show_default=True)
@click.option("--qmax", type=float, default=10.0, show_default=True)
@click.option("--points", type=int, default=20, show_default=True)
@click.option("--box-level", type=int, default=1, show_default=True)
@click.option("-o", "--out", type=click.Path(), required=True,
              help="Output CSV (q,T).")
def renyi(input_path, column, qmin, qmax, points, box_level, out):
    """Sample Renyi function on a uniform q grid."""
    def run():
        f = _load_frame(input_path, columns=[column])
        q, t = geostat.renyi_function(f, column, qmin, qmax, points, box_level)
        with open(out, "w") as fh:
            fh.write("q,T\n")
            for qi, ti in zip(q, t):
                fh.write("%r,%r\n" % (float(qi), float(ti)))
        return {"points": len(q)}
    _guarded("renyi", run)


@main.command()
@click.argument("input_path", type=click.Path())
@click.option("--column", default="I", show_default=True)
@click.option("--strata", "strata_paths", type=click.Path(), multiple=True,
              required=True, help="Window JSON per stratum (repeatable).")
def qstat(input_path, column, strata_paths):
    """Stratified-heterogeneity statistic over disjoint strata."""
    def run():
        f = _load_frame(input_path, columns=[column])
        value = geostat.q_statistic(f, column, _load_windows(strata_paths))
        return {"q": value if not math.isnan(value) else None,
                "defined": not math.isnan(value)}
    _json_out(_guarded("qstat", run), None)


@main.command()
@click.argument("input_path", type=click.Path())
@click.option("--column", default="I", show_default=True)
@click.option("--window-a", type=click.Path(), required=True)
@click.option("--window-b", type=click.Path(), required=True)
@click.option("--quantiles", type=int, default=99, show_default=True)
@click.option("-o", "--out", type=click.Path(), required=True,
              help="Output CSV (quantile_a,quantile_b).")
def qq(input_path, column, window_a, window_b, quantiles, out):
    """Matched quantiles of a column in two regions."""
    def run():
        f = _load_frame(input_path, columns=[column])
        wa, wb = _load_windows([window_a, window_b])
        qa, qb = geostat.qq_pairs(f, column, wa, wb, quantiles)
        with open(out, "w") as fh:
            fh.write("quantile_a,quantile_b\n")
            for a, b in zip(qa, qb):
                fh.write("%r,%r\n" % (float(a), float(b)))
        return {"pairs": len(qa)}
    _guarded("qq", run)


@main.command()
@click.argument("input_path", type=click.Path())
@click.option("--column", default="I", show_default=True)
@click.option("--theta-bins", type=int, default=18, show_default=True)
@click.option("--phi-bins", type=int, default=36, show_default=True)
@click.option("-o", "--out", type=click.Path(), required=True,
              help="Output CSV (axis,center,mean,count).")
def angdist(input_path, column, theta_bins, phi_bins, out):
    """Angular marginals: per-bin means against colatitude and longitude."""
    def run():
        f = _load_frame(input_path, columns=[column])
        marg = geostat.angular_marginals(f, column, theta_bins, phi_bins)
        with open(out, "w") as fh:
            fh.write("axis,center,mean,count\n")
            for axis in ("theta", "phi"):
                table = marg[axis]
                for c, m, k in zip(table["centers"], table["mean"],
                                   table["count"]):
                    fh.write("%s,%r,%r,%r\n" % (axis, float(c), float(m),
                                                float(k)))
        return {"rows": theta_bins + phi_bins}
    _guarded("angdist", run)


@main.command()
@click.argument("kind", type=click.Choice(["curve", "fit", "renyi", "angdist",
                                           "map"]))
@click.argument("input_path", type=click.Path())
@click.option("--fit-json", type=click.Path(), default=None,
              help="Overlay this fit (kind=fit).")
@click.option("--column", default="I", show_default=True,
              help="Color column for kind=map.")
@click.option("--sample", type=int, default=20000, show_default=True,
              help="Points plotted for kind=map.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("-o", "--out", type=click.Path(), required=True,
              help="Output SVG.")
def plot(kind, input_path, fit_json, column, sample, seed, out):
    """Render a static SVG chart from a curve/fit/map input."""
    def run():
        if kind in ("curve", "fit"):
            curve = geostat.EmpiricalCurve.read_csv(input_path)
            series = [(curve.lags, curve.values, "points")]
            if kind == "fit":
                if not fit_json:
                    raise SchemaError("kind=fit needs --fit-json")
                with open(fit_json) as fh:
                    d = json.load(fh)
                model = geostat.CovarianceModel(
                    d["family"], d["sigmasq"], d["psi"], d.get("kappa"),
                    d.get("kappa2"), d.get("nugget", 0.0))
                lags = np.linspace(0, curve.max_dist, 200)
                series.append((lags, geostat.variogram_model(lags, model),
                               "dashed"))
            svg = plotsvg.line_chart(series, xlabel="geodesic lag",
                                     ylabel="value", title=kind)
        elif kind == "renyi":
            rows = [line.split(",") for line
                    in open(input_path).read().splitlines()[1:] if line]
            q = np.array([float(r[0]) for r in rows])
            t = np.array([float(r[1]) for r in rows])
            svg = plotsvg.line_chart([(q, t, "points")], xlabel="q",
                                     ylabel="T(q)", title="sample Renyi function")
        elif kind == "angdist":
            rows = [line.split(",") for line
                    in open(input_path).read().splitlines()[1:] if line]
            theta = [(float(r[1]), float(r[2])) for r in rows if r[0] == "theta"
                     and r[2] != "nan"]
            svg = plotsvg.bar_chart([c for c, _ in theta],
                                    [m for _, m in theta],
                                    xlabel="colatitude", ylabel="mean",
                                    title="angular marginal")
        else:
            f = _load_frame(input_path, columns=[column])
            if sample and sample < len(f):
                f = skyframe.sample_frame(f, sample, seed)
            theta, phi = f.angles()
            svg = plotsvg.sky_chart(np.atleast_1d(theta), np.atleast_1d(phi),
                                    f.column(column), title="sky view")
        with open(out, "w") as fh:
            fh.write(svg)
        return {"out": out}
    _guarded("plot", run)


@main.command("download")
@click.argument("product", type=click.Choice(["map", "powerspectrum"]))
@click.option("--foreground", type=click.Choice(list(dl.FOREGROUNDS)),
              default="smica", show_default=True)
@click.option("--nside", type=int, default=1024, show_default=True)
@click.option("--link", type=int, default=1, show_default=True,
              help="Numbered spectrum product.")
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="URL template overrides (key = value lines).")
@click.option("--offline", is_flag=True, help="Fail fast without touching the network.")
@click.option("-o", "--out", type=click.Path(), required=True)
def download_cmd(product, foreground, nside, link, config_path, offline, out):
    """Fetch a released map or power-spectrum product."""
    def run():
        config = dl.read_config(config_path)
        if product == "map":
            dl.download_map(foreground, nside, out, config, offline,
                            progress=lambda n: None)
        else:
            dl.download_power_spectrum(link, out, config, offline,
                                       progress=lambda n: None)
        return {"out": out}
    _json_out(_guarded("download", run), None)


if __name__ == "__main__":
    main()
