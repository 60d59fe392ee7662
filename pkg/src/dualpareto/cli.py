"""Command line front end.

Exit codes: 0 ok, 2 input error, 3 solver failure, 4 precondition violated
(for example ``slope`` on a vector that is not tight).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import core, l1, matrix, pareto, quotient, tensor, tv1d
from .core import InputError, PreconditionError, SolverError
from .report import (csv_rows, curve_dict, dumps, num, plot_curves, plot_region,
                     region_rows, write_text)

PAIRS = ("l1", "matrix", "tv", "tv2d", "bpdn", "trend", "tensor-ft",
         "gallery-ellipse", "gallery-skew")


# ---------------------------------------------------------------------------
# input


def read_array(path: str | None) -> np.ndarray:
    """CSV: one value per line for vectors, comma separated rows for matrices;
    ``.json`` files hold ``{"dims": [...], "entries": [...]}``."""
    if path is None:
        raise InputError("--input is required for this pair")
    p = Path(path)
    if not p.is_file():
        raise InputError(f"no such file: {path}")
    text = p.read_text(encoding="utf-8")
    if p.suffix.lower() == ".json":
        try:
            doc = json.loads(text)
            arr = np.asarray(doc["entries"], dtype=float).reshape(doc["dims"])
        except (ValueError, KeyError, TypeError) as exc:
            raise InputError(f"malformed tensor JSON: {exc}") from exc
        return core.as_vec(arr, "input")
    rows = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not rows:
        raise InputError("input is empty")
    try:
        data = [[float(v) for v in r.split(",")] for r in rows]
    except ValueError as exc:
        raise InputError(f"non-numeric entry: {exc}") from exc
    if len({len(r) for r in data}) != 1:
        raise InputError("ragged CSV rows")
    arr = np.array(data)
    if arr.shape[1] == 1:
        arr = arr[:, 0]
    return core.as_vec(arr, "input")


def _vector(c):
    if c.ndim != 1:
        raise InputError("this pair needs a vector (one value per line)")
    return c


def _matrix(c):
    if c.ndim != 2:
        raise InputError("this pair needs a matrix (comma separated rows)")
    return c


class Job:
    """Pair and input parsed from the command line flags."""

    def __init__(self, args) -> None:
        self.args = args
        self.name = args.pair
        name = args.pair
        if name == "tensor-ft":
            self.c = tensor.f_t(args.t)
            self.pair = None
            return
        c = read_array(args.input)
        if name == "l1":
            self.pair, self.c = l1.l1_pair(), c
        elif name == "matrix":
            self.pair, self.c = matrix.nuclear_spectral_pair(), _matrix(c)
        elif name == "tv":
            # signals live on n+1 samples; the pair acts on increments
            self.signal = _vector(c)
            if c.size < 2:
                raise InputError("a signal needs at least two samples")
            self.pair, self.c = tv1d.tv_pair(), tv1d.diff(c)
        elif name == "tv2d":
            c = _matrix(c)
            self.pair = quotient.tv2d_pair(*c.shape)
            self.c = self.pair.project(c)
        elif name == "trend":
            c = _vector(c)
            self.pair = quotient.trend_filter_pair(c.size, args.k)
            self.raw = c
            self.c = self.pair.project(c)
        elif name == "bpdn":
            A = _matrix(read_array(args.matrix))
            self.A = A
            self.pair, self.c = quotient.bpdn_pair(A, args.delta), _vector(c)
        elif name == "gallery-ellipse":
            self.pair, self.c = core.gallery_ellipse_pair(), _two(c)
        elif name == "gallery-skew":
            self.pair, self.c = core.gallery_skew_pair(), _two(c)
        else:
            raise InputError(f"unknown pair {name!r}")


def _two(c):
    c = _vector(c)
    if c.size != 2:
        raise InputError("gallery pairs live on R^2")
    return c


# ---------------------------------------------------------------------------
# commands


def _emit(args, stem: str, doc: dict, rows=None, header=None) -> list[Path]:
    out = Path(args.out)
    files = []
    if args.format == "csv" and rows is not None:
        files.append(write_text(out / f"{stem}.csv", csv_rows(rows, header)))
    else:
        files.append(write_text(out / f"{stem}.json", dumps(doc) + "\n"))
    return files


def cmd_frontier(args) -> dict:
    job = Job(args)
    grid = args.grid
    if job.name == "tensor-ft":
        h = tensor.ft_subfrontier(grid)
        doc = {"pair": job.name, "t": args.t, **curve_dict(h), "tight": False}
        curves = {"sub-frontier": h}
    else:
        c = job.c
        if job.name == "l1":
            f = l1.l1_frontier(c)
        elif job.name == "matrix":
            f = matrix.matrix_frontier(c)
        elif job.name == "tv":
            f = tv1d.tv_frontier(job.signal, grid)
        else:
            f = None
        rep = None
        if job.name not in ("tv", "tv2d", "trend", "bpdn") or f is None:
            rep = pareto.tightness_test(job.pair, c, grid, args.tol)
        if f is None:
            f = rep.f
        doc = {"pair": job.name, **curve_dict(f)}
        curves = {"frontier": f}
        if rep is not None:
            doc["subfrontier"] = [[float(x), float(y)] for x, y in rep.h.points]
            doc["sup_gap"] = rep.sup_gap
            doc["tight"] = rep.tight
            if not rep.tight:
                curves["sub-frontier"] = rep.h
    stem = "frontier"
    pts = np.array(doc["points"])
    files = _emit(args, stem, doc, pts, ["x", "y"])
    if args.format == "svg":
        files.append(plot_curves(curves, Path(args.out) / f"{stem}.svg", job.name))
    doc["files"] = [str(p) for p in files]
    return doc


def cmd_denoise(args) -> dict:
    job = Job(args)
    if job.pair is None:
        raise InputError("denoise is not available for tensor-ft")
    c, pair = job.c, job.pair
    if job.name == "tv" and args.eps is not None:
        res = tv1d.taut_string(job.signal, args.eps)
        d = core.check_x2(pair, tv1d.diff(res.a), tv1d.diff(res.b), args.tol)
        a_out, b_out = res.a, res.b
    elif job.name == "trend" and args.y is not None:
        a_out = quotient.trend_denoise(job.raw, args.k, args.y)
        b_out = job.raw - a_out
        a = job.pair.project(a_out)
        d = core.check_x2(pair, a, c - a, args.tol)
    elif args.x is not None:
        if job.name == "bpdn":
            d = quotient.lasso(job.A, c, args.x, args.delta)
        else:
            d = pareto.solve_m2x(pair, c, min(args.x, pair.norm_x(c)), args.tol)
        a_out, b_out = _split(job, d)
    elif args.y is not None:
        if job.name == "l1":
            d = l1.soft_threshold(c, args.y)
        elif job.name == "matrix":
            d = matrix.sv_soft_threshold(c, args.y)
        elif job.name == "bpdn":
            d = quotient.bpdn(job.A, c, args.y, args.delta)
        else:
            y = min(args.y, pair.norm_y(c))
            b = pair.proj_y(c, y)
            d = core.check_x2(pair, c - b, b, args.tol)
        a_out, b_out = _split(job, d)
    else:
        raise InputError("denoise needs --eps, --x or --y")
    cert = {"pair": job.name, "x": d.x, "y": d.y, "gap": d.gap, "certified": d.certified}
    out = Path(args.out)
    files = [write_text(out / "a.csv", csv_rows(a_out)),
             write_text(out / "b.csv", csv_rows(b_out)),
             write_text(out / "certificate.json", dumps(cert) + "\n")]
    if args.format == "svg" and a_out.ndim == 1:
        files.append(_plot_signal(job, a_out, out / "denoise.svg"))
    cert["files"] = [str(p) for p in files]
    return cert


def _split(job, d):
    if job.name == "tv":
        # back to signals: b is the integrated residual, a takes the offset
        b = tv1d.integrate(d.b)
        return job.signal - b, b
    return d.a, d.b


def _plot_signal(job, a, path):
    from .report import _pyplot, _save
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 3))
    raw = job.signal if job.name == "tv" else job.c
    ax.plot(raw, lw=0.8, color="0.6", label="input")
    ax.plot(a, lw=1.5, color="C0", label="denoised")
    ax.legend()
    fig.tight_layout()
    out = _save(fig, path)
    plt.close(fig)
    return out


def cmd_svregion(args) -> dict:
    job = Job(args)
    if job.name == "tensor-ft":
        if args.t != 0:
            raise InputError("the closed-form region is only known for t = 0")
        region = tensor.ft_sv_region(args.grid)
    elif job.name == "matrix":
        region = matrix.matrix_sv_region(job.c)
    else:
        region = pareto.sv_region(job.pair, job.c, args.grid)
    rows, header = region_rows(region)
    doc = {"pair": job.name, "kind": region.kind, header[0] + "s": [r[0] for r in rows],
           header[1] + "s": [r[1] for r in rows], "total_area": region.total_area,
           "height": region.height, "integral_2y": region.integral_2y()}
    files = [write_text(Path(args.out) / "svregion.csv", csv_rows(rows, header))]
    if args.format == "json":
        files.append(write_text(Path(args.out) / "svregion.json", dumps(doc) + "\n"))
    if args.format == "svg":
        files.append(plot_region(region, Path(args.out) / "svregion.svg", job.name))
    doc["files"] = [str(p) for p in files]
    return doc


def cmd_slope(args) -> dict:
    job = Job(args)
    if job.name == "tensor-ft":
        raise PreconditionError("f_t has a curved sub-frontier and no slope decomposition")
    if job.name == "l1":
        dec = l1.l1_slope_decomposition(job.c)
    elif job.name == "matrix":
        dec = matrix.matrix_slope_decomposition(job.c)
    else:
        dec = pareto.slope_decomposition(job.pair, job.c, args.tol, args.grid)
    doc = {"pair": job.name, "xs": dec.xs, "ys": dec.ys, "slopes": dec.slopes,
           "pareto_points": [list(p) for p in dec.pareto_points()]}
    out = Path(args.out)
    files = [write_text(out / "components.csv", csv_rows([np.ravel(v) for v in dec.components])),
             write_text(out / "slope.json", dumps(doc) + "\n")]
    doc["files"] = [str(p) for p in files]
    return doc


def cmd_faces(args) -> dict:
    counts = tv1d.face_counts(args.n)
    poly = tv1d.face_polynomial(args.n)
    rows = [(k, v) for k, v in enumerate(counts)]
    doc = {"n": args.n, "counts": counts, "total": sum(counts), "matches_polynomial": counts == poly}
    files = _emit(args, "faces", doc, rows, ["dim", "count"])
    doc["files"] = [str(p) for p in files]
    return doc


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dualpareto", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, with_pair=True):
        if with_pair:
            sp.add_argument("--pair", choices=PAIRS, required=True)
            sp.add_argument("--input", help="CSV vector/matrix or JSON tensor")
            sp.add_argument("--matrix", help="CSV design matrix for --pair bpdn")
            sp.add_argument("--k", type=int, default=2, help="difference order for --pair trend")
            sp.add_argument("--t", type=float, default=0.0, help="parameter of f_t for --pair tensor-ft")
            sp.add_argument("--delta", type=float, default=0.999, help="ISTA accuracy parameter")
        sp.add_argument("--grid", type=int, default=pareto.DEFAULT_GRID)
        sp.add_argument("--tol", type=float, default=1e-6)
        sp.add_argument("--out", default=".")
        sp.add_argument("--format", choices=("json", "csv", "svg"), default="json")

    common(sub.add_parser("frontier", help="frontier and sub-frontier"))
    dn = sub.add_parser("denoise", help="split c = a + b at a radius or level")
    common(dn)
    dn.add_argument("--eps", type=float, help="tube half-width for --pair tv")
    dn.add_argument("--x", type=float, help="X radius of a")
    dn.add_argument("--y", type=float, help="Y level of b")
    common(sub.add_parser("svregion", help="singular value region"))
    common(sub.add_parser("slope", help="slope decomposition"))
    fc = sub.add_parser("faces", help="face counts of the TV unit ball")
    common(fc, with_pair=False)
    fc.add_argument("--n", type=int, required=True)
    return p


COMMANDS = {"frontier": cmd_frontier, "denoise": cmd_denoise, "svregion": cmd_svregion,
            "slope": cmd_slope, "faces": cmd_faces}


def _summary(doc: dict) -> str:
    lines = []
    for k, v in doc.items():
        if isinstance(v, (list, tuple)) and len(v) > 8:
            v = f"[{len(v)} entries]"
        elif isinstance(v, float):
            v = num(v)
        lines.append(f"{k}\t{v}")
    return "\n".join(lines)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "eps", None) is not None and args.eps < 0:
            raise InputError("--eps must be nonnegative")
        doc = COMMANDS[args.command](args)
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    print(_summary(doc))
    return 0


if __name__ == "__main__":
    sys.exit(main())
