"""Command-line front end.

Commands
--------
check       mesh statistics (vertices, edges, triangles, merged facets, genus)
synth       minimal-finger fixture, optional quality objective and solid export
enumerate   every valid fixture up to ``--max-fingers`` and the minimal count
bench       one statistics row per mesh of a corpus, as CSV and/or JSON
generate    write a built-in workpiece to a mesh file

Exit codes: 0 success, 1 I/O error, 2 invalid mesh, 3 no fixture.
"""

import configparser
import csv
import dataclasses
import io
import json
import os
import sys
import time
from dataclasses import dataclass, field
from typing import Optional

import click

from . import fileio, shapes
from .cover import EPS_COVER
from .mesh import (ANGLE_TOL, DIST_TOL, MeshError, export_polyhedron, load_mesh,
                   merge_coplanar_facets)
from .solid import ExtrusionParams, SolidError, build_fixture_solid, export_mesh
from .synth import (MAX_FINGERS, OBJECTIVES, best_fixture, default_threads,
                    enumerate_fixtures, minimal_fixtures, minimal_snapping_fixture, quality_of,
                    serving_direction)

SCHEMA = "snapfix.report/1"
EXIT_OK, EXIT_IO, EXIT_MESH, EXIT_NO_FIXTURE = 0, 1, 2, 3
MESH_SUFFIXES = (".off", ".obj", ".stl")
BENCH_COLUMNS = ("name", "verts", "edges", "tris", "merged", "genus",
                 "min_fingers", "time_ms", "fixtures_min_fingers", "error")


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


@dataclass
class RunConfig:
    """Every knob of a run; unset values mirror the library defaults."""

    input: Optional[str] = None
    command: Optional[str] = None
    format: Optional[str] = None
    extrusion: ExtrusionParams = field(default_factory=ExtrusionParams)
    angle_tol: float = ANGLE_TOL
    dist_tol: float = DIST_TOL
    eps_cover: float = EPS_COVER
    objective: str = "fingers"
    max_fingers: int = MAX_FINGERS
    solid: Optional[str] = None
    json: Optional[str] = None
    threads: Optional[int] = None

    _SCALARS = {"angle_tol": float, "dist_tol": float, "eps_cover": float,
                "max_fingers": int, "threads": int, "objective": str,
                "input": str, "command": str, "format": str, "solid": str, "json": str}

    def resolved_threads(self):
        return default_threads() if self.threads is None else max(1, self.threads)

    def to_text(self):
        """INI text with a ``[run]`` and an ``[extrusion]`` section."""
        cp = configparser.ConfigParser()
        cp["run"] = {k: str(getattr(self, k)) for k in self._SCALARS
                     if getattr(self, k) is not None}
        cp["extrusion"] = {f.name: str(getattr(self.extrusion, f.name))
                           for f in dataclasses.fields(ExtrusionParams)
                           if getattr(self.extrusion, f.name) is not None}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_text(cls, text):
        cp = configparser.ConfigParser()
        cp.read_string(text)
        kw = {}
        if cp.has_section("run"):
            for k, v in cp["run"].items():
                if k not in cls._SCALARS:
                    raise ValueError(f"unknown config key {k!r}")
                kw[k] = cls._SCALARS[k](v)
        if cp.has_section("extrusion"):
            names = {f.name for f in dataclasses.fields(ExtrusionParams)}
            ext = {}
            for k, v in cp["extrusion"].items():
                if k not in names:
                    raise ValueError(f"unknown extrusion key {k!r}")
                ext[k] = float(v)
            kw["extrusion"] = ExtrusionParams(**ext)
        return cls(**kw)


# -- pipeline pieces -----------------------------------------------------------


def load_input(spec, fmt=None, dist_tol=DIST_TOL):
    """Mesh from a path or from ``builtin:NAME``; returns ``(name, P)``."""
    try:
        if spec.startswith("builtin:"):
            name = spec.split(":", 1)[1]
            return name, shapes.builtin(name)
        return os.path.basename(spec), load_mesh(spec, fmt, dist_tol=dist_tol)
    except KeyError as exc:
        raise CliError(str(exc.args[0]), EXIT_IO) from exc
    except OSError as exc:
        raise CliError(f"cannot read {spec}: {exc.strerror or exc}", EXIT_IO) from exc
    except (fileio.ParseError, MeshError) as exc:
        raise CliError(f"invalid mesh {spec}: {exc}", EXIT_MESH) from exc


def mesh_stats(P, angle_tol=ANGLE_TOL, dist_tol=DIST_TOL):
    """Mesh columns of the report and the merged polyhedron."""
    try:
        M = merge_coplanar_facets(P, angle_tol, dist_tol)
    except MeshError as exc:
        raise CliError(f"invalid mesh: {exc}", EXIT_MESH) from exc
    stats = {"verts": P.n_vertices, "edges": P.n_edges, "tris": P.triangle_count,
             "merged": M.n_facets, "genus": M.genus}
    return stats, M


def _dump(report, path):
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if path is None or path == "-":
        click.echo(text, nl=False)
        return
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror or exc}", EXIT_IO) from exc


def _report(cfg, name, stats):
    return {"schema": SCHEMA, "command": cfg.command, "input": name, "mesh": stats,
            "timing": {}}


def run_check(cfg):
    name, P = load_input(cfg.input, cfg.format, cfg.dist_tol)
    stats, _ = mesh_stats(P, cfg.angle_tol, cfg.dist_tol)
    return _report(cfg, name, stats), EXIT_OK


def run_synth(cfg):
    name, P = load_input(cfg.input, cfg.format, cfg.dist_tol)
    stats, M = mesh_stats(P, cfg.angle_tol, cfg.dist_tol)
    rep = _report(cfg, name, stats)
    threads = cfg.resolved_threads()
    res = minimal_snapping_fixture(M, cfg.eps_cover, threads)
    wall = res.stats.pop("wall_ms")
    rep["timing"]["synth_ms"] = wall
    rep["search"] = res.stats
    if not res.found:
        rep["min_fingers"] = None
        rep["fixture"] = None
        rep["status"] = "no fixture"
        return rep, EXIT_NO_FIXTURE
    fx = res.fixture
    if cfg.objective != "fingers":
        t0 = time.perf_counter()
        fx, metrics = best_fixture(M, cfg.objective, cfg.extrusion, cfg.max_fingers,
                                   cfg.eps_cover, threads)
        rep["timing"]["objective_ms"] = (time.perf_counter() - t0) * 1e3
        res_dict = fx.to_dict()
        res_dict["serving_direction"] = [float(x) for x in serving_direction(M, fx, cfg.eps_cover)]
        res_dict["metrics"] = metrics.to_dict()
    else:
        metrics = quality_of(M, fx, cfg.extrusion)
        res_dict = res.to_dict(metrics)
    rep["objective"] = cfg.objective
    rep["min_fingers"] = fx.n_fingers
    rep["fixture"] = res_dict
    rep["status"] = "ok"
    if cfg.solid:
        try:
            S = build_fixture_solid(M, fx, cfg.extrusion)
            fmt = "stl-binary" if cfg.solid.lower().endswith(".stl") else fileio.guess_format(cfg.solid)
            export_mesh(S, fmt, cfg.solid)
        except OSError as exc:
            raise CliError(f"cannot write {cfg.solid}: {exc.strerror or exc}", EXIT_IO) from exc
        except (SolidError, fileio.ParseError) as exc:
            raise CliError(f"solid export failed: {exc}", EXIT_IO) from exc
        rep["solid"] = {"path": os.path.basename(cfg.solid), "shells": S.n_shells,
                        "volume": S.volume(), "watertight": S.is_watertight()}
    return rep, EXIT_OK


def run_enumerate(cfg, stream=None):
    """Enumerate; with ``stream`` each fixture is written as one JSON line."""
    name, P = load_input(cfg.input, cfg.format, cfg.dist_tol)
    stats, M = mesh_stats(P, cfg.angle_tol, cfg.dist_tol)
    rep = _report(cfg, name, stats)
    threads = cfg.resolved_threads()
    t0 = time.perf_counter()
    per_k = {}
    if stream is not None:
        for fx in enumerate_fixtures(M, cfg.max_fingers, cfg.eps_cover, threads):
            per_k[fx.n_fingers] = per_k.get(fx.n_fingers, 0) + 1
            stream.write(json.dumps(fx.to_dict(), sort_keys=True) + "\n")
        k = min(per_k) if per_k else None
        count = per_k.get(k, 0)
        rep["counts_by_fingers"] = {str(j): per_k[j] for j in sorted(per_k)}
    else:
        k, found = minimal_fixtures(M, cfg.max_fingers, cfg.eps_cover, threads)
        count = len(found)
    rep["timing"]["enumerate_ms"] = (time.perf_counter() - t0) * 1e3
    rep["max_fingers"] = cfg.max_fingers
    rep["min_fingers"] = k
    rep["fixtures_min_fingers"] = count
    rep["status"] = "ok" if k is not None else "no fixture"
    return rep, (EXIT_OK if k is not None else EXIT_NO_FIXTURE)


def bench_row(name, loader, cfg):
    """One benchmark-table row; errors are recorded in the row."""
    row = dict.fromkeys(BENCH_COLUMNS, "")
    row["name"] = name
    try:
        P = loader()
        stats, M = mesh_stats(P, cfg.angle_tol, cfg.dist_tol)
        row.update(stats)
        res = minimal_snapping_fixture(M, cfg.eps_cover, cfg.resolved_threads())
        row["time_ms"] = round(res.stats["wall_ms"], 3)
        if res.found:
            k, found = minimal_fixtures(M, cfg.max_fingers, cfg.eps_cover,
                                        cfg.resolved_threads())
            row["min_fingers"] = k
            row["fixtures_min_fingers"] = len(found)
        else:
            row["min_fingers"] = "inf"
            row["fixtures_min_fingers"] = 0
    except CliError as exc:
        row["error"] = str(exc)
    except (OSError, fileio.ParseError, MeshError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def run_bench(cfg, corpus=None, builtins=()):
    jobs = []
    if corpus is not None:
        try:
            names = sorted(os.listdir(corpus))
        except OSError as exc:
            raise CliError(f"cannot list {corpus}: {exc.strerror or exc}", EXIT_IO) from exc
        for fn in names:
            if os.path.splitext(fn)[1].lower() in MESH_SUFFIXES:
                path = os.path.join(corpus, fn)
                jobs.append((fn, lambda p=path: load_mesh(p, dist_tol=cfg.dist_tol)))
    for b in builtins:
        jobs.append((f"builtin:{b}", lambda b=b: load_input(f"builtin:{b}")[1]))
    rows = [bench_row(name, loader, cfg) for name, loader in jobs]
    return rows


def rows_to_csv(rows):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=BENCH_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


# -- click wiring --------------------------------------------------------------


def _common(f):
    opts = [
        click.option("--input", "input_", required=True,
                     help="Mesh path, or builtin:NAME (e.g. builtin:cube, builtin:prism8)."),
        click.option("--format", "fmt", type=click.Choice(fileio.FORMATS),
                     help="Input format; inferred from the extension when omitted."),
        click.option("--angle-tol", type=float, help="Coplanarity angle tolerance (rad)."),
        click.option("--dist-tol", type=float, help="Weld and planarity tolerance (mm)."),
        click.option("--eps-cover", type=float, help="Coverage tolerance."),
        click.option("--threads", type=int, help="Worker threads (default: SNAPFIX_THREADS or 1)."),
        click.option("--json", "json_path", help="Write the JSON report here instead of stdout."),
        click.option("--config", "config_path", type=click.Path(dir_okay=False),
                     help="INI file with [run] and [extrusion] sections."),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


def _extrusion_opts(f):
    opts = [
        click.option("--alpha-p", type=float, help="Palm thickness (mm)."),
        click.option("--alpha-b", type=float, help="Body thickness (mm)."),
        click.option("--alpha-t", type=float, help="Fingertip thickness (mm)."),
        click.option("--clearance", type=float, help="Gap to the workpiece (mm, at most 0.2)."),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


def _make_config(command, kw):
    try:
        if kw.get("config_path"):
            with open(kw["config_path"]) as fh:
                cfg = RunConfig.from_text(fh.read())
        else:
            cfg = RunConfig()
    except OSError as exc:
        raise CliError(f"cannot read config: {exc.strerror or exc}", EXIT_IO) from exc
    except (ValueError, configparser.Error) as exc:
        raise CliError(f"bad config: {exc}", EXIT_IO) from exc
    cfg.command = command
    mapping = {"input_": "input", "fmt": "format", "angle_tol": "angle_tol",
               "dist_tol": "dist_tol", "eps_cover": "eps_cover", "threads": "threads",
               "json_path": "json", "objective": "objective", "max_fingers": "max_fingers",
               "solid": "solid"}
    for k, attr in mapping.items():
        if kw.get(k) is not None:
            setattr(cfg, attr, kw[k])
    ext = {a: kw[a] for a in ("alpha_p", "alpha_b", "alpha_t", "clearance")
           if kw.get(a) is not None}
    if ext:
        try:
            cfg.extrusion = dataclasses.replace(cfg.extrusion, **ext)
        except ValueError as exc:
            raise click.BadParameter(str(exc)) from exc
    return cfg


def _finish(fn, cfg, *args):
    try:
        rep, code = fn(cfg, *args)
        _dump(rep, cfg.json)
    except CliError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(exc.code)
    if code == EXIT_NO_FIXTURE:
        click.echo("no fixture", err=True)
    sys.exit(code)


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Snapping-fixture synthesis for polyhedral workpieces."""


@main.command()
@_common
def check(**kw):
    """Validate a mesh and print V, E, triangles, merged facets and genus."""
    cfg = _make_config("check", kw)
    _finish(run_check, cfg)


@main.command()
@_common
@_extrusion_opts
@click.option("--objective", type=click.Choice(OBJECTIVES), help="Tie-break among minimal fixtures.")
@click.option("--max-fingers", type=click.IntRange(2, 4), help="Finger bound for the objective search.")
@click.option("--solid", help="Write the fixture solid (STL, OFF or OBJ by extension).")
def synth(**kw):
    """Synthesize a fixture with the fewest fingers."""
    cfg = _make_config("synth", kw)
    _finish(run_synth, cfg)


@main.command("enumerate")
@_common
@click.option("--max-fingers", type=click.IntRange(2, 4), help="Largest subset size (default 4).")
@click.option("--stream", type=click.Path(dir_okay=False),
              help="Write every valid fixture as a JSON line to this file ('-' for stdout).")
def enumerate_cmd(stream=None, **kw):
    """Enumerate valid fixtures and count those with the fewest fingers."""
    cfg = _make_config("enumerate", kw)
    if stream is None:
        _finish(run_enumerate, cfg)
    if stream == "-":
        _finish(run_enumerate, cfg, sys.stdout)
    try:
        fh = open(stream, "w")
    except OSError as exc:
        click.echo(f"error: cannot write {stream}: {exc.strerror or exc}", err=True)
        sys.exit(EXIT_IO)
    with fh:
        _finish(run_enumerate, cfg, fh)


@main.command()
@click.argument("corpus", required=False, type=click.Path(file_okay=False))
@click.option("--builtin", "builtins", multiple=True, help="Add a built-in workpiece row.")
@click.option("--csv", "csv_path", help="Write CSV here (default: stdout).")
@click.option("--json", "json_path", help="Also write the rows as JSON.")
@click.option("--max-fingers", type=click.IntRange(2, 4), default=MAX_FINGERS)
@click.option("--threads", type=int)
@click.option("--angle-tol", type=float)
@click.option("--dist-tol", type=float)
@click.option("--eps-cover", type=float)
def bench(corpus, builtins, csv_path, json_path, **kw):
    """Table of mesh statistics, minimal finger counts and timings.

    Rows come from every .off/.obj/.stl file in CORPUS (sorted by name) and
    from each --builtin. Failing files get an error entry and the run goes on.
    """
    cfg = _make_config("bench", kw)
    try:
        rows = run_bench(cfg, corpus, builtins)
        text = rows_to_csv(rows)
        if csv_path:
            with open(csv_path, "w") as fh:
                fh.write(text)
        else:
            click.echo(text, nl=False)
        if json_path:
            _dump({"schema": SCHEMA, "command": "bench", "rows": rows}, json_path)
    except CliError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(exc.code)
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_IO)


@main.command()
@click.argument("name")
@click.argument("output", type=click.Path(dir_okay=False))
def generate(name, output):
    """Write built-in workpiece NAME (e.g. cube, prism8) to OUTPUT."""
    try:
        P = shapes.builtin(name)
        fmt = os.path.splitext(output)[1].lower().lstrip(".")
        fmt = {"stl": "stl-binary"}.get(fmt, fmt)
        export_polyhedron(P, fmt, output)
    except KeyError as exc:
        click.echo(f"error: {exc.args[0]}", err=True)
        sys.exit(EXIT_IO)
    except (OSError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_IO)


if __name__ == "__main__":  # pragma: no cover
    main()
