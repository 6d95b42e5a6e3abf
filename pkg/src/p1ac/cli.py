"""Benchmark CLI: a thin client of the HTTP service.

Runs against an in-process copy of the service by default; pass --server to
target a running instance instead.  All randomness flows from --seed, so
reruns with the same flags produce byte-identical outputs apart from the
timing columns.

Exit codes: 0 success, 1 runtime/I-O failure, 2 usage error.
"""

from __future__ import annotations

import asyncio
import json
import os
import sys

import click
import httpx

FIG3_DEFAULT = {"point_grid": [float(v) for v in range(0, 11)],
                "affine_grid": [0.0, 0.01, 0.02, 0.03, 0.04, 0.05],
                "normal_grid": [1.0]}
FIG4_DEFAULT = {"point_grid": [float(v) for v in range(0, 11)],
                "affine_grid": [0.01],
                "normal_grid": [float(v) for v in range(0, 11)]}

_METHOD_CHOICES = ("p3p", "p3p-1ac", "p1ac-null", "p1ac-3q3")
_ORDER_ALIASES = {"p3p": "p3p", "p3p-1ac": "p3p-1ac", "3q3": "p1ac-3q3",
                  "null": "p1ac-null", "p1ac-3q3": "p1ac-3q3",
                  "p1ac-null": "p1ac-null"}


def _post(ctx, path: str, payload: dict) -> dict:
    """Send one request to the service (remote or in-process ASGI)."""
    server = ctx.obj.get("server")

    async def go():
        if server:
            async with httpx.AsyncClient(base_url=server, timeout=None) as client:
                return await client.post(path, json=payload)
        from .service.app import app
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(transport=transport, base_url="http://p1ac",
                                     timeout=None) as client:
            return await client.post(path, json=payload)

    try:
        response = asyncio.run(go())
    except httpx.HTTPError as exc:
        raise click.ClickException(f"service request failed: {exc}")
    if response.status_code != 200:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        raise click.ClickException(f"{path} failed ({response.status_code}): {detail}")
    return response.json()


def _parse_grid(ctx, param, value):
    """Grid syntax: 'start:stop:count' or a comma list of values."""
    if value is None:
        return None
    try:
        if ":" in value:
            parts = value.split(":")
            if len(parts) != 3:
                raise ValueError("expected start:stop:count")
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 1:
                raise ValueError("count must be >= 1")
            if count == 1:
                return [start]
            step = (stop - start) / (count - 1)
            return [start + i * step for i in range(count)]
        grid = [float(v) for v in value.split(",") if v != ""]
        if not grid:
            raise ValueError("empty grid")
        return grid
    except ValueError as exc:
        raise click.BadParameter(f"malformed grid {value!r}: {exc}")


def _parse_methods(ctx, param, value):
    if value is None:
        return None
    methods = [m.strip() for m in value.split(",") if m.strip()]
    for m in methods:
        if m not in _METHOD_CHOICES:
            raise click.BadParameter(f"unknown method {m!r} "
                                     f"(choose from {', '.join(_METHOD_CHOICES)})")
    return methods


def _parse_ratio(ctx, param, value):
    if not (0.0 <= value < 1.0):
        raise click.BadParameter("outlier ratio must be in [0, 1)")
    return value


def _log_config(name: str, config: dict) -> None:
    click.echo(f"[{name}] config: {json.dumps(config, sort_keys=True)}", err=True)


def _write_text(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise click.ClickException(f"cannot write {path}: {exc}")


def _summary_path(csv_path: str) -> str:
    base, _ = os.path.splitext(csv_path)
    return base + ".summary.json"


def _write_report(out: str, data: dict) -> None:
    _write_text(out, data["csv"])
    _write_text(_summary_path(out), json.dumps(data["summary"], indent=2,
                                               sort_keys=True) + "\n")
    click.echo(f"wrote {out} and {_summary_path(out)}")


@click.group()
@click.option("--server", default=None, metavar="URL",
              help="Base URL of a running service; default runs in-process.")
@click.version_option()
@click.pass_context
def main(ctx, server):
    """Benchmarks and robust localization for single-AC absolute pose."""
    ctx.ensure_object(dict)
    ctx.obj["server"] = server


@main.command()
@click.option("--n", type=click.IntRange(min=1), default=10000, show_default=True,
              help="Number of random problem instances.")
@click.option("--methods", callback=_parse_methods, default=None, metavar="LIST",
              help="Comma-separated methods (default: all).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default="stability.csv",
              show_default=True)
@click.pass_context
def stability(ctx, n, methods, seed, out):
    """Zero-noise accuracy distribution per solver."""
    _log_config("stability", {"n": n, "methods": methods, "seed": seed, "out": out})
    data = _post(ctx, "/experiments/stability",
                 {"n": n, "seed": seed, "methods": methods})
    _write_report(out, data)


@main.command("noise-sweep")
@click.option("--point-grid", callback=_parse_grid, default=None, metavar="GRID",
              help="Point noise grid in pixels ('start:stop:count' or comma list).")
@click.option("--affine-grid", callback=_parse_grid, default=None, metavar="GRID")
@click.option("--normal-grid", callback=_parse_grid, default=None, metavar="GRID",
              help="Normal noise grid in degrees.")
@click.option("--n", type=click.IntRange(min=1), default=1000, show_default=True,
              help="Problems per grid cell.")
@click.option("--methods", callback=_parse_methods, default=None, metavar="LIST")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--focal", type=float, default=1000.0, show_default=True,
              help="Pixels per calibrated unit for noise conversion.")
@click.option("--out", type=click.Path(dir_okay=False), default="noise_sweep.csv",
              show_default=True)
@click.pass_context
def noise_sweep(ctx, point_grid, affine_grid, normal_grid, n, methods, seed,
                focal, out):
    """Error versus noise level.

    With no explicit grids, runs the two standard sweeps: point x affine noise
    at 1 degree normal noise, and point x normal noise at 0.01 affine noise,
    writing one table each.
    """
    config = {"point_grid": point_grid, "affine_grid": affine_grid,
              "normal_grid": normal_grid, "n": n, "methods": methods,
              "seed": seed, "focal": focal, "out": out}
    _log_config("noise-sweep", config)
    base, ext = os.path.splitext(out)
    ext = ext or ".csv"
    if point_grid is None and affine_grid is None and normal_grid is None:
        for tag, grids in (("point_affine", FIG3_DEFAULT), ("point_normal", FIG4_DEFAULT)):
            data = _post(ctx, "/experiments/noise-sweep",
                         {**grids, "n": n, "seed": seed, "methods": methods,
                          "focal_px": focal})
            _write_report(f"{base}.{tag}{ext}", data)
        return
    payload = {"point_grid": point_grid or [0.0],
               "affine_grid": affine_grid or [0.0],
               "normal_grid": normal_grid or [0.0],
               "n": n, "seed": seed, "methods": methods, "focal_px": focal}
    data = _post(ctx, "/experiments/noise-sweep", payload)
    _write_report(out, data)


@main.command()
@click.option("--n", type=click.IntRange(min=1), default=10000, show_default=True)
@click.option("--methods", callback=_parse_methods, default=None, metavar="LIST")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default="timings.csv",
              show_default=True)
@click.option("--assert-order", default=None, metavar="CHAIN",
              help="Fail unless mean times are increasing along e.g. 'p3p<3q3<null'.")
@click.pass_context
def timings(ctx, n, methods, seed, out, assert_order):
    """Mean wall-clock per solver call."""
    _log_config("timings", {"n": n, "methods": methods, "seed": seed, "out": out,
                            "assert_order": assert_order})
    if n < 1000:
        click.echo(f"warning: n={n} gives unstable timing statistics "
                   "(recommend n >= 1000)", err=True)
    data = _post(ctx, "/experiments/timings",
                 {"n": n, "seed": seed, "methods": methods})
    _write_text(out, data["csv"])
    click.echo(f"wrote {out}")
    means = {}
    for row in data["rows"]:
        means[row["method"]] = row["mean_us"]
        click.echo(f"{row['method']}: mean {row['mean_us']:.2f} us "
                   f"(median {row['median_us']:.2f} us, {row['trials']} trials)")
    if assert_order:
        chain = []
        for name in assert_order.split("<"):
            key = _ORDER_ALIASES.get(name.strip())
            if key is None:
                raise click.BadParameter(f"unknown method {name!r} in --assert-order")
            if key not in means:
                raise click.ClickException(f"method {key} missing from the run")
            chain.append(key)
        for a, b in zip(chain, chain[1:]):
            if not means[a] < means[b]:
                raise click.ClickException(
                    f"timing order violated: {a} ({means[a]:.2f} us) !< "
                    f"{b} ({means[b]:.2f} us)")
        click.echo(f"timing order satisfied: {' < '.join(chain)}")


@main.command()
@click.option("--scene", "scene_path", required=True, type=click.Path(dir_okay=False),
              help="Scene JSON (p1ac-scene/1).")
@click.option("--method", type=click.Choice(_METHOD_CHOICES), default="p1ac-3q3",
              show_default=True)
@click.option("--threshold-px", type=float, default=16.0, show_default=True)
@click.option("--max-iterations", type=click.IntRange(min=1), default=1000,
              show_default=True)
@click.option("--lo-steps", type=click.IntRange(min=0), default=10, show_default=True)
@click.option("--ls-iterations", type=click.IntRange(min=1), default=10,
              show_default=True)
@click.option("--confidence", type=float, default=0.99, show_default=True)
@click.option("--min-inliers", type=click.IntRange(min=1), default=10,
              show_default=True)
@click.option("--focal", type=float, default=1000.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write the JSON result here instead of stdout.")
@click.pass_context
def localize(ctx, scene_path, method, threshold_px, max_iterations, lo_steps,
             ls_iterations, confidence, min_inliers, focal, seed, out):
    """Robust localization against a scene file."""
    config = {"scene": scene_path, "method": method, "threshold_px": threshold_px,
              "max_iterations": max_iterations, "lo_steps": lo_steps,
              "ls_iterations": ls_iterations, "confidence": confidence,
              "min_inliers": min_inliers, "focal": focal, "seed": seed}
    _log_config("localize", config)
    if not os.path.exists(scene_path):
        raise click.ClickException(f"scene file not found: {scene_path}")
    try:
        with open(scene_path, "r", encoding="utf-8") as fh:
            document = json.load(fh)
    except (OSError, ValueError) as exc:
        raise click.ClickException(f"cannot read scene file: {exc}")
    payload = {
        "scene": document,
        "method": method,
        "config": {"inlier_threshold_px": threshold_px,
                   "max_iterations": max_iterations, "lo_steps": lo_steps,
                   "ls_iterations": ls_iterations, "confidence": confidence,
                   "min_inliers": min_inliers, "focal_px": focal, "seed": seed},
    }
    data = _post(ctx, "/localize", payload)
    text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    if out:
        _write_text(out, text)
        click.echo(f"wrote {out}")
    else:
        click.echo(text, nl=False)
    if not data["succeeded"]:
        click.echo("localization failed (too few inliers)", err=True)


@main.command("gen-scene")
@click.option("--refs", type=click.IntRange(min=1), default=4, show_default=True,
              help="Number of reference cameras.")
@click.option("--corrs", type=click.IntRange(min=1), default=200, show_default=True,
              help="Number of correspondences.")
@click.option("--outlier-ratio", type=float, default=0.5, show_default=True,
              callback=_parse_ratio)
@click.option("--point-sigma-px", type=float, default=0.0, show_default=True)
@click.option("--affine-sigma", type=float, default=0.0, show_default=True)
@click.option("--normal-sigma-deg", type=float, default=0.0, show_default=True)
@click.option("--focal", type=float, default=1000.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default="scene.json",
              show_default=True)
@click.pass_context
def gen_scene(ctx, refs, corrs, outlier_ratio, point_sigma_px, affine_sigma,
              normal_sigma_deg, focal, seed, out):
    """Simulate a multi-reference scene with planted outliers."""
    config = {"refs": refs, "corrs": corrs, "outlier_ratio": outlier_ratio,
              "point_sigma_px": point_sigma_px, "affine_sigma": affine_sigma,
              "normal_sigma_deg": normal_sigma_deg, "focal": focal,
              "seed": seed, "out": out}
    _log_config("gen-scene", config)
    payload = {"num_references": refs, "correspondences": corrs,
               "outlier_ratio": outlier_ratio, "point_sigma_px": point_sigma_px,
               "affine_sigma": affine_sigma, "normal_sigma_deg": normal_sigma_deg,
               "focal_px": focal, "seed": seed}
    document = _post(ctx, "/scenes/generate", payload)
    _write_text(out, json.dumps(document, indent=1) + "\n")
    click.echo(f"wrote {out} ({len(document['correspondences'])} correspondences, "
               f"{len(document['reference_poses'])} references)")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("p1ac.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
