"""Command line interface.

Commands: render, zoom, validate, compare, errmap. Exit codes: 0 on
success, 1 for validation failures, 2 for I/O problems, 64 for bad
usage. ``-h`` is the height flag, so only ``--help`` prints help.
"""

from __future__ import annotations

import sys

import click
import numpy as np

from . import __version__
from .model import DocumentError, has_errors, parse_document, validate
from .oracle import OracleError, reference_render, relative_mean_error
from .render import (
    RasterImage,
    RenderError,
    ZoomRequest,
    encode_image,
    render,
    render_state,
    render_zoom,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_USAGE = 64

CTX = dict(help_option_names=["--help"])


def _load(path: str):
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise click.ClickException(f"cannot read {path}: {exc}") from exc
    return parse_document(data)


def _parse_viewport(text: str):
    parts = text.split(",")
    if len(parts) != 4:
        raise click.UsageError("--viewport expects x,y,w,h")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise click.UsageError(f"bad viewport: {exc}") from exc


@click.group(context_settings=CTX)
@click.version_option(__version__, prog_name="pvg")
def cli():
    """Poisson vector graphics renderer."""


size_opts = [
    click.option("-w", "--width", type=int, default=None, help="output width (px)"),
    click.option("-h", "--height", type=int, default=None, help="output height (px)"),
]


def add_opts(opts):
    def wrap(f):
        for opt in reversed(opts):
            f = opt(f)
        return f

    return wrap


@cli.command("render", context_settings=CTX)
@click.argument("input_path", metavar="INPUT")
@click.option("-o", "--output", default="out.png", show_default=True)
@add_opts(size_opts)
@click.option("--threads", type=int, default=None, envvar="PVG_THREADS")
@click.option("--supersample", type=int, default=1, show_default=True)
@click.option("--debug-dir", default=None,
              help="dump label map, f field and tree/diagram overlays here")
@click.option("-v", "--verbose", count=True)
def render_cmd(input_path, output, width, height, threads, supersample,
               debug_dir, verbose):
    """Render INPUT to a raster image."""
    doc = _load(input_path)
    width = width or doc.canvas_width
    height = height or doc.canvas_height
    diags = validate(doc)
    _print_diags(diags, verbose)
    if has_errors(diags):
        raise ValidationFailure()
    state = None
    if supersample > 1:
        img = render(doc, width, height, threads=threads, supersample=supersample)
    else:
        state = render_state(doc, width, height, threads=threads)
        img = state.image
    try:
        encode_image(img, output)
    except OSError as exc:
        raise click.ClickException(f"cannot write {output}: {exc}") from exc
    if debug_dir and state is not None:
        from .debug import dump_scene

        dump_scene(state.scene, debug_dir)
    if verbose and state is not None:
        t = state.timings
        click.echo(f"T_d={t.discretize:.3f}s T_s={t.solve:.3f}s T={t.total:.3f}s")


@cli.command("zoom", context_settings=CTX)
@click.argument("input_path", metavar="INPUT")
@click.option("-o", "--output", default="zoom.png", show_default=True)
@add_opts(size_opts)
@click.option("--viewport", required=True, help="doc-space rect x,y,w,h")
@click.option("--threads", type=int, default=None, envvar="PVG_THREADS")
@click.option("-v", "--verbose", count=True)
def zoom_cmd(input_path, output, width, height, viewport, threads, verbose):
    """Render a zoomed viewport of INPUT without re-solving."""
    doc = _load(input_path)
    rect = _parse_viewport(viewport)
    width = width or doc.canvas_width
    height = height or doc.canvas_height
    diags = validate(doc)
    _print_diags(diags, verbose)
    if has_errors(diags):
        raise ValidationFailure()
    state = render_state(doc, doc.canvas_width, doc.canvas_height, threads=threads)
    img = render_zoom(state, ZoomRequest(rect, width, height), threads=threads)
    try:
        encode_image(img, output)
    except OSError as exc:
        raise click.ClickException(f"cannot write {output}: {exc}") from exc
    if verbose:
        t = state.timings
        click.echo(f"T_d={t.discretize:.3f}s T_s={t.solve:.3f}s T={t.total:.3f}s")


@cli.command("validate", context_settings=CTX)
@click.argument("input_path", metavar="INPUT")
@click.option("-v", "--verbose", count=True)
def validate_cmd(input_path, verbose):
    """Check INPUT; exit 1 if it has blocking errors."""
    doc = _load(input_path)
    diags = validate(doc)
    _print_diags(diags, verbose + 1)
    if has_errors(diags):
        raise ValidationFailure()
    click.echo("ok")


@cli.command("compare", context_settings=CTX)
@click.argument("input_path", metavar="INPUT")
@add_opts(size_opts)
@click.option("--threads", type=int, default=None, envvar="PVG_THREADS")
@click.option("-v", "--verbose", count=True)
def compare_cmd(input_path, width, height, threads, verbose):
    """Render INPUT and report per-channel error against the FD oracle."""
    doc = _load(input_path)
    width = width or doc.canvas_width
    height = height or doc.canvas_height
    diags = validate(doc)
    _print_diags(diags, verbose)
    if has_errors(diags):
        raise ValidationFailure()
    img = render(doc, width, height, threads=threads)
    try:
        ref = reference_render(doc, width, height)
    except OracleError as exc:
        raise click.ClickException(str(exc)) from exc
    rme = relative_mean_error(img, ref)
    click.echo("channel  rme%")
    for name, v in zip("RGB", rme):
        click.echo(f"{name}        {v:.4f}")
    click.echo(f"mean     {rme.mean():.4f}")
    click.echo(f"max      {rme.max():.4f}")


@cli.command("errmap", context_settings=CTX)
@click.argument("input_path", metavar="INPUT")
@click.option("-o", "--output", default="errmap.png", show_default=True)
@add_opts(size_opts)
@click.option("--amplify", type=float, default=50.0, show_default=True)
@click.option("--threads", type=int, default=None, envvar="PVG_THREADS")
@click.option("-v", "--verbose", count=True)
def errmap_cmd(input_path, output, width, height, amplify, threads, verbose):
    """Write an amplified |engine - oracle| difference image."""
    doc = _load(input_path)
    width = width or doc.canvas_width
    height = height or doc.canvas_height
    diags = validate(doc)
    _print_diags(diags, verbose)
    if has_errors(diags):
        raise ValidationFailure()
    img = render(doc, width, height, threads=threads)
    try:
        ref = reference_render(doc, width, height)
    except OracleError as exc:
        raise click.ClickException(str(exc)) from exc
    diff = np.abs(img.channels - ref.channels) * amplify
    out = RasterImage(width=width, height=height, channels=diff)
    try:
        encode_image(out, output)
    except OSError as exc:
        raise click.ClickException(f"cannot write {output}: {exc}") from exc


class ValidationFailure(Exception):
    pass


def _print_diags(diags, verbose):
    for d in diags:
        if d.is_error or verbose:
            click.echo(f"{d.severity}: [{d.code}] {d.message}", err=True)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except ValidationFailure:
        return EXIT_VALIDATION
    except (click.UsageError, click.NoSuchOption, click.BadParameter) as exc:
        click.echo(exc.format_message(), err=True)
        if exc.ctx is not None:
            click.echo(exc.ctx.get_usage(), err=True)
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_IO
    except DocumentError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_VALIDATION
    except RenderError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_VALIDATION
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except OSError as exc:
        click.echo(f"I/O error: {exc}", err=True)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
