"""Command line renderer: ``teleplot plot <kind> --in FILE --out FILE.png``."""

import sys

import click

from .render import RENDERERS


@click.group()
def main():
    """Render telegate output files to figures."""


@main.command("plot")
@click.argument("kind", type=click.Choice(sorted(RENDERERS)))
@click.option("--in", "in_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def plot_cmd(kind, in_path, out_path):
    """Render one input file to one image file."""
    RENDERERS[kind](in_path, out_path)
    click.echo(f"wrote {out_path}")


def run():
    try:
        main(standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        sys.exit(2)
    except click.Abort:
        sys.exit(2)
    except (ValueError, KeyError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)


if __name__ == "__main__":
    run()
