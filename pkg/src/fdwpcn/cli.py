"""Thin HTTP client for the service, plus a `serve` command.

Every command talks to the service API.  With ``--server`` it targets a
running instance; without it the service app is mounted in-process, so the
CLI works standalone while exercising exactly the same endpoints.
"""
from __future__ import annotations

import sys

import click
import httpx


def _client(server: str | None):
    if server:
        return httpx.Client(base_url=server, timeout=None)
    import warnings

    from .service.app import create_app
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from starlette.testclient import TestClient
        return TestClient(create_app())


def _post(client, path: str, payload: dict) -> dict:
    response = client.post(path, json=payload)
    if response.status_code != 200:
        raise click.ClickException(f"{path} failed ({response.status_code}): {response.text}")
    return response.json()


@click.group()
def main():
    """Throughput optimization experiments for a wirelessly powered
    full-duplex network with a reconfigurable reflecting surface."""


@main.command()
@click.argument("spec_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--server", default=None, help="Base URL of a running service.")
@click.option("-o", "--output", default=None,
              help="Output path stem (overrides output_path in the spec).")
def run(spec_file, server, output):
    """Run the experiment described by SPEC_FILE and write CSV/JSON results.

    Exits nonzero if any (scheme, value, seed) cell errored.
    """
    with open(spec_file) as f:
        spec_text = f.read()
    stem = output
    if stem is None:
        from .harness import experiment_from_text
        stem = experiment_from_text(spec_text).output_path
    with _client(server) as client:
        data = _post(client, "/experiments/run", {"spec_text": spec_text})
    with open(f"{stem}.csv", "w") as f:
        f.write(data["csv"])
    with open(f"{stem}_agg.csv", "w") as f:
        f.write(data["agg_csv"])
    with open(f"{stem}.json", "w") as f:
        f.write(data["summary_json"])
    click.echo(f"wrote {stem}.csv, {stem}_agg.csv, {stem}.json")
    if data["n_errors"]:
        click.echo(f"{data['n_errors']} cell(s) errored", err=True)
        sys.exit(1)


@main.command()
@click.option("--config", "config_file", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="System config file (flat key = value).")
@click.option("--scheme", "-s", required=True, help="Registered scheme tag.")
@click.option("--seed", "-n", default=0, type=int, show_default=True)
@click.option("--order", default="increasing_snr", show_default=True)
@click.option("--server", default=None, help="Base URL of a running service.")
@click.option("-o", "--output", default="trace.csv", show_default=True)
def trace(config_file, scheme, seed, order, server, output):
    """Export one scheme's per-iteration convergence trace."""
    with open(config_file) as f:
        config_text = f.read()
    with _client(server) as client:
        data = _post(client, "/trace", {"config_text": config_text,
                                        "scheme": scheme, "seed": seed,
                                        "order": order})
    with open(output, "w") as f:
        f.write(data["csv"])
    click.echo(f"wrote {output}")


@main.command()
@click.option("--config", "config_file", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--dump", is_flag=True, default=True,
              help="Dump the channel realization as CSV.")
@click.option("--server", default=None, help="Base URL of a running service.")
@click.option("-o", "--output", default="channels.csv", show_default=True)
def channels(config_file, dump, server, output):
    """Dump the config's channel realization (link, k, m, re, im rows)."""
    with open(config_file) as f:
        config_text = f.read()
    with _client(server) as client:
        data = _post(client, "/channels/dump", {"config_text": config_text})
    with open(output, "w") as f:
        f.write(data["csv"])
    click.echo(f"wrote {output}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(host, port):
    """Start the HTTP service."""
    import uvicorn
    uvicorn.run("fdwpcn.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
