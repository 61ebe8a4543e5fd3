"""Launcher for the HTTP service."""

from __future__ import annotations

import click
import uvicorn

from .app import create_app_from_paths


@click.command()
@click.option("--model", "model_path", required=True, help="Trained model file.")
@click.option("--pois", "pois_path", required=True, help="POI table file.")
@click.option("--archive", "archive_path", required=True, help="Trajectory archive.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def main(model_path: str, pois_path: str, archive_path: str, host: str, port: int) -> None:
    """Serve recommendations from a trained model."""
    app = create_app_from_paths(model_path, pois_path, archive_path)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
