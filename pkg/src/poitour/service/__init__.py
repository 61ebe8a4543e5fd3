"""HTTP serving layer over the core package."""

from .app import ServingContext, create_app, create_app_from_paths, load_context

__all__ = ["ServingContext", "create_app", "create_app_from_paths", "load_context"]
