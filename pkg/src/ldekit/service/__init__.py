"""FastAPI session service wrapping the core toolkit."""

from .app import create_app, load_model_dir

__all__ = ["create_app", "load_model_dir"]
