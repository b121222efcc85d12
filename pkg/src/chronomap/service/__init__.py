"""HTTP service and command-line entry points."""

from .config import AppConfig
from .context import AppContext
from .app import create_app

__all__ = ["AppConfig", "AppContext", "create_app"]
