"""Per-event embedding export for the evseg pipeline."""

__version__ = "0.1.0"

from .export import ExportError, HashEncoder, build_encoder, export, write_container  # noqa: F401
