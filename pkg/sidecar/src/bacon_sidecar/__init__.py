"""HTTP model backend for the caption toolkit.

Serves the provider wire protocol (embedding, region proposal, region
judging, crop scoring, QA) over either real CLIP-class models or a
deterministic fake-model mode that needs no weights.
"""

__version__ = "0.1.0"

from .app import create_app
from .config import BackendConfig, load_config
from .fake import FakeModelSet

__all__ = ["BackendConfig", "FakeModelSet", "create_app", "load_config"]
