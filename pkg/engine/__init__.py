from engine.config import get_settings, override_settings
from engine.errors import FractalZetaError, InvalidInput, NumericFailure

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "get_settings",
    "override_settings",
    "FractalZetaError",
    "InvalidInput",
    "NumericFailure",
]
