from .settings import Settings, get_settings, override_settings, reset_settings_cache
from .paths import CATALOG_PATH, OUTPUT_DIR, SCHEMAS_DIR, STATE_DIR

__all__ = [
    "Settings",
    "get_settings",
    "override_settings",
    "reset_settings_cache",
    "CATALOG_PATH",
    "OUTPUT_DIR",
    "SCHEMAS_DIR",
    "STATE_DIR",
]
