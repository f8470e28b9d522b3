import json
import logging

logger = logging.getLogger(__name__)

# --- Configuration (Load Configuration) ---
CONFIG_FILE = 'storage/settings.json'

DEFAULT_CONFIG = {
    "api_host": "127.0.0.1",
    "api_port": 5000,
    "dimension": 3,
    "coefficient_degree": 2,
    "form_degree": 2,
    "sym_degree": 2,
    "cases": 25,
    "seed": 1994,
    "workers": 1,
    "max_reports": 50,
    "log_level": "INFO"
}


def load_config(filepath=CONFIG_FILE):
    """Loads configuration from a JSON file, using defaults if file is missing."""
    try:
        with open(filepath, 'r') as f:
            config = json.load(f)
        return {**DEFAULT_CONFIG, **config}
    except FileNotFoundError:
        logger.warning("Configuration file not found at %s. Using defaults.", filepath)
        return dict(DEFAULT_CONFIG)
    except json.JSONDecodeError as e:
        logger.warning("Configuration file at %s is invalid (%s). Using defaults.", filepath, e)
        return dict(DEFAULT_CONFIG)


def save_config(config, filepath=CONFIG_FILE):
    with open(filepath, 'w') as f:
        json.dump(config, f, indent=4)
