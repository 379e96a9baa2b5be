import json
import os
from typing import Dict, Any
from pathlib import Path
import logging

# Module logger
logger = logging.getLogger(__name__)

REPORT_FORMATS = ("text", "structured")

# Keys that must hold non-negative integers
COUNT_KEYS = ("universe_size", "max_universe_size", "lambda_depth", "max_workers")


class Config:
    # ~/.nominal_ua holds config.json and the default log file
    CONFIG_DIR = Path(os.path.expanduser("~/.nominal_ua"))

    DEFAULT_CONFIG = {
        "universe_size": 3,  # names a, b, c
        "max_universe_size": 6,  # truncation cap for any universe
        "lambda_depth": 3,
        # Threading
        "use_threads": True,
        "max_workers": 4,
        # Reports
        "report_format": "text",
        "log_file": str(CONFIG_DIR / "nominal_ua.log"),
    }

    @staticmethod
    def config_file() -> Path:
        return Config.CONFIG_DIR / "config.json"

    @staticmethod
    def load() -> Dict[str, Any]:
        """
        Defaults overlaid with ~/.nominal_ua/config.json

        Unreadable files and ill-typed values are logged and replaced by
        the defaults; universe_size is clamped to max_universe_size.
        """
        Config.CONFIG_DIR.mkdir(parents=True, exist_ok=True)

        config = Config.DEFAULT_CONFIG.copy()
        config_file = Config.config_file()
        if config_file.exists():
            try:
                with open(config_file, 'r') as f:
                    config.update(json.load(f))
            except Exception as e:
                logger.error(f"Error loading config: {e}")

        Config._check_values(config)
        if config["universe_size"] > config["max_universe_size"]:
            logger.warning(f"universe_size {config['universe_size']} exceeds max_universe_size "
                           f"{config['max_universe_size']}, clamping")
            config["universe_size"] = config["max_universe_size"]

        return config

    @staticmethod
    def _check_values(config: Dict[str, Any]) -> None:
        for key in COUNT_KEYS:
            value = config[key]
            # bool is an int subclass
            if isinstance(value, bool) or not isinstance(value, int) or value < 0:
                logger.warning(f"Invalid {key} {value!r}, using {Config.DEFAULT_CONFIG[key]}")
                config[key] = Config.DEFAULT_CONFIG[key]
        if config["report_format"] not in REPORT_FORMATS:
            logger.warning(f"Unknown report_format {config['report_format']!r}, using text")
            config["report_format"] = "text"
        if not isinstance(config["use_threads"], bool):
            config["use_threads"] = bool(config["use_threads"])

    @staticmethod
    def save(config: Dict[str, Any]) -> None:
        """Save configuration to file"""
        Config.CONFIG_DIR.mkdir(parents=True, exist_ok=True)

        try:
            with open(Config.config_file(), 'w') as f:
                json.dump(config, f, indent=2, sort_keys=True)
            logger.info(f"Saved configuration to {Config.config_file()}")
        except Exception as e:
            logger.error(f"Error saving config: {e}")
