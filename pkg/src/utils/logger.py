import logging
import os
import sys
from logging.handlers import RotatingFileHandler


def testimation_home() -> str:
    """Root directory for config, logs and run history."""
    return os.getenv("TESTIMATION_HOME", os.path.join(os.path.expanduser("~"), ".testimation"))


def setup_logger(name="testimation", log_file="testimation.log", level=logging.INFO):
    """
    Sets up a logger with console and rotating file handlers.
    """
    logger = logging.getLogger(name)
    logger.setLevel(level)

    # Prevent adding handlers multiple times
    if logger.handlers:
        return logger

    formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')

    # Console goes to stderr so CSV written to stdout stays clean
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    try:
        log_dir = os.path.join(testimation_home(), "logs")
        os.makedirs(log_dir, exist_ok=True)
        file_handler = RotatingFileHandler(
            os.path.join(log_dir, log_file), maxBytes=5*1024*1024, backupCount=3
        )
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)
    except Exception as e:
        print(f"Failed to setup file logging: {e}", file=sys.stderr)

    return logger


def get_logger(name):
    """Returns a child of the package logger so module logs share its handlers."""
    if name.startswith("testimation"):
        return logging.getLogger(name)
    return logging.getLogger(f"testimation.{name}")


def set_level(level) -> None:
    """Change the level of the package logger and its handlers."""
    logger = logging.getLogger("testimation")
    logger.setLevel(level)
    for handler in logger.handlers:
        handler.setLevel(level)


# Default global logger
log = setup_logger()
