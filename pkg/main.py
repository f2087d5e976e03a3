"""
Entry point for the SVIR toolkit command line
"""
import logging
import sys

from app.cli import run
from app.config import Config


def configure_logging():
    """Console logging in the toolkit format, plus a file when SVIR_LOG_FILE is set"""
    log_format = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    logging.basicConfig(format=log_format, level=Config.get_log_level(), stream=sys.stderr)
    if Config.LOG_FILE:
        handler = logging.FileHandler(Config.LOG_FILE, encoding="utf-8")
        handler.setFormatter(logging.Formatter(log_format))
        logging.getLogger().addHandler(handler)


def main(argv=None) -> int:
    configure_logging()
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
