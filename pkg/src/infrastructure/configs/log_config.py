import logging
from logging.config import fileConfig
from pathlib import Path
from typing import Optional

LOGGING_CONFIG = Path(__file__).resolve().parents[3] / 'logging.ini'


def setup_logging(level: Optional[str] = None, config_path: Path = LOGGING_CONFIG) -> None:
    """Логи только в stderr: stdout занят итоговой JSON-строкой команды."""
    if config_path.exists():
        fileConfig(config_path, disable_existing_loggers=False)
    else:
        logging.basicConfig(format='%(levelname)-5.5s [%(name)s] %(message)s')
    if level is not None:
        level = level.upper()
        logging.getLogger().setLevel(level)
        logging.getLogger('src').setLevel(level)
