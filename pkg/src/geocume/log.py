import logging
import sys
from typing import Optional

# Поля LogRecord, которые не являются пользовательскими extra
_RESERVED = set(vars(logging.makeLogRecord({}))) | {"message", "asctime", "event"}


class KeyValueFormatter(logging.Formatter):
    """Форматтер, выводящий запись как строку key=value"""

    def format(self, record: logging.LogRecord) -> str:
        event = getattr(record, "event", record.name)
        parts = [
            f"level={record.levelname.lower()}",
            f"event={event}",
            f'msg="{record.getMessage()}"',
        ]
        for key in sorted(vars(record)):
            if key not in _RESERVED:
                parts.append(f"{key}={getattr(record, key)}")
        return " ".join(parts)


def configure_logging(level: int = logging.INFO, log_file: Optional[str] = None) -> None:
    """
    Настраивает логгер пакета geocume. Вызывается один раз из CLI.

    Args:
        level: Уровень логирования
        log_file: Необязательный файл для дублирования записей
    """
    logger = logging.getLogger("geocume")
    logger.setLevel(level)
    logger.handlers.clear()

    handlers: list[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file, encoding="utf-8"))

    for handler in handlers:
        handler.setFormatter(KeyValueFormatter())
        logger.addHandler(handler)
    logger.propagate = False
