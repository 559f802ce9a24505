import logging
from contextlib import contextmanager
from pathlib import Path
from typing import (
    IO,
    ContextManager,
    Iterator,
    Optional,
)

logger = logging.getLogger(__name__)


class BaseRepository:
    """Репозиторий поверх одного файла UTF-8"""

    def __init__(self, path: Path) -> None:
        self.path = Path(path)

    def __repr__(self) -> str:
        return f'{type(self).__name__}({str(self.path)!r})'

    @contextmanager
    def _opened(self, mode: str, **kwargs) -> Iterator[IO]:
        try:
            if 'w' in mode:
                self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open(mode, **kwargs) as f:
                yield f
        except UnicodeDecodeError as e:
            raise OSError(f'{self.path}: not valid UTF-8 ({e.reason} at byte {e.start})') from e
        except OSError as e:
            if str(self.path) in str(e):
                raise
            raise OSError(f'{self.path}: {e.strerror or e}') from e

    def open_read(self) -> ContextManager[IO[str]]:
        return self._opened('r', encoding='utf-8', newline='')

    def open_write(self) -> ContextManager[IO[str]]:
        return self._opened('w', encoding='utf-8', newline='')

    def raw_lines(self) -> Iterator[tuple[int, Optional[str]]]:
        """
        Строки файла без перевода строки, с номерами от 1.
        None на месте строки, которая не декодируется как UTF-8.
        """
        with self._opened('rb') as f:
            for number, raw in enumerate(f, start=1):
                try:
                    yield number, raw.decode('utf-8').rstrip('\r\n')
                except UnicodeDecodeError as e:
                    logger.debug(f'{self.path}:{number}: not valid UTF-8 ({e.reason} at byte {e.start})')
                    yield number, None

    def lines(self) -> Iterator[tuple[int, str]]:
        """Строки файла; недекодируемая строка прерывает чтение."""
        for number, line in self.raw_lines():
            if line is None:
                raise OSError(f'{self.path}:{number}: not valid UTF-8')
            yield number, line
