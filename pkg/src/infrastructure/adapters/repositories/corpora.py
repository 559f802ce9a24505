import csv
import json
import logging
from typing import (
    Any,
    Iterable,
    Iterator,
    Sequence,
)

import regex as re

from src.domain.exceptions import ConfigurationError
from src.domain.pipeline import CorpusRow
from src.infrastructure.adapters.repositories.base import BaseRepository

logger = logging.getLogger(__name__)

# табуляции и переводы строк внутри текста заменяются пробелом
TSV_UNSAFE_RE = re.compile(r'[\t\r\n\x0b\x0c\x1c-\x1e\x85\u2028\u2029]')


def tsv_cell(value: str) -> str:
    return TSV_UNSAFE_RE.sub(' ', value)


class TsvRepository(BaseRepository):
    """TSV без заголовка с фиксированным числом столбцов"""

    columns: int = 2

    def read_rows(self) -> Iterator[list[str]]:
        for number, line in self.lines():
            if not line:
                continue
            cells = line.split('\t')
            if len(cells) != self.columns:
                raise ConfigurationError(
                    f'{self.path}:{number}: expected {self.columns} tab-separated columns, got {len(cells)}'
                )
            yield cells

    def write_rows(self, rows: Iterable[Sequence[str]]) -> int:
        count = 0
        with self.open_write() as f:
            for row in rows:
                f.write('\t'.join(tsv_cell(str(cell)) for cell in row))
                f.write('\n')
                count += 1
        logger.info(f'Wrote {count} rows to {self.path}')
        return count


class LabeledCorpusRepository(TsvRepository):
    """(метка, текст): слабо размеченный корпус и обучающие корпуса"""

    def read(self) -> list[tuple[str, str]]:
        """Пары (текст, метка) в порядке файла."""
        return [(text, label) for label, text in self.read_rows()]

    def write(self, records: Iterable[tuple[str, str]]) -> int:
        return self.write_rows((label, text) for text, label in records)


class CountryCorpusRepository(TsvRepository):
    """(страна, user_id, текст): корпус после каскада фильтров"""

    columns = 3

    def read(self) -> Iterator[CorpusRow]:
        for country, user_id, text in self.read_rows():
            yield CorpusRow(country=country, user_id=user_id, text=text)

    def write(self, rows: Iterable[CorpusRow]) -> int:
        return self.write_rows((row.country, row.user_id, row.text) for row in rows)

    def read_labeled(self) -> list[tuple[str, str]]:
        return [(row.text, row.country) for row in self.read()]


class PredictionRepository(TsvRepository):
    """(истинная метка, предсказанная, текст)"""

    columns = 3

    def read(self) -> tuple[list[str], list[str], list[str]]:
        gold, pred, texts = [], [], []
        for gold_label, pred_label, text in self.read_rows():
            gold.append(gold_label)
            pred.append(pred_label)
            texts.append(text)
        return gold, pred, texts

    def write(self, gold: Sequence[str], pred: Sequence[str], texts: Sequence[str]) -> int:
        return self.write_rows(zip(gold, pred, texts))


class JsonRepository(BaseRepository):
    def read(self) -> Any:
        with self.open_read() as f:
            try:
                return json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigurationError(f'{self.path}: invalid JSON: {e}') from e

    def write(self, obj: Any) -> None:
        with self.open_write() as f:
            json.dump(obj, f, ensure_ascii=False, indent=2)
            f.write('\n')
        logger.info(f'Wrote {self.path}')


class CsvRepository(BaseRepository):
    def write(self, rows: Iterable[Sequence[Any]]) -> None:
        with self.open_write() as f:
            csv.writer(f).writerows(rows)
        logger.info(f'Wrote {self.path}')


def read_labeled_corpus(path) -> list[tuple[str, str]]:
    """
    Пары (текст, метка) из TSV любого из форматов: (метка, текст)
    или (страна, user_id, текст). Формат определяется по первой строке.
    """
    first = next((line for _, line in BaseRepository(path).lines() if line), '')
    if first.count('\t') == 2:
        return CountryCorpusRepository(path).read_labeled()
    return LabeledCorpusRepository(path).read()
