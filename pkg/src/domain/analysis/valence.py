"""
Частоты терминов по группам (страны и MSA) и оценка валентности:

    V(t)_i = 2 * (N(t,D_i) / N(D_i)) / sum_n (N(t,D_n) / N(D_n)) - 1

V = 1, если термин встречается только в группе i, и V = -1, если в группе i его нет.
Группы с N(D_n) = 0 в сумму не входят.
"""

import bisect
import csv
import logging
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import (
    Iterable,
    Mapping,
    Sequence,
    Union,
)

import numpy as np

from src.domain.exceptions import ValenceError
from src.domain.models.enums import GROUP_ORDER
from src.domain.textnorm import PLACEHOLDERS

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = '.9g'


def _ordered_groups(groups: Iterable[str]) -> tuple[str, ...]:
    groups = set(groups)
    unknown = groups - set(GROUP_ORDER)
    if unknown:
        raise ValenceError(f'Unknown groups: {sorted(unknown)}, expected codes from {GROUP_ORDER}')
    return tuple(group for group in GROUP_ORDER if group in groups)


@dataclass(frozen=True)
class TermCounts:
    """Матрица N(t, D_i): термины (лексикографически) × группы (канонический порядок)"""

    groups: tuple[str, ...]
    terms: tuple[str, ...]
    counts: np.ndarray
    totals: np.ndarray

    def __post_init__(self) -> None:
        if self.counts.shape != (len(self.terms), len(self.groups)):
            raise ValenceError(
                f'counts shape {self.counts.shape} does not match '
                f'{len(self.terms)} terms x {len(self.groups)} groups'
            )
        if (self.counts < 0).any():
            raise ValenceError('counts must be non-negative')

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TermCounts):
            return NotImplemented
        return (
            self.groups == other.groups
            and self.terms == other.terms
            and np.array_equal(self.counts, other.counts)
            and np.array_equal(self.totals, other.totals)
        )

    def group_index(self, group: Union[str, int]) -> int:
        if isinstance(group, int):
            return group
        try:
            return self.groups.index(group)
        except ValueError:
            raise ValenceError(f'Group {group!r} is not present, groups: {self.groups}')

    def term_index(self, term: str) -> int:
        position = bisect.bisect_left(self.terms, term)
        if position == len(self.terms) or self.terms[position] != term:
            raise ValenceError(f'Term {term!r} does not occur in any group, valence is undefined')
        return position

    @property
    def term_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @classmethod
    def from_counters(cls, counters: Mapping[str, Counter]) -> 'TermCounts':
        groups = _ordered_groups(counters)
        terms = tuple(sorted({term for counter in counters.values() for term in counter}))
        term_index = {term: index for index, term in enumerate(terms)}
        counts = np.zeros((len(terms), len(groups)), dtype=np.int64)
        for column, group in enumerate(groups):
            for term, count in counters[group].items():
                counts[term_index[term], column] = count
        return cls(groups=groups, terms=terms, counts=counts, totals=counts.sum(axis=0))


def count_terms(corpus: Mapping[str, Iterable[str]]) -> TermCounts:
    """Частоты токенов по группам; плейсхолдеры не считаются."""
    counters = {
        group: Counter(token for token in tokens if token not in PLACEHOLDERS)
        for group, tokens in corpus.items()
    }
    counts = TermCounts.from_counters(counters)
    logger.info(
        f'Counted {len(counts.terms)} terms over {len(counts.groups)} groups, '
        f'{int(counts.totals.sum())} tokens'
    )
    return counts


def merge_counts(left: TermCounts, right: TermCounts) -> TermCounts:
    """Ассоциативное слияние частичных подсчётов."""
    counters: dict[str, Counter] = {}
    for part in (left, right):
        for column, group in enumerate(part.groups):
            counter = counters.setdefault(group, Counter())
            for row in np.flatnonzero(part.counts[:, column]):
                counter[part.terms[row]] += int(part.counts[row, column])
    return TermCounts.from_counters(counters)


def valence_matrix(counts: TermCounts) -> np.ndarray:
    """Оценки валентности всех терминов по всем группам (float64)."""
    totals = counts.totals.astype(np.float64)
    relative = np.zeros(counts.counts.shape, dtype=np.float64)
    present = totals > 0
    relative[:, present] = counts.counts[:, present] / totals[present]
    denominator = relative.sum(axis=1, keepdims=True)
    if (denominator <= 0).any():
        missing = [counts.terms[row] for row in np.flatnonzero(denominator[:, 0] <= 0)]
        raise ValenceError(f'Terms without occurrences, valence undefined: {missing[:5]}')
    return 2.0 * relative / denominator - 1.0


def valence(term: str, counts: TermCounts, group: Union[str, int]) -> float:
    row = counts.term_index(term)
    column = counts.group_index(group)
    totals = counts.totals.astype(np.float64)
    present = totals > 0
    relative = np.zeros(len(counts.groups), dtype=np.float64)
    relative[present] = counts.counts[row, present] / totals[present]
    denominator = relative.sum()
    if denominator <= 0:
        raise ValenceError(f'Term {term!r} does not occur in any group, valence is undefined')
    return float(2.0 * relative[column] / denominator - 1.0)


def _ranked(keys: np.ndarray, frequency: np.ndarray, terms: Sequence[str]) -> list[int]:
    # по оценке (убывание), затем по общей частоте (убывание), затем лексикографически
    return sorted(range(len(terms)), key=lambda row: (-keys[row], -frequency[row], terms[row]))


def top_valence_words(
    counts: TermCounts, group: Union[str, int], k: int, min_count: int = 10
) -> list[tuple[str, float]]:
    if k < 1:
        raise ValenceError(f'k must be positive, got {k}')
    column = counts.group_index(group)
    scores = valence_matrix(counts)[:, column]
    frequency = counts.term_totals
    eligible = counts.counts[:, column] >= min_count
    ranked = [row for row in _ranked(scores, frequency, counts.terms) if eligible[row]]
    return [(counts.terms[row], float(scores[row])) for row in ranked[:k]]


def top_words_by_group(
    counts: TermCounts, k: int, min_count: int = 10
) -> dict[str, list[tuple[str, float]]]:
    return {group: top_valence_words(counts, group, k, min_count) for group in counts.groups}


@dataclass(frozen=True)
class ValenceMatrix:
    """Векторы валентности терминов: строки: термины, столбцы: группы"""

    terms: tuple[str, ...]
    groups: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.values.shape != (len(self.terms), len(self.groups)):
            raise ValenceError(
                f'values shape {self.values.shape} does not match '
                f'{len(self.terms)} terms x {len(self.groups)} groups'
            )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ValenceMatrix):
            return NotImplemented
        return (
            self.terms == other.terms
            and self.groups == other.groups
            and np.array_equal(self.values, other.values)
        )

    def column(self, group: str) -> np.ndarray:
        return self.values[:, self.groups.index(group)]


def valence_vectors(counts: TermCounts, top_k: int = 10000, min_count: int = 1) -> ValenceMatrix:
    """
    Термины с наибольшей валентностью хотя бы в одной группе (максимум по группам),
    не более top_k, с векторами валентности по всем группам.
    """
    if not counts.terms:
        raise ValenceError('Vocabulary is empty')
    scores = valence_matrix(counts)
    frequency = counts.term_totals
    eligible = frequency >= min_count
    ranked = [
        row for row in _ranked(scores.max(axis=1), frequency, counts.terms) if eligible[row]
    ][:top_k]
    return ValenceMatrix(
        terms=tuple(counts.terms[row] for row in ranked),
        groups=counts.groups,
        # 9 значащих цифр в CSV однозначно восстанавливают float32
        values=scores[ranked].astype(np.float32),
    )


def export_projection_matrix(vm: ValenceMatrix, path: Path) -> None:
    """CSV термин × группы для внешних инструментов проекции (t-SNE)."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open('w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f)
            writer.writerow(['term', *vm.groups])
            for term, row in zip(vm.terms, vm.values):
                writer.writerow([term, *(format(float(value), CSV_FLOAT_FORMAT) for value in row)])
    except OSError as e:
        raise OSError(f'Cannot write valence matrix to {path}: {e}') from e
    logger.info(f'Valence matrix {len(vm.terms)}x{len(vm.groups)} written to {path}')


def load_valence_csv(path: Path) -> ValenceMatrix:
    path = Path(path)
    try:
        with path.open(encoding='utf-8', newline='') as f:
            rows = list(csv.reader(f))
    except OSError as e:
        raise OSError(f'Cannot read valence matrix from {path}: {e}') from e
    if not rows or not rows[0] or rows[0][0] != 'term':
        raise ValenceError(f'{path}: header must start with "term"')
    groups = tuple(rows[0][1:])
    _ordered_groups(groups)
    terms, values = [], []
    for line_number, row in enumerate(rows[1:], start=2):
        if len(row) != len(groups) + 1:
            raise ValenceError(f'{path}:{line_number}: expected {len(groups) + 1} columns')
        try:
            values.append([float(value) for value in row[1:]])
        except ValueError as e:
            raise ValenceError(f'{path}:{line_number}: {e}') from e
        terms.append(row[0])
    matrix = np.array(values, dtype=np.float32).reshape(len(terms), len(groups))
    return ValenceMatrix(terms=tuple(terms), groups=groups, values=matrix)
