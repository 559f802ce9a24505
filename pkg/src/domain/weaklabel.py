"""
Слабая разметка MSA/DA по относительным местоимениям.

Твит с литературными местоимениями (الذي، التي، الذين ...) и без диалектных
получает метку MSA, с диалектными (اللي، اللى) и без литературных получает DA.
Смешанные и твиты без местоимений не размечаются. После разметки текст
нормализуется с заменой местоимений на RELATIVE.
"""

import logging
from enum import Enum
from functools import partial
from typing import (
    Callable,
    Iterable,
    Iterator,
    Mapping,
    Optional,
    Sequence,
    Union,
)

import numpy as np
from pydantic import (
    ValidationError,
    field_validator,
)

from src.domain.exceptions import (
    ConfigurationError,
    LabelSetError,
)
from src.domain.lintext.model import TextClassifier
from src.domain.models.base import (
    MutableRecordModel,
    RecordModel,
)
from src.domain.models.enums import VariantLabelEnum
from src.domain.models.records import TweetRecord
from src.domain.textnorm import (
    DA_RELATIVE_PRONOUNS,
    MSA_RELATIVE_PRONOUNS,
    TRIGGER_PRONOUNS,
    WEAK_CORPUS_CONFIG,
    NormalizationConfig,
    normalize_tweet,
    tokenize,
)

logger = logging.getLogger(__name__)

MSA_TRIGGERS = frozenset(MSA_RELATIVE_PRONOUNS)
DA_TRIGGERS = frozenset(DA_RELATIVE_PRONOUNS)

# None: пустая строка JSONL или значение, не являющееся объектом
RawRow = Optional[Union[TweetRecord, Mapping, str]]


class WeakLabeledRecord(RecordModel):
    text: str
    label: VariantLabelEnum

    @field_validator('text')
    def no_trigger_tokens(cls, v: str) -> str:
        leaked = TRIGGER_PRONOUNS.intersection(tokenize(v))
        if leaked:
            raise ValueError(f'text still contains trigger pronouns: {sorted(leaked)}')
        return v


class RowStatus(str, Enum):
    MALFORMED = 'malformed'
    MIXED = 'mixed'
    UNLABELED = 'unlabeled'
    LABELED = 'labeled'


class WeakLabelDiagnostics(MutableRecordModel):
    """Счётчики построения корпуса"""

    rows: int = 0
    malformed: int = 0
    msa: int = 0
    da: int = 0
    mixed: int = 0
    unlabeled: int = 0

    @property
    def emitted(self) -> int:
        return self.msa + self.da


def _trigger_families(text: str) -> tuple[bool, bool]:
    tokens = set(tokenize(text))
    return not MSA_TRIGGERS.isdisjoint(tokens), not DA_TRIGGERS.isdisjoint(tokens)


def label_by_pronoun(text: str) -> Optional[VariantLabelEnum]:
    """Метка по местоимениям-триггерам; совпадение только целым токеном."""
    has_msa, has_da = _trigger_families(text)
    if has_msa and not has_da:
        return VariantLabelEnum.MSA
    if has_da and not has_msa:
        return VariantLabelEnum.DA
    return None


def label_row(
    row: RawRow, cfg: NormalizationConfig = WEAK_CORPUS_CONFIG
) -> tuple[RowStatus, Optional[WeakLabeledRecord]]:
    """Размечает одну строку входа. Функция верхнего уровня: пригодна для пула процессов."""
    if isinstance(row, TweetRecord):
        text = row.text
    elif isinstance(row, str):
        text = row
    else:
        try:
            text = TweetRecord.model_validate(row).text
        except ValidationError:
            return RowStatus.MALFORMED, None

    has_msa, has_da = _trigger_families(text)
    if has_msa and has_da:
        return RowStatus.MIXED, None
    if not (has_msa or has_da):
        return RowStatus.UNLABELED, None
    label = VariantLabelEnum.MSA if has_msa else VariantLabelEnum.DA
    record = WeakLabeledRecord(text=normalize_tweet(text, cfg), label=label)
    return RowStatus.LABELED, record


Mapper = Callable[[Callable, Iterable], Iterable]


def build_weak_corpus(
    rows: Iterable[RawRow],
    cfg: NormalizationConfig = WEAK_CORPUS_CONFIG,
    diagnostics: Optional[WeakLabelDiagnostics] = None,
    mapper: Mapper = map,
) -> Iterator[WeakLabeledRecord]:
    """
    Поток слабо размеченных записей в порядке входа.
    mapper должен сохранять порядок (map или пул процессов с упорядоченным map).
    """
    if not cfg.replace_relative_pronouns:
        raise ConfigurationError(
            'replace_relative_pronouns must be enabled to build the weak corpus'
        )
    if diagnostics is None:
        diagnostics = WeakLabelDiagnostics()

    for status, record in mapper(partial(label_row, cfg=cfg), rows):
        diagnostics.rows += 1
        if status == RowStatus.MALFORMED:
            diagnostics.malformed += 1
        elif status == RowStatus.MIXED:
            diagnostics.mixed += 1
        elif status == RowStatus.UNLABELED:
            diagnostics.unlabeled += 1
        else:
            if record.label == VariantLabelEnum.MSA:
                diagnostics.msa += 1
            else:
                diagnostics.da += 1
            yield record

    if diagnostics.malformed:
        logger.warning(f'Skipped {diagnostics.malformed} malformed rows')
    logger.info(
        f'Weak corpus: {diagnostics.rows} rows, {diagnostics.msa} MSA, {diagnostics.da} DA, '
        f'{diagnostics.mixed} mixed, {diagnostics.unlabeled} unlabeled'
    )


def _indices_by_label(records: Sequence[WeakLabeledRecord]) -> dict[str, list[int]]:
    by_label: dict[str, list[int]] = {}
    for index, record in enumerate(records):
        by_label.setdefault(record.label.value, []).append(index)
    return dict(sorted(by_label.items()))


def balance_classes(
    records: Sequence[WeakLabeledRecord], seed: int
) -> list[WeakLabeledRecord]:
    """Прореживает больший класс до размера меньшего, порядок входа сохраняется."""
    by_label = _indices_by_label(records)
    if len(by_label) < 2:
        raise LabelSetError('Class balancing needs records of both MSA and DA')
    size = min(len(indices) for indices in by_label.values())
    rng = np.random.default_rng(seed)
    keep: list[int] = []
    for indices in by_label.values():
        if len(indices) > size:
            indices = rng.choice(indices, size=size, replace=False).tolist()
        keep.extend(indices)
    logger.info(f'Balanced weak corpus to {size} records per class')
    return [records[index] for index in sorted(keep)]


def split_holdout(
    records: Sequence[WeakLabeledRecord], per_class: int, seed: int
) -> tuple[list[WeakLabeledRecord], list[WeakLabeledRecord]]:
    """Детерминированно откладывает per_class записей каждой метки: (обучение, тест)."""
    if per_class < 1:
        raise ConfigurationError(f'per_class must be positive, got {per_class}')
    rng = np.random.default_rng(seed)
    held: set[int] = set()
    for label, indices in _indices_by_label(records).items():
        if len(indices) <= per_class:
            raise LabelSetError(
                f'Label {label} has {len(indices)} records, cannot hold out {per_class}'
            )
        chosen = rng.permutation(len(indices))[:per_class]
        held.update(indices[position] for position in chosen)
    train = [record for index, record in enumerate(records) if index not in held]
    holdout = [record for index, record in enumerate(records) if index in held]
    return train, holdout


class VariantAudit(RecordModel):
    total: int
    dialectal: int

    @property
    def dialectal_share(self) -> float:
        return self.dialectal / self.total if self.total else 0.0


def audit_variant_share(
    model: TextClassifier,
    texts: Iterable[str],
    cfg: NormalizationConfig = WEAK_CORPUS_CONFIG,
) -> VariantAudit:
    """Доля текстов, которые классификатор MSA/DA относит к диалекту."""
    if set(model.labels) != {label.value for label in VariantLabelEnum}:
        raise LabelSetError(f'Expected an MSA/DA model, got labels {model.labels}')
    total = dialectal = 0
    for text in texts:
        total += 1
        if model.predict(normalize_tweet(text, cfg)).label == VariantLabelEnum.DA.value:
            dialectal += 1
    return VariantAudit(total=total, dialectal=dialectal)
