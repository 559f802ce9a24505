"""
Оценка классификации: матрица ошибок, precision/recall/F1 по классам,
macro-F1, F1 по длине твита и ошибки внутри и между регионами.
"""

from dataclasses import dataclass
from typing import (
    Mapping,
    Optional,
    Sequence,
)

import numpy as np
from pydantic import Field
from sklearn.metrics import confusion_matrix

from src.domain.exceptions import EvaluationError
from src.domain.models.base import RecordModel
from src.domain.models.enums import (
    GROUP_ORDER,
    CountryEnum,
    RegionEnum,
)
from src.domain.textnorm import tokenize


@dataclass(frozen=True)
class ConfusionMatrix:
    """Строки: истинные метки, столбцы: предсказанные"""

    labels: tuple[str, ...]
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def correct(self) -> int:
        return int(np.trace(self.counts))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.counts, other.counts)

    def cell(self, gold: str, pred: str) -> int:
        return int(self.counts[self.labels.index(gold), self.labels.index(pred)])

    def rows(self) -> list[list]:
        """Таблица для CSV: заголовок и строки с истинной меткой первым столбцом."""
        table: list[list] = [['gold\\pred', *self.labels]]
        for label, row in zip(self.labels, self.counts):
            table.append([label, *(int(value) for value in row)])
        return table


def default_label_order(labels: set[str]) -> tuple[str, ...]:
    if labels <= set(GROUP_ORDER):
        return tuple(label for label in GROUP_ORDER if label in labels)
    return tuple(sorted(labels))


def confusion(
    gold: Sequence[str], pred: Sequence[str], labels: Optional[Sequence[str]] = None
) -> ConfusionMatrix:
    if len(gold) != len(pred):
        raise EvaluationError(f'gold has {len(gold)} labels, pred has {len(pred)}')
    if not gold:
        raise EvaluationError('Nothing to evaluate: no examples')
    if labels is None:
        labels = default_label_order(set(gold) | set(pred))
    labels = tuple(labels)
    unknown = (set(gold) | set(pred)) - set(labels)
    if unknown:
        raise EvaluationError(f'Labels outside the declared label set: {sorted(unknown)}')
    counts = confusion_matrix(list(gold), list(pred), labels=list(labels))
    return ConfusionMatrix(labels=labels, counts=counts.astype(np.int64))


class ClassMetrics(RecordModel):
    precision: float
    recall: float
    f1: float
    support: int


def per_class_metrics(cm: ConfusionMatrix) -> dict[str, ClassMetrics]:
    """Классы без предсказаний и без примеров получают нули."""
    true_positive = np.diag(cm.counts).astype(np.float64)
    predicted = cm.counts.sum(axis=0).astype(np.float64)
    support = cm.counts.sum(axis=1)
    precision = np.divide(
        true_positive, predicted, out=np.zeros_like(true_positive), where=predicted > 0
    )
    recall = np.divide(
        true_positive, support, out=np.zeros_like(true_positive), where=support > 0
    )
    denominator = precision + recall
    f1 = np.divide(
        2 * precision * recall, denominator, out=np.zeros_like(denominator), where=denominator > 0
    )
    return {
        label: ClassMetrics(
            precision=float(precision[i]),
            recall=float(recall[i]),
            f1=float(f1[i]),
            support=int(support[i]),
        )
        for i, label in enumerate(cm.labels)
    }


def macro_f1(cm: ConfusionMatrix) -> float:
    """Невзвешенное среднее F1 по всем объявленным меткам."""
    if not cm.labels:
        raise EvaluationError('Confusion matrix has no labels')
    metrics = per_class_metrics(cm)
    return float(np.mean([metrics[label].f1 for label in cm.labels]))


def accuracy(cm: ConfusionMatrix) -> float:
    return cm.correct / cm.total if cm.total else 0.0


class LengthBin(RecordModel):
    bin: int
    min_length: int
    max_length: int
    macro_f1: float
    support: int


def length_bin(length: int, bin_width: int) -> int:
    # длины 1..w попадают в корзину 1, w+1..2w в корзину 2, пустой твит в первую
    return max(1, (length - 1) // bin_width + 1)


def f1_by_length(
    gold: Sequence[str], pred: Sequence[str], texts: Sequence[str], bin_width: int = 5
) -> list[LengthBin]:
    if not len(gold) == len(pred) == len(texts):
        raise EvaluationError('gold, pred and texts must have the same length')
    if bin_width < 1:
        raise EvaluationError(f'bin_width must be positive, got {bin_width}')
    buckets: dict[int, list[int]] = {}
    for index, text in enumerate(texts):
        buckets.setdefault(length_bin(len(tokenize(text)), bin_width), []).append(index)
    result = []
    for number in sorted(buckets):
        indices = buckets[number]
        bucket_gold = [gold[i] for i in indices]
        bucket_pred = [pred[i] for i in indices]
        cm = confusion(bucket_gold, bucket_pred)
        result.append(
            LengthBin(
                bin=number,
                min_length=(number - 1) * bin_width + 1,
                max_length=number * bin_width,
                macro_f1=macro_f1(cm),
                support=len(indices),
            )
        )
    return result


DEFAULT_REGIONS: dict[str, str] = {
    **{code: RegionEnum.GULF.value for code in ('OM', 'BH', 'KW', 'SA', 'AE', 'QA')},
    **{code: RegionEnum.LEVANT.value for code in ('JO', 'PL', 'LB', 'SY')},
    **{code: RegionEnum.MAGHREB.value for code in ('MA', 'DZ', 'LY', 'TN')},
    **{code: RegionEnum.NILE.value for code in ('EG', 'SD')},
    CountryEnum.IQ.value: RegionEnum.IRAQ.value,
    CountryEnum.YE.value: RegionEnum.YEMEN.value,
}


class RegionMap(RecordModel):
    """Метка → регион"""

    regions: dict[str, str] = Field(default_factory=lambda: dict(DEFAULT_REGIONS))

    def region_of(self, label: str) -> str:
        return self.regions[label]

    def check_covers(self, labels: Sequence[str]) -> None:
        missing = [label for label in labels if label not in self.regions]
        if missing:
            raise EvaluationError(f'Region map has no region for labels: {missing}')


class RegionConfusion(RecordModel):
    misclassified: int
    # доли от числа ошибок
    within_region_share: float = Field(ge=0, le=1)
    outlier_share: float = Field(ge=0, le=1)
    # доля ошибок между регионами от всех примеров
    outlier_share_of_total: float = Field(ge=0, le=1)


def _region_mask(cm: ConfusionMatrix, regions: RegionMap) -> np.ndarray:
    regions.check_covers(cm.labels)
    names = [regions.region_of(label) for label in cm.labels]
    return np.array([[gold == pred for pred in names] for gold in names], dtype=bool)


def region_confusion(cm: ConfusionMatrix, regions: RegionMap = RegionMap()) -> RegionConfusion:
    same_region = _region_mask(cm, regions)
    off_diagonal = ~np.eye(len(cm.labels), dtype=bool)
    misclassified = int(cm.counts[off_diagonal].sum())
    if not misclassified:
        return RegionConfusion(
            misclassified=0, within_region_share=0.0, outlier_share=0.0, outlier_share_of_total=0.0
        )
    within = int(cm.counts[off_diagonal & same_region].sum())
    outliers = misclassified - within
    return RegionConfusion(
        misclassified=misclassified,
        within_region_share=within / misclassified,
        outlier_share=outliers / misclassified,
        outlier_share_of_total=outliers / cm.total,
    )


def region_accuracy(cm: ConfusionMatrix, regions: RegionMap = RegionMap()) -> float:
    """Доля примеров, предсказанных в регион истинной метки."""
    same_region = _region_mask(cm, regions)
    return int(cm.counts[same_region].sum()) / cm.total if cm.total else 0.0


class EvalReport(RecordModel):
    labels: list[str]
    examples: int
    accuracy: float
    macro_f1: float
    region_accuracy: float
    per_class: dict[str, ClassMetrics]
    length_bins: list[LengthBin]
    region_confusion: RegionConfusion
    confusion: list[list[int]]


def evaluate(
    gold: Sequence[str],
    pred: Sequence[str],
    texts: Sequence[str],
    labels: Optional[Sequence[str]] = None,
    regions: Optional[Mapping[str, str]] = None,
    bin_width: int = 5,
) -> tuple[ConfusionMatrix, EvalReport]:
    cm = confusion(gold, pred, labels)
    if regions is not None:
        region_map = RegionMap(regions=dict(regions))
    elif set(cm.labels) <= set(DEFAULT_REGIONS):
        region_map = RegionMap()
    else:
        # метки не страны (например MSA/DA): каждая метка образует свой регион
        region_map = RegionMap(regions={label: label for label in cm.labels})
    report = EvalReport(
        labels=list(cm.labels),
        examples=cm.total,
        accuracy=accuracy(cm),
        macro_f1=macro_f1(cm),
        region_accuracy=region_accuracy(cm, region_map),
        per_class=per_class_metrics(cm),
        length_bins=f1_by_length(gold, pred, texts, bin_width),
        region_confusion=region_confusion(cm, region_map),
        confusion=cm.counts.tolist(),
    )
    return cm, report
