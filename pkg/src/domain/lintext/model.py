from typing import (
    Optional,
    Protocol,
    Sequence,
)

import numpy as np
from pydantic import Field

from src.domain.exceptions import ConfigurationError
from src.domain.lintext.features import (
    FeatureConfig,
    extract_features,
)
from src.domain.models.base import RecordModel
from src.domain.models.enums import LossEnum

FORMAT_VERSION = 1


class TrainConfig(RecordModel):
    """Настройки обучения SGD"""

    learning_rate: float = Field(default=0.05, gt=0)
    epochs: int = Field(default=50, ge=1)
    seed: int = Field(default=0, ge=0, lt=1 << 64)
    loss: LossEnum = LossEnum.SOFTMAX
    # линейное затухание шага до нуля к концу обучения
    lr_decay: bool = False
    # L2 только на выходных весах
    l2: float = Field(default=0.0, ge=0)


class Prediction(RecordModel):
    """Метка и оценки по всем меткам (вероятности для softmax, отступы для hinge)"""

    label: str
    scores: dict[str, float]

    @property
    def confidence(self) -> float:
        return self.scores[self.label]


class TextClassifier(Protocol):
    labels: tuple[str, ...]

    def predict(self, text: str) -> Prediction: ...

    def predict_with_threshold(
        self, text: str, min_confidence: float
    ) -> Optional[Prediction]: ...


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits.astype(np.float64) - np.max(logits)
    exp = np.exp(shifted)
    return exp / exp.sum()


class LinearTextModel:
    """
    Усреднённые хэшированные эмбеддинги n-грамм и линейная голова W.
    h = mean(E[ids]), оценки = W h, p(l|h) = softmax(W h).
    """

    def __init__(
        self,
        embeddings: np.ndarray,
        weights: np.ndarray,
        labels: Sequence[str],
        feature_config: FeatureConfig,
        train_config: TrainConfig,
        format_version: int = FORMAT_VERSION,
    ) -> None:
        labels = tuple(labels)
        if embeddings.shape != (feature_config.hash_buckets, feature_config.embed_dim):
            raise ConfigurationError(
                f'embeddings shape {embeddings.shape} does not match feature config'
            )
        if weights.shape != (len(labels), feature_config.embed_dim):
            raise ConfigurationError(
                f'weights shape {weights.shape} does not match {len(labels)} labels'
            )
        if len(set(labels)) != len(labels):
            raise ConfigurationError(f'duplicate labels in vocabulary: {labels}')
        self.embeddings = embeddings
        self.weights = weights
        self.labels = labels
        self.feature_config = feature_config
        self.train_config = train_config
        self.format_version = format_version

    @property
    def num_labels(self) -> int:
        return len(self.labels)

    @property
    def is_probabilistic(self) -> bool:
        return self.train_config.loss == LossEnum.SOFTMAX

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LinearTextModel):
            return NotImplemented
        return (
            self.labels == other.labels
            and self.feature_config == other.feature_config
            and self.train_config == other.train_config
            and self.format_version == other.format_version
            and np.array_equal(self.embeddings, other.embeddings)
            and np.array_equal(self.weights, other.weights)
        )

    def __repr__(self) -> str:
        return (
            f'LinearTextModel(labels={self.labels}, loss={self.train_config.loss.value}, '
            f'buckets={self.feature_config.hash_buckets}, dim={self.feature_config.embed_dim})'
        )

    def hidden(self, feature_ids: np.ndarray) -> np.ndarray:
        if feature_ids.size == 0:
            return np.zeros(self.feature_config.embed_dim, dtype=self.embeddings.dtype)
        return self.embeddings[feature_ids].mean(axis=0)

    def logits(self, text: str) -> np.ndarray:
        ids = np.asarray(extract_features(text, self.feature_config), dtype=np.int64)
        return (self.weights @ self.hidden(ids)).astype(np.float64)

    def _prediction(self, scores: np.ndarray) -> Prediction:
        # np.argmax берёт первый максимум: ничьи решаются порядком словаря меток
        best = int(np.argmax(scores))
        return Prediction(
            label=self.labels[best],
            scores={label: float(score) for label, score in zip(self.labels, scores)},
        )

    def predict(self, text: str) -> Prediction:
        logits = self.logits(text)
        if self.is_probabilistic:
            return self._prediction(softmax(logits))
        return self._prediction(logits)

    def predict_batch(self, texts: Sequence[str]) -> list[Prediction]:
        return [self.predict(text) for text in texts]

    def predict_with_threshold(
        self, text: str, min_confidence: float
    ) -> Optional[Prediction]:
        """Предсказание, только если максимальная вероятность не ниже порога."""
        if not 0 < min_confidence <= 1:
            raise ConfigurationError(
                f'min_confidence must be in (0, 1], got {min_confidence}'
            )
        if not self.is_probabilistic:
            raise ConfigurationError(
                'predict_with_threshold requires a softmax model; hinge margins are not probabilities'
            )
        logits = self.logits(text)
        best = int(np.argmax(logits))
        shifted = logits - logits[best]
        # log p_max в лог-пространстве: строго < 0 при конечных логитах
        log_confidence = -np.log1p(np.exp(np.delete(shifted, best)).sum())
        if log_confidence < np.log(min_confidence):
            return None
        return self._prediction(softmax(logits))


def predict(model: LinearTextModel, text: str) -> Prediction:
    return model.predict(text)


def predict_with_threshold(
    model: LinearTextModel, text: str, min_confidence: float
) -> Optional[Prediction]:
    return model.predict_with_threshold(text, min_confidence)
