"""
Обучение линейного классификатора SGD по одному документу.
Порядок документов в каждой эпохе задаёт перестановка от генератора с seed,
поэтому повторный запуск с тем же seed даёт побитово одинаковую модель.
"""

import logging
from dataclasses import dataclass
from typing import (
    Iterable,
    Optional,
)

import numpy as np
from tqdm import tqdm

from src.domain.exceptions import LabelSetError
from src.domain.lintext.features import (
    FeatureConfig,
    extract_features,
)
from src.domain.lintext.model import (
    LinearTextModel,
    TrainConfig,
)
from src.domain.models.base import MutableRecordModel
from src.domain.models.enums import LossEnum

logger = logging.getLogger(__name__)


class TrainReport(MutableRecordModel):
    """Итоги обучения"""

    documents: int = 0
    empty_feature_documents: int = 0
    epoch_losses: list[float] = []


@dataclass(frozen=True)
class _Document:
    ids: np.ndarray
    rows: np.ndarray
    # кратность строки / число признаков
    row_weights: np.ndarray
    target: int


def loss_and_gradients(
    embeddings: np.ndarray,
    weights: np.ndarray,
    feature_ids: np.ndarray,
    target: int,
    loss: LossEnum,
    l2: float = 0.0,
) -> tuple[float, np.ndarray, np.ndarray]:
    """
    Потери документа и градиенты по W и по скрытому вектору h.
    Градиент по строке E[i] равен count(i) / n * grad_h.
    """
    if feature_ids.size == 0:
        hidden = np.zeros(embeddings.shape[1], dtype=embeddings.dtype)
    else:
        hidden = embeddings[feature_ids].mean(axis=0)
    logits = (weights @ hidden).astype(np.float64)

    grad_logits = np.zeros(len(logits), dtype=np.float64)
    if loss == LossEnum.SOFTMAX:
        shifted = logits - logits.max()
        log_norm = float(np.log(np.exp(shifted).sum()))
        value = log_norm - float(shifted[target])
        grad_logits = np.exp(shifted - log_norm)
        grad_logits[target] -= 1.0
    else:
        # многоклассовый hinge: max(0, 1 + max_{l != y} s_l - s_y)
        rivals = logits.copy()
        rivals[target] = -np.inf
        rival = int(np.argmax(rivals))
        margin = 1.0 + float(rivals[rival]) - float(logits[target])
        value = max(margin, 0.0)
        if margin > 0:
            grad_logits[rival] = 1.0
            grad_logits[target] = -1.0

    grad_logits = grad_logits.astype(weights.dtype)
    grad_weights = np.outer(grad_logits, hidden)
    grad_hidden = weights.T @ grad_logits
    if l2:
        value += 0.5 * l2 * float(np.sum(weights.astype(np.float64) ** 2))
        grad_weights += l2 * weights
    return value, grad_weights, grad_hidden


def _prepare(
    text: str, label: str, label_index: dict[str, int], fc: FeatureConfig
) -> Optional[_Document]:
    ids = np.asarray(extract_features(text, fc), dtype=np.int64)
    if ids.size == 0:
        return None
    rows, counts = np.unique(ids, return_counts=True)
    return _Document(
        ids=ids,
        rows=rows,
        row_weights=(counts.astype(np.float32) / np.float32(ids.size))[:, None],
        target=label_index[label],
    )


def init_parameters(
    fc: FeatureConfig, num_labels: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    size_mb = fc.hash_buckets * fc.embed_dim * np.dtype(np.float32).itemsize / 2**20
    logger.info(f'Allocating embeddings {fc.hash_buckets}x{fc.embed_dim} float32 ({size_mb:.0f} MiB)')
    embeddings = rng.random((fc.hash_buckets, fc.embed_dim), dtype=np.float32)
    embeddings *= 2.0 / fc.embed_dim
    embeddings -= 1.0 / fc.embed_dim
    weights = np.zeros((num_labels, fc.embed_dim), dtype=np.float32)
    return embeddings, weights


def fit(
    corpus: Iterable[tuple[str, str]],
    fc: FeatureConfig,
    tc: TrainConfig,
    track_loss: bool = False,
    progress: bool = False,
) -> tuple[LinearTextModel, TrainReport]:
    """
    Обучает модель на парах (нормализованный текст, метка).
    Документы без признаков пропускаются и учитываются в отчёте.
    """
    corpus = list(corpus)
    if not corpus:
        raise LabelSetError('Training corpus is empty')
    labels = tuple(sorted({label for _, label in corpus}))
    if len(labels) < 2:
        raise LabelSetError(
            f'Training corpus has a single label {labels[0]!r}; at least two are required'
        )
    label_index = {label: index for index, label in enumerate(labels)}

    rng = np.random.default_rng(tc.seed)
    embeddings, weights = init_parameters(fc, len(labels), rng)
    documents = [_prepare(text, label, label_index, fc) for text, label in corpus]
    report = TrainReport(
        documents=len(documents),
        empty_feature_documents=sum(doc is None for doc in documents),
    )
    if report.empty_feature_documents == report.documents:
        raise LabelSetError('No training document has features')
    if report.empty_feature_documents:
        logger.warning(
            f'{report.empty_feature_documents} of {report.documents} documents have no features and are skipped'
        )

    total_steps = tc.epochs * len(documents)
    step = 0
    for epoch in tqdm(range(tc.epochs), desc='train', unit='epoch', disable=not progress):
        for position in rng.permutation(len(documents)):
            lr = tc.learning_rate
            if tc.lr_decay:
                lr *= 1.0 - step / total_steps
            step += 1
            doc = documents[position]
            if doc is None:
                continue
            _, grad_weights, grad_hidden = loss_and_gradients(
                embeddings, weights, doc.ids, doc.target, tc.loss, tc.l2
            )
            weights -= np.float32(lr) * grad_weights
            embeddings[doc.rows] -= np.float32(lr) * doc.row_weights * grad_hidden

        if track_loss:
            epoch_loss = np.mean(
                [
                    loss_and_gradients(embeddings, weights, doc.ids, doc.target, tc.loss, tc.l2)[0]
                    for doc in documents
                    if doc is not None
                ]
            )
            report.epoch_losses.append(float(epoch_loss))
            logger.debug(f'Epoch {epoch + 1}/{tc.epochs}: loss={epoch_loss:.6f}')

    logger.info(
        f'Trained {tc.loss.value} model on {report.documents} documents, labels={list(labels)}'
    )
    model = LinearTextModel(embeddings, weights, labels, fc, tc)
    return model, report


def train(
    corpus: Iterable[tuple[str, str]], fc: FeatureConfig, tc: TrainConfig
) -> LinearTextModel:
    model, _ = fit(corpus, fc, tc)
    return model
