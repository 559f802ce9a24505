"""
Бинарный формат модели (little-endian):

    magic b'QDLM' | u32 версия | конфигурация признаков и обучения
    u32 число меток | (u32 длина, UTF-8 байты) на метку
    E: hash_buckets x embed_dim float32 | W: num_labels x embed_dim float32
"""

import logging
import struct
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from src.domain.exceptions import (
    ModelFormatError,
    ModelTruncatedError,
    ModelVersionError,
)
from src.domain.lintext.features import FeatureConfig
from src.domain.lintext.model import (
    FORMAT_VERSION,
    LinearTextModel,
    TrainConfig,
)
from src.domain.models.enums import LossEnum

logger = logging.getLogger(__name__)

MAGIC = b'QDLM'
HEADER = struct.Struct('<4sI')
CONFIG = struct.Struct('<IIIIBBQIBdIQBd')
U32 = struct.Struct('<I')
ARRAY_DTYPE = np.dtype('<f4')


def dumps_model(model: LinearTextModel) -> bytes:
    fc, tc = model.feature_config, model.train_config
    parts = [
        HEADER.pack(MAGIC, FORMAT_VERSION),
        CONFIG.pack(
            fc.char_ngram_min,
            fc.char_ngram_max,
            fc.word_ngram_min,
            fc.word_ngram_max,
            fc.use_char,
            fc.use_word,
            fc.hash_buckets,
            fc.embed_dim,
            tc.loss.code,
            tc.learning_rate,
            tc.epochs,
            tc.seed,
            tc.lr_decay,
            tc.l2,
        ),
        U32.pack(len(model.labels)),
    ]
    for label in model.labels:
        encoded = label.encode('utf-8')
        parts.append(U32.pack(len(encoded)))
        parts.append(encoded)
    parts.append(model.embeddings.astype(ARRAY_DTYPE, copy=False).tobytes())
    parts.append(model.weights.astype(ARRAY_DTYPE, copy=False).tobytes())
    return b''.join(parts)


class _Reader:
    def __init__(self, data: bytes, source: str) -> None:
        self.data = data
        self.source = source
        self.offset = 0

    def take(self, size: int) -> bytes:
        end = self.offset + size
        if end > len(self.data):
            raise ModelTruncatedError(
                f'{self.source}: truncated model, needed {size} bytes at offset {self.offset}, '
                f'file has {len(self.data)}'
            )
        chunk = self.data[self.offset : end]
        self.offset = end
        return chunk

    def unpack(self, fmt: struct.Struct) -> tuple:
        return fmt.unpack(self.take(fmt.size))

    def array(self, rows: int, cols: int) -> np.ndarray:
        raw = self.take(rows * cols * ARRAY_DTYPE.itemsize)
        return np.frombuffer(raw, dtype=ARRAY_DTYPE).reshape(rows, cols).astype(np.float32)


def loads_model(data: bytes, source: str = '<bytes>') -> LinearTextModel:
    reader = _Reader(data, source)
    if len(data) >= len(MAGIC) and data[: len(MAGIC)] != MAGIC:
        raise ModelFormatError(f'{source}: not a model file (bad magic {data[:4]!r})')
    _, version = reader.unpack(HEADER)
    if version != FORMAT_VERSION:
        raise ModelVersionError(
            f'{source}: unsupported model format version {version}, expected {FORMAT_VERSION}'
        )
    (
        char_min,
        char_max,
        word_min,
        word_max,
        use_char,
        use_word,
        hash_buckets,
        embed_dim,
        loss_code,
        learning_rate,
        epochs,
        seed,
        lr_decay,
        l2,
    ) = reader.unpack(CONFIG)
    try:
        fc = FeatureConfig(
            char_ngram_min=char_min,
            char_ngram_max=char_max,
            word_ngram_min=word_min,
            word_ngram_max=word_max,
            use_char=bool(use_char),
            use_word=bool(use_word),
            hash_buckets=hash_buckets,
            embed_dim=embed_dim,
        )
        tc = TrainConfig(
            loss=LossEnum.from_code(loss_code),
            learning_rate=learning_rate,
            epochs=epochs,
            seed=seed,
            lr_decay=bool(lr_decay),
            l2=l2,
        )
    except (ValidationError, KeyError) as e:
        raise ModelFormatError(f'{source}: corrupted model configuration: {e}') from e

    (num_labels,) = reader.unpack(U32)
    labels = []
    for _ in range(num_labels):
        (length,) = reader.unpack(U32)
        try:
            labels.append(reader.take(length).decode('utf-8'))
        except UnicodeDecodeError as e:
            raise ModelFormatError(f'{source}: label is not valid UTF-8') from e

    embeddings = reader.array(hash_buckets, embed_dim)
    weights = reader.array(num_labels, embed_dim)
    if reader.offset != len(data):
        raise ModelFormatError(
            f'{source}: {len(data) - reader.offset} unexpected trailing bytes'
        )
    return LinearTextModel(embeddings, weights, labels, fc, tc, format_version=version)


def save_model(model: LinearTextModel, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dumps_model(model))
    logger.info(f'Model saved to {path}: {model!r}')


def load_model(path: Path) -> LinearTextModel:
    path = Path(path)
    model = loads_model(path.read_bytes(), source=str(path))
    logger.info(f'Model loaded from {path}: {model!r}')
    return model
