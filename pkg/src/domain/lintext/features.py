"""
Хэшированные признаки: символьные n-граммы по всему тексту (с пробелами)
и словесные n-граммы по потоку токенов.

Хэш: FNV-1a 64 бит над UTF-8 байтами n-граммы, id = hash mod hash_buckets.
Словесная n-грамма хэшируется как токены, склеенные через U+001F.
"""

from functools import lru_cache

from pydantic import (
    Field,
    model_validator,
)

from src.domain.models.base import RecordModel
from src.domain.textnorm import tokenize

FNV64_OFFSET_BASIS = 0xCBF29CE484222325
FNV64_PRIME = 0x100000001B3
MASK64 = (1 << 64) - 1

WORD_SEPARATOR = '\x1f'
MIN_HASH_BUCKETS = 1 << 16


@lru_cache(maxsize=1 << 20)
def fnv1a_64(ngram: str) -> int:
    value = FNV64_OFFSET_BASIS
    for byte in ngram.encode('utf-8'):
        value ^= byte
        value = (value * FNV64_PRIME) & MASK64
    return value


class FeatureConfig(RecordModel):
    """Настройки извлечения признаков"""

    char_ngram_min: int = Field(default=3, ge=1)
    char_ngram_max: int = Field(default=6, ge=1)
    word_ngram_min: int = Field(default=1, ge=1)
    word_ngram_max: int = Field(default=1, ge=1)
    use_char: bool = True
    use_word: bool = False
    hash_buckets: int = 1 << 21
    embed_dim: int = Field(default=100, ge=1)

    @model_validator(mode='after')
    def check_ranges(self) -> 'FeatureConfig':
        if not (self.use_char or self.use_word):
            raise ValueError('at least one of use_char/use_word must be enabled')
        if self.use_char and self.char_ngram_min > self.char_ngram_max:
            raise ValueError('char_ngram_min must not exceed char_ngram_max')
        if self.use_word and self.word_ngram_min > self.word_ngram_max:
            raise ValueError('word_ngram_min must not exceed word_ngram_max')
        buckets = self.hash_buckets
        if buckets < MIN_HASH_BUCKETS or buckets & (buckets - 1):
            raise ValueError(f'hash_buckets must be a power of two >= {MIN_HASH_BUCKETS}')
        return self


def char_ngrams(text: str, n_min: int, n_max: int) -> list[str]:
    grams = []
    for n in range(n_min, n_max + 1):
        grams.extend(text[i : i + n] for i in range(len(text) - n + 1))
    return grams


def word_ngrams(tokens: list[str], n_min: int, n_max: int) -> list[str]:
    grams = []
    for n in range(n_min, n_max + 1):
        grams.extend(
            WORD_SEPARATOR.join(tokens[i : i + n]) for i in range(len(tokens) - n + 1)
        )
    return grams


def feature_id(ngram: str, hash_buckets: int) -> int:
    return fnv1a_64(ngram) % hash_buckets


def extract_features(text: str, fc: FeatureConfig) -> list[int]:
    """Идентификаторы признаков нормализованного текста, детерминированно."""
    grams: list[str] = []
    if fc.use_char:
        grams.extend(char_ngrams(text, fc.char_ngram_min, fc.char_ngram_max))
    if fc.use_word:
        grams.extend(word_ngrams(tokenize(text), fc.word_ngram_min, fc.word_ngram_max))
    return [fnv1a_64(gram) % fc.hash_buckets for gram in grams]
