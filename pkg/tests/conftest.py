import os
from pathlib import Path
from typing import Optional

import pytest

from src.domain.fixtures import (
    CascadeFixture,
    cascade_fixture,
)
from src.domain.gazetteer import Gazetteer
from src.domain.lintext.features import FeatureConfig
from src.domain.lintext.model import Prediction
from src.domain.models.enums import VariantLabelEnum
from src.domain.textnorm import tokenize
from src.infrastructure.adapters.repositories import GazetteerRepository

ROOT = Path(__file__).resolve().parents[1]
FIXTURES_DIR = Path(__file__).resolve().parent / 'fixtures'
SHIPPED_GAZETTEER = ROOT / 'data' / 'gazetteer.tsv'
SHIPPED_OBSCENE = ROOT / 'data' / 'obscene_placeholder.txt'
CONFIG_ENV_PREFIXES = (
    'RUN_',
    'PATHS_',
    'NORMALIZATION_',
    'WEAKLABEL_',
    'TRAIN_',
    'FILTER_',
    'ANALYSIS_',
    'EVAL_',
)

# маленькое пространство признаков: тесты обучения укладываются в секунды
SMALL_FEATURES = FeatureConfig(hash_buckets=1 << 16, embed_dim=16)

DA = VariantLabelEnum.DA.value
MSA = VariantLabelEnum.MSA.value


class LexiconClassifier:
    """
    Классификатор MSA/DA по словарям фикстуры каскада: DA, если диалектных
    слов больше, чем литературных. Вероятность DA равна доле диалектных слов.
    """

    labels = (DA, MSA)

    def __init__(self, da_words: frozenset[str], msa_words: frozenset[str]) -> None:
        self.da_words = da_words
        self.msa_words = msa_words

    def predict(self, text: str) -> Prediction:
        tokens = tokenize(text)
        da = sum(token in self.da_words for token in tokens)
        msa = sum(token in self.msa_words for token in tokens)
        p_da = da / (da + msa) if da + msa else 0.5
        label = DA if da > msa else MSA
        return Prediction(label=label, scores={DA: p_da, MSA: 1.0 - p_da})

    def predict_with_threshold(self, text: str, min_confidence: float) -> Optional[Prediction]:
        prediction = self.predict(text)
        return prediction if prediction.confidence >= min_confidence else None


class FixedClassifier:
    """Всегда один и тот же ответ с заданной вероятностью DA"""

    labels = (DA, MSA)

    def __init__(self, p_da: float) -> None:
        self.p_da = p_da

    def predict(self, text: str) -> Prediction:
        label = DA if self.p_da >= 0.5 else MSA
        return Prediction(label=label, scores={DA: self.p_da, MSA: 1.0 - self.p_da})

    def predict_with_threshold(self, text: str, min_confidence: float) -> Optional[Prediction]:
        prediction = self.predict(text)
        return prediction if prediction.confidence >= min_confidence else None


@pytest.fixture(scope='session')
def gazetteer() -> Gazetteer:
    return GazetteerRepository(SHIPPED_GAZETTEER).load()


@pytest.fixture(scope='session')
def cascade_data() -> CascadeFixture:
    return cascade_fixture(n_users=200, seed=0)


@pytest.fixture(scope='session')
def lexicon_classifier(cascade_data) -> LexiconClassifier:
    return LexiconClassifier(cascade_data.da_words, cascade_data.msa_words)


@pytest.fixture
def run_env(monkeypatch):
    """Чистое окружение: переменные конфига из оболочки не влияют на тесты."""
    for key in list(os.environ):
        if key.upper().startswith(CONFIG_ENV_PREFIXES):
            monkeypatch.delenv(key, raising=False)
    return monkeypatch
