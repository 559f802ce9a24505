from src.infrastructure.adapters.repositories.corpora import (
    CountryCorpusRepository,
    CsvRepository,
    JsonRepository,
    LabeledCorpusRepository,
    PredictionRepository,
    read_labeled_corpus,
)
from src.infrastructure.adapters.repositories.lexicons import (
    GazetteerRepository,
    ObsceneRepository,
)
from src.infrastructure.adapters.repositories.records import (
    JsonlRepository,
    ProfileRepository,
    TweetRepository,
)

__all__ = [
    'CountryCorpusRepository',
    'CsvRepository',
    'GazetteerRepository',
    'JsonRepository',
    'JsonlRepository',
    'LabeledCorpusRepository',
    'ObsceneRepository',
    'PredictionRepository',
    'ProfileRepository',
    'TweetRepository',
    'read_labeled_corpus',
]
