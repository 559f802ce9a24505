"""
Синтетические наборы данных настольного масштаба: весь конвейер проверяется
без данных платформы. Все генераторы детерминированы по seed.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from src.domain.exceptions import ConfigurationError
from src.domain.models.enums import (
    CountryEnum,
    VariantLabelEnum,
)
from src.domain.models.records import (
    TweetRecord,
    UserProfile,
)
from src.domain.textnorm import (
    DA_RELATIVE_PRONOUNS,
    MSA_RELATIVE_PRONOUNS,
    TRIGGER_PRONOUNS,
)

ARABIC_LETTERS = 'ابتثجحخدذرزسشصضطظعغفقكلمنهوي'

# заглушка словаря обсценной лексики: выдуманные слова, не реальная брань
OBSCENE_PLACEHOLDER: tuple[str, ...] = (
    'زفتون',
    'قذرون',
    'خربوط',
    'شتمول',
    'نكدوش',
    'xbadword',
    '#وسخ_كلام',
    '#BadTag',
)

CASCADE_COUNTRIES: dict[str, tuple[str, ...]] = {
    CountryEnum.SA.value: ('سعودي', 'الرياض', 'Saudi', 'جدة'),
    CountryEnum.EG.value: ('مصري', 'القاهرة', 'Egypt', 'الإسكندرية'),
    CountryEnum.MA.value: ('المغرب', 'الرباط', 'Morocco', 'الدار البيضاء'),
    CountryEnum.LB.value: ('لبناني', 'بيروت', 'Lebanon', 'صيدا'),
    CountryEnum.IQ.value: ('عراقي', 'بغداد', 'Iraq', 'البصرة'),
    CountryEnum.KW.value: ('كويتي', 'الكويت', 'Kuwait', 'الجهراء'),
}
DESCRIPTION_TEMPLATES = ('{} وأفتخر', 'من {}', '{} | مهندس', 'أعيش في {} 🌴')
NO_MATCH_DESCRIPTIONS = ('أحب القراءة والسفر', 'طالب جامعي', 'Football fan', 'مصور هاوٍ')


def _word(rng: np.random.Generator, weights: np.ndarray, min_len: int, max_len: int) -> str:
    length = int(rng.integers(min_len, max_len + 1))
    return ''.join(rng.choice(list(ARABIC_LETTERS), size=length, p=weights))


def make_vocabulary(
    rng: np.random.Generator,
    size: int,
    weights: np.ndarray,
    exclude: frozenset[str] = frozenset(),
    min_len: int = 3,
    max_len: int = 7,
) -> list[str]:
    """size различных слов из букв с распределением weights."""
    words: list[str] = []
    seen = set(exclude) | TRIGGER_PRONOUNS
    while len(words) < size:
        word = _word(rng, weights, min_len, max_len)
        if word not in seen:
            seen.add(word)
            words.append(word)
    return words


@dataclass(frozen=True)
class VariantVocabulary:
    """Словари двух вариантов: свои слова с разным распределением букв плюс общие слова"""

    own: dict[str, list[str]]
    shared: list[str]

    def words(self, label: str) -> list[str]:
        return self.own[label] + self.shared


def variant_vocabulary(
    rng: np.random.Generator, size: int = 400, shared_share: float = 0.1
) -> VariantVocabulary:
    n_letters = len(ARABIC_LETTERS)
    shared_size = int(round(size * shared_share))
    shared = make_vocabulary(rng, shared_size, np.full(n_letters, 1.0 / n_letters))
    own: dict[str, list[str]] = {}
    taken = frozenset(shared)
    for label in VariantLabelEnum:
        weights = rng.dirichlet(np.full(n_letters, 0.3))
        own[label.value] = make_vocabulary(rng, size - shared_size, weights, exclude=taken)
        taken = taken | frozenset(own[label.value])
    return VariantVocabulary(own=own, shared=shared)


def variant_corpus(
    n_docs: int = 20000,
    seed: int = 0,
    shared_share: float = 0.1,
    min_words: int = 6,
    max_words: int = 16,
) -> list[tuple[str, str]]:
    """Двухклассовый корпус (MSA, DA) с разными распределениями символов."""
    rng = np.random.default_rng(seed)
    vocabulary = variant_vocabulary(rng, shared_share=shared_share)
    labels = [label.value for label in VariantLabelEnum]
    corpus = []
    for _ in range(n_docs):
        label = labels[int(rng.integers(len(labels)))]
        words = vocabulary.words(label)
        length = int(rng.integers(min_words, max_words + 1))
        corpus.append((' '.join(rng.choice(words, size=length)), label))
    return corpus


def dialect_corpus(
    n_classes: int = 6,
    docs_per_class: int = 1000,
    seed: int = 0,
    marker_share: float = 0.05,
    markers_per_class: int = 20,
    vocabulary_size: int = 2000,
    skew: float = 1.0,
    min_words: int = 20,
    max_words: int = 40,
) -> list[tuple[str, str]]:
    """
    Корпус стран с внедрёнными маркерами: у каждого класса свои слова-маркеры,
    которые занимают marker_share токенов документа (не меньше одного);
    остальное берётся из общего словаря с классовым смещением частот.
    skew < 1 уменьшает размер каждого следующего класса.
    """
    if not 1 <= n_classes <= len(CountryEnum):
        raise ConfigurationError(f'n_classes must be in [1, {len(CountryEnum)}], got {n_classes}')
    rng = np.random.default_rng(seed)
    n_letters = len(ARABIC_LETTERS)
    background = make_vocabulary(rng, vocabulary_size, np.full(n_letters, 1.0 / n_letters))
    labels = CountryEnum.codes()[:n_classes]
    markers = {}
    taken = frozenset(background)
    for label in labels:
        markers[label] = make_vocabulary(
            rng, markers_per_class, np.full(n_letters, 1.0 / n_letters), exclude=taken
        )
        taken = taken | frozenset(markers[label])
    preferences = {label: rng.dirichlet(np.full(vocabulary_size, 0.5)) for label in labels}

    corpus = []
    for index, label in enumerate(labels):
        for _ in range(max(1, int(round(docs_per_class * skew**index)))):
            length = int(rng.integers(min_words, max_words + 1))
            n_markers = max(1, int(round(length * marker_share)))
            tokens = list(rng.choice(background, size=length - n_markers, p=preferences[label]))
            for marker in rng.choice(markers[label], size=n_markers):
                tokens.insert(int(rng.integers(len(tokens) + 1)), marker)
            corpus.append((' '.join(tokens), label))
    order = rng.permutation(len(corpus))
    return [corpus[i] for i in order]


def word_order_corpus(
    n_classes: int = 6,
    docs_per_class: int = 1000,
    seed: int = 0,
    pairs_per_doc: int = 6,
) -> list[tuple[str, str]]:
    """
    Корпус, где класс задан только порядком слов: документ состоит из пар
    (w_i, w_{i+k mod K}) со сдвигом k = номер класса + 1. Каждое слово
    встречается во всех классах одинаково часто, а общие приставка и суффикс
    слов не дают символьной n-грамме длиной до 7 захватить ядра обоих слов пары.
    """
    n_words = n_classes + 1
    if not 1 <= n_classes <= len(CountryEnum):
        raise ConfigurationError(f'n_classes must be in [1, {len(CountryEnum)}], got {n_classes}')
    rng = np.random.default_rng(seed)
    prefix, suffix = ARABIC_LETTERS[:3], ARABIC_LETTERS[3:6]
    words = [prefix + core + suffix for core in ARABIC_LETTERS[6 : 6 + n_words]]
    labels = CountryEnum.codes()[:n_classes]

    corpus = []
    for shift, label in enumerate(labels, start=1):
        for _ in range(docs_per_class):
            tokens = []
            for first in rng.integers(n_words, size=pairs_per_doc):
                tokens += [words[first], words[(first + shift) % n_words]]
            corpus.append((' '.join(tokens), label))
    order = rng.permutation(len(corpus))
    return [corpus[i] for i in order]


@dataclass(frozen=True)
class CascadeFixture:
    profiles: list[UserProfile]
    tweets: list[TweetRecord]
    obscene: tuple[str, ...]
    # слова, встречающиеся только в диалектных твитах
    da_words: frozenset[str]
    msa_words: frozenset[str]


def _tweet_text(
    rng: np.random.Generator,
    words: Sequence[str],
    pronouns: Sequence[str],
    obscene: Sequence[str],
    vulgar: bool,
) -> str:
    tokens = list(rng.choice(words, size=int(rng.integers(5, 13))))
    if rng.random() < 0.6:
        tokens.insert(int(rng.integers(len(tokens) + 1)), str(rng.choice(pronouns)))
    if vulgar:
        tokens.insert(int(rng.integers(len(tokens) + 1)), str(rng.choice(obscene)))
    extra = rng.random()
    if extra < 0.1:
        tokens.insert(0, f'@user_{int(rng.integers(1000))}')
    elif extra < 0.2:
        tokens.append(f'https://t.co/x{int(rng.integers(1000))}')
    elif extra < 0.3:
        tokens.append(str(int(rng.integers(1, 2025))))
    return ' '.join(tokens)


def cascade_fixture(
    n_users: int = 200, seed: int = 0, obscene: Sequence[str] = OBSCENE_PLACEHOLDER
) -> CascadeFixture:
    """
    Профили и твиты для каскада: пользователи с одной страной, без страны,
    с несколькими странами, без твитов, ровно с 50% диалектных и ровно
    с 50% обсценных твитов, с одинаковым числом подписчиков.
    """
    rng = np.random.default_rng(seed)
    vocabulary = variant_vocabulary(rng, size=300, shared_share=0.1)
    da_words = vocabulary.own[VariantLabelEnum.DA.value]
    msa_words = vocabulary.own[VariantLabelEnum.MSA.value]
    countries = list(CASCADE_COUNTRIES)

    profiles: list[UserProfile] = []
    tweets: list[TweetRecord] = []
    followers = 0
    for index in range(n_users):
        user_id = f'u{index:04d}'
        kind = rng.random()
        if kind < 0.08:
            description = ''
        elif kind < 0.16:
            description = str(rng.choice(NO_MATCH_DESCRIPTIONS))
        elif kind < 0.24:
            first, second = rng.choice(countries, size=2, replace=False)
            description = (
                f'{rng.choice(CASCADE_COUNTRIES[first])} و {rng.choice(CASCADE_COUNTRIES[second])}'
            )
        else:
            country = countries[int(rng.integers(len(countries)))]
            term = str(rng.choice(CASCADE_COUNTRIES[country]))
            description = str(rng.choice(DESCRIPTION_TEMPLATES)).format(term)
        # каждый 17-й пользователь с тем же числом подписчиков, что и предыдущий
        if index % 17 != 16:
            followers = int(rng.integers(0, 5000))
        profiles.append(
            UserProfile(user_id=user_id, description=description, followers_count=followers)
        )

        if index % 23 == 5:
            n_tweets, n_dialectal, n_vulgar = 0, 0, 0
        elif index % 11 == 3:
            n_tweets, n_dialectal, n_vulgar = 10, 5, 0
        elif index % 13 == 7:
            n_tweets, n_dialectal, n_vulgar = 10, 8, 5
        else:
            n_tweets = int(rng.integers(4, 13))
            n_dialectal = int(rng.binomial(n_tweets, rng.choice([0.2, 0.7, 0.9])))
            n_vulgar = int(rng.binomial(n_tweets, rng.choice([0.0, 0.1, 0.8])))
        is_dialectal = [k < n_dialectal for k in range(n_tweets)]
        is_vulgar = [k < n_vulgar for k in range(n_tweets)]
        rng.shuffle(is_dialectal)
        rng.shuffle(is_vulgar)
        for k in range(n_tweets):
            if is_dialectal[k]:
                words, pronouns = da_words + vocabulary.shared, DA_RELATIVE_PRONOUNS
            else:
                words, pronouns = msa_words + vocabulary.shared, MSA_RELATIVE_PRONOUNS
            text = _tweet_text(rng, words, pronouns, obscene, is_vulgar[k])
            tweets.append(TweetRecord(id=f'{user_id}-{k:02d}', user_id=user_id, text=text))

    order = rng.permutation(len(tweets))
    return CascadeFixture(
        profiles=profiles,
        tweets=[tweets[i] for i in order],
        obscene=tuple(obscene),
        da_words=frozenset(da_words),
        msa_words=frozenset(msa_words),
    )
