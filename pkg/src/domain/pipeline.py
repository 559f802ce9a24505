"""
Каскад фильтров пользователей и сборка корпуса по странам.

Порядок фиксирован: страна по профилю → top-N по подписчикам в каждой стране →
доля диалектных твитов → доля твитов с обсценной лексикой → сборка корпуса
из твитов, классифицированных как DA с уверенностью не ниже порога.
"""

import logging
from collections import Counter
from typing import (
    Iterable,
    Mapping,
    Optional,
    Sequence,
)

from pydantic import (
    Field,
    model_validator,
)
from tqdm import tqdm

from src.domain.exceptions import (
    ConfigurationError,
    LabelSetError,
)
from src.domain.gazetteer import (
    Gazetteer,
    match_country,
)
from src.domain.lintext.model import TextClassifier
from src.domain.models.base import (
    MutableRecordModel,
    RecordModel,
)
from src.domain.models.enums import (
    GROUP_ORDER,
    RejectionReasonEnum,
    VariantLabelEnum,
)
from src.domain.models.records import (
    TweetRecord,
    UserProfile,
)
from src.domain.textnorm import (
    DEFAULT_CONFIG,
    HASHTAG_RE,
    WEAK_CORPUS_CONFIG,
    normalize_tweet,
    tokenize,
)

logger = logging.getLogger(__name__)

DA_LABEL = VariantLabelEnum.DA.value
VARIANT_LABELS = frozenset(label.value for label in VariantLabelEnum)


class FilterConfig(RecordModel):
    """Пороги каскада"""

    top_n_per_country: int = Field(default=200, ge=1)
    # не ниже порога: пользователь остаётся
    dialectal_ratio: float = Field(default=0.5, ge=0, le=1)
    # строго выше порога: пользователь удаляется
    vulgar_ratio: float = Field(default=0.5, ge=0, le=1)
    min_confidence: float = Field(default=0.98, gt=0, le=1)


class ObsceneLexicon(RecordModel):
    """Обсценные слова и хэштеги (в исходном виде, с '#')"""

    words: frozenset[str] = frozenset()
    hashtags: frozenset[str] = frozenset()

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> 'ObsceneLexicon':
        words, hashtags = set(), set()
        for line in lines:
            term = line.strip()
            if not term:
                continue
            if term.startswith('#'):
                hashtags.add(term.casefold())
            else:
                words.add(term.casefold())
        return cls(words=frozenset(words), hashtags=frozenset(hashtags))

    def __len__(self) -> int:
        return len(self.words) + len(self.hashtags)

    def is_vulgar(self, text: str) -> bool:
        """Есть обсценный токен нормализованного текста или исходный хэштег из списка."""
        if self.hashtags and any(
            tag.casefold() in self.hashtags for tag in HASHTAG_RE.findall(text)
        ):
            return True
        tokens = tokenize(normalize_tweet(text, DEFAULT_CONFIG))
        return any(token.casefold() in self.words for token in tokens)


class UserVerdict(RecordModel):
    user_id: str
    country: Optional[str] = None
    # None: пользователь отсеян до этой стадии
    dialectal_ratio: Optional[float] = Field(default=None, ge=0, le=1)
    vulgar_ratio: Optional[float] = Field(default=None, ge=0, le=1)
    retained: bool = False
    rejection_reason: Optional[RejectionReasonEnum] = None

    @model_validator(mode='after')
    def retained_xor_reason(self) -> 'UserVerdict':
        if self.retained == (self.rejection_reason is not None):
            raise ValueError('retained users carry no rejection reason, rejected users need one')
        return self


class CorpusRow(RecordModel):
    country: str
    user_id: str
    text: str


class CountryStats(RecordModel):
    users: int = 0
    tweets: int = 0
    words: int = 0


class CorpusStats(RecordModel):
    """Статистика корпуса по странам; итог считается суммой по странам"""

    countries: dict[str, CountryStats] = {}

    @property
    def total(self) -> CountryStats:
        return CountryStats(
            users=sum(stats.users for stats in self.countries.values()),
            tweets=sum(stats.tweets for stats in self.countries.values()),
            words=sum(stats.words for stats in self.countries.values()),
        )

    def as_dict(self) -> dict[str, dict[str, int]]:
        result = {code: stats.model_dump() for code, stats in self.countries.items()}
        result['TOTAL'] = self.total.model_dump()
        return result


class StageCounts(MutableRecordModel):
    """Сколько пользователей прошло и отсеяно на каждой стадии"""

    profiles: int = 0
    duplicate_profiles: int = 0
    tagged: int = 0
    no_country: int = 0
    ambiguous_country: int = 0
    candidates: int = 0
    below_rank_cutoff: int = 0
    zero_tweet_users: int = 0
    mostly_msa: int = 0
    vulgar: int = 0
    retained: int = 0
    corpus_tweets: int = 0
    low_confidence_tweets: int = 0


class TaggingResult(RecordModel):
    countries: dict[str, str] = {}
    rejected: dict[str, RejectionReasonEnum] = {}
    duplicates: int = 0


def _country_order(code: str) -> int:
    return GROUP_ORDER.index(code) if code in GROUP_ORDER else len(GROUP_ORDER)


def deduplicate_profiles(profiles: Iterable[UserProfile]) -> tuple[dict[str, UserProfile], int]:
    unique: dict[str, UserProfile] = {}
    duplicates = 0
    for profile in profiles:
        if profile.user_id in unique:
            duplicates += 1
        unique[profile.user_id] = profile
    if duplicates:
        logger.warning(f'{duplicates} duplicate profiles, the last occurrence wins')
    return unique, duplicates


def tag_users(profiles: Iterable[UserProfile], gz: Gazetteer) -> TaggingResult:
    """Страна пользователя по описанию профиля; без совпадения или с несколькими странами отсеивается."""
    unique, duplicates = deduplicate_profiles(profiles)
    countries: dict[str, str] = {}
    rejected: dict[str, RejectionReasonEnum] = {}
    for user_id, profile in unique.items():
        match = match_country(normalize_tweet(profile.description), gz)
        if match is None:
            rejected[user_id] = RejectionReasonEnum.NO_COUNTRY
        elif match.ambiguous:
            rejected[user_id] = RejectionReasonEnum.AMBIGUOUS_COUNTRY
        else:
            countries[user_id] = match.country
    return TaggingResult(countries=countries, rejected=rejected, duplicates=duplicates)


def select_top_users(
    countries: Mapping[str, str],
    profiles: Mapping[str, UserProfile],
    n_per_country: int = 200,
) -> set[str]:
    """По n пользователей каждой страны с наибольшим числом подписчиков; ничьи по user_id."""
    by_country: dict[str, list[str]] = {}
    for user_id, country in countries.items():
        by_country.setdefault(country, []).append(user_id)
    selected: set[str] = set()
    for users in by_country.values():
        users.sort(key=lambda user_id: (-profiles[user_id].followers_count, user_id))
        selected.update(users[:n_per_country])
    return selected


def _check_variant_model(model: TextClassifier) -> None:
    if set(model.labels) != VARIANT_LABELS:
        raise LabelSetError(f'Expected an MSA/DA model, got labels {model.labels}')


def dialectal_filter(
    user_tweets: Sequence[str],
    msa_da_model: TextClassifier,
    ratio_threshold: float = 0.5,
) -> tuple[float, bool]:
    """(доля DA-предсказаний, оставлен ли пользователь). Без твитов пользователь отсеивается."""
    _check_variant_model(msa_da_model)
    if not user_tweets:
        return 0.0, False
    dialectal = sum(
        msa_da_model.predict(normalize_tweet(text, WEAK_CORPUS_CONFIG)).label == DA_LABEL
        for text in user_tweets
    )
    ratio = dialectal / len(user_tweets)
    return ratio, ratio >= ratio_threshold


def vulgar_filter(
    user_tweets: Sequence[str],
    obscene_terms: ObsceneLexicon,
    ratio_threshold: float = 0.5,
) -> tuple[float, bool]:
    """(доля твитов с обсценной лексикой, удалён ли пользователь)."""
    if not len(obscene_terms):
        raise ConfigurationError('Obscene lexicon is empty')
    if not user_tweets:
        return 0.0, False
    vulgar = sum(obscene_terms.is_vulgar(text) for text in user_tweets)
    ratio = vulgar / len(user_tweets)
    return ratio, ratio > ratio_threshold


def corpus_stats(corpus: Iterable[CorpusRow]) -> CorpusStats:
    users: dict[str, set[str]] = {}
    tweets: Counter = Counter()
    words: Counter = Counter()
    for row in corpus:
        users.setdefault(row.country, set()).add(row.user_id)
        tweets[row.country] += 1
        words[row.country] += len(row.text.split())
    return CorpusStats(
        countries={
            country: CountryStats(
                users=len(users[country]), tweets=tweets[country], words=words[country]
            )
            for country in sorted(users, key=_country_order)
        }
    )


def assemble_corpus(
    retained: Mapping[str, str],
    tweets: Mapping[str, Sequence[str]],
    msa_da_model: TextClassifier,
    min_confidence: float = 0.98,
    counts: Optional[StageCounts] = None,
) -> tuple[list[CorpusRow], CorpusStats]:
    """
    Твиты оставленных пользователей, уверенно классифицированные как DA,
    с меткой страны пользователя. Порядок: страны в каноническом порядке,
    пользователи по user_id, твиты в порядке входа.
    """
    _check_variant_model(msa_da_model)
    rows: list[CorpusRow] = []
    dropped = 0
    for user_id in sorted(retained, key=lambda user: (_country_order(retained[user]), user)):
        for text in tweets.get(user_id, ()):
            prediction = msa_da_model.predict_with_threshold(
                normalize_tweet(text, WEAK_CORPUS_CONFIG), min_confidence
            )
            if prediction is None or prediction.label != DA_LABEL:
                dropped += 1
                continue
            rows.append(
                CorpusRow(
                    country=retained[user_id],
                    user_id=user_id,
                    text=normalize_tweet(text, DEFAULT_CONFIG),
                )
            )
    if counts is not None:
        counts.corpus_tweets = len(rows)
        counts.low_confidence_tweets = dropped
    return rows, corpus_stats(rows)


# состояние процесса-исполнителя: модель и словарь передаются один раз на процесс
_worker_state: dict[str, object] = {}


def init_worker(
    msa_da_model: TextClassifier, obscene_terms: ObsceneLexicon, cfg: FilterConfig
) -> None:
    _worker_state.update(model=msa_da_model, lexicon=obscene_terms, cfg=cfg)


def judge_user(task: tuple[str, str, Sequence[str]]) -> UserVerdict:
    """Стадии доли диалекта и обсценной лексики для одного кандидата."""
    user_id, country, texts = task
    model = _worker_state['model']
    lexicon = _worker_state['lexicon']
    cfg: FilterConfig = _worker_state['cfg']

    dialectal_ratio, dialectal = dialectal_filter(texts, model, cfg.dialectal_ratio)
    if not dialectal:
        return UserVerdict(
            user_id=user_id,
            country=country,
            dialectal_ratio=dialectal_ratio,
            rejection_reason=RejectionReasonEnum.MOSTLY_MSA,
        )
    vulgar_ratio, removed = vulgar_filter(texts, lexicon, cfg.vulgar_ratio)
    return UserVerdict(
        user_id=user_id,
        country=country,
        dialectal_ratio=dialectal_ratio,
        vulgar_ratio=vulgar_ratio,
        retained=not removed,
        rejection_reason=RejectionReasonEnum.VULGAR if removed else None,
    )


class CascadeResult(RecordModel):
    verdicts: list[UserVerdict]
    corpus: list[CorpusRow]
    stats: CorpusStats
    stages: StageCounts


class FilterCascade:
    """
    Полный каскад. mapper в run: упорядоченный map пула процессов,
    инициализированного init_worker(*cascade.worker_args); без него
    кандидаты проверяются в текущем процессе.
    """

    def __init__(
        self,
        gazetteer: Gazetteer,
        msa_da_model: TextClassifier,
        obscene_terms: ObsceneLexicon,
        cfg: FilterConfig = FilterConfig(),
        progress: bool = False,
    ) -> None:
        _check_variant_model(msa_da_model)
        if not len(obscene_terms):
            raise ConfigurationError('Obscene lexicon is empty')
        self.gazetteer = gazetteer
        self.msa_da_model = msa_da_model
        self.obscene_terms = obscene_terms
        self.cfg = cfg
        self.progress = progress

    @property
    def worker_args(self) -> tuple:
        return self.msa_da_model, self.obscene_terms, self.cfg

    def run(
        self,
        profiles: Iterable[UserProfile],
        tweets: Iterable[TweetRecord],
        mapper=None,
    ) -> CascadeResult:
        stages = StageCounts()
        unique, stages.duplicate_profiles = deduplicate_profiles(profiles)
        stages.profiles = len(unique)

        tagging = tag_users(unique.values(), self.gazetteer)
        verdicts: dict[str, UserVerdict] = {
            user_id: UserVerdict(user_id=user_id, rejection_reason=reason)
            for user_id, reason in tagging.rejected.items()
        }
        stages.tagged = len(tagging.countries)
        stages.no_country = sum(
            reason == RejectionReasonEnum.NO_COUNTRY for reason in tagging.rejected.values()
        )
        stages.ambiguous_country = len(tagging.rejected) - stages.no_country

        candidates = select_top_users(tagging.countries, unique, self.cfg.top_n_per_country)
        for user_id, country in tagging.countries.items():
            if user_id not in candidates:
                verdicts[user_id] = UserVerdict(
                    user_id=user_id,
                    country=country,
                    rejection_reason=RejectionReasonEnum.BELOW_RANK_CUTOFF,
                )
        stages.candidates = len(candidates)
        stages.below_rank_cutoff = stages.tagged - stages.candidates

        texts_by_user: dict[str, list[str]] = {user_id: [] for user_id in candidates}
        for tweet in tweets:
            if tweet.user_id in texts_by_user:
                texts_by_user[tweet.user_id].append(tweet.text)
        stages.zero_tweet_users = sum(not texts for texts in texts_by_user.values())
        if stages.zero_tweet_users:
            logger.warning(f'{stages.zero_tweet_users} candidate users have no tweets')

        tasks = [
            (user_id, tagging.countries[user_id], texts_by_user[user_id])
            for user_id in sorted(candidates)
        ]
        if mapper is None:
            init_worker(*self.worker_args)
            mapper = map
        judged = tqdm(
            mapper(judge_user, tasks),
            total=len(tasks),
            desc='filter',
            unit='user',
            disable=not self.progress,
        )
        retained: dict[str, str] = {}
        for verdict in judged:
            verdicts[verdict.user_id] = verdict
            if verdict.retained:
                retained[verdict.user_id] = verdict.country
            elif verdict.rejection_reason == RejectionReasonEnum.MOSTLY_MSA:
                stages.mostly_msa += 1
            else:
                stages.vulgar += 1
        stages.retained = len(retained)

        corpus, stats = assemble_corpus(
            retained, texts_by_user, self.msa_da_model, self.cfg.min_confidence, stages
        )
        logger.info(
            f'Cascade: {stages.profiles} profiles, {stages.tagged} tagged, '
            f'{stages.candidates} candidates, {stages.mostly_msa} mostly MSA, '
            f'{stages.vulgar} vulgar, {stages.retained} retained, {stages.corpus_tweets} tweets'
        )
        return CascadeResult(
            verdicts=[verdicts[user_id] for user_id in sorted(verdicts)],
            corpus=corpus,
            stats=stats,
            stages=stages,
        )
