"""
Газеттир стран: названия стран, городов и прилагательные национальности.
Сопоставляет описание профиля пользователя с единственной страной.
"""

import logging
from typing import (
    Iterable,
    Optional,
)

from pydantic import (
    Field,
    field_validator,
    model_validator,
)

from src.domain.exceptions import GazetteerError
from src.domain.models.base import RecordModel
from src.domain.models.enums import (
    CountryEnum,
    GazetteerCategoryEnum,
    LanguageEnum,
)
from src.domain.textnorm import tokenize

logger = logging.getLogger(__name__)

ARABIC_DEFINITE_ARTICLE = 'ال'
ARABIC_NISBA_SUFFIX = 'ي'
ARABIC_FEMININE_SUFFIX = 'ة'

TermKey = tuple[str, ...]


class GazetteerEntry(RecordModel):
    """Запись газеттира"""

    term: str = Field(min_length=1)
    country: str
    category: GazetteerCategoryEnum
    lang: LanguageEnum

    @field_validator('term')
    def term_is_trimmed(cls, v: str) -> str:
        if v != v.strip():
            raise ValueError(f'term {v!r} has leading or trailing whitespace')
        return v


class CountryMatch(RecordModel):
    """Результат сопоставления профиля с газеттиром"""

    country: Optional[str] = None
    matched_terms: tuple[str, ...] = ()
    ambiguous: bool = False

    @model_validator(mode='after')
    def country_xor_ambiguous(self) -> 'CountryMatch':
        if self.ambiguous == (self.country is not None):
            raise ValueError('ambiguous match must not carry a country')
        return self


def term_key(term: str) -> TermKey:
    return tuple(token.casefold() for token in tokenize(term))


def nationality_variants(term: str) -> list[str]:
    """Женская форма и формы с артиклем для арабского прилагательного национальности."""
    variants = []
    feminine = None
    if term.endswith(ARABIC_NISBA_SUFFIX):
        feminine = term + ARABIC_FEMININE_SUFFIX
        variants.append(feminine)
    if not term.startswith(ARABIC_DEFINITE_ARTICLE):
        variants.append(ARABIC_DEFINITE_ARTICLE + term)
        if feminine is not None:
            variants.append(ARABIC_DEFINITE_ARTICLE + feminine)
    return variants


class Gazetteer:
    """Неизменяемый индекс: последовательность токенов термина → записи"""

    def __init__(self, entries: tuple[GazetteerEntry, ...]) -> None:
        self.entries = entries
        index: dict[TermKey, list[GazetteerEntry]] = {}
        for entry in entries:
            key = term_key(entry.term)
            if not key:
                continue
            index.setdefault(key, []).append(entry)
        self._index: dict[TermKey, tuple[GazetteerEntry, ...]] = {
            key: tuple(values) for key, values in index.items()
        }
        self.max_term_length = max((len(key) for key in self._index), default=0)
        self.collisions: dict[str, tuple[str, ...]] = {}
        for values in self._index.values():
            countries = tuple(sorted({entry.country for entry in values}))
            if len(countries) > 1:
                self.collisions[values[0].term] = countries

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, term: str) -> bool:
        return term_key(term) in self._index

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Gazetteer):
            return NotImplemented
        return self.entries == other.entries

    def lookup(self, key: TermKey) -> tuple[GazetteerEntry, ...]:
        return self._index.get(key, ())

    def countries_for(self, term: str) -> frozenset[str]:
        return frozenset(entry.country for entry in self.lookup(term_key(term)))


def build_gazetteer(base_entries: Iterable[GazetteerEntry]) -> Gazetteer:
    """
    Строит газеттир: добавляет формы прилагательных национальности,
    убирает дубли (термин, страна). Один термин с разными странами
    сохраняется, неоднозначность проявится при сопоставлении.
    """
    supported = set(CountryEnum.codes())
    seen: set[tuple[str, str]] = set()
    entries: list[GazetteerEntry] = []
    count = 0

    def add(entry: GazetteerEntry) -> None:
        key = (entry.term, entry.country)
        if key not in seen:
            seen.add(key)
            entries.append(entry)

    for entry in base_entries:
        count += 1
        if entry.country not in supported:
            raise GazetteerError(
                f'Unsupported country code {entry.country!r} for term {entry.term!r}'
            )
        add(entry)
        if (
            entry.category == GazetteerCategoryEnum.NATIONALITY_ADJ
            and entry.lang == LanguageEnum.AR
        ):
            for variant in nationality_variants(entry.term):
                add(entry.model_copy(update={'term': variant}))

    if not count:
        raise GazetteerError('Gazetteer has no entries')

    gazetteer = Gazetteer(tuple(entries))
    for term, countries in gazetteer.collisions.items():
        logger.warning(f'Gazetteer term {term!r} maps to several countries: {countries}')
    logger.info(f'Gazetteer built: {len(gazetteer)} entries from {count} base entries')
    return gazetteer


def match_country(description: str, gz: Gazetteer) -> Optional[CountryMatch]:
    """
    Ищет термины газеттира в описании профиля (самое длинное совпадение первым).
    Описание должно быть нормализовано textnorm с настройками по умолчанию.
    """
    tokens = [token.casefold() for token in tokenize(description)]
    matched_terms: list[str] = []
    countries: set[str] = set()
    position = 0
    while position < len(tokens):
        longest = min(gz.max_term_length, len(tokens) - position)
        for length in range(longest, 0, -1):
            found = gz.lookup(tuple(tokens[position : position + length]))
            if found:
                matched_terms.append(found[0].term)
                countries.update(entry.country for entry in found)
                position += length
                break
        else:
            position += 1

    if not matched_terms:
        return None
    if len(countries) > 1:
        return CountryMatch(matched_terms=tuple(matched_terms), ambiguous=True)
    return CountryMatch(country=countries.pop(), matched_terms=tuple(matched_terms))
