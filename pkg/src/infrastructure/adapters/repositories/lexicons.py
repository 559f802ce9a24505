import logging

from pydantic import ValidationError

from src.domain.exceptions import GazetteerError
from src.domain.gazetteer import (
    Gazetteer,
    GazetteerEntry,
    build_gazetteer,
)
from src.domain.pipeline import ObsceneLexicon
from src.infrastructure.adapters.repositories.base import BaseRepository

logger = logging.getLogger(__name__)

COMMENT_PREFIX = '#'
GAZETTEER_COLUMNS = ('term', 'country', 'category', 'lang')


class GazetteerRepository(BaseRepository):
    """TSV term, country, category, lang; строки с '#' считаются комментариями"""

    def read_entries(self) -> list[GazetteerEntry]:
        entries = []
        for number, line in self.lines():
            if not line.strip() or line.startswith(COMMENT_PREFIX):
                continue
            cells = line.split('\t')
            if len(cells) != len(GAZETTEER_COLUMNS):
                raise GazetteerError(
                    f'{self.path}:{number}: expected {len(GAZETTEER_COLUMNS)} columns, got {len(cells)}'
                )
            try:
                entries.append(GazetteerEntry(**dict(zip(GAZETTEER_COLUMNS, cells))))
            except ValidationError as e:
                error = e.errors()[0]
                raise GazetteerError(
                    f'{self.path}:{number}: field {error["loc"][0]!r}: {error["msg"]}'
                ) from e
        return entries

    def load(self) -> Gazetteer:
        return build_gazetteer(self.read_entries())


class ObsceneRepository(BaseRepository):
    """Один термин на строку; строки, начинающиеся с '#', считаются хэштегами"""

    def load(self) -> ObsceneLexicon:
        lexicon = ObsceneLexicon.from_lines(line for _, line in self.lines())
        logger.info(
            f'Obscene lexicon {self.path}: {len(lexicon.words)} words, {len(lexicon.hashtags)} hashtags'
        )
        return lexicon

    def write(self, terms) -> None:
        with self.open_write() as f:
            for term in terms:
                f.write(f'{term}\n')
