import logging
import multiprocessing as mp
from multiprocessing.pool import Pool
from typing import (
    Any,
    Callable,
    Iterable,
    Iterator,
    Optional,
)

logger = logging.getLogger(__name__)

DEFAULT_CHUNKSIZE = 256


class OrderedPool:
    """
    Пул процессов с упорядоченным map. При jobs=1 работает в текущем процессе:
    initializer вызывается здесь же, map встроенный.
    """

    def __init__(
        self,
        jobs: int = 1,
        initializer: Optional[Callable[..., None]] = None,
        initargs: tuple = (),
        chunksize: int = DEFAULT_CHUNKSIZE,
    ) -> None:
        if jobs < 1:
            raise ValueError(f'jobs must be positive, got {jobs}')
        self.jobs = jobs
        self.initializer = initializer
        self.initargs = initargs
        self.chunksize = chunksize
        self._pool: Optional[Pool] = None

    def __enter__(self) -> 'OrderedPool':
        if self.jobs == 1:
            if self.initializer is not None:
                self.initializer(*self.initargs)
        else:
            logger.debug(f'Starting {self.jobs} worker processes')
            self._pool = mp.Pool(
                processes=self.jobs, initializer=self.initializer, initargs=self.initargs
            )
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        if self._pool is not None:
            if exc_type is None:
                self._pool.close()
            else:
                self._pool.terminate()
            self._pool.join()
            self._pool = None

    def map(self, fn: Callable[[Any], Any], items: Iterable[Any]) -> Iterator[Any]:
        if self._pool is None:
            return map(fn, items)
        return self._pool.imap(fn, items, chunksize=self.chunksize)
