"""
Агломеративная кластеризация групп по столбцам матрицы валентности.

Расстояние между кластерами считается по всем парам их элементов
(min, max или среднее), поэтому результат совпадает с прямым перебором.
При равных расстояниях сливается пара с лексикографически меньшими
наборами имён групп.
"""

import json
from dataclasses import dataclass
from itertools import combinations
from typing import Optional

import numpy as np
from scipy.spatial.distance import (
    pdist,
    squareform,
)

from src.domain.analysis.valence import ValenceMatrix
from src.domain.exceptions import ValenceError
from src.domain.models.enums import (
    DistanceMetricEnum,
    LinkageEnum,
)

NEWICK_FLOAT_FORMAT = '.9g'


@dataclass(frozen=True)
class Merge:
    """Слияние: кластеры left и right (id как в scipy: листья 0..n-1, затем n, n+1, ...)"""

    left: int
    right: int
    height: float
    size: int


@dataclass(frozen=True)
class Dendrogram:
    leaves: tuple[str, ...]
    merges: tuple[Merge, ...]
    linkage: LinkageEnum = LinkageEnum.AVERAGE
    metric: DistanceMetricEnum = DistanceMetricEnum.COSINE

    def __post_init__(self) -> None:
        if len(self.merges) != len(self.leaves) - 1:
            raise ValenceError(
                f'{len(self.leaves)} leaves need {len(self.leaves) - 1} merges, got {len(self.merges)}'
            )

    @property
    def heights(self) -> list[float]:
        return [merge.height for merge in self.merges]

    def members(self, cluster: int) -> tuple[str, ...]:
        n = len(self.leaves)
        if cluster < n:
            return (self.leaves[cluster],)
        merge = self.merges[cluster - n]
        return self.members(merge.left) + self.members(merge.right)

    def _height(self, cluster: int) -> float:
        n = len(self.leaves)
        return 0.0 if cluster < n else self.merges[cluster - n].height

    def to_newick(self) -> str:
        """Newick с длинами ветвей: высота родителя минус высота потомка."""

        def render(cluster: int, parent_height: Optional[float]) -> str:
            n = len(self.leaves)
            if cluster < n:
                text = self.leaves[cluster]
            else:
                merge = self.merges[cluster - n]
                text = (
                    f'({render(merge.left, merge.height)},{render(merge.right, merge.height)})'
                )
            if parent_height is None:
                return text
            length = parent_height - self._height(cluster)
            return f'{text}:{format(length, NEWICK_FLOAT_FORMAT)}'

        root = 2 * len(self.leaves) - 2
        return render(root, None) + ';'

    def to_json(self) -> dict:
        return {
            'leaves': list(self.leaves),
            'linkage': self.linkage.value,
            'metric': self.metric.value,
            'merges': [
                {
                    'left': merge.left,
                    'right': merge.right,
                    'height': merge.height,
                    'size': merge.size,
                    'members': list(self.members(len(self.leaves) + step)),
                }
                for step, merge in enumerate(self.merges)
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), ensure_ascii=False, indent=2)

    def cut(self, k: int) -> list[tuple[str, ...]]:
        """Плоское разбиение на k кластеров (первые n-k слияний)."""
        n = len(self.leaves)
        if not 1 <= k <= n:
            raise ValenceError(f'k must be in [1, {n}], got {k}')
        active = set(range(n))
        for step, merge in enumerate(self.merges[: n - k]):
            active -= {merge.left, merge.right}
            active.add(n + step)
        clusters = [self.members(cluster) for cluster in active]
        order = {leaf: index for index, leaf in enumerate(self.leaves)}
        return sorted(
            (tuple(sorted(members, key=order.__getitem__)) for members in clusters),
            key=lambda members: order[members[0]],
        )


def _linkage_distance(block: np.ndarray, linkage: LinkageEnum) -> float:
    if linkage == LinkageEnum.SINGLE:
        return float(block.min())
    if linkage == LinkageEnum.COMPLETE:
        return float(block.max())
    return float(block.mean())


def agglomerate(
    distances: np.ndarray, names: tuple[str, ...], linkage: LinkageEnum
) -> tuple[Merge, ...]:
    n = len(names)
    clusters: dict[int, list[int]] = {index: [index] for index in range(n)}
    merges: list[Merge] = []
    for step in range(n - 1):
        best = None
        for a, b in combinations(sorted(clusters), 2):
            height = _linkage_distance(distances[np.ix_(clusters[a], clusters[b])], linkage)
            key_a = tuple(sorted(names[i] for i in clusters[a]))
            key_b = tuple(sorted(names[i] for i in clusters[b]))
            left, right = (a, b) if key_a <= key_b else (b, a)
            candidate = (height, min(key_a, key_b), max(key_a, key_b), left, right)
            if best is None or candidate[:3] < best[:3]:
                best = candidate
        height, _, _, left, right = best
        members = clusters.pop(left) + clusters.pop(right)
        clusters[n + step] = members
        merges.append(Merge(left=left, right=right, height=height, size=len(members)))
    return tuple(merges)


def cluster_dialects(
    vm: ValenceMatrix,
    linkage: LinkageEnum = LinkageEnum.AVERAGE,
    metric: DistanceMetricEnum = DistanceMetricEnum.COSINE,
) -> Dendrogram:
    """Иерархическая кластеризация групп (столбцов vm)."""
    linkage, metric = LinkageEnum(linkage), DistanceMetricEnum(metric)
    if len(vm.groups) < 2:
        raise ValenceError(f'Clustering needs at least 2 groups, got {len(vm.groups)}')
    columns = vm.values.T.astype(np.float64)
    if not np.isfinite(columns).all():
        raise ValenceError('Valence matrix contains non-finite values')
    distances = squareform(pdist(columns, metric=metric.value))
    if not np.isfinite(distances).all():
        raise ValenceError(f'{metric.value} distance is undefined for an all-zero group column')
    merges = agglomerate(distances, vm.groups, linkage)
    return Dendrogram(leaves=vm.groups, merges=merges, linkage=linkage, metric=metric)
