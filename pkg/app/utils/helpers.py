from typing import Iterator, List, Tuple
from datetime import datetime, timedelta
import logging

logger = logging.getLogger(__name__)


def multi_indices(n: int, degree: int) -> List[Tuple[int, ...]]:
    """
    Multi-indices de longueur n et de degré total `degree`, en ordre
    lexicographique croissant.
    """
    if n == 0:
        return [()] if degree == 0 else []
    if n == 1:
        return [(degree,)]

    indices = []
    for first in range(degree + 1):
        for rest in multi_indices(n - 1, degree - first):
            indices.append((first,) + rest)
    return indices


def multi_indices_upto(n: int, max_degree: int, min_degree: int = 0) -> List[Tuple[int, ...]]:
    """
    Multi-indices de degré total compris entre min_degree et max_degree.
    """
    return [
        index
        for degree in range(min_degree, max_degree + 1)
        for index in multi_indices(n, degree)
    ]


def compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    """
    Compositions de `total` en `parts` entiers strictement positifs
    (s_1 + ... + s_k = total, ordre compté).
    """
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(1, total - parts + 2):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def sanitize_filename(filename: str) -> str:
    """
    Nettoie un nom de fichier pour être compatible avec tous les OS.
    """
    # Caractères interdits
    invalid_chars = '<>:"/\\|?* '

    for char in invalid_chars:
        filename = filename.replace(char, '_')

    max_length = 200
    if len(filename) > max_length:
        name, ext = filename.rsplit('.', 1) if '.' in filename else (filename, '')
        filename = f"{name[:max_length-len(ext)-1]}.{ext}" if ext else name[:max_length]

    return filename


class ProgressTracker:
    """
    Classe pour suivre la progression d'une suite de vérifications.
    """
    def __init__(self, total_steps: int, description: str = ""):
        self.total_steps = total_steps
        self.current_step = 0
        self.description = description
        self.start_time = datetime.now()
        self._last = self.start_time

    def update(self, step_description: str = "") -> timedelta:
        """Met à jour la progression ; renvoie la durée de l'étape."""
        now = datetime.now()
        duration = now - self._last
        self._last = now
        self.current_step += 1
        logger.debug(f"[{self.current_step}/{self.total_steps}] {step_description} : {duration.total_seconds():.2f}s")
        return duration

    @property
    def progress(self) -> float:
        """Retourne la progression en pourcentage."""
        return (self.current_step / self.total_steps) * 100 if self.total_steps > 0 else 0

    @property
    def elapsed_time(self) -> timedelta:
        """Retourne le temps écoulé."""
        return datetime.now() - self.start_time

