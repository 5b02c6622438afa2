"""
Tableaux de séries : champs de vecteurs, bi-champs φ^{ij}(u,v), résidus
Φ^{ijk}(u,v,w), bivecteurs α^{ij}(u) et bi-champs de jets Π^{ij}(u,v).

Les variables d'un tableau à plusieurs points sont rangées par blocs :
bloc u (variables 0..n-1), puis bloc v, puis bloc w.
"""
from itertools import product
from typing import Any, Callable, ClassVar, Iterator, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.core.series import BlockLayout, Series, Truncation, evaluate, linear_combine, relabel_blocks
from app.utils.validators import ShapeError

Index = Tuple[int, ...]


def _freeze(value: Any) -> Any:
    if isinstance(value, (list, tuple)):
        return tuple(_freeze(item) for item in value)
    return value


def _nest(rank: int, dim: int, fn: Callable[..., Series], prefix: Index = ()) -> Any:
    if len(prefix) == rank:
        return fn(*prefix)
    return tuple(_nest(rank, dim, fn, prefix + (k,)) for k in range(dim))


class SeriesArray(BaseModel):
    """Tableau carré de séries de rang `rank` sur `blocks` blocs de variables."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    rank: ClassVar[int] = 1
    blocks: ClassVar[int] = 1

    dim: int = Field(..., ge=1)
    components: Tuple[Any, ...]

    @field_validator("components", mode="before")
    @classmethod
    def _to_tuples(cls, value: Any) -> Any:
        return _freeze(value)

    @model_validator(mode="after")
    def _check_shape(self) -> "SeriesArray":
        expected = self.blocks * self.block_dim
        self._check_level(self.components, 0, expected)
        return self

    def _check_level(self, level: Any, depth: int, nvars: int) -> None:
        if depth == self.rank:
            if not isinstance(level, Series):
                raise ShapeError(f"{type(self).__name__} : composante {level!r} n'est pas une série")
            if level.nvars != nvars:
                raise ShapeError(
                    f"{type(self).__name__} : composante à {level.nvars} variables au lieu de {nvars}"
                )
            return
        if not isinstance(level, tuple) or len(level) != self.dim:
            raise ShapeError(f"{type(self).__name__} : {self.dim} composantes attendues au niveau {depth}")
        for item in level:
            self._check_level(item, depth + 1, nvars)

    # --- construction --------------------------------------------------------

    @property
    def block_dim(self) -> int:
        """Nombre de variables par bloc."""
        return self.dim

    @classmethod
    def build(cls, dim: int, fn: Callable[..., Series], **extra) -> "SeriesArray":
        return cls(dim=dim, components=_nest(cls.rank, dim, fn), **extra)

    def _extra(self) -> dict:
        return {}

    def map(self, fn: Callable[[Series], Series]) -> "SeriesArray":
        return type(self).build(self.dim, lambda *idx: fn(self[idx]), **self._extra())

    def zip_map(self, other: "SeriesArray", fn: Callable[[Series, Series], Series]) -> "SeriesArray":
        if type(other) is not type(self) or other.dim != self.dim:
            raise ShapeError(f"{type(self).__name__} et {type(other).__name__} incompatibles")
        return type(self).build(self.dim, lambda *idx: fn(self[idx], other[idx]), **self._extra())

    # --- accès -----------------------------------------------------------------

    def __getitem__(self, index) -> Series:
        if isinstance(index, int):
            index = (index,)
        level = self.components
        for k in index:
            level = level[k]
        return level

    def indices(self) -> Iterator[Index]:
        return product(range(self.dim), repeat=self.rank)

    def flat(self) -> Iterator[Tuple[Index, Series]]:
        for idx in self.indices():
            yield idx, self[idx]

    @property
    def nvars(self) -> int:
        return self.blocks * self.block_dim

    @property
    def order(self) -> int:
        return next(iter(self.flat()))[1].order

    @property
    def certified_degree(self) -> int:
        return min(series.certified_degree for _, series in self.flat())

    @property
    def is_exact(self) -> bool:
        return all(series.is_exact for _, series in self.flat())

    def vanishes(self) -> bool:
        """Toutes les composantes sont nulles jusqu'au degré certifié commun."""
        degree = self.certified_degree
        return all(series.vanishes_upto(degree) for _, series in self.flat())

    def is_zero(self) -> bool:
        return all(series.is_zero() for _, series in self.flat())

    def has_negative_exponents(self) -> bool:
        return any(series.has_negative_exponents() for _, series in self.flat())

    def nonzero(self) -> Iterator[Tuple[Index, Series]]:
        for idx, series in self.flat():
            if not series.is_zero():
                yield idx, series

    # --- arithmétique ------------------------------------------------------------

    def __add__(self, other: "SeriesArray") -> "SeriesArray":
        return self.zip_map(other, lambda a, b: a + b)

    def __sub__(self, other: "SeriesArray") -> "SeriesArray":
        return self.zip_map(other, lambda a, b: a - b)

    def __neg__(self) -> "SeriesArray":
        return self.map(lambda s: -s)

    def scaled(self, factor) -> "SeriesArray":
        return self.map(lambda s: linear_combine([(factor, s)]))

    def with_order(self, order: int) -> "SeriesArray":
        return self.map(lambda s: s.with_order(order))

    @classmethod
    def zeros(cls, dim: int, order: int, **extra) -> "SeriesArray":
        block_dim = extra.get("source_dim", dim)
        trunc = Truncation.power_series(cls.blocks * block_dim, order)
        return cls.build(dim, lambda *idx: Series.zero(trunc), **extra)


class VectorField(SeriesArray):
    """Champ de vecteurs formel X^i(u) ∂_i de W_n."""
    rank: ClassVar[int] = 1
    blocks: ClassVar[int] = 1


class TwoPointField(SeriesArray):
    """Tableau n×n de séries en (u, v) ; antisymétrie vérifiée, non supposée."""
    rank: ClassVar[int] = 2
    blocks: ClassVar[int] = 2

    def swapped(self) -> "TwoPointField":
        """ψ^{ij}(u,v) = φ^{ji}(v,u)."""
        layout = BlockLayout.swap(self.block_dim)
        return type(self).build(self.dim, lambda i, j: relabel_blocks(self[j, i], layout), **self._extra())

    def skew_defect(self) -> "TwoPointField":
        return self + self.swapped()

    def is_skew(self) -> bool:
        return self.skew_defect().is_zero()


class BiField(TwoPointField):
    """r-matrice φ^{ij}(u,v), ou tenseur Ω^{ij}(u,v)."""


class TriField(SeriesArray):
    """Tableau n×n×n en (u, v, w) : résidu Φ^{ijk}."""
    rank: ClassVar[int] = 3
    blocks: ClassVar[int] = 3

    def cycled(self) -> "TriField":
        """Ψ^{ijk}(u,v,w) = Φ^{jki}(v,w,u)."""
        layout = BlockLayout.permute(self.block_dim, (1, 2, 0))
        return type(self).build(self.dim, lambda i, j, k: relabel_blocks(self[j, k, i], layout), **self._extra())


class BiVectorOnSpace(SeriesArray):
    """Bivecteur α^{ij}(u) sur R^n."""
    rank: ClassVar[int] = 2
    blocks: ClassVar[int] = 1

    def is_skew(self) -> bool:
        return all(
            (self[i, j] + self[j, i]).is_zero() for i in range(self.dim) for j in range(i, self.dim)
        )


class JacobiTensor(SeriesArray):
    """Résidu de Jacobi J^{ijk}(u) d'un bivecteur."""
    rank: ClassVar[int] = 3
    blocks: ClassVar[int] = 1


class _JetMixin:
    @property
    def block_dim(self) -> int:
        return self.source_dim

    def _extra(self) -> dict:
        return {"source_dim": self.source_dim}


class JetBiField(_JetMixin, TwoPointField):
    """Π^{ij}(u,v) : n×n séries en 2m variables (m = source_dim)."""
    source_dim: int = Field(..., ge=1)


class JetTriField(_JetMixin, SeriesArray):
    """Tableau n×n×n en 3m variables (deux membres du certificat de Jacobi de Π)."""
    rank: ClassVar[int] = 3
    blocks: ClassVar[int] = 3

    source_dim: int = Field(..., ge=1)


def scalar_field(series: Series) -> BiField:
    """BiField n=1 à partir d'une série en (u, v)."""
    return BiField(dim=1, components=((series,),))


def evaluate_components(array: SeriesArray, point) -> dict:
    """Valeurs exactes de toutes les composantes en un point."""
    return {idx: evaluate(series, point) for idx, series in array.flat()}
