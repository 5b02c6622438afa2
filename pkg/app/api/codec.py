"""
Conversion entre objets de calcul et documents JSON.

La sortie est canonique : termes triés par (degré total, exposant), clés
absentes plutôt que nulles, si bien que deux entrées identiques donnent des
octets identiques.
"""
import json
import logging
from fractions import Fraction
from pathlib import Path
from typing import List, Type, TypeVar

from pydantic import BaseModel, ValidationError

from app.api.models import (
    BracketPairDocument,
    BracketTable,
    FieldDocument,
    MapDocument,
    MatrixDocument,
    PolyDocument,
    PolyTermDocument,
    SeriesDocument,
    TermDocument,
    TruncDocument,
)
from app.core.classify import IntegerMatrix
from app.core.coefficients import CoeffPoly, GroupCoordinate, format_rational, parse_rational
from app.core.fields import SeriesArray
from app.core.grouppoisson import BracketEntry
from app.core.jetgroup import FormalMap
from app.core.series import Series, Truncation
from app.utils.validators import AlgebraError, ParseError

logger = logging.getLogger(__name__)

Document = TypeVar("Document", bound=BaseModel)


# --- coefficients ------------------------------------------------------------------------


def poly_to_terms(poly: CoeffPoly) -> List[PolyTermDocument]:
    return [
        PolyTermDocument(
            mono=[((coord.symbol, coord.component, list(coord.index)), power) for coord, power in mono],
            c=format_rational(c),
        )
        for mono, c in poly.items()
    ]


def poly_from_terms(terms: List[PolyTermDocument]) -> CoeffPoly:
    result = {}
    for term in terms:
        mono = tuple(sorted(
            (GroupCoordinate(symbol, component, tuple(index)), power)
            for (symbol, component, index), power in term.mono
        ))
        result[mono] = result.get(mono, Fraction(0)) + parse_rational(term.c)
    return CoeffPoly(result)


# --- séries et applications --------------------------------------------------------------


def series_to_document(series: Series) -> SeriesDocument:
    terms = []
    for exponent, c in series.items():
        value = PolyDocument(poly=poly_to_terms(c)) if isinstance(c, CoeffPoly) else format_rational(c)
        terms.append(TermDocument(e=list(exponent), c=value))
    return SeriesDocument(
        nvars=series.nvars,
        trunc=TruncDocument(
            max_total_degree=series.order,
            min_exponent=list(series.trunc.min_exponent),
        ),
        terms=terms,
        prec=series.precision,
    )


def series_from_document(doc: SeriesDocument, location: str = "série") -> Series:
    try:
        trunc = Truncation(
            nvars=doc.nvars,
            max_total_degree=doc.trunc.max_total_degree,
            min_exponent=tuple(doc.trunc.min_exponent),
        )
        terms = {}
        for position, term in enumerate(doc.terms):
            exponent = tuple(term.e)
            if exponent in terms:
                raise ParseError(f"exposant {list(exponent)} répété (terme {position})")
            if isinstance(term.c, PolyDocument):
                terms[exponent] = poly_from_terms(term.c.poly)
            else:
                terms[exponent] = parse_rational(term.c)
        return Series(trunc, terms, precision=doc.prec)
    except AlgebraError as exc:
        raise ParseError(f"{location} : {exc}")


def map_to_document(X: FormalMap) -> MapDocument:
    return MapDocument(
        source_dim=X.source_dim,
        target_dim=X.target_dim,
        components=[series_to_document(c) for c in X.components],
    )


def map_from_document(doc: MapDocument, location: str = "application") -> FormalMap:
    components = [
        series_from_document(c, f"{location}.components[{k}]") for k, c in enumerate(doc.components)
    ]
    try:
        X = FormalMap.from_components(components)
    except AlgebraError as exc:
        raise ParseError(f"{location} : {exc}")
    if X.source_dim != doc.source_dim:
        raise ParseError(f"{location} : source_dim={doc.source_dim} mais composantes à {X.source_dim} variables")
    return X


# --- tableaux de séries --------------------------------------------------------------------


def _nest_out(level):
    if isinstance(level, Series):
        return series_to_document(level)
    return [_nest_out(item) for item in level]


def field_to_document(array: SeriesArray) -> FieldDocument:
    source_dim = getattr(array, "source_dim", None)
    return FieldDocument(dim=array.dim, source_dim=source_dim, components=_nest_out(array.components))


def _nest_in(level, location: str):
    if isinstance(level, SeriesDocument):
        return series_from_document(level, location)
    return [_nest_in(item, f"{location}[{k}]") for k, item in enumerate(level)]


def field_from_document(doc: FieldDocument, cls: Type[SeriesArray], location: str = "champ") -> SeriesArray:
    components = _nest_in(doc.components, f"{location}.components")
    extra = {"source_dim": doc.source_dim} if "source_dim" in cls.model_fields else {}
    try:
        return cls(dim=doc.dim, components=components, **extra)
    except AlgebraError as exc:
        raise ParseError(f"{location} : {exc}")
    except ValidationError as exc:
        raise ParseError(f"{location} : {_describe(exc)}")


# --- matrices et crochets ------------------------------------------------------------------


def matrix_from_document(doc: MatrixDocument) -> IntegerMatrix:
    return IntegerMatrix(rows=doc.rows)


def matrix_to_document(D: IntegerMatrix) -> MatrixDocument:
    return MatrixDocument(n=D.n, rows=[list(row) for row in D.rows])


def bracket_table_to_document(entries: List[BracketEntry], dim: int, bound: int, certified_degree: int) -> BracketTable:
    return BracketTable(
        dim=dim,
        bound=bound,
        certified_degree=certified_degree,
        pairs=[
            BracketPairDocument(
                a=(entry.a.component, list(entry.a.index)),
                b=(entry.b.component, list(entry.b.index)),
                poly=poly_to_terms(entry.poly),
            )
            for entry in entries
        ],
    )


# --- fichiers --------------------------------------------------------------------------------


def _describe(exc: ValidationError) -> str:
    parts = []
    for error in exc.errors():
        location = ".".join(str(p) for p in error["loc"]) or "<racine>"
        parts.append(f"{location}: {error['msg']}")
    return "; ".join(parts)


def parse_document(text: str, model: Type[Document], source: str = "<entrée>") -> Document:
    """Valide un texte JSON ; toute erreur devient une ParseError localisée."""
    try:
        json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: JSON invalide ligne {exc.lineno} colonne {exc.colno} : {exc.msg}")
    try:
        return model.model_validate_json(text)
    except ValidationError as exc:
        raise ParseError(f"{source}: {_describe(exc)}")


def load_document(path: Path, model: Type[Document]) -> Document:
    logger.debug(f"Lecture de {path} ({model.__name__})")
    return parse_document(Path(path).read_text(encoding="utf-8"), model, str(path))


def dump_document(document: BaseModel) -> str:
    """JSON compact et canonique."""
    return document.model_dump_json(exclude_none=True)
