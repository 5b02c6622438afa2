"""
Séries formelles tronquées à plusieurs variables (puissances et Laurent).

Une série stocke un dictionnaire exposant -> coefficient (Fraction ou
CoeffPoly) et une troncature : degré total maximal N et bornes inférieures
par variable. Le champ `precision` indique le degré total jusqu'auquel les
termes stockés sont exacts (None : la série stockée est la valeur exacte).
"""
import logging
import math
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import sympy
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.coefficients import CoeffPoly, Coefficient, invert_scalar
from app.utils.validators import DomainError, ShapeError, SingularMatrixError, UnitError

logger = logging.getLogger(__name__)

Exponent = Tuple[int, ...]


class Truncation(BaseModel):
    """Troncature : nombre de variables, degré total N, bornes L_k ≤ 0."""
    model_config = ConfigDict(frozen=True)

    nvars: int = Field(..., ge=0)
    max_total_degree: int = Field(..., ge=0)
    min_exponent: Tuple[int, ...]

    @model_validator(mode="after")
    def _check_bounds(self) -> "Truncation":
        if len(self.min_exponent) != self.nvars:
            raise ShapeError(
                f"{len(self.min_exponent)} bornes inférieures pour {self.nvars} variables"
            )
        if any(bound > 0 for bound in self.min_exponent):
            raise ShapeError(f"Bornes inférieures positives : {self.min_exponent}")
        return self

    @classmethod
    def power_series(cls, nvars: int, order: int) -> "Truncation":
        return cls(nvars=nvars, max_total_degree=order, min_exponent=(0,) * nvars)

    @property
    def lowest_degree(self) -> int:
        return sum(self.min_exponent)

    def widened(self, other: "Truncation") -> "Truncation":
        """Bornes inférieures composante par composante les plus larges."""
        bounds = tuple(min(a, b) for a, b in zip(self.min_exponent, other.min_exponent))
        if bounds == self.min_exponent:
            return self
        return Truncation(nvars=self.nvars, max_total_degree=self.max_total_degree, min_exponent=bounds)

    def with_bounds(self, bounds: Sequence[int]) -> "Truncation":
        bounds = tuple(min(0, b) for b in bounds)
        if bounds == self.min_exponent:
            return self
        return Truncation(nvars=self.nvars, max_total_degree=self.max_total_degree, min_exponent=bounds)

    def with_order(self, order: int) -> "Truncation":
        if order == self.max_total_degree:
            return self
        return Truncation(nvars=self.nvars, max_total_degree=order, min_exponent=self.min_exponent)


def _prec(value: Optional[int]) -> float:
    return math.inf if value is None else value


def _settle(precision: float, order: int, dropped: bool) -> Optional[int]:
    if dropped:
        precision = min(precision, order)
    if precision == math.inf:
        return None
    return int(min(precision, order))


class Series:
    """
    Série tronquée immuable.

    Deux séries sont égales si elles ont le même nombre de variables et les
    mêmes termes.
    """

    __slots__ = ("trunc", "_terms", "precision")

    def __init__(
        self,
        trunc: Truncation,
        terms: Optional[Dict[Exponent, Union[int, Fraction, CoeffPoly]]] = None,
        precision: Optional[int] = None,
    ):
        cleaned: Dict[Exponent, Coefficient] = {}
        dropped = False
        for exponent, c in (terms or {}).items():
            exponent = tuple(exponent)
            if len(exponent) != trunc.nvars:
                raise ShapeError(f"Exposant {exponent} pour {trunc.nvars} variables")
            if any(e < low for e, low in zip(exponent, trunc.min_exponent)):
                raise ShapeError(f"Exposant {exponent} sous les bornes {trunc.min_exponent}")
            if sum(exponent) > trunc.max_total_degree:
                dropped = True
                continue
            if isinstance(c, int):
                c = Fraction(c)
            if c:
                cleaned[exponent] = c
        self.trunc = trunc
        self._terms = cleaned
        self.precision = _settle(_prec(precision), trunc.max_total_degree, dropped)

    @classmethod
    def _make(cls, trunc: Truncation, terms: Dict[Exponent, Coefficient], precision: Optional[int]) -> "Series":
        series = cls.__new__(cls)
        series.trunc = trunc
        series._terms = terms
        series.precision = precision
        return series

    # --- constructeurs ---------------------------------------------------

    @classmethod
    def zero(cls, trunc: Truncation) -> "Series":
        return cls._make(trunc, {}, None)

    @classmethod
    def constant(cls, trunc: Truncation, value) -> "Series":
        return cls(trunc, {(0,) * trunc.nvars: value})

    @classmethod
    def monomial(cls, trunc: Truncation, exponent: Sequence[int], coefficient=1) -> "Series":
        exponent = tuple(exponent)
        bounds = tuple(min(low, e) for low, e in zip(trunc.min_exponent, exponent))
        return cls(trunc.with_bounds(bounds), {exponent: coefficient})

    @classmethod
    def variable(cls, trunc: Truncation, k: int, coefficient=1) -> "Series":
        if not 0 <= k < trunc.nvars:
            raise ShapeError(f"Variable {k} hors de [0, {trunc.nvars})")
        exponent = tuple(1 if i == k else 0 for i in range(trunc.nvars))
        return cls(trunc, {exponent: coefficient})

    # --- accès -------------------------------------------------------------

    @property
    def nvars(self) -> int:
        return self.trunc.nvars

    @property
    def order(self) -> int:
        return self.trunc.max_total_degree

    @property
    def is_exact(self) -> bool:
        return self.precision is None

    @property
    def certified_degree(self) -> int:
        return self.order if self.precision is None else min(self.precision, self.order)

    def items(self) -> Iterator[Tuple[Exponent, Coefficient]]:
        """Termes dans l'ordre (degré total, exposant)."""
        for exponent in sorted(self._terms, key=lambda e: (sum(e), e)):
            yield exponent, self._terms[exponent]

    def coefficient(self, exponent: Sequence[int]) -> Coefficient:
        return self._terms.get(tuple(exponent), Fraction(0))

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def valuation(self) -> Optional[int]:
        if not self._terms:
            return None
        return min(sum(e) for e in self._terms)

    def max_degree(self) -> Optional[int]:
        if not self._terms:
            return None
        return max(sum(e) for e in self._terms)

    def has_negative_exponents(self) -> bool:
        return any(e < 0 for exponent in self._terms for e in exponent)

    def constant_term(self) -> Coefficient:
        return self._terms.get((0,) * self.nvars, Fraction(0))

    def vanishes_upto(self, degree: int) -> bool:
        return all(sum(e) > degree for e in self._terms)

    def vanishes(self) -> bool:
        """Nulle jusqu'au degré certifié."""
        return self.vanishes_upto(self.certified_degree)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Series):
            return NotImplemented
        return self.nvars == other.nvars and self._terms == other._terms

    __hash__ = None

    def _lower_valuation(self) -> float:
        if self._terms:
            return min(sum(e) for e in self._terms)
        if self.precision is None:
            return math.inf
        return self.precision + 1

    # --- opérations de structure -------------------------------------------

    def with_order(self, order: int) -> "Series":
        """Change le degré total maximal ; les termes au-delà sont tronqués."""
        if order == self.order:
            return self
        trunc = self.trunc.with_order(order)
        terms = {e: c for e, c in self._terms.items() if sum(e) <= order}
        dropped = len(terms) != len(self._terms)
        precision = _settle(_prec(self.precision), order, dropped)
        return Series._make(trunc, terms, precision)

    def truncated(self, degree: int) -> "Series":
        """Termes de degré total ≤ degree (même troncature)."""
        terms = {e: c for e, c in self._terms.items() if sum(e) <= degree}
        precision = min(_prec(self.precision), degree)
        return Series._make(self.trunc, terms, _settle(precision, self.order, False))

    def map_coefficients(self, fn) -> "Series":
        terms = {}
        for e, c in self._terms.items():
            value = fn(c)
            if isinstance(value, int):
                value = Fraction(value)
            if value:
                terms[e] = value
        return Series._make(self.trunc, terms, self.precision)

    def scaled(self, factor) -> "Series":
        return linear_combine([(factor, self)])

    # --- opérateurs ----------------------------------------------------------

    def __add__(self, other: "Series") -> "Series":
        return linear_combine([(1, self), (1, other)])

    def __sub__(self, other: "Series") -> "Series":
        return linear_combine([(1, self), (-1, other)])

    def __neg__(self) -> "Series":
        return linear_combine([(-1, self)])

    def __mul__(self, other):
        if isinstance(other, Series):
            return mul(self, other)
        if isinstance(other, (int, Fraction, CoeffPoly)):
            return linear_combine([(other, self)])
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, CoeffPoly)):
            return linear_combine([(other, self)])
        return NotImplemented

    def __pow__(self, exponent: int) -> "Series":
        base = self
        if exponent < 0:
            base = invert_unit(self)
            exponent = -exponent
        result = Series.constant(base.trunc, 1)
        for _ in range(exponent):
            result = mul(result, base)
        return result

    def __repr__(self) -> str:
        if not self._terms:
            return f"Series(0; N={self.order})"
        parts = []
        for exponent, c in self.items():
            factors = []
            for k, e in enumerate(exponent):
                if e == 1:
                    factors.append(f"t{k}")
                elif e:
                    factors.append(f"t{k}^{e}")
            monomial = "*".join(factors)
            if not monomial:
                parts.append(f"({c})")
            else:
                parts.append(f"({c})*{monomial}")
        return f"Series({' + '.join(parts)}; N={self.order})"

    def to_sympy(self, names: Sequence[str]):
        """Expression sympy (noms de variables fournis, un par variable)."""
        if len(names) != self.nvars:
            raise ShapeError(f"{len(names)} noms pour {self.nvars} variables")
        symbols = [sympy.Symbol(name) for name in names]
        expr = sympy.Integer(0)
        for exponent, c in self.items():
            if isinstance(c, CoeffPoly):
                coeff = c.to_sympy()
            else:
                coeff = sympy.Rational(c.numerator, c.denominator)
            term = coeff
            for symbol, e in zip(symbols, exponent):
                if e:
                    term *= symbol ** e
            expr += term
        return expr


def _check_compatible(series: Sequence[Series]) -> None:
    first = series[0]
    for other in series[1:]:
        if other.nvars != first.nvars:
            raise ShapeError(f"Nombre de variables incompatible : {first.nvars} et {other.nvars}")
        if other.order != first.order:
            raise ShapeError(f"Troncatures incompatibles : N={first.order} et N={other.order}")


def linear_combine(pairs: Iterable[Tuple[object, Series]]) -> Series:
    """Combinaison linéaire exacte Σ c_i f_i (termes nuls éliminés)."""
    pairs = list(pairs)
    if not pairs:
        raise ShapeError("Combinaison linéaire vide")
    _check_compatible([s for _, s in pairs])
    trunc = pairs[0][1].trunc
    out: Dict[Exponent, Coefficient] = {}
    precision = math.inf
    for factor, series in pairs:
        if isinstance(factor, int):
            factor = Fraction(factor)
        if not factor:
            continue
        trunc = trunc.widened(series.trunc)
        precision = min(precision, _prec(series.precision))
        for e, c in series._terms.items():
            value = c * factor
            previous = out.get(e)
            out[e] = value if previous is None else previous + value
    terms = {e: c for e, c in out.items() if c}
    return Series._make(trunc, terms, _settle(precision, trunc.max_total_degree, False))


def _product_precision(a: Series, b: Series) -> float:
    return min(_prec(a.precision) + b._lower_valuation(), _prec(b.precision) + a._lower_valuation())


def mul(a: Series, b: Series) -> Series:
    """Produit exact suivi de la troncature en degré total."""
    _check_compatible([a, b])
    order = a.order
    trunc = Truncation(
        nvars=a.nvars,
        max_total_degree=order,
        min_exponent=tuple(x + y for x, y in zip(a.trunc.min_exponent, b.trunc.min_exponent)),
    )
    right = sorted(((sum(e), e, c) for e, c in b._terms.items()), key=lambda item: item[0])
    out: Dict[Exponent, Coefficient] = {}
    dropped = False
    for ea, ca in a._terms.items():
        da = sum(ea)
        for db, eb, cb in right:
            if da + db > order:
                dropped = True
                break
            e = tuple(x + y for x, y in zip(ea, eb))
            value = ca * cb
            previous = out.get(e)
            out[e] = value if previous is None else previous + value
    terms = {e: c for e, c in out.items() if c}
    precision = _product_precision(a, b)
    return Series._make(trunc, terms, _settle(precision, order, dropped))


def partial_derivative(f: Series, k: int) -> Series:
    """Dérivée partielle ∂/∂t_k (exposants de Laurent compris)."""
    if not 0 <= k < f.nvars:
        raise ShapeError(f"Variable {k} hors de [0, {f.nvars})")
    terms: Dict[Exponent, Coefficient] = {}
    for e, c in f._terms.items():
        if e[k] == 0:
            continue
        shifted = e[:k] + (e[k] - 1,) + e[k + 1:]
        terms[shifted] = c * e[k]
    trunc = f.trunc
    if trunc.min_exponent[k] < 0:
        bounds = list(trunc.min_exponent)
        bounds[k] -= 1
        trunc = trunc.with_bounds(bounds)
    precision = None if f.precision is None else f.precision - 1
    return Series._make(trunc, terms, precision)


def invert_unit(f: Series) -> Series:
    """
    Inverse d'une unité f = m·(c + h) : monôme dominant m, scalaire c ≠ 0,
    h de degré total strictement positif. Développement géométrique de
    (c + h)^{-1} puis inversion du monôme.
    """
    if not f._terms:
        raise UnitError("La série nulle n'est pas inversible")
    exponents = list(f._terms)
    lead = tuple(min(e[k] for e in exponents) for k in range(f.nvars))
    if lead not in f._terms:
        raise UnitError(f"Pas de monôme dominant inversible (minimum {lead} absent)")
    c_inv = invert_scalar(f._terms[lead])
    if c_inv is None:
        raise UnitError(f"Coefficient dominant non inversible : {f._terms[lead]}")

    lead_degree = sum(lead)
    order = f.order
    inner_order = order + lead_degree
    result_bounds = tuple(min(0, -e) for e in lead)
    result_trunc = f.trunc.with_bounds(result_bounds)
    if inner_order < 0:
        return Series._make(result_trunc, {}, order)

    inner = Truncation.power_series(f.nvars, inner_order)
    h_terms = {}
    for e, c in f._terms.items():
        if e == lead:
            continue
        h_terms[tuple(x - y for x, y in zip(e, lead))] = -c * c_inv
    h_precision = None if f.precision is None else f.precision - lead_degree
    minus_h = Series(inner, h_terms, h_precision)

    total = Series.constant(inner, 1)
    power = total
    # h a une valuation ≥ 1 : h^k est nul (et plafonne la précision) pour k > inner_order
    for _ in range(inner_order + 1):
        if minus_h.is_zero() and minus_h.is_exact:
            break
        power = mul(power, minus_h)
        total = total + power
        if power.is_zero():
            break

    terms = {}
    for e, c in total._terms.items():
        terms[tuple(x - y for x, y in zip(e, lead))] = c * c_inv
    precision = None if total.precision is None else total.precision - lead_degree
    return Series._make(result_trunc, terms, _settle(_prec(precision), order, False))


class _PowerCache:
    """Puissances successives d'un argument (et de son inverse si besoin)."""

    def __init__(self, arg: Series):
        self._positive: Dict[int, Series] = {1: arg}
        self._negative: Optional[Dict[int, Series]] = None

    def power(self, exponent: int) -> Series:
        if exponent > 0:
            table = self._positive
        else:
            if self._negative is None:
                self._negative = {1: invert_unit(self._positive[1])}
            table = self._negative
            exponent = -exponent
        if exponent not in table:
            known = max(k for k in table if k < exponent)
            value = table[known]
            for step in range(known + 1, exponent + 1):
                value = mul(value, table[1])
                table[step] = value
        return table[exponent]


def substitute(f: Series, args: Sequence[Series]) -> Series:
    """
    Composition f(args) : une série par variable de f. Les puissances
    négatives exigent des arguments unités.
    """
    if len(args) != f.nvars:
        raise ShapeError(f"{len(args)} arguments pour {f.nvars} variables")
    if not args:
        raise ShapeError("Substitution sans argument")
    _check_compatible(list(args))
    target = args[0].trunc
    for arg in args[1:]:
        target = target.widened(arg.trunc)

    caches = [_PowerCache(arg) for arg in args]
    pieces: List[Tuple[object, Series]] = [(0, Series.zero(target))]
    unit = Series.constant(target, 1)
    for exponent, c in f._terms.items():
        term = unit
        for k, e in enumerate(exponent):
            if e == 0:
                continue
            try:
                factor = caches[k].power(e)
            except UnitError as exc:
                raise UnitError(f"Puissance négative d'un argument non inversible (variable {k}) : {exc}")
            term = mul(term, factor)
        pieces.append((c, term))
    result = linear_combine(pieces)

    if f.precision is not None:
        bound = _substitution_bound(f, args, result)
        precision = min(_prec(result.precision), bound)
        result = Series._make(result.trunc, result._terms, _settle(precision, result.order, False))
    return result


def _substitution_bound(f: Series, args: Sequence[Series], result: Series) -> float:
    """Degré jusqu'auquel la queue inconnue de f ne contribue pas."""
    valuations = [arg._lower_valuation() for arg in args]
    lowest = min(valuations)
    no_negative = all(low == 0 for low in f.trunc.min_exponent)
    if lowest >= 1 and (no_negative or all(v == valuations[0] for v in valuations)):
        return (f.precision + 1) * lowest - 1
    return result.trunc.lowest_degree - 1


def evaluate(f: Series, point: Sequence[Fraction]):
    """Valeur exacte du représentant tronqué en un point rationnel."""
    if len(point) != f.nvars:
        raise ShapeError(f"Point de dimension {len(point)} pour {f.nvars} variables")
    point = [Fraction(p) for p in point]
    total = Fraction(0)
    for exponent, c in f._terms.items():
        value = Fraction(1)
        for p, e in zip(point, exponent):
            if e < 0 and p == 0:
                raise DomainError(f"Coordonnée nulle avec exposant négatif {exponent}")
            if e:
                value *= p ** e
        total = c * value + total
    return total


class BlockLayout(BaseModel):
    """Plongement/permutation des variables : source k -> cible positions[k]."""
    model_config = ConfigDict(frozen=True)

    target_nvars: int = Field(..., ge=0)
    positions: Tuple[int, ...]

    @model_validator(mode="after")
    def _check_positions(self) -> "BlockLayout":
        if any(not 0 <= p < self.target_nvars for p in self.positions):
            raise ShapeError(f"Positions {self.positions} hors de [0, {self.target_nvars})")
        if len(set(self.positions)) != len(self.positions):
            raise ShapeError(f"Positions non injectives : {self.positions}")
        return self

    @classmethod
    def embed(cls, n: int, block: int, blocks: int) -> "BlockLayout":
        """Variables u (n) placées dans le bloc `block` parmi `blocks`."""
        return cls(target_nvars=n * blocks, positions=tuple(block * n + k for k in range(n)))

    @classmethod
    def pair(cls, n: int, first: int, second: int, blocks: int) -> "BlockLayout":
        """Série en (u, v) placée sur les blocs (first, second)."""
        positions = tuple(first * n + k for k in range(n)) + tuple(second * n + k for k in range(n))
        return cls(target_nvars=n * blocks, positions=positions)

    @classmethod
    def permute(cls, n: int, order: Sequence[int]) -> "BlockLayout":
        """Le bloc source b va sur le bloc order[b]."""
        positions = tuple(order[b] * n + k for b in range(len(order)) for k in range(n))
        return cls(target_nvars=n * len(order), positions=positions)

    @classmethod
    def swap(cls, n: int) -> "BlockLayout":
        return cls.permute(n, (1, 0))


def relabel_blocks(f: Series, layout: BlockLayout) -> Series:
    """Réindexe les variables de f selon le plongement `layout`."""
    if len(layout.positions) != f.nvars:
        raise ShapeError(f"Plongement de {len(layout.positions)} variables pour une série à {f.nvars}")
    bounds = [0] * layout.target_nvars
    for k, position in enumerate(layout.positions):
        bounds[position] = f.trunc.min_exponent[k]
    trunc = Truncation(nvars=layout.target_nvars, max_total_degree=f.order, min_exponent=tuple(bounds))
    terms = {}
    for e, c in f._terms.items():
        target = [0] * layout.target_nvars
        for k, position in enumerate(layout.positions):
            target[position] = e[k]
        terms[tuple(target)] = c
    return Series._make(trunc, terms, f.precision)


class SeriesMatrix(BaseModel):
    """Matrice de séries partageant un même jeu de variables."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    rows: int = Field(..., ge=1)
    cols: int = Field(..., ge=1)
    entries: Tuple[Tuple[Series, ...], ...]

    @model_validator(mode="after")
    def _check_shape(self) -> "SeriesMatrix":
        if len(self.entries) != self.rows or any(len(row) != self.cols for row in self.entries):
            raise ShapeError(f"Matrice non rectangulaire {self.rows}x{self.cols}")
        _check_compatible([entry for row in self.entries for entry in row])
        return self

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Series]]) -> "SeriesMatrix":
        entries = tuple(tuple(row) for row in rows)
        return cls(rows=len(entries), cols=len(entries[0]) if entries else 0, entries=entries)

    @classmethod
    def identity(cls, trunc: Truncation, n: int) -> "SeriesMatrix":
        one = Series.constant(trunc, 1)
        zero = Series.zero(trunc)
        return cls.from_rows([[one if i == j else zero for j in range(n)] for i in range(n)])

    def __getitem__(self, index: Tuple[int, int]) -> Series:
        i, j = index
        return self.entries[i][j]

    @property
    def trunc(self) -> Truncation:
        return self.entries[0][0].trunc

    def __matmul__(self, other: "SeriesMatrix") -> "SeriesMatrix":
        if self.cols != other.rows:
            raise ShapeError(f"Produit {self.rows}x{self.cols} par {other.rows}x{other.cols}")
        rows = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                products = [mul(self.entries[i][k], other.entries[k][j]) for k in range(self.cols)]
                row.append(linear_combine([(1, p) for p in products]))
            rows.append(row)
        return SeriesMatrix.from_rows(rows)

    def scaled(self, factor: Series) -> "SeriesMatrix":
        return SeriesMatrix.from_rows([[mul(entry, factor) for entry in row] for row in self.entries])

    def minor(self, i: int, j: int) -> "SeriesMatrix":
        return SeriesMatrix.from_rows(
            [[entry for c, entry in enumerate(row) if c != j] for r, row in enumerate(self.entries) if r != i]
        )

    def determinant(self) -> Series:
        if self.rows != self.cols:
            raise ShapeError(f"Déterminant d'une matrice {self.rows}x{self.cols}")
        if self.rows == 1:
            return self.entries[0][0]
        if self.rows == 2:
            (a, b), (c, d) = self.entries
            return mul(a, d) - mul(b, c)
        pieces = []
        for j in range(self.cols):
            sign = 1 if j % 2 == 0 else -1
            pieces.append((sign, mul(self.entries[0][j], self.minor(0, j).determinant())))
        return linear_combine(pieces)

    def adjugate(self) -> "SeriesMatrix":
        n = self.rows
        if n == 1:
            return SeriesMatrix.identity(self.trunc, 1)
        rows = []
        for i in range(n):
            row = []
            for j in range(n):
                cofactor = self.minor(j, i).determinant()
                row.append(cofactor if (i + j) % 2 == 0 else -cofactor)
            rows.append(row)
        return SeriesMatrix.from_rows(rows)

    def equals_identity(self) -> bool:
        n = self.rows
        return self.rows == self.cols and all(
            self.entries[i][j] == (Series.constant(self.trunc, 1) if i == j else Series.zero(self.trunc))
            for i in range(n)
            for j in range(n)
        )


def matrix_inverse(matrix: SeriesMatrix) -> Tuple[SeriesMatrix, Series]:
    """Inverse par l'adjointe et invert_unit(det) ; renvoie (M^{-1}, det M)."""
    if matrix.rows != matrix.cols:
        raise ShapeError(f"Inverse d'une matrice {matrix.rows}x{matrix.cols}")
    det = matrix.determinant()
    try:
        det_inv = invert_unit(det)
    except UnitError as exc:
        raise SingularMatrixError(f"Déterminant non inversible : {exc}")
    logger.debug(f"Inversion d'une matrice {matrix.rows}x{matrix.cols}, det à {len(det)} termes")
    return matrix.adjugate().scaled(det_inv), det
