"""
Coefficients exacts des séries : rationnels et polynômes en coordonnées du groupe.

Une coordonnée x^i_I du groupe est repérée par un symbole, une composante i
(indexée à partir de 1) et un multi-indice I. Les polynômes `CoeffPoly` servent
de coefficients aux séries symboliques (jets génériques).
"""
from fractions import Fraction
from typing import Dict, Iterator, Mapping, NamedTuple, Optional, Tuple, Union

import sympy

from app.utils.validators import ParseError, UnassignedCoordinateError, validate_rational_text


class GroupCoordinate(NamedTuple):
    """Coordonnée x^i_I (composante indexée à partir de 1)."""
    symbol: str
    component: int
    index: Tuple[int, ...]

    @property
    def degree(self) -> int:
        return sum(self.index)

    def __str__(self) -> str:
        return f"{self.symbol}^{self.component}_{''.join(str(i) for i in self.index)}"

    def latex(self) -> str:
        label = "".join(str(i) for i in self.index)
        return f"{self.symbol}^{{{self.component}}}_{{{label}}}"


Monomial = Tuple[Tuple[GroupCoordinate, int], ...]
Scalar = Union[int, Fraction]


def _merge(left: Monomial, right: Monomial) -> Monomial:
    if not left:
        return right
    if not right:
        return left
    powers = dict(left)
    for coord, power in right:
        powers[coord] = powers.get(coord, 0) + power
    return tuple(sorted(powers.items()))


class CoeffPoly:
    """
    Polynôme à coefficients rationnels en coordonnées `GroupCoordinate`.

    Immuable ; aucun coefficient nul n'est stocké.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Optional[Mapping[Monomial, Scalar]] = None):
        cleaned: Dict[Monomial, Fraction] = {}
        if terms:
            for mono, c in terms.items():
                if c:
                    cleaned[mono] = Fraction(c)
        self._terms = cleaned

    @classmethod
    def _from_clean(cls, terms: Dict[Monomial, Fraction]) -> "CoeffPoly":
        poly = cls.__new__(cls)
        poly._terms = terms
        return poly

    @classmethod
    def variable(cls, coord: GroupCoordinate) -> "CoeffPoly":
        return cls._from_clean({((coord, 1),): Fraction(1)})

    @classmethod
    def constant(cls, value: Scalar) -> "CoeffPoly":
        return cls({(): value})

    # --- accès ---------------------------------------------------------

    def items(self) -> Iterator[Tuple[Monomial, Fraction]]:
        """Termes dans l'ordre canonique des monômes."""
        for mono in sorted(self._terms):
            yield mono, self._terms[mono]

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_constant(self) -> bool:
        return all(not mono for mono in self._terms)

    def constant_value(self) -> Fraction:
        return self._terms.get((), Fraction(0))

    def variables(self) -> set:
        return {coord for mono in self._terms for coord, _ in mono}

    # --- arithmétique --------------------------------------------------

    @staticmethod
    def _lift(other) -> Optional["CoeffPoly"]:
        if isinstance(other, CoeffPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return CoeffPoly.constant(other)
        return None

    def __add__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        out = dict(self._terms)
        for mono, c in other._terms.items():
            total = out.get(mono, 0) + c
            if total:
                out[mono] = total
            else:
                out.pop(mono, None)
        return CoeffPoly._from_clean(out)

    __radd__ = __add__

    def __neg__(self) -> "CoeffPoly":
        return CoeffPoly._from_clean({mono: -c for mono, c in self._terms.items()})

    def __sub__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if not other:
                return CoeffPoly()
            return CoeffPoly._from_clean({mono: c * other for mono, c in self._terms.items()})
        if not isinstance(other, CoeffPoly):
            return NotImplemented
        out: Dict[Monomial, Fraction] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                mono = _merge(m1, m2)
                out[mono] = out.get(mono, 0) + c1 * c2
        return CoeffPoly._from_clean({mono: c for mono, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "CoeffPoly":
        if exponent < 0:
            raise ValueError(f"Exposant négatif non supporté : {exponent}")
        result = CoeffPoly.constant(1)
        for _ in range(exponent):
            result = result * self
        return result

    def __eq__(self, other) -> bool:
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return self._terms == other._terms

    __hash__ = None

    # --- calcul ----------------------------------------------------------

    def derivative(self, coord: GroupCoordinate) -> "CoeffPoly":
        """Dérivée partielle par rapport à une coordonnée."""
        out: Dict[Monomial, Fraction] = {}
        for mono, c in self._terms.items():
            powers = dict(mono)
            power = powers.get(coord)
            if not power:
                continue
            if power == 1:
                del powers[coord]
            else:
                powers[coord] = power - 1
            key = tuple(sorted(powers.items()))
            out[key] = out.get(key, 0) + c * power
        return CoeffPoly._from_clean({mono: c for mono, c in out.items() if c})

    def evaluate(self, assignment: Mapping[GroupCoordinate, Scalar]) -> Fraction:
        """Valeur exacte pour une affectation numérique des coordonnées."""
        total = Fraction(0)
        for mono, c in self._terms.items():
            value = c
            for coord, power in mono:
                if coord not in assignment:
                    raise UnassignedCoordinateError(f"Coordonnée sans valeur : {coord}")
                value *= Fraction(assignment[coord]) ** power
            total += value
        return total

    def to_sympy(self):
        expr = sympy.Integer(0)
        for mono, c in self.items():
            term = sympy.Rational(c.numerator, c.denominator)
            for coord, power in mono:
                term *= sympy.Symbol(coord.latex()) ** power
            expr += term
        return expr

    def __repr__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for mono, c in self.items():
            factors = [str(coord) if p == 1 else f"{coord}**{p}" for coord, p in mono]
            if not factors:
                parts.append(str(c))
            elif c == 1:
                parts.append("*".join(factors))
            else:
                parts.append(f"{c}*" + "*".join(factors))
        return " + ".join(parts)


Coefficient = Union[Fraction, CoeffPoly]


def format_rational(value: Fraction) -> str:
    """Écriture canonique "p/q" (q > 0, termes réduits)."""
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def parse_rational(text: str) -> Fraction:
    """Lit un rationnel "p/q" ou "p"."""
    if not isinstance(text, str) or not validate_rational_text(text):
        raise ParseError(f"Rationnel invalide : {text!r}")
    return Fraction(text)


def invert_scalar(value: Coefficient) -> Optional[Fraction]:
    """Inverse d'un coefficient constant non nul ; None sinon."""
    if isinstance(value, CoeffPoly):
        if not value.is_constant() or not value:
            return None
        value = value.constant_value()
    if not value:
        return None
    return 1 / Fraction(value)


def from_sympy_rational(value) -> Fraction:
    """Convertit un rationnel sympy en Fraction."""
    value = sympy.sympify(value)
    if not value.is_Rational:
        raise ValueError(f"Valeur non rationnelle : {value}")
    return Fraction(int(value.p), int(value.q))
