import re
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence


class AlgebraError(Exception):
    """Exception de base pour les erreurs du moteur de calcul."""
    pass


class ShapeError(AlgebraError):
    """Nombre de variables, troncature ou dimensions incompatibles."""
    pass


class UnitError(AlgebraError):
    """La série n'est pas une unité (pas de monôme dominant inversible)."""
    pass


class DomainError(AlgebraError):
    """Évaluation hors du domaine (coordonnée nulle et exposant négatif)."""
    pass


class SingularMatrixError(AlgebraError):
    """Déterminant non inversible."""
    pass


class UnsupportedCompositionError(AlgebraError):
    """Composition non supportée (terme constant, série de Laurent)."""
    pass


class SingularJetError(AlgebraError):
    """Partie linéaire X_0 singulière."""
    pass


class SingularGeneratorError(AlgebraError):
    """Le jacobien des générateurs n'a pas de déterminant inversible."""
    pass


class PreconditionError(AlgebraError):
    """Précondition mathématique non satisfaite (ex. φ non antisymétrique)."""
    pass


class OutOfModuliError(AlgebraError):
    """Paramètre hors de l'espace des modules."""
    pass


class DegenerateMatrixError(AlgebraError):
    """Matrice D singulière."""
    pass


class UnassignedCoordinateError(AlgebraError):
    """Coordonnée de groupe absente de l'affectation numérique."""
    pass


class BudgetError(AlgebraError):
    """Budget de troncature trop petit."""
    pass


class OutOfRangeError(AlgebraError):
    """Extraction au-delà du degré certifié."""
    pass


class ParseError(AlgebraError):
    """Document d'entrée mal formé (le message porte l'emplacement)."""
    pass


_RATIONAL_PATTERN = re.compile(r'^-?\d+(?:/\d+)?$')


def validate_rational_text(text: str) -> bool:
    """
    Valide l'écriture d'un rationnel "p/q" (ou entier "p"), sans espace.
    """
    if not _RATIONAL_PATTERN.match(text):
        return False
    if "/" in text:
        return int(text.split("/")[1]) != 0
    return True


def validate_integer_rows(rows: Sequence[Sequence[Any]]) -> List[str]:
    """
    Valide les lignes d'une matrice entière carrée.

    Returns:
        Liste des erreurs trouvées
    """
    errors = []

    if not rows:
        errors.append("La matrice doit avoir au moins une ligne")
        return errors

    n = len(rows)
    for i, row in enumerate(rows):
        if len(row) != n:
            errors.append(f"La ligne {i+1} a {len(row)} entrées au lieu de {n}")
        for j, entry in enumerate(row):
            if isinstance(entry, bool) or not isinstance(entry, int):
                errors.append(f"L'entrée ({i+1},{j+1}) n'est pas un entier")

    return errors


def validate_job_paths(paths: Dict[str, Optional[Path]]) -> List[str]:
    """
    Vérifie que tous les fichiers d'entrée d'une tâche existent.

    Returns:
        Liste des erreurs trouvées
    """
    errors = []

    for name, path in paths.items():
        if path is None:
            continue
        if not path.exists():
            errors.append(f"Le fichier '{name}' n'existe pas : {path}")
        elif path.suffix.lower() != ".json":
            errors.append(f"Le fichier '{name}' doit être un document JSON : {path}")

    return errors

