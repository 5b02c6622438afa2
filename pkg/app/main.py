"""
Point d'entrée de la ligne de commande.

    python -m app.main cybe-check --matrix D.json --order 8
    python -m app.main w1 --d 1 --format latex
    python -m app.main verify --suite all --seed 42
"""
import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from app.api.models import Command, JobSpec, Normalization, OutputFormat
from app.config import settings
from app.core.runner import EXIT_INPUT, run

# Configuration du logging
logging.basicConfig(
    level=settings.log_level,
    format="%(asctime)s %(levelname)s %(name)s : %(message)s",
    stream=sys.stderr,
)
logger = logging.getLogger(__name__)


def _common_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--order", type=int, default=settings.default_order, help="degré total de troncature N")
    parent.add_argument("--seed", type=int, default=settings.default_seed, help="graine des tirages")
    parent.add_argument(
        "--format",
        choices=[f.value for f in OutputFormat],
        default=settings.default_format,
        help="format de sortie",
    )
    parent.add_argument(
        "--normalize",
        choices=[n.value for n in Normalization],
        default=settings.default_normalization,
        help="normalisation des représentants canoniques",
    )
    parent.add_argument(
        "--out",
        nargs="?",
        const=str(settings.output_dir),
        help="fichier ou répertoire de l'artefact (sans valeur : répertoire par défaut)",
    )
    parent.add_argument("--phi", help="r-matrice φ (document JSON)")
    parent.add_argument("--phi-target", help="r-matrice cible φ_n pour jet-pi")
    parent.add_argument("--generators", help="générateurs F^1..F^n (document JSON)")
    parent.add_argument("--matrix", help="matrice entière D (document JSON)")
    parent.add_argument("--jet", help="jet F : R^m -> R^n (document JSON)")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="poisson-lie",
        description="Structures de Poisson-Lie cobord sur les groupes de difféomorphismes formels",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    parent = _common_options()
    descriptions = {
        Command.RMATRIX: "r-matrice depuis des générateurs ou une matrice D",
        Command.CYBE_CHECK: "certificat du résidu de Yang-Baxter",
        Command.BRACKETS: "table des crochets {x_A, x_B}",
        Command.ALPHA: "bivecteur induit α et son résidu de Jacobi",
        Command.JET_PI: "structure Π sur l'espace des jets",
        Command.CANONICAL: "représentant canonique D -> générateurs, φ, α",
        Command.W1: "représentant canonique en dimension 1",
        Command.SAMPLE: "tirage dans la famille de Laurent 𝓕_D",
        Command.VERIFY: "suite de vérification",
    }
    for command, description in descriptions.items():
        sub = commands.add_parser(command.value, parents=[parent], help=description, description=description)
        if command == Command.BRACKETS:
            sub.add_argument("--bound", type=int, default=2, help="degré maximal des multi-indices")
        if command == Command.W1:
            sub.add_argument("--d", type=int, required=True, help="paramètre d ∈ Z₊ ∪ {-1}")
        if command == Command.VERIFY:
            sub.add_argument("--suite", nargs="+", default=["all"], help="all ou liste de modules")
    return parser


def job_from_args(args: argparse.Namespace) -> JobSpec:
    suite: List[str] = []
    for item in getattr(args, "suite", None) or ["all"]:
        suite.extend(part for part in item.split(",") if part)
    return JobSpec(
        command=args.command,
        generators=args.generators,
        matrix=args.matrix,
        phi=args.phi,
        phi_target=args.phi_target,
        jet=args.jet,
        order=args.order,
        seed=args.seed,
        format=args.format,
        normalization=args.normalize,
        out=args.out,
        d=getattr(args, "d", None),
        bound=getattr(args, "bound", 2),
        suite=suite,
    )


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        job = job_from_args(args)
    except ValidationError as exc:
        for error in exc.errors():
            location = ".".join(str(p) for p in error["loc"]) or "tâche"
            logger.error(f"Tâche invalide ({location}) : {error['msg']}")
            print(f"{location}: {error['msg']}", file=sys.stderr)
        return EXIT_INPUT

    outcome = run(job)
    if outcome.content:
        print(outcome.content)
    if outcome.error:
        print(outcome.error, file=sys.stderr)
    return outcome.status


if __name__ == "__main__":
    sys.exit(main())
