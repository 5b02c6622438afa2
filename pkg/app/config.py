from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict
from typing import Literal
from pathlib import Path


class Settings(BaseSettings):
    """Paramètres de l'application, surchargeables par variables d'environnement."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False
    )

    # Journalisation
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "WARNING"

    # Calcul
    default_order: int = Field(8, ge=1)
    default_seed: int = Field(42, ge=0)
    default_format: Literal["text", "json", "latex"] = "text"
    default_normalization: Literal["raw", "appendix"] = "raw"

    # Artefacts
    output_dir: Path = Path("./output")

    # Suite de vérification
    suite_n3_sample: int = Field(6, ge=0, le=64)  # tirage 3×3 à entrées ≤ 2, en plus des 𝓓₊ à entrées ≤ 1
    sample_tail_terms: int = Field(4, ge=0)


# Singleton instance
settings = Settings()
