"""
Gerarchia delle eccezioni di DFWLayer.

Ogni classe corrisponde a un codice di uscita della CLI (vedi main.py).
"""
from typing import Optional


class DFWLayerError(Exception):
    """Eccezione base del progetto."""


class InvalidInputError(DFWLayerError, ValueError):
    """Input non valido: dimensioni incoerenti, valori non finiti, parametri fuori dominio."""


class ProblemFormatError(InvalidInputError):
    """Errore di formato in un file di problema."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"riga {line_number}: {message}"
        super().__init__(message)


class SolverAssertionError(DFWLayerError):
    """Invariante interno violato durante la risoluzione (es. obiettivo non finito)."""


class TapeMissingError(DFWLayerError):
    """Backward richiesto senza traiettoria registrata."""


class FitDivergedError(DFWLayerError):
    """La loss della demo di fitting è cresciuta per troppi passi consecutivi."""
