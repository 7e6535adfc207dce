"""
Controlli sugli input numerici condivisi dai moduli del solutore.
"""
from typing import Optional

import numpy as np

from utils.exceptions import InvalidInputError


def as_finite_vector(x, name: str = "x", size: Optional[int] = None) -> np.ndarray:
    """
    Converte un input in vettore float64 1-D controllando finitezza e dimensione.

    Args:
        x: Vettore (o sequenza) da validare
        name: Nome usato nei messaggi di errore
        size: Lunghezza attesa (opzionale)

    Returns:
        Vettore numpy float64
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise InvalidInputError(f"{name} deve essere un vettore, forma ricevuta {arr.shape}")
    if size is not None and arr.shape[0] != size:
        raise InvalidInputError(f"{name} ha lunghezza {arr.shape[0]}, attesa {size}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contiene valori non finiti")
    return arr


def as_finite_matrix(a, name: str = "P") -> np.ndarray:
    """
    Converte un input in matrice quadrata float64 con valori finiti.

    Args:
        a: Matrice da validare
        name: Nome usato nei messaggi di errore

    Returns:
        Matrice numpy float64
    """
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidInputError(f"{name} deve essere quadrata, forma ricevuta {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contiene valori non finiti")
    return arr
