"""
Modulo per la lettura e la scrittura dei file di problema in formato testuale.

Formato:

    dfwqp v1 n=<n> p=<p> seed=<seed>
    # family=<famiglia>
    # <chiave>: <valore>   (metadati del generatore, uno per riga)
    t=<valore>
    w <n valori>
    q <n valori>
    P
    <n righe di n valori>

I valori sono scritti con la rappresentazione decimale più corta che
garantisce il round-trip (repr di float).
"""
import os
from typing import List, Optional, Tuple

import numpy as np
from loguru import logger

from problems.problem_generator import ProblemInstance, scale_label
from solver.lmo import NormConstraint
from solver.objective import QuadraticObjective
from utils.exceptions import InvalidInputError, ProblemFormatError

MAGIC = "dfwqp"
VERSION = "v1"


def format_float(value: float) -> str:
    """Decimale più corto con round-trip esatto."""
    return repr(float(value))


def format_order(p: float) -> str:
    if np.isinf(p):
        return "inf"
    if float(p).is_integer():
        return str(int(p))
    return format_float(p)


def write_problem(instance: ProblemInstance, path: str) -> str:
    """
    Scrive un'istanza su file.

    Args:
        instance: Istanza da salvare
        path: Percorso del file

    Returns:
        Percorso del file scritto
    """
    obj, c = instance.objective, instance.constraint
    seed = "none" if instance.seed is None else str(instance.seed)
    lines = [f"{MAGIC} {VERSION} n={c.n} p={format_order(c.p)} seed={seed}"]
    lines.append(f"# family={instance.family}")
    for key, value in instance.metadata.items():
        lines.append(f"# {key}: {value}")
    lines.append(f"t={format_float(c.t)}")
    lines.append("w " + " ".join(format_float(v) for v in c.w))
    lines.append("q " + " ".join(format_float(v) for v in obj.q))
    lines.append("P")
    for row in obj.P:
        lines.append(" ".join(format_float(v) for v in row))

    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")
    logger.info(f"Problema salvato in {path} ({instance.label})")
    return path


def _parse_floats(tokens: List[str], expected: int, what: str, line_number: int) -> np.ndarray:
    if len(tokens) != expected:
        raise ProblemFormatError(f"{what}: attesi {expected} valori, trovati {len(tokens)}", line_number)
    try:
        values = np.array([float(tok) for tok in tokens], dtype=np.float64)
    except ValueError as e:
        raise ProblemFormatError(f"{what}: valore non numerico ({str(e)})", line_number)
    if not np.all(np.isfinite(values)):
        raise ProblemFormatError(f"{what}: valori non finiti", line_number)
    return values


def _parse_header(text: str, line_number: int) -> Tuple[int, float, Optional[int]]:
    tokens = text.split()
    if len(tokens) < 2 or tokens[0] != MAGIC or tokens[1] != VERSION:
        raise ProblemFormatError(f"intestazione non valida, atteso '{MAGIC} {VERSION} n=... p=... seed=...'",
                                 line_number)
    fields = {}
    for tok in tokens[2:]:
        if "=" not in tok:
            raise ProblemFormatError(f"campo di intestazione non valido: {tok}", line_number)
        key, value = tok.split("=", 1)
        fields[key] = value
    for key in ("n", "p", "seed"):
        if key not in fields:
            raise ProblemFormatError(f"campo '{key}' mancante nell'intestazione", line_number)
    try:
        n = int(fields["n"])
        p = float(fields["p"])
        seed = None if fields["seed"] == "none" else int(fields["seed"])
    except ValueError as e:
        raise ProblemFormatError(f"intestazione non numerica: {str(e)}", line_number)
    if n < 1:
        raise ProblemFormatError(f"n deve essere ≥ 1, ricevuto {n}", line_number)
    return n, p, seed


def parse_problem(text: str) -> ProblemInstance:
    """
    Interpreta il contenuto di un file di problema.

    Args:
        text: Contenuto testuale

    Returns:
        ProblemInstance
    """
    # righe significative con il loro numero (1-based)
    entries = []
    family = "qp"
    metadata = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            comment = line[1:].strip()
            if comment.startswith("family="):
                family = comment.split("=", 1)[1]
            elif ": " in comment:
                # metadati del generatore "# chiave: valore"
                key, value = comment.split(": ", 1)
                metadata[key.strip()] = value.strip()
            continue
        entries.append((number, line))

    if not entries:
        raise ProblemFormatError("file vuoto", 1)

    header_line, header = entries[0]
    n, p, seed = _parse_header(header, header_line)
    body = entries[1:]
    if len(body) < 4:
        last = body[-1][0] if body else header_line
        raise ProblemFormatError(f"file troncato: attese le righe t, w, q e P, trovate {len(body)}", last)

    number, line = body[0]
    if not line.startswith("t="):
        raise ProblemFormatError("attesa la riga 't=<valore>'", number)
    t = _parse_floats([line[2:].strip()], 1, "t", number)[0]

    vectors = {}
    for (number, line), name in zip(body[1:3], ("w", "q")):
        tokens = line.split()
        if tokens[0] != name:
            raise ProblemFormatError(f"attesa la riga '{name}'", number)
        vectors[name] = _parse_floats(tokens[1:], n, name, number)

    # la prima riga di P può seguire l'etichetta sulla stessa riga
    number, line = body[3]
    tokens = line.split()
    if tokens[0] != "P":
        raise ProblemFormatError("attesa la riga 'P'", number)
    rows = []
    if len(tokens) > 1:
        rows.append(_parse_floats(tokens[1:], n, "P riga 1", number))

    index = 4
    while len(rows) < n:
        if index >= len(body):
            raise ProblemFormatError(f"file troncato: matrice P con {len(rows)} righe su {n}", body[-1][0])
        number, line = body[index]
        tokens = line.split()
        if tokens[0] == "P":
            tokens = tokens[1:]
        rows.append(_parse_floats(tokens, n, f"P riga {len(rows) + 1}", number))
        index += 1
    if index < len(body):
        raise ProblemFormatError("contenuto inatteso dopo la matrice P", body[index][0])

    try:
        objective = QuadraticObjective(np.vstack(rows), vectors["q"])
        constraint = NormConstraint(w=vectors["w"], t=t, p=p)
    except InvalidInputError as e:
        raise ProblemFormatError(str(e), header_line)

    return ProblemInstance(objective=objective, constraint=constraint, seed=seed,
                           scale=scale_label(n), family=family, metadata=metadata)


def read_problem(path: str) -> ProblemInstance:
    """
    Legge un file di problema.

    Args:
        path: Percorso del file

    Returns:
        ProblemInstance
    """
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    instance = parse_problem(text)
    logger.info(f"Problema caricato da {path} ({instance.label})")
    return instance
