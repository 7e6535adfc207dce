"""
Modulo per la configurazione avanzata del logging.
"""
import os
import sys
import json
from datetime import datetime
from typing import Dict, Any, Optional
from loguru import logger

from config import LOG_LEVEL, LOG_DIR, LOG_TO_FILE


def setup_logging(log_dir: str = LOG_DIR, to_file: bool = LOG_TO_FILE, level: str = LOG_LEVEL):
    """
    Configura il sistema di logging con rotazione dei file e formattazione.

    Args:
        log_dir: Directory per i file di log
        to_file: Se False vengono aggiunti solo i gestori su stderr
        level: Livello minimo per il gestore su console
    """
    # Rimuovi gestori predefiniti
    logger.remove()

    # Gestore su stderr: lo stdout è riservato ai risultati dei comandi
    logger.add(
        sys.stderr,
        level=level,
        format="<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | <cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>"
    )

    if to_file:
        os.makedirs(log_dir, exist_ok=True)

        # Gestore per i file con rotazione giornaliera
        logger.add(
            os.path.join(log_dir, "dfwlayer_{time:YYYY-MM-DD}.log"),
            rotation="00:00",
            retention="30 days",
            level="DEBUG",
            format="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function}:{line} - {message}",
            encoding="utf-8"
        )

        # Gestore separato per gli errori
        logger.add(
            os.path.join(log_dir, "dfwlayer_errors_{time:YYYY-MM-DD}.log"),
            rotation="00:00",
            retention="60 days",
            level="ERROR",
            format="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function}:{line} - {message}\n{exception}",
            encoding="utf-8"
        )

    logger.debug("Sistema di logging inizializzato")


class StructuredLogger:
    """Logger per eventi strutturati in formato JSON."""

    def __init__(self, log_dir: str = os.path.join(LOG_DIR, "events"), enabled: bool = LOG_TO_FILE):
        """
        Inizializza il logger strutturato.

        Args:
            log_dir: Directory per i file di log JSON
            enabled: Se False gli eventi vengono scartati
        """
        self.log_dir = log_dir
        self.enabled = enabled

        # File di log per la sessione corrente (creato alla prima scrittura)
        self.session_id = datetime.now().strftime("%Y%m%d_%H%M%S")
        self.log_file = os.path.join(log_dir, f"events_{self.session_id}.jsonl")

    def log_event(self,
                 event_type: str,
                 data: Dict[str, Any],
                 level: str = "INFO") -> None:
        """
        Registra un evento strutturato.

        Args:
            event_type: Tipo di evento
            data: Dati dell'evento
            level: Livello di logging
        """
        if not self.enabled:
            return

        event = {
            "timestamp": datetime.now().isoformat(),
            "event_type": event_type,
            "level": level,
            "session_id": self.session_id,
            "data": data
        }

        try:
            os.makedirs(self.log_dir, exist_ok=True)
            with open(self.log_file, 'a', encoding='utf-8') as f:
                f.write(json.dumps(event, default=float) + '\n')
        except Exception as e:
            logger.error(f"Errore nella registrazione dell'evento strutturato: {str(e)}")

    def log_solve_event(self,
                        label: str,
                        iterations: int,
                        objective: float,
                        wall_time: float,
                        termination: str,
                        extra: Optional[Dict[str, Any]] = None) -> None:
        """
        Registra la conclusione di una risoluzione.

        Args:
            label: Etichetta dell'istanza (es. "n=1000 seed=3")
            iterations: Iterazioni eseguite
            objective: Valore finale dell'obiettivo
            wall_time: Tempo di calcolo in secondi
            termination: Motivo di arresto
            extra: Campi aggiuntivi
        """
        self.log_event(
            event_type="solve",
            data={
                "label": label,
                "iterations": iterations,
                "objective": objective,
                "wall_time": wall_time,
                "termination": termination,
                **(extra or {})
            }
        )

    def log_trial(self,
                  command: str,
                  trial: int,
                  metrics: Dict[str, Any],
                  error: Optional[str] = None) -> None:
        """
        Registra l'esito di un trial di benchmark.

        Args:
            command: Sottocomando della CLI
            trial: Indice del trial
            metrics: Metriche calcolate
            error: Messaggio di errore (se presente)
        """
        self.log_event(
            event_type="trial",
            level="INFO" if error is None else "ERROR",
            data={
                "command": command,
                "trial": trial,
                "metrics": metrics,
                "error": error
            }
        )


# Inizializza il logger strutturato condiviso
structured_logger = StructuredLogger()
