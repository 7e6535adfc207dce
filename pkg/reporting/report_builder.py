"""
Modulo per la scrittura dei risultati: file CSV e tabelle Markdown.
"""
import os
import re
from datetime import datetime
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd
from loguru import logger

from config import RESULTS_DIR


class ReportBuilder:
    """Classe per la generazione dei CSV e dei report Markdown dei benchmark."""

    def __init__(self, output_dir: str = RESULTS_DIR):
        """
        Inizializza il builder di report.

        Args:
            output_dir: Directory di output per i risultati
        """
        self.output_dir = output_dir
        self.ensure_output_dir()

    def ensure_output_dir(self):
        """Assicura che la directory di output esista."""
        os.makedirs(self.output_dir, exist_ok=True)

    def resolve_path(self, name: str) -> str:
        """Un nome semplice finisce in output_dir, un percorso viene usato così com'è."""
        if os.path.dirname(name):
            os.makedirs(os.path.dirname(name), exist_ok=True)
            return name
        return os.path.join(self.output_dir, name)

    def write_csv(self,
                  rows: Union[pd.DataFrame, List[Dict[str, Any]]],
                  columns: Sequence[str],
                  name: str) -> str:
        """
        Scrive un CSV con colonne nell'ordine indicato.

        I float usano la rappresentazione più corta con round-trip esatto.

        Args:
            rows: DataFrame o lista di dizionari
            columns: Ordine (contrattuale) delle colonne
            name: Nome del file o percorso

        Returns:
            Percorso del file scritto
        """
        if isinstance(rows, pd.DataFrame):
            df = rows
        else:
            rows = list(rows)
            # senza columns= le chiavi assenti non diventano colonne NaN
            df = pd.DataFrame(rows) if rows else pd.DataFrame(columns=list(columns))
        missing = [col for col in columns if col not in df.columns]
        if missing:
            raise KeyError(f"colonne mancanti nel CSV: {', '.join(missing)}")

        filepath = self.resolve_path(name)
        df[list(columns)].to_csv(filepath, index=False, float_format=None)
        logger.info(f"CSV generato: {filepath} ({len(df)} righe)")
        return filepath

    @staticmethod
    def markdown_table(df: pd.DataFrame, float_digits: Union[int, Dict[str, int]] = 3) -> str:
        """
        Formatta un DataFrame come tabella Markdown.

        Args:
            df: Dati da formattare
            float_digits: Decimali per i float (intero o dizionario per colonna)

        Returns:
            Tabella Markdown
        """
        def fmt(column: str, value: Any) -> str:
            if isinstance(value, float):
                digits = float_digits.get(column, 3) if isinstance(float_digits, dict) else float_digits
                return f"{value:.{digits}f}"
            return str(value)

        header = "| " + " | ".join(str(col) for col in df.columns) + " |"
        separator = "|" + "|".join("---" for _ in df.columns) + "|"
        body = [
            "| " + " | ".join(fmt(col, row[col]) for col in df.columns) + " |"
            for _, row in df.iterrows()
        ]
        return "\n".join([header, separator] + body)

    def write_markdown(self,
                       title: str,
                       sections: List[Tuple[str, str]],
                       name: Optional[str] = None,
                       metadata: Optional[Dict[str, Any]] = None) -> str:
        """
        Genera un report Markdown con titolo, sezioni e metadati.

        Args:
            title: Titolo del report
            sections: Coppie (intestazione, contenuto)
            name: Nome del file (default data + titolo normalizzato)
            metadata: Metadati aggiuntivi (seed, scale, tolleranze)

        Returns:
            Percorso del file generato
        """
        now = datetime.now()
        date_str = now.strftime('%Y-%m-%d')
        time_str = now.strftime('%H:%M:%S')

        if name is None:
            # Pulisci il titolo per il nome del file
            clean_title = re.sub(r'[^\w\s-]', '', title.lower())
            clean_title = re.sub(r'[\s-]+', '-', clean_title)
            name = f"{date_str}_{clean_title}.md"
        filepath = self.resolve_path(name)

        lines = [f"# {title}", "", f"Generato il {date_str} alle {time_str}", ""]
        for heading, content in sections:
            lines += [f"## {heading}", "", content, ""]
        if metadata:
            lines += ["## Metadati", ""]
            lines += [f"- **{key}:** {value}" for key, value in metadata.items()]
            lines.append("")

        with open(filepath, 'w', encoding='utf-8') as f:
            f.write("\n".join(lines))

        logger.info(f"Report Markdown generato: {filepath}")
        return filepath
