"""
Configurazione globale per DFWLayer.
"""
import os
from dotenv import load_dotenv

# Carica variabili d'ambiente dal file .env
load_dotenv()

# Configurazione del logging
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOG_DIR = os.getenv("LOG_DIR", "logs")
LOG_TO_FILE = os.getenv("LOG_TO_FILE", "True").lower() == "true"

# Directory per CSV e tabelle Markdown
RESULTS_DIR = os.getenv("RESULTS_DIR", "results")

# Configurazione del solutore Frank-Wolfe
DEFAULT_TOL = float(os.getenv("DEFAULT_TOL", 1e-4))
DEFAULT_MAX_ITERS = int(os.getenv("DEFAULT_MAX_ITERS", 5000))
DEFAULT_ANNEAL_PERIOD = int(os.getenv("DEFAULT_ANNEAL_PERIOD", 30))  # iterazioni per dimezzamento
TEMPERATURE_FLOOR = float(os.getenv("TEMPERATURE_FLOOR", 2.0 ** -30))
REFINE_ITERS = int(os.getenv("REFINE_ITERS", 500))  # passi a vertice esatto dopo l'annealing

# Costante di Lipschitz (power iteration)
LIPSCHITZ_SAFETY = float(os.getenv("LIPSCHITZ_SAFETY", 0.01))
POWER_ITERS = int(os.getenv("POWER_ITERS", 500))
POWER_TOL = float(os.getenv("POWER_TOL", 1e-10))

# Solutore di riferimento e oracolo alle differenze finite
REFERENCE_TOL = float(os.getenv("REFERENCE_TOL", 1e-10))
REFERENCE_MAX_ITERS = int(os.getenv("REFERENCE_MAX_ITERS", 1_000_000))
REFERENCE_STEP_TOL = float(os.getenv("REFERENCE_STEP_TOL", 1e-12))  # su ‖Δx‖ / (1 + ‖x‖)
ORACLE_SOLVER_TOL = float(os.getenv("ORACLE_SOLVER_TOL", 1e-8))

# Generatore di problemi: Philox 4x64 di numpy (counter-based, 64 bit)
PRNG_ALGORITHM = os.getenv("PRNG_ALGORITHM", "Philox")

# Scale dei benchmark (dimensione della variabile)
SCALES = {
    "small": 500,
    "medium": 1000,
    "large": 2000,
}

# Esecuzione dei trial
DEFAULT_TRIALS = int(os.getenv("DEFAULT_TRIALS", 5))
MAX_WORKERS = int(os.getenv("MAX_WORKERS", 1))
