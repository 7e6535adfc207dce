"""
Applicazione principale DFWLayer.
Risolve problemi vincolati con il layer Frank-Wolfe differenziabile e riproduce
i benchmark di tempo, accuratezza, temperatura e fitting end-to-end.
"""
import argparse
import json
import os
import sys
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from loguru import logger

import config
from analysis.experiments import (
    accuracy_trial, fit_demo, run_trials, temperature_sweep, time_trial
)
from analysis.metrics import summarize, violation
from problems.problem_generator import POWER_PRESETS, gen_power_constrained, gen_power_preset, gen_qp
from problems.problem_io import read_problem, write_problem
from reporting.report_builder import ReportBuilder
from solver.fw_solver import SolverConfig, TemperatureSchedule, solve
from solver.lmo import NormConstraint
from utils.exceptions import DFWLayerError, FitDivergedError, InvalidInputError, SolverAssertionError
from utils.logger import setup_logging, structured_logger

# Codici di uscita
EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_INTERNAL_ERROR = 3
EXIT_CHECK_FAILED = 4

# Schemi CSV (ordine delle colonne contrattuale)
BENCH_TIME_COLUMNS = ["scale", "trial", "seconds"]
BENCH_ACCURACY_COLUMNS = ["scale", "trial", "cos_sim", "sol_dist", "mean_viol", "max_viol"]
TEMP_SWEEP_COLUMNS = ["setting", "k", "distance", "final_cos_sim"]
FIT_DEMO_COLUMNS = ["step", "loss"]
TAPE_COLUMNS = ["k", "objective", "gap", "gamma", "tau", "branch"]

# Soglie della modalità --check
CHECK_MAX_SECONDS = 5.0
CHECK_MIN_COS_SIM = 0.95
CHECK_MAX_SOL_DIST = 0.01
CHECK_MAX_VIOLATION = 1e-9

# Chiavi di config.py sovrascrivibili da --config
OVERRIDABLE_KEYS = (
    "DEFAULT_TOL", "DEFAULT_MAX_ITERS", "DEFAULT_ANNEAL_PERIOD", "DEFAULT_TRIALS",
    "MAX_WORKERS", "RESULTS_DIR",
)


def parse_schedule(text: Optional[str], period: int) -> TemperatureSchedule:
    """
    Interpreta lo schedule della temperatura.

    "anneal" usa il periodo indicato, "anneal:T" un periodo esplicito,
    un numero una temperatura costante.
    """
    if text is None or text == "anneal":
        return TemperatureSchedule.annealing(period)
    if text.startswith("anneal:"):
        try:
            return TemperatureSchedule.annealing(int(text.split(":", 1)[1]))
        except ValueError:
            raise InvalidInputError(f"periodo di annealing non valido: {text}")
    try:
        return TemperatureSchedule.constant(float(text))
    except ValueError:
        raise InvalidInputError(f"schedule non valido: {text} (usare 'anneal', 'anneal:T' o un numero)")


def parse_scale(token: str) -> int:
    """Accetta un nome di scala (small/medium/large) o una dimensione intera."""
    token = token.strip()
    if token in config.SCALES:
        return config.SCALES[token]
    try:
        n = int(token)
    except ValueError:
        raise InvalidInputError(f"scala non valida: {token} (disponibili: {', '.join(config.SCALES)})")
    if n < 1:
        raise InvalidInputError(f"la scala deve essere ≥ 1, ricevuto {n}")
    return n


def parse_float_list(text: str, name: str) -> List[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise InvalidInputError(f"{name}: lista di numeri non valida ({text})")


def parse_order(text: Optional[str]) -> Optional[float]:
    if text is None:
        return None
    try:
        return float(text)
    except ValueError:
        raise InvalidInputError(f"ordine p non valido: {text}")


class DFWLayerHarness:
    """Classe principale per i comandi della CLI DFWLayer."""

    def __init__(self,
                 config_file: Optional[str] = None,
                 results_dir: Optional[str] = None,
                 workers: Optional[int] = None,
                 show_progress: bool = True):
        """
        Inizializza l'harness.

        Args:
            config_file: Percorso al file di configurazione JSON (opzionale)
            results_dir: Directory dei risultati (default da configurazione)
            workers: Thread per i trial (default da configurazione)
            show_progress: Mostra le barre di avanzamento
        """
        # Inizializza il logging
        setup_logging()
        logger.info("Inizializzazione DFWLayer")

        self.settings: Dict[str, Any] = {key: getattr(config, key) for key in OVERRIDABLE_KEYS}
        if config_file:
            self._load_config(config_file)
        if results_dir:
            self.settings["RESULTS_DIR"] = results_dir
        if workers:
            self.settings["MAX_WORKERS"] = int(workers)

        self.show_progress = show_progress
        self.report_builder = ReportBuilder(self.settings["RESULTS_DIR"])

    def _load_config(self, config_file: str):
        """
        Carica la configurazione da un file JSON.

        Args:
            config_file: Percorso al file di configurazione
        """
        if not os.path.exists(config_file):
            raise InvalidInputError(f"file di configurazione inesistente: {config_file}")
        try:
            with open(config_file, 'r') as f:
                overrides = json.load(f)
        except json.JSONDecodeError as e:
            raise InvalidInputError(f"configurazione JSON non valida: {str(e)}")

        for key, value in overrides.items():
            if key in self.settings:
                self.settings[key] = type(self.settings[key])(value)
            else:
                logger.warning(f"Chiave di configurazione ignorata: {key}")
        logger.info(f"Configurazione caricata da {config_file}")

    def solver_config(self,
                      tol: Optional[float] = None,
                      schedule: Optional[str] = None,
                      max_iters: Optional[int] = None,
                      record_tape: bool = False) -> SolverConfig:
        """Costruisce la configurazione del solutore a partire dalle impostazioni."""
        return SolverConfig(
            tol=self.settings["DEFAULT_TOL"] if tol is None else tol,
            max_iters=self.settings["DEFAULT_MAX_ITERS"] if max_iters is None else max_iters,
            schedule=parse_schedule(schedule, self.settings["DEFAULT_ANNEAL_PERIOD"]),
            record_tape=record_tape,
        )

    def run(self, command: str, **kwargs) -> int:
        """
        Esegue un comando traducendo le eccezioni in codici di uscita.

        Args:
            command: Nome del sottocomando
            **kwargs: Argomenti del comando

        Returns:
            Codice di uscita
        """
        handler = getattr(self, "cmd_" + command.replace("-", "_"))
        try:
            return handler(**kwargs)
        except (InvalidInputError, OSError) as e:
            logger.error(f"Errore di input in '{command}': {str(e)}")
            return EXIT_INPUT_ERROR
        except (SolverAssertionError, FitDivergedError) as e:
            logger.error(f"Errore del solutore in '{command}': {str(e)}")
            return EXIT_INTERNAL_ERROR
        except DFWLayerError as e:
            logger.error(f"Errore interno in '{command}': {str(e)}")
            return EXIT_INTERNAL_ERROR
        except Exception as e:
            logger.exception(f"Errore inatteso in '{command}': {str(e)}")
            return EXIT_INTERNAL_ERROR

    def cmd_solve(self, problem: str, p: Optional[str] = None, tol: Optional[float] = None,
                  schedule: Optional[str] = None, tape: bool = False, out: Optional[str] = None,
                  max_iters: Optional[int] = None) -> int:
        """
        Risolve un problema letto da file e scrive la soluzione in CSV.

        Args:
            problem: File di problema
            p: Ordine della norma che sostituisce quello del file
            tol: Tolleranza relativa
            schedule: Schedule della temperatura
            tape: Scrive anche il nastro per iterazione
            out: CSV di output (default RESULTS_DIR/solve.csv)
            max_iters: Limite di iterazioni

        Returns:
            Codice di uscita
        """
        instance = read_problem(problem)
        c = instance.constraint
        order = parse_order(p)
        if order is not None:
            c = NormConstraint(w=c.w, t=c.t, p=order)

        report = solve(instance.objective, c, self.solver_config(tol, schedule, max_iters, record_tape=tape))
        viol = violation(report.solution, c)

        rows = [
            {"key": "objective", "value": report.objective},
            {"key": "iterations", "value": report.iterations},
            {"key": "refine_iterations", "value": report.refine_iterations},
            {"key": "seconds", "value": report.wall_time},
            {"key": "violation", "value": viol},
            {"key": "termination", "value": report.termination},
        ]
        rows += [{"key": f"x[{i}]", "value": float(v)} for i, v in enumerate(report.solution)]
        out = out or "solve.csv"
        path = self.report_builder.write_csv(rows, ["key", "value"], out)

        if tape:
            trace = report.objective_trace
            tape_rows = [
                {"k": k, "objective": trace[k], "gap": report.gap_trace[k], "gamma": rec.gamma,
                 "tau": rec.tau if rec.tau is not None else float("nan"), "branch": rec.branch}
                for k, rec in enumerate(report.trajectory.records)
            ]
            self.report_builder.write_csv(tape_rows, TAPE_COLUMNS, os.path.splitext(path)[0] + ".tape.csv")

        structured_logger.log_solve_event(instance.label, report.iterations, report.objective,
                                          report.wall_time, report.termination, {"violation": viol})
        print(f"objective={report.objective!r} iterations={report.iterations} "
              f"seconds={report.wall_time:.4f} violation={viol!r} termination={report.termination}")
        return EXIT_OK

    def cmd_generate(self, n: int, seed: int, out: str, p: Optional[str] = None,
                     family: str = "qp", preset: Optional[str] = None, p_max: float = 20.0) -> int:
        """Genera un'istanza e la salva in formato testuale."""
        if preset:
            instance = gen_power_preset(preset, seed)
        elif family == "power":
            instance = gen_power_constrained(n, p_max, seed)
        else:
            order = parse_order(p)
            instance = gen_qp(n, seed, p=1.0 if order is None else order)
        write_problem(instance, out)
        print(out)
        return EXIT_OK

    def cmd_bench_time(self, scales: str, trials: Optional[int] = None, seed: int = 0,
                       tol: Optional[float] = None, out: Optional[str] = None,
                       include_reference: bool = True, check: bool = False) -> int:
        """
        Tempi di risoluzione in avanti per scala (media ± dev. std sui trial).

        Returns:
            Codice di uscita (4 se --check e una scala supera CHECK_MAX_SECONDS)
        """
        sizes = [parse_scale(tok) for tok in scales.split(",") if tok.strip()]
        trials = trials or self.settings["DEFAULT_TRIALS"]
        cfg = self.solver_config(tol)

        rows = []
        for n in sizes:
            results = run_trials(lambda i, n=n: time_trial(n, seed + i, i, cfg, include_reference),
                                 trials, self.settings["MAX_WORKERS"], desc=f"tempi n={n}",
                                 show_progress=self.show_progress)
            for row in results:
                structured_logger.log_trial("bench-time", row["trial"], row)
            rows += results

        df = pd.DataFrame(rows)
        self.report_builder.write_csv(df, BENCH_TIME_COLUMNS, out or "bench_time.csv")

        table = {"Method": ["DFWLayer"]}
        if include_reference:
            table["Method"].append("Projected gradient (reference)")
        means = {}
        for n in sizes:
            sub = df[df["scale"] == n]
            mean, std = summarize(sub["seconds"])
            means[n] = mean
            cells = [f"{mean:.2f} ± {std:.2f}"]
            if include_reference:
                ref_mean, ref_std = summarize(sub["reference_seconds"])
                cells.append(f"{ref_mean:.2f} ± {ref_std:.2f}")
            table[str(n)] = cells
        markdown = self.report_builder.markdown_table(pd.DataFrame(table))
        self._publish("Running time (s)", markdown, "bench_time.md",
                      {"trials": trials, "seed": seed, "tol": cfg.tol, "schedule": cfg.schedule.label})

        if check and max(means.values()) > CHECK_MAX_SECONDS:
            logger.error(f"Verifica non superata: tempo medio massimo {max(means.values()):.2f}s "
                         f"> {CHECK_MAX_SECONDS}s")
            return EXIT_CHECK_FAILED
        return EXIT_OK

    def cmd_bench_accuracy(self, scale: str, trials: Optional[int] = None, seed: int = 0,
                           tol: Optional[float] = None, out: Optional[str] = None,
                           check: bool = False) -> int:
        """
        Accuratezza di soluzioni e gradienti rispetto agli oracoli.

        Returns:
            Codice di uscita (4 se --check e una soglia non è rispettata)
        """
        n = parse_scale(scale)
        trials = trials or self.settings["DEFAULT_TRIALS"]
        cfg = self.solver_config(tol, record_tape=True)

        results = run_trials(lambda i: accuracy_trial(n, seed + i, i, cfg), trials,
                             self.settings["MAX_WORKERS"], desc=f"accuratezza n={n}",
                             show_progress=self.show_progress)
        for row in results:
            structured_logger.log_trial("bench-accuracy", row["trial"], row)

        df = pd.DataFrame(results)
        self.report_builder.write_csv(df, BENCH_ACCURACY_COLUMNS, out or "bench_accuracy.csv")

        cos_mean, cos_std = summarize(df["cos_sim"])
        dist_mean, dist_std = summarize(df["sol_dist"])
        violated = df["max_viol"][df["max_viol"] > 0]
        mean_viol = float(violated.mean()) if len(violated) else 0.0
        max_viol = float(df["max_viol"].max())
        table = pd.DataFrame({
            "Method": ["DFWLayer"],
            "Gradients Sim.": [f"{cos_mean:.3f} ± {cos_std:.3f}"],
            "Solutions Dist.": [f"{dist_mean:.3f} ± {dist_std:.3f}"],
            "Mean Violation": [mean_viol],
            "Max Violation": [max_viol],
        })
        markdown = self.report_builder.markdown_table(table, float_digits=3)
        self._publish(f"Accuracy (n={n})", markdown, "bench_accuracy.md",
                      {"trials": trials, "seed": seed, "tol": cfg.tol, "schedule": cfg.schedule.label,
                       "violation": "absolute, max(0, ‖w∘x‖_p − t); mean over violated samples"})

        if check:
            failures = []
            if cos_mean < CHECK_MIN_COS_SIM:
                failures.append(f"similarità {cos_mean:.3f} < {CHECK_MIN_COS_SIM}")
            if dist_mean > CHECK_MAX_SOL_DIST:
                failures.append(f"distanza {dist_mean:.4f} > {CHECK_MAX_SOL_DIST}")
            if max_viol > CHECK_MAX_VIOLATION:
                failures.append(f"violazione {max_viol:.3e} > {CHECK_MAX_VIOLATION}")
            if failures:
                logger.error(f"Verifica non superata: {'; '.join(failures)}")
                return EXIT_CHECK_FAILED
        return EXIT_OK

    def cmd_temp_sweep(self, taus: str, anneal_period: Optional[int] = None, scale: str = "medium",
                       seed: int = 0, tol: Optional[float] = None, out: Optional[str] = None,
                       check: bool = False) -> int:
        """
        Sweep delle temperature costanti contro l'annealing.

        Returns:
            Codice di uscita (4 se --check e l'ordinamento atteso non si verifica)
        """
        n = parse_scale(scale)
        tau_values = parse_float_list(taus, "--taus")
        period = anneal_period or self.settings["DEFAULT_ANNEAL_PERIOD"]
        cfg = self.solver_config(tol)

        rows = temperature_sweep(n, seed, tau_values, period, cfg)
        df = pd.DataFrame(rows)
        self.report_builder.write_csv(df, TEMP_SWEEP_COLUMNS, out or "temp_sweep.csv")

        final = df.groupby("setting", sort=False).agg(
            iterations=("k", "max"), distance=("distance", "last"), final_cos_sim=("final_cos_sim", "last")
        ).reset_index()
        markdown = self.report_builder.markdown_table(final, float_digits=3)
        self._publish(f"Temperature sweep (n={n})", markdown, "temp_sweep.md",
                      {"seed": seed, "tol": cfg.tol, "anneal_period": period})

        if check:
            anneal_label = TemperatureSchedule.annealing(period).label
            constants = final[final["setting"] != anneal_label]
            order = np.argsort([-float(label.split("=", 1)[1]) for label in constants["setting"]])
            distances = constants["distance"].to_numpy()[order]
            anneal = final[final["setting"] == anneal_label].iloc[0]
            ok = bool(np.all(np.diff(distances) < 0))
            ok = ok and anneal["final_cos_sim"] >= CHECK_MIN_COS_SIM
            ok = ok and anneal["distance"] <= 2.0 * float(distances.min())
            if not ok:
                logger.error("Verifica non superata: ordinamento delle temperature inatteso")
                return EXIT_CHECK_FAILED
        return EXIT_OK

    def cmd_fit_demo(self, n: int, seed: int = 0, steps: int = 2000, lr: float = 1.0,
                     family: str = "qp", p_max: float = 20.0, tol: float = 1e-6,
                     line_search: bool = True, out: Optional[str] = None, check: bool = False) -> int:
        """
        Demo di fitting: discesa del gradiente attraverso il layer.

        Returns:
            Codice di uscita (3 se la loss diverge, 4 se --check e il criterio non è raggiunto)
        """
        cfg = self.solver_config(tol, record_tape=True)
        result = fit_demo(n, seed, steps, lr, family=family, p_max=p_max, cfg=cfg,
                          line_search=line_search, show_progress=self.show_progress)

        rows = [{"step": step, "loss": loss} for step, loss in enumerate(result.losses)]
        self.report_builder.write_csv(rows, FIT_DEMO_COLUMNS, out or "fit_demo.csv")
        structured_logger.log_trial("fit-demo", 0, {"steps": len(result.losses) - 1,
                                                    "initial_loss": result.losses[0],
                                                    "final_loss": result.losses[-1],
                                                    "success": result.success})
        print(f"initial_loss={result.losses[0]!r} final_loss={result.losses[-1]!r} "
              f"ratio={result.ratio!r} steps={len(result.losses) - 1} success={result.success}")

        if check and not result.success:
            logger.error(f"Verifica non superata: rapporto della loss {result.ratio:.3e}")
            return EXIT_CHECK_FAILED
        return EXIT_OK

    def _publish(self, title: str, markdown: str, name: str, metadata: Dict[str, Any]):
        """Stampa la tabella e la salva come report Markdown."""
        print(markdown)
        self.report_builder.write_markdown(title, [("Risultati", markdown)], name=name, metadata=metadata)


def build_parser() -> argparse.ArgumentParser:
    """Costruisce il parser degli argomenti con un sottocomando per operazione."""
    parser = argparse.ArgumentParser(description='DFWLayer - Layer di ottimizzazione Frank-Wolfe differenziabile')
    parser.add_argument('--config', help='Percorso al file di configurazione JSON')
    parser.add_argument('--results-dir', help='Directory per CSV e tabelle Markdown')
    parser.add_argument('--workers', type=int, help='Thread per i trial indipendenti')
    parser.add_argument('--no-progress', action='store_true', help='Disabilita le barre di avanzamento')
    sub = parser.add_subparsers(dest='command', required=True)

    p_solve = sub.add_parser('solve', help='Risolve un file di problema')
    p_solve.add_argument('problem', help='File di problema (formato dfwqp v1)')
    p_solve.add_argument('--p', help="Ordine della norma (sostituisce quello del file; 'inf' per ℓ∞)")
    p_solve.add_argument('--tol', type=float, help='Tolleranza relativa sull\'obiettivo')
    p_solve.add_argument('--max-iters', type=int, help='Numero massimo di iterazioni')
    p_solve.add_argument('--schedule', help="'anneal', 'anneal:T' o temperatura costante")
    p_solve.add_argument('--tape', action='store_true', help='Scrive anche il nastro per iterazione')
    p_solve.add_argument('--out', help='CSV di output')

    p_gen = sub.add_parser('generate', help='Genera un file di problema')
    p_gen.add_argument('--n', type=int, default=10, help='Dimensione della variabile')
    p_gen.add_argument('--seed', type=int, default=0, help='Seme')
    p_gen.add_argument('--p', help='Ordine della norma (default 1)')
    p_gen.add_argument('--family', choices=['qp', 'power'], default='qp', help='Famiglia di problemi')
    p_gen.add_argument('--preset', choices=sorted(POWER_PRESETS), help='Preset del vincolo di potenza')
    p_gen.add_argument('--p-max', type=float, default=20.0, help='Potenza massima (famiglia power)')
    p_gen.add_argument('--out', required=True, help='File di output')

    p_time = sub.add_parser('bench-time', help='Tempi di risoluzione per scala')
    p_time.add_argument('--scales', default=",".join(str(v) for v in config.SCALES.values()),
                        help='Scale separate da virgola (dimensioni o small/medium/large)')
    p_time.add_argument('--trials', type=int, help='Trial per scala')
    p_time.add_argument('--seed', type=int, default=0, help='Seme del primo trial')
    p_time.add_argument('--tol', type=float, help='Tolleranza relativa')
    p_time.add_argument('--no-reference', action='store_true', help='Non misura il solutore di riferimento')
    p_time.add_argument('--out', help='CSV di output')
    p_time.add_argument('--check', action='store_true', help='Verifica le soglie di accettazione')

    p_acc = sub.add_parser('bench-accuracy', help='Accuratezza di soluzioni e gradienti')
    p_acc.add_argument('--scale', default='medium', help='Scala (dimensione o small/medium/large)')
    p_acc.add_argument('--trials', type=int, help='Numero di trial')
    p_acc.add_argument('--seed', type=int, default=0, help='Seme del primo trial')
    p_acc.add_argument('--tol', type=float, help='Tolleranza relativa')
    p_acc.add_argument('--out', help='CSV di output')
    p_acc.add_argument('--check', action='store_true', help='Verifica le soglie di accettazione')

    p_sweep = sub.add_parser('temp-sweep', help='Sweep della temperatura softmax')
    p_sweep.add_argument('--taus', default='1,0.5,0.25,0.125', help='Temperature costanti')
    p_sweep.add_argument('--anneal-period', type=int, help='Periodo T dell\'annealing')
    p_sweep.add_argument('--scale', default='medium', help='Scala (dimensione o small/medium/large)')
    p_sweep.add_argument('--seed', type=int, default=0, help='Seme')
    p_sweep.add_argument('--tol', type=float, help='Tolleranza relativa')
    p_sweep.add_argument('--out', help='CSV di output')
    p_sweep.add_argument('--check', action='store_true', help='Verifica l\'ordinamento atteso')

    p_fit = sub.add_parser('fit-demo', help='Demo di fitting end-to-end')
    p_fit.add_argument('--n', type=int, default=10, help='Dimensione')
    p_fit.add_argument('--seed', type=int, default=0, help='Seme')
    p_fit.add_argument('--steps', type=int, default=2000, help='Passi di discesa')
    p_fit.add_argument('--lr', type=float, default=1.0, help='Passo iniziale')
    p_fit.add_argument('--family', choices=['qp', 'power'], default='qp', help='Famiglia di problemi')
    p_fit.add_argument('--p-max', type=float, default=20.0, help='Potenza massima (famiglia power)')
    p_fit.add_argument('--tol', type=float, default=1e-6, help='Tolleranza del solutore')
    p_fit.add_argument('--no-line-search', action='store_true', help='Discesa semplice senza backtracking')
    p_fit.add_argument('--out', help='CSV di output')
    p_fit.add_argument('--check', action='store_true', help='Verifica il criterio di successo')

    return parser


def command_kwargs(args: argparse.Namespace) -> Dict[str, Any]:
    """Traduce gli argomenti del parser nei parametri del comando."""
    if args.command == 'solve':
        return dict(problem=args.problem, p=args.p, tol=args.tol, schedule=args.schedule,
                    tape=args.tape, out=args.out, max_iters=args.max_iters)
    if args.command == 'generate':
        return dict(n=args.n, seed=args.seed, out=args.out, p=args.p, family=args.family,
                    preset=args.preset, p_max=args.p_max)
    if args.command == 'bench-time':
        return dict(scales=args.scales, trials=args.trials, seed=args.seed, tol=args.tol, out=args.out,
                    include_reference=not args.no_reference, check=args.check)
    if args.command == 'bench-accuracy':
        return dict(scale=args.scale, trials=args.trials, seed=args.seed, tol=args.tol, out=args.out,
                    check=args.check)
    if args.command == 'temp-sweep':
        return dict(taus=args.taus, anneal_period=args.anneal_period, scale=args.scale, seed=args.seed,
                    tol=args.tol, out=args.out, check=args.check)
    return dict(n=args.n, seed=args.seed, steps=args.steps, lr=args.lr, family=args.family,
                p_max=args.p_max, tol=args.tol, line_search=not args.no_line_search, out=args.out,
                check=args.check)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Funzione principale per l'esecuzione dell'applicazione."""
    args = build_parser().parse_args(argv)
    try:
        app = DFWLayerHarness(config_file=args.config, results_dir=args.results_dir,
                              workers=args.workers, show_progress=not args.no_progress)
    except (InvalidInputError, OSError) as e:
        logger.error(f"Errore nell'inizializzazione: {str(e)}")
        return EXIT_INPUT_ERROR

    try:
        return app.run(args.command, **command_kwargs(args))
    except KeyboardInterrupt:
        logger.info("Interruzione richiesta dall'utente")
        return EXIT_INTERNAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
