"""
Main CLI application for hutxosim.

This module provides the command-line entry point for:
1. Running the crowdfund, map, multisig and registry benchmarks and writing CSV reports
2. Generating and replaying serialized transaction sequences
3. Checking hURF contracts and compiling them into deployment transactions

Based on TYPER CLI framework with configuration management via pydantic settings.
"""

import contextlib
import logging
from pathlib import Path

import logfire
import typer
from logfire.exceptions import LogfireConfigError
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

# Load .env file by default if it exists
try:
    from dotenv import load_dotenv

    env_path = Path.cwd() / ".env"
    if not env_path.exists():
        # Look for .env in the project root (where pyproject.toml is)
        project_root = Path(__file__).parent.parent
        env_path = project_root / ".env"

    if env_path.exists():
        load_dotenv(env_path)
except ImportError:
    pass  # python-dotenv not installed, environment variables should be set manually

from utils.config import ExperimentConfig, HutxoConfig, LogfireConfig, load_config

# Early Logfire initialization so spans opened at import time or before
# _initialize_logfire() do not warn; the real configuration comes later.
with contextlib.suppress(LogfireConfigError):
    logfire.configure(
        send_to_logfire=False,
        console=False,
    )

app = typer.Typer(
    name="hutxosim",
    help="hutxosim - hUTXO ledger, hURF contracts and parallel validation benchmarks",
    add_completion=False,
)
console = Console()

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S",
    handlers=[RichHandler(console=console, rich_tracebacks=True)],
)
logger = logging.getLogger(__name__)

__version__ = "0.1.0"


def _initialize_logfire(logfire_config: LogfireConfig) -> None:
    """Initialize Logfire observability if enabled."""
    if not logfire_config.enabled:
        logger.debug("Logfire observability disabled")
        return

    logger.info(f"Initializing Logfire observability for service: {logfire_config.service_name}")

    try:
        logfire.configure(
            token=logfire_config.token if logfire_config.send_to_logfire else None,
            service_name=logfire_config.service_name,
            environment=logfire_config.environment,
            send_to_logfire=logfire_config.send_to_logfire,
            console=logfire.ConsoleOptions(
                verbose=logfire_config.console_logging,
                min_log_level=logfire_config.log_level.lower(),
            )
            if logfire_config.console_logging
            else False,
        )

        # Route stdlib logging through Logfire as well
        if logfire_config.send_to_logfire or logfire_config.console_logging:
            logfire_handler = logfire.LogfireLoggingHandler()
            logfire_handler.setLevel(getattr(logging, logfire_config.log_level.upper()))
            logging.getLogger().addHandler(logfire_handler)

        logger.info(
            f"✅ Logfire initialized - "
            f"Cloud: {logfire_config.send_to_logfire}, "
            f"Console: {logfire_config.console_logging}, "
            f"Level: {logfire_config.log_level}"
        )
    except Exception as e:
        logger.warning(f"Failed to initialize Logfire: {e}")
        logger.warning("Continuing without Logfire observability")


def _load(env_file: str | None) -> HutxoConfig:
    config = load_config(env_file)
    _initialize_logfire(config.logfire)
    return config


def _parse_threads(threads: str) -> list[int]:
    try:
        return [int(part) for part in threads.split(",") if part.strip()]
    except ValueError as e:
        raise typer.BadParameter(f"--threads expects comma-separated integers, got {threads!r}") from e


def _parse_fund(fund: str | None):
    """Parse ``--fund`` values such as ``15:T0,99:T1`` into a wallet."""
    from ledger.wallet import Wallet

    wallet = Wallet.zero()
    if not fund:
        return wallet
    for part in fund.split(","):
        amount, sep, token = part.strip().partition(":T")
        if not sep or not amount.isdigit() or not token.isdigit():
            raise typer.BadParameter(f"--fund entries look like 15:T0, got {part!r}")
        wallet = wallet + Wallet.of(int(token), int(amount))
    return wallet


def _experiment(
    name: str,
    mode: str,
    users: int,
    ops: int,
    p: float,
    n: int,
    threads: str,
    seed: int | None,
    reps: int | None,
    config: HutxoConfig,
) -> ExperimentConfig:
    return ExperimentConfig.model_validate(
        {
            "benchmark": name,
            "mode": mode,
            "users": users,
            "ops": ops,
            "p": p,
            "n": n,
            "n_workers": _parse_threads(threads),
            "seed": config.bench.seed if seed is None else seed,
            "repetitions": config.bench.repetitions if reps is None else reps,
        }
    )


def _show_report(report) -> None:
    table = Table(title=f"Validation Report ({report.validator})")
    table.add_column("Metric", style="cyan")
    table.add_column("Value", justify="right", style="magenta")
    table.add_row("Transactions", str(report.transactions))
    table.add_row("Accepted", str(report.accepted))
    table.add_row("Rejected", str(report.rejected))
    table.add_row("Batches", str(report.batches))
    table.add_row("Soft conflicts", f"{report.soft_conflicts} ({100 * report.soft_conflict_fraction:.2f}%)")
    table.add_row("Wall time", f"{report.wall_ms:.1f} ms")
    table.add_row("Signatures verified", str(report.signatures_verified))
    table.add_row("Ledger bytes", str(report.ledger_bytes))
    table.add_row("Final digest", report.final_digest[:16])
    console.print(table)

    for rejection in report.rejections[:10]:
        console.print(f"  [red]✗[/red] tx {rejection.index}: condition {rejection.condition} {rejection.detail}")


@app.command()
def bench(
    name: str = typer.Argument(..., help="Benchmark: crowdfund, map, multisig or registry"),
    mode: str = typer.Option("distributed", "--mode", help="Crowdfund variant"),
    users: int = typer.Option(100, "--users", help="Crowdfund donors / registry users"),
    ops: int = typer.Option(1000, "--ops", help="Map and multisig operations"),
    p: float = typer.Option(0.5, "--p", help="Map conflict probability"),
    n: int = typer.Option(4, "--n", help="Multisig authorized users (even)"),
    threads: str = typer.Option("0", "--threads", "-t", help="Comma-separated worker counts; 0 is sequential"),
    seed: int | None = typer.Option(None, "--seed", help="Workload seed (default from HUTXO_BENCH_SEED)"),
    reps: int | None = typer.Option(None, "--reps", help="Repetitions"),
    out: Path | None = typer.Option(None, "--out", "-o", help="CSV report path"),
    env_file: str | None = typer.Option(None, "--env-file", "-e", help="Path to environment file (.env)"),
) -> None:
    """Run a benchmark and write the CSV report."""
    try:
        config = _load(env_file)
        experiment = _experiment(name, mode, users, ops, p, n, threads, seed, reps, config)

        from bench.runner import mean_wall_ms, run_experiment, write_csv

        console.print(
            f"[bold blue]Running {experiment.benchmark} ({experiment.mode}, size {experiment.size}) "
            f"with threads {experiment.n_workers}...[/bold blue]"
        )
        rows = run_experiment(experiment, config.bench, measure=config.validator.measure_bytes)

        table = Table(title=f"{experiment.benchmark} benchmark")
        for column in ("rep", "threads", "wall ms", "accepted", "rejected", "soft %", "ledger bytes", "digest"):
            table.add_column(column, justify="right")
        for row in rows:
            table.add_row(
                str(row.rep),
                str(row.threads),
                f"{row.wall_ms:.1f}",
                str(row.accepted),
                str(row.rejected),
                f"{row.soft_conflict_pct:.2f}",
                str(row.ledger_bytes),
                row.final_digest[:16],
            )
        console.print(table)

        means = mean_wall_ms(rows)
        baseline = means.get(0)
        for workers, mean in means.items():
            if workers and baseline:
                console.print(f"  [cyan]Speedup with {workers} threads:[/cyan] {baseline / mean:.2f}x")

        if out is not None:
            path = out if out.parent != Path(".") else config.bench.results_dir / out
            write_csv(rows, path)
            console.print(f"[green]✓ Wrote {len(rows)} rows to {path}[/green]")

    except typer.BadParameter:
        raise
    except Exception as e:
        console.print(f"[bold red]Benchmark error:[/bold red] {e}")
        logger.exception("Benchmark failed")
        raise typer.Exit(1) from e


@app.command()
def generate(
    name: str = typer.Argument(..., help="Benchmark: crowdfund, map, multisig or registry"),
    out: Path = typer.Option(..., "--out", "-o", help="Sequence file to write"),
    mode: str = typer.Option("distributed", "--mode", help="Crowdfund variant"),
    users: int = typer.Option(100, "--users", help="Crowdfund donors / registry users"),
    ops: int = typer.Option(1000, "--ops", help="Map and multisig operations"),
    p: float = typer.Option(0.5, "--p", help="Map conflict probability"),
    n: int = typer.Option(4, "--n", help="Multisig authorized users (even)"),
    seed: int | None = typer.Option(None, "--seed", help="Workload seed"),
    env_file: str | None = typer.Option(None, "--env-file", "-e", help="Path to environment file (.env)"),
) -> None:
    """Generate a benchmark workload and write it as a sequence file."""
    try:
        config = _load(env_file)
        experiment = _experiment(name, mode, users, ops, p, n, "0", seed, 1, config)

        from bench.runner import generate_workload
        from ledger.serialization import write_sequence

        workload = generate_workload(experiment, experiment.seed, config.bench)
        size = write_sequence(workload.sequence, out)
        console.print(
            f"[green]✓ Wrote {workload.transactions} transactions "
            f"({len(workload.sequence.genesis)} genesis outputs, {size} bytes) to {out}[/green]"
        )
    except Exception as e:
        console.print(f"[bold red]Generation error:[/bold red] {e}")
        raise typer.Exit(1) from e


@app.command()
def run(
    seq: Path = typer.Option(..., "--seq", "-s", help="Sequence file written by generate or compile"),
    threads: int = typer.Option(0, "--threads", "-t", help="Worker threads; 0 is sequential"),
    env_file: str | None = typer.Option(None, "--env-file", "-e", help="Path to environment file (.env)"),
) -> None:
    """Replay a serialized sequence with one validator."""
    try:
        config = _load(env_file)

        from ledger.serialization import read_sequence
        from validation import create_validator

        sequence = read_sequence(seq)
        validator = create_validator(threads, measure=config.validator.measure_bytes)
        console.print(f"[bold blue]Validating {len(sequence.events)} events with {validator.name}...[/bold blue]")
        _, report = validator.validate(sequence.fresh_ledger(), sequence.events)
        _show_report(report)
        if report.rejected:
            raise typer.Exit(2)

    except typer.Exit:
        raise
    except Exception as e:
        console.print(f"[bold red]Replay error:[/bold red] {e}")
        raise typer.Exit(1) from e


@app.command()
def check(
    hurf: Path = typer.Option(..., "--hurf", help="Contract source file"),
    show_source: bool = typer.Option(False, "--print", help="Print the canonical source"),
) -> None:
    """Parse and check a contract; show each rule's read and write sets."""
    try:
        from hurf.checker import MapKey, load_contract
        from hurf.printer import print_expr

        contract = load_contract(hurf.read_text(encoding="utf-8"))

        def render(key) -> str:
            if isinstance(key, MapKey):
                return f"{key.map_name}[{', '.join(print_expr(a) for a in key.args)}]"
            return key.name

        console.print(f"[bold green]✓ {contract.name} is well formed[/bold green]")
        table = Table(title=f"{contract.name} rules")
        table.add_column("Rule", style="cyan")
        table.add_column("Reads", style="magenta")
        table.add_column("Writes", style="green")
        for info in contract.infos:
            table.add_row(
                info.rule.name,
                ", ".join(render(key) for key in info.reads) or "-",
                ", ".join(render(key) for key, _ in info.writes) or "-",
            )
        console.print(table)

        if show_source:
            console.print(contract.source, markup=False, highlight=False)

    except Exception as e:
        console.print(f"[bold red]Contract error:[/bold red] {e}")
        raise typer.Exit(1) from e


@app.command(name="compile")
def compile_contract(
    hurf: Path = typer.Option(..., "--hurf", help="Contract source file"),
    out: Path = typer.Option(..., "--out", "-o", help="Sequence file holding the deployment"),
    fund: str | None = typer.Option(None, "--fund", help="Initial balance, e.g. 15:T0,99:T1"),
    env_file: str | None = typer.Option(None, "--env-file", "-e", help="Path to environment file (.env)"),
) -> None:
    """Compile a contract into a deployment transaction on a fresh genesis."""
    try:
        config = _load(env_file)

        from bench.chain import ChainDriver
        from hurf.checker import load_contract
        from hurf.semantics import ContractState
        from ledger.serialization import write_sequence

        contract = load_contract(hurf.read_text(encoding="utf-8"))
        driver = ChainDriver(fee=config.bench.fee)
        deployed = driver.deploy(contract, ContractState.initial(contract), _parse_fund(fund))
        write_sequence(driver.sequence(), out)
        console.print(f"[green]✓ Deployed {contract.name} as contract {deployed.ctr_id:#x}[/green]")
        console.print(f"  [cyan]Sequence:[/cyan] {out}")

    except typer.BadParameter:
        raise
    except Exception as e:
        console.print(f"[bold red]Compile error:[/bold red] {e}")
        raise typer.Exit(1) from e


@app.command()
def validate_config(
    env_file: str | None = typer.Option(
        None,
        "--env-file",
        "-e",
        help="Path to environment file (.env)",
    ),
) -> None:
    """Validate the configuration and display summary."""
    try:
        console.print("[bold blue]Loading configuration...[/bold blue]")

        config = load_config(env_file)
        validation_results = config.validate_configuration()

        if validation_results["valid"]:
            console.print("[bold green]✓ Configuration is valid![/bold green]")
        else:
            console.print("[bold red]✗ Configuration has errors![/bold red]")

        table = Table(title="Configuration Summary")
        table.add_column("Setting", style="cyan")
        table.add_column("Value", justify="right", style="magenta")
        table.add_row("Environment", validation_results["environment"])
        table.add_row("Default workers", str(validation_results["n_workers"]))
        table.add_row("CPUs", str(validation_results["cpu_count"]))
        table.add_row("Seed", str(config.bench.seed))
        table.add_row("Fee", str(config.bench.fee))
        table.add_row("Deadlines", f"{config.bench.withdraw_time} / {config.bench.refund_time}")
        table.add_row("Logfire", "enabled" if validation_results["logfire_enabled"] else "disabled")
        console.print(table)

        if validation_results["warnings"]:
            console.print("\n[bold yellow]Warnings:[/bold yellow]")
            for warning in validation_results["warnings"]:
                console.print(f"  [yellow]⚠[/yellow] {warning}")

        if validation_results["errors"]:
            console.print("\n[bold red]Errors:[/bold red]")
            for error in validation_results["errors"]:
                console.print(f"  [red]✗[/red] {error}")
            raise typer.Exit(1)

    except typer.Exit:
        raise
    except Exception as e:
        console.print(f"[bold red]Configuration error:[/bold red] {e}")
        raise typer.Exit(1) from e


@app.command()
def version() -> None:
    """Show version information."""
    console.print(f"hutxosim v{__version__}")
    console.print("hUTXO ledger simulator with hURF contracts")
    console.print("\nComponents:")
    console.print("  • hURF parser, checker and reference interpreter")
    console.print("  • Contract-state encoding and transaction compiler")
    console.print("  • Sequential and conflict-free-batch parallel validators")


@app.callback()
def main() -> None:
    """hutxosim - hUTXO ledger and parallel validation benchmarks."""
    pass


def cli_main():
    """Entry point for the CLI when installed as a package."""
    app()


if __name__ == "__main__":
    app()
