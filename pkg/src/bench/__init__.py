"""Benchmark contracts, workload generators and the experiment runner."""

from .centralized import CentralizedCrowdfund, check_centralized_crowdfund
from .chain import FEE_WALLET, ChainDriver, GenerationError
from .contracts import BENCHMARK_CONTRACTS, contract_source, load_benchmark_contract, load_multisig, multisig_source
from .generators import Workload, gen_crowdfund, gen_map, gen_multisig, gen_registry
from .runner import CSV_COLUMNS, DigestMismatchError, ExperimentRow, generate_workload, run_experiment, write_csv

__all__ = [
    "BENCHMARK_CONTRACTS",
    "CSV_COLUMNS",
    "FEE_WALLET",
    "CentralizedCrowdfund",
    "ChainDriver",
    "DigestMismatchError",
    "ExperimentRow",
    "GenerationError",
    "Workload",
    "check_centralized_crowdfund",
    "contract_source",
    "gen_crowdfund",
    "gen_map",
    "gen_multisig",
    "gen_registry",
    "generate_workload",
    "load_benchmark_contract",
    "load_multisig",
    "multisig_source",
    "run_experiment",
    "write_csv",
]
