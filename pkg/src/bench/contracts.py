"""Benchmark contract sources shipped with the package."""

import logging
from pathlib import Path
from string import Template

from hurf.checker import CheckedContract, load_contract

logger = logging.getLogger(__name__)

SOURCES_DIR = Path(__file__).parent / "sources"

BENCHMARK_CONTRACTS = ("crowdfund", "map", "registry", "example")


def contract_source(name: str) -> str:
    """
    Return the ``.hurf`` text of a shipped contract.

    Raises:
        FileNotFoundError: No contract with that name is shipped.
    """
    path = SOURCES_DIR / f"{name}.hurf"
    if not path.exists():
        raise FileNotFoundError(f"No shipped contract named {name!r} (looked for {path})")
    return path.read_text(encoding="utf-8")


def load_benchmark_contract(name: str) -> CheckedContract:
    return load_contract(contract_source(name))


def multisig_source(n: int) -> str:
    """Render the multisig contract whose withdrawals need ``n // 2`` of ``n`` signers."""
    if n < 2 or n % 2:
        raise ValueError(f"Multisig signer count must be even and at least 2, got {n}")
    quorum = n // 2
    signers = [f"s{i}" for i in range(1, quorum + 1)]
    checks = [f"auth[{s}] == true" for s in signers]
    checks += [f"signedBy({s})" for s in signers]
    checks += [f"{a} != {b}" for i, a in enumerate(signers) for b in signers[i + 1 :]]
    template = Template((SOURCES_DIR / "multisig.hurf.tmpl").read_text(encoding="utf-8"))
    return template.substitute(
        quorum=quorum,
        signer_params=", ".join(signers),
        signer_checks=" && ".join(checks),
    )


def load_multisig(n: int) -> CheckedContract:
    return load_contract(multisig_source(n))
