"""
Pytest configuration and shared fixtures for hutxosim tests.

This module provides reusable fixtures for building ledgers, deploying the
shipped contracts and isolating configuration tests from the real
environment. Logfire is configured offline once per session so spans never
leave the process.
"""

import os
from collections.abc import Iterator

import logfire
import pytest

from bench.chain import ChainDriver
from bench.contracts import load_benchmark_contract
from compiler.tx_compiler import DeployedContract
from hurf.checker import CheckedContract
from hurf.semantics import ContractState
from ledger.wallet import Wallet
from utils.crypto import SignatureVerifier, TableHasher, use_hasher

# ============================================================================
# Fixtures: Observability
# ============================================================================


@pytest.fixture(scope="session", autouse=True)
def logfire_offline() -> None:
    """Configure Logfire without a token or console output for the whole session."""
    logfire.configure(send_to_logfire=False, console=False)


@pytest.fixture
def mock_logfire(mocker):
    """Mock Logfire for observability."""
    mocker.patch("logfire.configure")
    mocker.patch("logfire.info")
    mocker.patch("logfire.error")
    mocker.patch("logfire.warn")

    mock_span = mocker.MagicMock()
    mock_span.__enter__ = mocker.MagicMock(return_value=mock_span)
    mock_span.__exit__ = mocker.MagicMock(return_value=None)
    mock_span.set_attribute = mocker.MagicMock()

    mocker.patch("logfire.span", return_value=mock_span)

    return mock_span


# ============================================================================
# Fixtures: Ledger and Signatures
# ============================================================================


@pytest.fixture
def verifier() -> SignatureVerifier:
    """A fresh signature verifier with its counter at zero."""
    return SignatureVerifier()


@pytest.fixture
def chain(verifier) -> ChainDriver:
    """An empty shadow chain paying a fee of 1 per transaction."""
    return ChainDriver(fee=1, verifier=verifier)


# ============================================================================
# Fixtures: Contracts
# ============================================================================


@pytest.fixture
def map_contract() -> CheckedContract:
    return load_benchmark_contract("map")


@pytest.fixture
def crowdfund_contract() -> CheckedContract:
    return load_benchmark_contract("crowdfund")


@pytest.fixture
def deployed_map(chain, map_contract) -> DeployedContract:
    """The map contract deployed on ``chain`` with an empty state."""
    return chain.deploy(map_contract)


# ============================================================================
# Fixtures: Worked Example
# ============================================================================

# Pinned state keys: y < w < z < a < m[1] < m[14] < m[15] < m[27]
EXAMPLE_KEYS = {
    "var_y": 1,
    "var_w": 2,
    "var_z": 3,
    "var_a": 4,
    "map_m[1]": 5,
    "map_m[14]": 6,
    "map_m[15]": 7,
    "map_m[27]": 8,
}

EXAMPLE_STATE = ContractState.from_values(
    {"y": 3, "w": 2, "z": 15, "a": "pubkey_a"},
    {"m": {14: 1, 27: 3}},
)


def example_hash(name: str) -> int:
    """Pinned hash of an example state key."""
    return EXAMPLE_KEYS[name] * 10**100


@pytest.fixture
def example_hasher() -> Iterator[TableHasher]:
    """Install a hasher that orders the example contract's state keys as required."""
    table = {preimage.encode("utf-8"): example_hash(preimage) for preimage in EXAMPLE_KEYS}
    with use_hasher(TableHasher(table)) as hasher:
        yield hasher


@pytest.fixture
def deployed_example(example_hasher, chain) -> DeployedContract:
    """The example contract deployed with its reference state and a balance of 100:T1."""
    contract = load_benchmark_contract("example")
    return chain.deploy(contract, EXAMPLE_STATE, Wallet.of(1, 100))


# ============================================================================
# Fixtures: Environment Variables
# ============================================================================


@pytest.fixture(autouse=True)
def isolate_env_for_config_tests(request, monkeypatch, tmp_path):
    """
    Automatically isolate environment for config and CLI tests.

    Runs those tests from a directory without a .env file and clears the
    variables a developer's shell or .env may have exported.
    """
    if "test_config.py" in request.fspath.strpath or "test_main.py" in request.fspath.strpath:
        monkeypatch.chdir(tmp_path)
        for key in list(os.environ):
            if key.startswith(("HUTXO_", "LOGFIRE_")):
                monkeypatch.delenv(key, raising=False)
    yield
