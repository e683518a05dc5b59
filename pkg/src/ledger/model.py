"""
Ledger record types.

Outputs, inputs and transactions are frozen pydantic models so they can be
shared between validator threads and dumped to canonical JSON. Scripts are a
closed, discriminated union of native kinds; structural equality of scripts
matters because rule checks compare expected outputs field by field.
"""

from typing import Annotated, Any, Literal, Self

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, model_validator

from utils.crypto import encode_canonical

from .wallet import NATIVE_TOKEN, Wallet


def _freeze(value: Any) -> Any:
    if isinstance(value, (list, tuple)):
        return tuple(_freeze(item) for item in value)
    return value


Datum = Annotated[tuple[Any, ...], BeforeValidator(_freeze)]
"""Small structured value: a tuple of bools, ints, strings and nested tuples."""

LOGIC_TAG = "logic"
DEFAULT_TAG = "default"
NON_DEFAULT_TAG = "non-default"

ETERNITY = (1 << 63) - 1


class OutputRef(BaseModel):
    """Reference to output ``index`` of transaction ``tx_id`` (0 is genesis)."""

    model_config = ConfigDict(frozen=True)

    tx_id: int = Field(ge=0)
    index: int = Field(ge=0)

    def __str__(self) -> str:
        return f"{self.tx_id}#{self.index}"


class PkLock(BaseModel):
    """Spendable only by a transaction signed by ``pubkey``."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["pk"] = "pk"
    pubkey: str


class LogicScript(BaseModel):
    """Enforces one contract rule; ``source`` is the canonical contract text."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["logic"] = "logic"
    source: str
    rule: str


class StateScript(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["state"] = "state"


class CentralizedCrowdfundScript(BaseModel):
    """Single-output crowdfund covenant keeping the donor map in the datum."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["centralized-crowdfund"] = "centralized-crowdfund"
    owner: str
    goal: int = Field(ge=0)
    t_wd: int = Field(ge=0)
    t_rf: int = Field(ge=0)
    token: int = Field(default=1, ge=0)


Script = Annotated[
    PkLock | LogicScript | StateScript | CentralizedCrowdfundScript,
    Field(discriminator="kind"),
]


class Output(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: Wallet = Field(default_factory=Wallet.zero)
    validator: Script
    datum: Datum = ()
    in_contract: bool = False

    def datum_tag(self) -> Any:
        return self.datum[0] if self.datum else None

    def fingerprint(self) -> bytes:
        """Canonical bytes identifying this output; ``True`` and ``1`` differ here."""
        script = tuple(sorted(self.validator.model_dump().items()))
        balances = tuple(sorted(self.value.balances.items()))
        return encode_canonical((balances, script, self.datum, self.in_contract))


class Input(BaseModel):
    model_config = ConfigDict(frozen=True)

    out_ref: OutputRef
    redeemer: Datum = ()
    spent: bool = True


class TimeInterval(BaseModel):
    """Closed logical-time interval ``[valid_from, valid_to]``."""

    model_config = ConfigDict(frozen=True)

    valid_from: int = Field(default=0, ge=0)
    valid_to: int = Field(default=ETERNITY, ge=0)

    @model_validator(mode="after")
    def validate_bounds(self) -> Self:
        if self.valid_from > self.valid_to:
            raise ValueError(f"Empty validity interval [{self.valid_from}, {self.valid_to}]")
        return self

    @classmethod
    def unbounded(cls) -> Self:
        return cls()

    def contains(self, t: int) -> bool:
        return self.valid_from <= t <= self.valid_to


class Tx(BaseModel):
    model_config = ConfigDict(frozen=True)

    inputs: tuple[Input, ...]
    outputs: tuple[Output, ...] = ()
    signers: tuple[str, ...] = ()
    validity: TimeInterval = Field(default_factory=TimeInterval.unbounded)
    fee: int = Field(default=0, ge=0)
    ctr_id: int = Field(default=0, ge=0)

    @property
    def fee_wallet(self) -> Wallet:
        return Wallet.of(NATIVE_TOKEN, self.fee)

    def spent_inputs(self) -> list[Input]:
        return [inp for inp in self.inputs if inp.spent]

    def read_inputs(self) -> list[Input]:
        return [inp for inp in self.inputs if not inp.spent]


class Tick(BaseModel):
    """Time-advance event interleaved with transactions in a sequence."""

    model_config = ConfigDict(frozen=True)

    time: int = Field(ge=0)


Event = Tx | Tick


class ValidationResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    accepted: bool
    failed_condition: str | None = None
    detail: str | None = None

    @classmethod
    def ok(cls) -> Self:
        return cls(accepted=True)

    @classmethod
    def reject(cls, condition: str, detail: str | None = None) -> Self:
        return cls(accepted=False, failed_condition=condition, detail=detail)
