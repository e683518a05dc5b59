"""Token identifiers and multi-token wallets."""

from typing import Self

from pydantic import BaseModel, ConfigDict, Field, field_validator

TokenId = int

NATIVE_TOKEN: TokenId = 0


class InsufficientFundsError(ValueError):
    """Raised when a wallet subtraction would go below zero."""


class Wallet(BaseModel):
    """
    Finite map from token id to a non-negative amount.

    Absent tokens count as zero; zero entries are dropped so equality is
    structural. Arithmetic is pointwise and subtraction refuses to go negative.
    """

    model_config = ConfigDict(frozen=True)

    balances: dict[TokenId, int] = Field(default_factory=dict)

    @field_validator("balances")
    @classmethod
    def validate_balances(cls, v: dict[TokenId, int]) -> dict[TokenId, int]:
        """Reject negative entries and normalize zero entries away."""
        for token, amount in v.items():
            if token < 0:
                raise ValueError(f"Invalid token id: {token}")
            if amount < 0:
                raise ValueError(f"Negative amount {amount} for token T{token}")
        return {token: v[token] for token in sorted(v) if v[token] != 0}

    @classmethod
    def _trusted(cls, balances: dict[TokenId, int]) -> Self:
        return cls.model_construct(
            balances={token: balances[token] for token in sorted(balances) if balances[token]}
        )

    @classmethod
    def zero(cls) -> Self:
        return cls._trusted({})

    @classmethod
    def of(cls, token: TokenId, amount: int) -> Self:
        """Wallet holding ``amount`` units of a single token."""
        return cls(balances={token: amount})

    def amount(self, token: TokenId) -> int:
        return self.balances.get(token, 0)

    def is_zero(self) -> bool:
        return not self.balances

    def tokens(self) -> set[TokenId]:
        return set(self.balances)

    def __add__(self, other: "Wallet") -> "Wallet":
        merged = dict(self.balances)
        for token, amount in other.balances.items():
            merged[token] = merged.get(token, 0) + amount
        return Wallet._trusted(merged)

    def __sub__(self, other: "Wallet") -> "Wallet":
        result = dict(self.balances)
        for token, amount in other.balances.items():
            remaining = result.get(token, 0) - amount
            if remaining < 0:
                raise InsufficientFundsError(
                    f"Cannot subtract {amount}:T{token} from {self}"
                )
            result[token] = remaining
        return Wallet._trusted(result)

    def covers(self, other: "Wallet") -> bool:
        """Pointwise ``self >= other``."""
        return all(self.amount(token) >= amount for token, amount in other.balances.items())

    def excess_over(self, other: "Wallet") -> "Wallet":
        """Per-token positive part of ``self - other``."""
        return Wallet._trusted(
            {
                token: amount - other.amount(token)
                for token, amount in self.balances.items()
                if amount > other.amount(token)
            }
        )

    def __str__(self) -> str:
        if not self.balances:
            return "{}"
        return "{" + ", ".join(f"{amount}:T{token}" for token, amount in self.balances.items()) + "}"
