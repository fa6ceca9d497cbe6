# csaforge/types.py
"""Core type definitions shared across csaforge.

This module defines the small value types used by several modules: grid
coordinates, module-qualified qubit keys, and the carry-save encoded integer
that flows between arithmetic blocks.
"""

from pydantic import BaseModel, ConfigDict, Field, model_validator

Coord = tuple[int, int]
"""Integer (x, y) position of a qubit inside its module's planar lattice."""

QubitKey = tuple[str, int]
"""Circuit-wide identity of a qubit: (module id, local index)."""

BitAssignment = dict[QubitKey, int]
"""Classical basis value per qubit, used for simulator inputs and outputs."""


class CarrySaveNumber(BaseModel):
    """An integer held as the sum of two bit-vectors ``u + v``.

    ``u`` carries bits 0..width-1 and ``v`` carries bits 1..width-1; bit 0 of
    ``v`` is always absent. Both parts are stored as non-negative Python
    integers so arbitrarily long registers stay exact.
    """

    model_config = ConfigDict(frozen=True)

    u: int = Field(default=0, ge=0, description="Sum bits, significance 0 upward")
    v: int = Field(default=0, ge=0, description="Carry bits, significance 1 upward")

    @model_validator(mode="after")
    def _v0_absent(self) -> "CarrySaveNumber":
        if self.v & 1:
            raise ValueError("bit 0 of v must be zero")
        return self

    @property
    def value(self) -> int:
        """The conventional integer this encoding represents."""
        return self.u + self.v

    def u_bit(self, i: int) -> int:
        return (self.u >> i) & 1

    def v_bit(self, i: int) -> int:
        return (self.v >> i) & 1

    def bit_length(self) -> int:
        """Number of bit positions needed to hold both parts."""
        return max(self.u.bit_length(), self.v.bit_length())
