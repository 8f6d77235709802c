from typing import Iterable, Tuple

from pydantic import BaseModel, ConfigDict, field_validator

from backend.errors import InvalidBlocksError


class BlockData(BaseModel):
    """
    Block sizes (b_1, ..., b_p) of a parabolic subgroup P of GL_n.

    The partial sums d_k = b_1 + ... + b_k give the flag F_1 < ... < F_p = K^n
    stabilized by P. All block sizes equal to one describes the Borel subgroup.
    Vertex and index arguments are 1-based throughout.
    """
    model_config = ConfigDict(frozen=True)

    blocks: Tuple[int, ...]

    @field_validator("blocks")
    @classmethod
    def _check_blocks(cls, value: Tuple[int, ...]) -> Tuple[int, ...]:
        if len(value) == 0:
            raise ValueError("block data needs at least one block")
        if any(b < 1 for b in value):
            raise ValueError(f"block sizes must be positive, got {value}")
        return value

    # ==================== CONSTRUCTION ====================
    @classmethod
    def of(cls, blocks: Iterable[int]) -> "BlockData":
        """Build block data, raising InvalidBlocksError on bad input."""
        values = tuple(int(b) for b in blocks)
        if not values or any(b < 1 for b in values):
            raise InvalidBlocksError(f"block sizes must be a nonempty list of positive counts, got {values}")
        return cls(blocks=values)

    @classmethod
    def parse(cls, text: str) -> "BlockData":
        """Parse the CLI form ``"1,2,3"``."""
        try:
            values = [int(part) for part in text.split(",") if part.strip()]
        except ValueError as e:
            raise InvalidBlocksError(f"cannot parse block sizes {text!r}: {e}") from e
        return cls.of(values)

    @classmethod
    def borel(cls, n: int) -> "BlockData":
        return cls.of([1] * n)

    # ==================== DERIVED DATA ====================
    @property
    def p(self) -> int:
        return len(self.blocks)

    @property
    def n(self) -> int:
        return sum(self.blocks)

    @property
    def dims(self) -> Tuple[int, ...]:
        """The dimension vector (d_1, ..., d_p)."""
        total = 0
        out = []
        for b in self.blocks:
            total += b
            out.append(total)
        return tuple(out)

    def d(self, k: int) -> int:
        """Partial sum d_k with the convention d_0 = 0."""
        if k < 0 or k > self.p:
            raise InvalidBlocksError(f"flag index {k} outside 0..{self.p}")
        return 0 if k == 0 else self.dims[k - 1]

    @property
    def dim_p(self) -> int:
        """Dimension of P, the sum of b_i * b_x over x <= i."""
        return sum(self.blocks[i] * self.blocks[x] for i in range(self.p) for x in range(i + 1))

    @property
    def is_borel(self) -> bool:
        return all(b == 1 for b in self.blocks)

    def block_of(self, index: int) -> int:
        """Block number (1-based) containing basis index ``index`` (1-based)."""
        if index < 1 or index > self.n:
            raise InvalidBlocksError(f"basis index {index} outside 1..{self.n}")
        for k, dk in enumerate(self.dims, start=1):
            if index <= dk:
                return k
        raise InvalidBlocksError(f"basis index {index} outside 1..{self.n}")

    def allows(self, row: int, col: int) -> bool:
        """Whether entry (row, col) may be nonzero in an element of P."""
        return self.block_of(row) <= self.block_of(col)
