"""
Enhanced oriented link patterns (Eolp).

An Eolp of type (b_1, ..., b_p) is an oriented multigraph on p vertices:
``arrows[i-1][j-1]`` counts the arrows j -> i (the multiplicity of U(i,j)) and
``dots[i-1]`` counts the dots at i (the multiplicity of V(i)). Vertex i has
load sum_j (p_{i,j} + p_{j,i}) + n_i, a loop counting twice, and a valid
pattern meets b_i exactly.
"""
from typing import Dict, Iterator, List, Tuple

from pydantic import BaseModel, ConfigDict

from backend.block_data import BlockData
from backend.errors import DimensionVectorError, InvalidPatternError, ShapeError
from backend.logger import get_logger
from backend.quiver_reps import Decomposition, Label, dimension_vector

logger = get_logger(__name__)


class Eolp(BaseModel):
    model_config = ConfigDict(frozen=True)

    arrows: Tuple[Tuple[int, ...], ...]
    dots: Tuple[int, ...]

    @property
    def p(self) -> int:
        return len(self.dots)

    def arrow(self, i: int, j: int) -> int:
        """Number of arrows j -> i."""
        return self.arrows[i - 1][j - 1]

    def load(self, i: int) -> int:
        return sum(self.arrow(i, j) + self.arrow(j, i) for j in range(1, self.p + 1)) + self.dots[i - 1]

    def flat(self) -> Tuple[int, ...]:
        return tuple(m for row in self.arrows for m in row)

    def describe(self) -> str:
        """Short text label, e.g. ``1->2, 2->2 | dots 0,1``."""
        parts = []
        for i in range(1, self.p + 1):
            for j in range(1, self.p + 1):
                m = self.arrow(i, j)
                if m:
                    parts.append(f"{j}->{i}" + (f"^{m}" if m > 1 else ""))
        arrows = ", ".join(parts) if parts else "no arrows"
        return f"{arrows} | dots {','.join(str(d) for d in self.dots)}"

    @classmethod
    def from_arrows(cls, arrow_list: List[Tuple[int, int, int]], blocks: BlockData) -> "Eolp":
        """Build a pattern from (source, target, multiplicity) triples, filling dots to b_i."""
        p = blocks.p
        table = [[0] * p for _ in range(p)]
        for source, target, mult in arrow_list:
            if not (1 <= source <= p and 1 <= target <= p):
                raise InvalidPatternError(f"arrow {source}->{target} leaves vertices 1..{p}")
            table[target - 1][source - 1] += mult
        loads = [sum(table[i][j] + table[j][i] for j in range(p)) for i in range(p)]
        dots = tuple(b - load for b, load in zip(blocks.blocks, loads))
        e = cls(arrows=tuple(tuple(row) for row in table), dots=dots)
        if not validate(e, blocks):
            raise InvalidPatternError(f"arrows {arrow_list} overload a vertex of blocks {blocks.blocks}")
        return e

    @classmethod
    def all_dots(cls, blocks: BlockData) -> "Eolp":
        p = blocks.p
        return cls(arrows=tuple((0,) * p for _ in range(p)), dots=tuple(blocks.blocks))


# ==================== OPERATIONS ====================
def validate(e: Eolp, blocks: BlockData) -> bool:
    """True iff every vertex load equals its block size."""
    if e.p != blocks.p or len(e.arrows) != blocks.p or any(len(row) != blocks.p for row in e.arrows):
        raise ShapeError(f"pattern on {e.p} vertices does not fit {blocks.p} blocks")
    if any(m < 0 for m in e.flat()) or any(d < 0 for d in e.dots):
        return False
    return all(e.load(i) == blocks.blocks[i - 1] for i in range(1, blocks.p + 1))


def enumerate_patterns(blocks: BlockData) -> List[Eolp]:
    """
    All valid patterns of the given type.

    Arrow tables are generated cell by cell in row-major order with values
    ascending, so the output is lexicographic on the flattened table.
    """
    p = blocks.p
    cells = [(i, j) for i in range(p) for j in range(p)]
    capacity = list(blocks.blocks)
    table = [[0] * p for _ in range(p)]
    out: List[Eolp] = []

    def fill(position: int) -> Iterator[None]:
        if position == len(cells):
            yield None
            return
        i, j = cells[position]
        limit = capacity[i] // 2 if i == j else min(capacity[i], capacity[j])
        for m in range(limit + 1):
            table[i][j] = m
            capacity[i] -= m
            capacity[j] -= m
            yield from fill(position + 1)
            capacity[i] += m
            capacity[j] += m
        table[i][j] = 0

    for _ in fill(0):
        out.append(Eolp(arrows=tuple(tuple(row) for row in table), dots=tuple(capacity)))
    logger.debug("enumerated %d patterns for blocks %s", len(out), blocks.blocks)
    return out


def to_multiplicities(e: Eolp) -> Decomposition:
    counts: Dict[Label, int] = {}
    for i in range(1, e.p + 1):
        for j in range(1, e.p + 1):
            if e.arrow(i, j):
                counts[Label.U(i, j)] = e.arrow(i, j)
        if e.dots[i - 1]:
            counts[Label.V(i)] = e.dots[i - 1]
    return Decomposition.from_counts(counts)


def from_multiplicities(d: Decomposition, blocks: BlockData) -> Eolp:
    p = blocks.p
    if d.max_index() > p:
        raise DimensionVectorError(f"{d} uses vertices beyond p={p}")
    if dimension_vector(d, p) != blocks.dims:
        raise DimensionVectorError(
            f"{d} has dimension vector {dimension_vector(d, p)}, block data needs {blocks.dims}")
    table = [[0] * p for _ in range(p)]
    dots = [0] * p
    for label, m in d.terms:
        if label.is_u:
            table[label.i - 1][label.j - 1] += m
        else:
            dots[label.i - 1] += m
    e = Eolp(arrows=tuple(tuple(row) for row in table), dots=tuple(dots))
    if not validate(e, blocks):
        raise DimensionVectorError(f"{d} is inconsistent with blocks {blocks.blocks}")
    return e


# ==================== JSON ====================
def eolp_to_json(e: Eolp, blocks: BlockData) -> Dict:
    arrows = [{"from": j, "to": i, "mult": e.arrow(i, j)}
              for i in range(1, e.p + 1) for j in range(1, e.p + 1) if e.arrow(i, j)]
    return {"blocks": list(blocks.blocks), "arrows": arrows, "dots": list(e.dots)}


def eolp_from_json(payload: Dict) -> Tuple[Eolp, BlockData]:
    """Parse the Eolp JSON format; returns the pattern and its block data."""
    try:
        blocks = BlockData.of(payload["blocks"])
        p = blocks.p
        table = [[0] * p for _ in range(p)]
        for arrow in payload.get("arrows", []):
            source, target, mult = int(arrow["from"]), int(arrow["to"]), int(arrow.get("mult", 1))
            if not (1 <= source <= p and 1 <= target <= p):
                raise InvalidPatternError(f"arrow {source}->{target} leaves vertices 1..{p}")
            table[target - 1][source - 1] += mult
        dots = tuple(int(n) for n in payload["dots"])
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidPatternError(f"pattern JSON needs blocks, arrows and dots: {e}") from e
    if len(dots) != p:
        raise InvalidPatternError(f"pattern JSON has {len(dots)} dot counts for {p} vertices")
    return Eolp(arrows=tuple(tuple(row) for row in table), dots=dots), blocks
