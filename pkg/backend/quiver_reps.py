"""
Representations of the quiver Q_p bound by alpha^x = 0.

Q_p is the linear quiver 1 -> 2 -> ... -> p with a loop alpha at vertex p.
A point N of the nilpotent variety with flag data ``blocks`` becomes the
representation with the flag embeddings K^{d_i} -> K^{d_{i+1}} on the chain
and N on the loop. For x = 2 the indecomposables are U(i,j) and V(i); their
hom dimensions follow closed delta formulas, checked here against a direct
linear-algebra oracle.
"""
from collections import Counter
from enum import Enum
import re
from typing import Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict
from sympy import ImmutableMatrix, Rational, diag

from backend.block_data import BlockData
from backend.errors import DimensionVectorError, IndexConstraintError, NotNilpotentError, ShapeError
from backend.exact_linalg import (RatMatrix, identity, intertwiners, is_zero, mat_pow, nilpotency_degree, nullity,
                                  rank, to_matrix, zero_matrix)
from backend.logger import get_logger

logger = get_logger(__name__)


# ==================== LABELS ====================
class LabelKind(Enum):
    U = "U"
    V = "V"


class Label(BaseModel):
    """Indecomposable label U(i,j) (arrow j -> i) or V(i) (dot at i)."""
    model_config = ConfigDict(frozen=True)

    kind: LabelKind
    i: int
    j: Optional[int] = None

    @classmethod
    def U(cls, i: int, j: int) -> "Label":
        return cls(kind=LabelKind.U, i=i, j=j)

    @classmethod
    def V(cls, i: int) -> "Label":
        return cls(kind=LabelKind.V, i=i)

    @property
    def is_u(self) -> bool:
        return self.kind is LabelKind.U

    def max_index(self) -> int:
        return max(self.i, self.j) if self.is_u else self.i

    def sort_key(self) -> Tuple[int, int, int]:
        return (0 if self.is_u else 1, self.i, self.j or 0)

    def __str__(self) -> str:
        return f"U({self.i},{self.j})" if self.is_u else f"V({self.i})"


_TERM = re.compile(r"([UV])\(?([0-9,]+)\)?(?:\^([0-9]+))?")


class Decomposition(BaseModel):
    """A multiset of indecomposable labels, stored in canonical order."""
    model_config = ConfigDict(frozen=True)

    terms: Tuple[Tuple[Label, int], ...] = ()

    @classmethod
    def from_counts(cls, counts: Dict[Label, int]) -> "Decomposition":
        items = sorted(((label, m) for label, m in counts.items() if m > 0), key=lambda item: item[0].sort_key())
        return cls(terms=tuple(items))

    @classmethod
    def of(cls, *labels: Label) -> "Decomposition":
        return cls.from_counts(Counter(labels))

    @classmethod
    def parse(cls, text: str) -> "Decomposition":
        """Parse ``"U(2,1) + V(1)^2"``; the compact form ``U21+V1`` is accepted for p <= 9."""
        counts: Counter = Counter()
        for part in (piece.strip() for piece in text.split("+")):
            if part in ("", "0"):
                continue
            match = _TERM.fullmatch(part.replace(" ", ""))
            if match is None:
                raise IndexConstraintError(f"cannot parse indecomposable {part!r}")
            kind, indices, power = match.group(1), match.group(2), match.group(3)
            values = [int(v) for v in (indices.split(",") if "," in indices else indices)]
            if kind == "U" and len(values) == 2:
                label = Label.U(*values)
            elif kind == "V" and len(values) == 1:
                label = Label.V(values[0])
            else:
                raise IndexConstraintError(f"wrong number of indices in {part!r}")
            counts[label] += int(power or 1)
        return cls.from_counts(counts)

    def counts(self) -> Dict[Label, int]:
        return dict(self.terms)

    def labels(self) -> List[Label]:
        """Labels expanded by multiplicity."""
        return [label for label, m in self.terms for _ in range(m)]

    def __add__(self, other: "Decomposition") -> "Decomposition":
        merged = Counter(self.counts())
        merged.update(other.counts())
        return Decomposition.from_counts(merged)

    def max_index(self) -> int:
        return max((label.max_index() for label, _ in self.terms), default=0)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(str(label) if m == 1 else f"{label}^{m}" for label, m in self.terms)


def _check_index(label: Label, p: int) -> None:
    if label.max_index() > p or label.i < 1 or (label.is_u and label.j < 1):
        raise IndexConstraintError(f"label {label} has an index outside 1..{p}")


def label_dims(label: Label, p: int) -> Tuple[int, ...]:
    """Dimension vector contributed by one indecomposable."""
    _check_index(label, p)
    if not label.is_u:
        return tuple(1 if v >= label.i else 0 for v in range(1, p + 1))
    lo, hi = min(label.i, label.j), max(label.i, label.j)
    return tuple(0 if v < lo else (1 if v < hi else 2) for v in range(1, p + 1))


def dimension_vector(X: Decomposition, p: int) -> Tuple[int, ...]:
    total = [0] * p
    for label, m in X.terms:
        for v, d in enumerate(label_dims(label, p)):
            total[v] += m * d
    return tuple(total)


# ==================== REPRESENTATIONS ====================
class QuiverRep:
    """
    A representation of Q_p: vector spaces K^{dims[v]} at the vertices, maps
    along the chain arrows and a loop endomorphism at vertex p.
    """

    def __init__(self, dims: Sequence[int], arrows: Sequence[RatMatrix], loop: RatMatrix, x: int = 2):
        """
        Args:
            dims (Sequence[int]): Dimension at vertices 1..p.
            arrows (Sequence[RatMatrix]): Maps for the arrows v -> v+1, v = 1..p-1.
            loop (RatMatrix): Endomorphism at vertex p.
            x (int): Nilpotency bound alpha^x = 0.
        """
        self.dims = tuple(int(d) for d in dims)
        self.p = len(self.dims)
        self.x = x
        if self.p == 0:
            raise ShapeError("a representation needs at least one vertex")
        if len(arrows) != self.p - 1:
            raise ShapeError(f"expected {self.p - 1} chain maps, got {len(arrows)}")
        for v, A in enumerate(arrows):
            if A.shape != (self.dims[v + 1], self.dims[v]):
                raise ShapeError(f"arrow {v + 1}->{v + 2} has shape {A.shape}, expected {(self.dims[v + 1], self.dims[v])}")
        if loop.shape != (self.dims[-1], self.dims[-1]):
            raise ShapeError(f"loop has shape {loop.shape}, expected {(self.dims[-1], self.dims[-1])}")
        if self.dims[-1] and not is_zero(mat_pow(loop, x)):
            raise NotNilpotentError(f"loop does not satisfy alpha^{x} = 0")
        self.arrows = tuple(ImmutableMatrix(A) for A in arrows)
        self.loop = ImmutableMatrix(loop)

    @property
    def is_injective(self) -> bool:
        return all(rank(A) == A.cols for A in self.arrows)

    def __repr__(self) -> str:
        return f"QuiverRep(dims={self.dims}, x={self.x})"


def direct_sum(M: QuiverRep, Mp: QuiverRep) -> QuiverRep:
    if M.p != Mp.p:
        raise ShapeError(f"cannot add representations of Q_{M.p} and Q_{Mp.p}")
    arrows = [ImmutableMatrix(diag(A, B)) for A, B in zip(M.arrows, Mp.arrows)]
    loop = ImmutableMatrix(diag(M.loop, Mp.loop))
    dims = [a + b for a, b in zip(M.dims, Mp.dims)]
    return QuiverRep(dims, arrows, loop, max(M.x, Mp.x))


def build_indecomposable(label: Label, p: int) -> QuiverRep:
    """
    The explicit indecomposable for a label.

    V(i) is K from vertex i on with identity maps and zero loop. U(i,j) is K
    between min(i,j) and max(i,j) and K^2 afterwards; K enters K^2 as e_1 when
    j <= i and as e_2 when i < j, and the loop sends e_1 to e_2 and e_2 to 0.
    """
    dims = label_dims(label, p)
    arrows = []
    for v in range(p - 1):
        src, dst = dims[v], dims[v + 1]
        if src == 0 or src == dst:
            arrows.append(identity(dst)[:, :src] if src else zero_matrix(dst, 0))
        else:
            # 1 -> 2 inside U(i,j)
            column = [[1], [0]] if label.j <= label.i else [[0], [1]]
            arrows.append(to_matrix(column))
    if dims[-1] == 2 and label.is_u:
        loop = to_matrix([[0, 0], [1, 0]])
    else:
        loop = zero_matrix(dims[-1], dims[-1])
    return QuiverRep(dims, [ImmutableMatrix(A) for A in arrows], loop, 2)


def decomposition_rep(X: Decomposition, p: int) -> QuiverRep:
    """Direct sum of the indecomposables listed in X."""
    rep = QuiverRep([0] * p, [zero_matrix(0, 0)] * (p - 1), zero_matrix(0, 0), 2)
    for label in X.labels():
        rep = direct_sum(rep, build_indecomposable(label, p))
    return rep


def rep_from_matrix(N: RatMatrix, blocks: BlockData, x: int) -> QuiverRep:
    """The representation M^N: flag embeddings on the chain and N on the loop."""
    n = blocks.n
    if N.shape != (n, n):
        raise ShapeError(f"matrix is {N.shape[0]}x{N.shape[1]}, block data needs {n}x{n}")
    degree = nilpotency_degree(N)
    if degree is None or degree > x:
        raise NotNilpotentError(f"matrix is not {x}-nilpotent (degree {degree})")
    dims = blocks.dims
    arrows = [ImmutableMatrix(identity(dims[v + 1])[:, :dims[v]]) for v in range(blocks.p - 1)]
    return QuiverRep(dims, arrows, N, x)


# ==================== HOM SPACES ====================
def hom_dim_oracle(M: QuiverRep, Mp: QuiverRep) -> int:
    """
    dim Hom(M, M') by solving the intertwining system directly.

    The unknowns are all entries of f_v: M_v -> M'_v; the equations are
    f_{v+1} A_v = A'_v f_v on every chain arrow and f_p L = L' f_p on the loop.
    """
    if M.p != Mp.p:
        raise ShapeError(f"representations live on Q_{M.p} and Q_{Mp.p}")
    offsets = []
    total = 0
    for v in range(M.p):
        offsets.append(total)
        total += Mp.dims[v] * M.dims[v]
    if total == 0:
        return 0

    def var(v: int, r: int, c: int) -> int:
        return offsets[v] + r * M.dims[v] + c

    rows: List[List[Rational]] = []

    def add_square(v_src: int, v_dst: int, A: RatMatrix, B: RatMatrix) -> None:
        # f_dst A - B f_src = 0, shape Mp.dims[v_dst] x M.dims[v_src]
        for r in range(Mp.dims[v_dst]):
            for c in range(M.dims[v_src]):
                row = [Rational(0)] * total
                for s in range(M.dims[v_dst]):
                    if A[s, c] != 0:
                        row[var(v_dst, r, s)] += A[s, c]
                for s in range(Mp.dims[v_src]):
                    if B[r, s] != 0:
                        row[var(v_src, s, c)] -= B[r, s]
                rows.append(row)

    for v in range(M.p - 1):
        add_square(v, v + 1, M.arrows[v], Mp.arrows[v])
    add_square(M.p - 1, M.p - 1, M.loop, Mp.loop)
    if not rows:
        return total
    return nullity(to_matrix(rows))


def _delta(condition: bool) -> int:
    return 1 if condition else 0


def hom_label(X: Label, Y: Label) -> int:
    """[X, Y] for two indecomposables, by the delta formulas."""
    if not X.is_u:
        k = X.i
        return _delta(Y.i <= k)
    k, l = X.i, X.j
    if not Y.is_u:
        return _delta(Y.i <= l)
    i, j = Y.i, Y.j
    return _delta(i <= l) + _delta(j <= l) * _delta(i <= k)


def hom_dim_formula(X: Decomposition, Y: Decomposition) -> int:
    """[X, Y] extended bilinearly over multiplicities."""
    return sum(mx * my * hom_label(lx, ly) for lx, mx in X.terms for ly, my in Y.terms)


class InvariantVector(BaseModel):
    """
    The invariant families of a representation M.

    a_k = [V_k, M] and b_{k,l} = [U_{k,l}, M] (row-major in (k,l)), together
    with abar_i = [M, V_i] and bbar_{i,j} = [M, U_{i,j}].
    """
    model_config = ConfigDict(frozen=True)

    p: int
    a: Tuple[int, ...]
    b: Tuple[int, ...]
    abar: Tuple[int, ...]
    bbar: Tuple[int, ...]

    def b_at(self, k: int, l: int) -> int:
        return self.b[(k - 1) * self.p + (l - 1)]


def invariant_vector(X: Decomposition, p: int) -> InvariantVector:
    for label, _ in X.terms:
        _check_index(label, p)
    vertices = range(1, p + 1)
    a = tuple(hom_dim_formula(Decomposition.of(Label.V(k)), X) for k in vertices)
    b = tuple(hom_dim_formula(Decomposition.of(Label.U(k, l)), X) for k in vertices for l in vertices)
    abar = tuple(hom_dim_formula(X, Decomposition.of(Label.V(i))) for i in vertices)
    bbar = tuple(hom_dim_formula(X, Decomposition.of(Label.U(i, j))) for i in vertices for j in vertices)
    return InvariantVector(p=p, a=a, b=b, abar=abar, bbar=bbar)


# ==================== ORBIT DIMENSIONS ====================
def orbit_dimension(X: Decomposition, blocks: BlockData) -> int:
    """dim P - [X, X]."""
    if X.max_index() > blocks.p:
        raise DimensionVectorError(f"{X} uses vertices beyond p={blocks.p}")
    if dimension_vector(X, blocks.p) != blocks.dims:
        raise DimensionVectorError(
            f"{X} has dimension vector {dimension_vector(X, blocks.p)}, block data needs {blocks.dims}")
    return blocks.dim_p - hom_dim_formula(X, X)


def stabilizer_dimension(N: RatMatrix, blocks: BlockData) -> int:
    """dim {A in the block pattern : AN - NA = 0}."""
    n = blocks.n
    if N.shape != (n, n):
        raise ShapeError(f"matrix is {N.shape[0]}x{N.shape[1]}, block data needs {n}x{n}")
    return len(intertwiners(N, N, blocks))


def orbit_dimension_from_matrix(N: RatMatrix, blocks: BlockData) -> int:
    return blocks.dim_p - stabilizer_dimension(N, blocks)


def is_indecomposable_shape_ok(rep: QuiverRep) -> bool:
    """Loop squares to zero and every chain map is injective."""
    return is_zero(mat_pow(rep.loop, 2)) and rep.is_injective


def labels_for(p: int) -> List[Label]:
    """All x = 2 indecomposable labels on Q_p."""
    us = [Label.U(i, j) for i in range(1, p + 1) for j in range(1, p + 1)]
    vs = [Label.V(i) for i in range(1, p + 1)]
    return us + vs
