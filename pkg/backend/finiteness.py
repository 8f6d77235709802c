"""
Orbit finiteness for P acting on x-nilpotent matrices, the infinite witness
families, and an exact P-conjugacy test.
"""
from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict
from sympy import ImmutableMatrix, Matrix, Poly, expand, symbols, zeros
from sympy.polys.matrices import DomainMatrix

from backend.block_data import BlockData
from backend.config import get_settings
from backend.errors import PreconditionError, ShapeError, WitnessConstructionError
from backend.exact_linalg import (RatMatrix, RatScalar, Seed, as_rational, conjugate, det, in_pattern,
                                  intertwiners, make_rng, matrix_to_json, nilpotency_degree, random_integer)
from backend.logger import get_logger
from backend.orbit_classify import rank_table_powers

logger = get_logger(__name__)


# ==================== VERDICT ====================
class FiniteReason(Enum):
    X_LE_2 = "x_le_2"
    MAXIMAL_X3 = "maximal_x3"
    MAXIMAL_WITH_LINE = "maximal_with_line"
    SINGLE_BLOCK_JORDAN = "single_block_jordan"
    INFINITE_WITH_WITNESS = "infinite_with_witness"


class WitnessKind(Enum):
    D = "D"
    E = "E"
    F = "F"

    @classmethod
    def get_all_kinds(cls) -> List[str]:
        return [kind.value for kind in cls]


class WitnessDescriptor(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: WitnessKind
    n: int
    x: int
    blocks: BlockData


class FinitenessVerdict(BaseModel):
    model_config = ConfigDict(frozen=True)

    finite: bool
    reason: FiniteReason
    witness: Optional[WitnessDescriptor] = None

    def to_json(self) -> Dict:
        out: Dict = {"finite": self.finite, "reason": self.reason.value}
        if self.witness is not None:
            out["witness"] = self.witness.kind.value
            out["parameters"] = {"n": self.witness.n, "x": self.witness.x,
                                 "blocks": list(self.witness.blocks.blocks)}
        return out


def is_finite(blocks: BlockData, x: int) -> FinitenessVerdict:
    """
    Decide whether P has finitely many orbits on N^x = 0.

    Args:
        blocks (BlockData): Block sizes of P.
        x (int): Nilpotency bound, 1 <= x <= n.

    Returns:
        FinitenessVerdict: The verdict with its reason; infinite verdicts name
        the witness family D (p >= 3) or E (p = 2, both blocks >= 2).
    """
    n = blocks.n
    if not 1 <= x <= n:
        raise PreconditionError(f"nilpotency bound x={x} must lie in 1..{n}")
    if x <= 2:
        return FinitenessVerdict(finite=True, reason=FiniteReason.X_LE_2)
    if blocks.p == 1:
        return FinitenessVerdict(finite=True, reason=FiniteReason.SINGLE_BLOCK_JORDAN)
    if blocks.p == 2 and x == 3:
        return FinitenessVerdict(finite=True, reason=FiniteReason.MAXIMAL_X3)
    if blocks.p == 2 and min(blocks.blocks) == 1:
        return FinitenessVerdict(finite=True, reason=FiniteReason.MAXIMAL_WITH_LINE)
    kind = WitnessKind.D if blocks.p >= 3 else WitnessKind.E
    logger.debug("blocks %s with x=%d are of infinite type, witness %s", blocks.blocks, x, kind.value)
    return FinitenessVerdict(finite=False, reason=FiniteReason.INFINITE_WITH_WITNESS,
                             witness=WitnessDescriptor(kind=kind, n=n, x=x, blocks=blocks))


# ==================== WITNESSES ====================
E_CORE = ((0, 0, 0, 0), (1, 0, 0, 0), (1, 1, 0, 0), ("lam", 1, 1, 0))


def _e_core(lam: RatScalar) -> Matrix:
    return Matrix(4, 4, lambda i, j: lam if E_CORE[i][j] == "lam" else E_CORE[i][j])


def _f_core(lam: RatScalar) -> Matrix:
    return Matrix([[1, 1, 0, 0],
                   [-1, -1, 0, 0],
                   [lam - 1, lam, -1, 1],
                   [lam, lam - 1, -1, 1]])


def _witness_d(n: int, lam: RatScalar, blocks: Optional[BlockData]) -> Matrix:
    N = zeros(n, n)
    if blocks is None:
        # column 1 feeds rows 2..n-1 and row n collects columns 2..n-1
        for i in range(1, n - 1):
            N[i, 0] = 1
            N[n - 1, i] = 1
        N[n - 1, 0] = lam
        return N
    if blocks.p < 3:
        raise PreconditionError(f"witness D needs at least three blocks, got {blocks.blocks}")
    first, second, third = blocks.d(1), blocks.d(1) + 1, blocks.d(2) + 1
    N[second - 1, first - 1] = 1
    N[third - 1, first - 1] = lam
    N[third - 1, second - 1] = 1
    return N


def _witness_e(n: int, lam: RatScalar, blocks: Optional[BlockData]) -> Matrix:
    s = 0
    if blocks is not None:
        if blocks.p != 2 or min(blocks.blocks) < 2:
            raise PreconditionError(f"witness E needs two blocks of size >= 2, got {blocks.blocks}")
        s = blocks.blocks[0] - 2
    N = zeros(n, n)
    N[s:s + 4, s:s + 4] = _e_core(lam)
    return N


def _witness_f(n: int, lam: RatScalar, blocks: Optional[BlockData]) -> Matrix:
    if blocks is not None and (blocks.p != 2 or blocks.blocks[0] != 1):
        raise PreconditionError(f"witness F needs blocks (1, n-1), got {blocks.blocks}")
    N = zeros(n, n)
    N[:4, :4] = _f_core(lam)
    return N


def witness_family(kind, n: int, x: int, lam, blocks: Optional[BlockData] = None) -> RatMatrix:
    """
    A member of a one-parameter witness family.

    D: without blocks, ones at (i,1) for 2 <= i <= n-1 and (n,j) for
    2 <= j <= n-1 with lam at (n,1). With blocks (p >= 3) the three-index core
    e_{d1} -> e_{d1+1} + lam e_{d2+1}, e_{d1+1} -> e_{d2+1}.
    E: the 4x4 core placed at s+1..s+4, s = b_1 - 2 when blocks are given.
    F: the 4x4 core in the top left corner.
    """
    try:
        kind = WitnessKind(kind)
    except ValueError as e:
        raise PreconditionError(f"unknown witness kind {kind!r}") from e
    try:
        lam = as_rational(lam)
    except ShapeError as e:
        raise PreconditionError(f"witness parameter {lam!r} is not a rational number") from e
    if lam == 0:
        raise PreconditionError("witness parameter must be nonzero")
    if blocks is not None and blocks.n != n:
        raise ShapeError(f"block data has n={blocks.n}, witness requested for n={n}")
    minimum = 3 if kind is WitnessKind.D else 4
    if n < minimum or x < minimum:
        raise PreconditionError(f"witness {kind.value} needs n >= {minimum} and x >= {minimum}, got n={n}, x={x}")
    if x > n:
        raise PreconditionError(f"nilpotency bound x={x} exceeds n={n}")
    build = {WitnessKind.D: _witness_d, WitnessKind.E: _witness_e, WitnessKind.F: _witness_f}[kind]
    N = ImmutableMatrix(build(n, lam, blocks))
    degree = nilpotency_degree(N)
    if degree is None or degree > x:
        raise WitnessConstructionError(f"witness {kind.value}({lam}) has nilpotency degree {degree}, expected <= {x}")
    return N


# ==================== CONJUGACY ====================
class Answer(Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


class ConjugacyResult(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    answer: Answer
    g: Optional[RatMatrix] = None
    certificate: Dict = {}

    def to_json(self) -> Dict:
        out: Dict = {"answer": self.answer.value, "certificate": self.certificate}
        if self.g is not None:
            out["g"] = matrix_to_json(self.g)
        return out


def _combine(basis: List[RatMatrix], coefficients) -> RatMatrix:
    out = zeros(*basis[0].shape)
    for c, T in zip(coefficients, basis):
        out += c * T
    return ImmutableMatrix(out)


def _yes(g: RatMatrix, N: RatMatrix, Np: RatMatrix, blocks: BlockData, how: str) -> ConjugacyResult:
    if not in_pattern(g, blocks) or conjugate(g, N) != Np:
        raise WitnessConstructionError("conjugating element failed verification")
    return ConjugacyResult(answer=Answer.YES, g=g, certificate={"method": how})


def are_conjugate(N: RatMatrix, Np: RatMatrix, blocks: BlockData, seed: Seed = 0,
                  trials: Optional[int] = None) -> ConjugacyResult:
    """
    Decide whether g N g^-1 = N' for some g in P.

    Rank tables of all powers give an exact "no". Otherwise T is searched for
    an invertible element at random points; when dim T is small enough the
    determinant of the generic element of T is computed symbolically, and an
    identically zero determinant gives an exact "no".
    """
    n = blocks.n
    if N.shape != (n, n) or Np.shape != (n, n):
        raise ShapeError(f"both matrices must be {n}x{n}, got {N.shape} and {Np.shape}")
    settings = get_settings()
    trials = trials or settings.trials
    left, right = rank_table_powers(N, blocks), rank_table_powers(Np, blocks)
    for m, (a, b) in enumerate(zip(left, right), start=1):
        if a != b:
            logger.debug("rank tables of power %d differ", m)
            return ConjugacyResult(answer=Answer.NO, certificate={
                "method": "rank_table", "power": m, "left": [list(r) for r in a], "right": [list(r) for r in b]})
    basis = intertwiners(N, Np, blocks)
    transcript = {"intertwiner_basis": [matrix_to_json(T) for T in basis]}
    if not basis:
        return ConjugacyResult(answer=Answer.NO, certificate={"method": "intertwiner_zero", **transcript})
    rng = make_rng(seed)
    for _ in range(trials):
        g = _combine(basis, [random_integer(rng) for _ in basis])
        if det(g) != 0:
            return _yes(g, N, Np, blocks, "random_point")
    if len(basis) > settings.symbolic_limit:
        logger.warning("no invertible intertwiner after %d trials and dim T = %d exceeds the symbolic limit",
                       trials, len(basis))
        return ConjugacyResult(answer=Answer.UNKNOWN, certificate={"method": "budget", "trials": trials, **transcript})
    ts = symbols(f"t1:{len(basis) + 1}")
    generic = Matrix(_combine(basis, ts))
    dm = DomainMatrix.from_Matrix(generic)
    value = expand(dm.domain.to_sympy(dm.det()))
    if value == 0:
        return ConjugacyResult(answer=Answer.NO, certificate={"method": "determinant_identically_zero",
                                                              "trials": trials, **transcript})
    poly = Poly(value, *ts)
    spread = 10 * max(poly.total_degree(), 1)
    for _ in range(10 * trials):
        point = [int(rng.integers(-spread, spread + 1)) for _ in ts]
        if poly.eval(dict(zip(ts, point))) != 0:
            return _yes(_combine(basis, point), N, Np, blocks, "symbolic_determinant")
    return ConjugacyResult(answer=Answer.UNKNOWN, certificate={"method": "budget", "trials": trials, **transcript})
