"""
Exact rational linear algebra and seeded sampling.

Every matrix in the backend is a ``sympy.ImmutableMatrix`` with rational
entries. Rank, row reduction and nullspaces are delegated to sympy's
``DomainMatrix`` over QQ, determinants use fraction-free Bareiss elimination.
"""
import numbers
import re
from enum import Enum
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
from sympy import ImmutableMatrix, Matrix, Rational, eye, zeros
from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix

from backend.block_data import BlockData
from backend.config import get_settings
from backend.errors import NotNilpotentError, PreconditionError, ShapeError
from backend.logger import get_logger

logger = get_logger(__name__)

RatScalar = Rational
RatMatrix = ImmutableMatrix
Seed = Union[int, np.random.Generator]


class SampleKind(Enum):
    PARABOLIC = "parabolic"
    UNIPOTENT = "unipotent"
    NILPOTENT = "nilpotent"


_FRACTION = re.compile(r"\s*([+-]?\d+)\s*(?:/\s*([+-]?\d+)\s*)?")


# ==================== CONSTRUCTION ====================
def as_rational(value) -> RatScalar:
    """Parse one exact entry: an int, a sympy Rational, or a "p" / "p/q" string.

    Floats and booleans are rejected since neither has an exact reading.
    """
    if isinstance(value, bool) or isinstance(value, float):
        raise ShapeError(f"entry {value!r} is not an exact rational")
    if isinstance(value, Rational):
        return value
    if isinstance(value, numbers.Integral):
        return Rational(int(value))
    if isinstance(value, str):
        match = _FRACTION.fullmatch(value)
        if match is None:
            raise ShapeError(f"entry {value!r} is not an integer or p/q fraction")
        numerator, denominator = match.group(1), match.group(2)
        if denominator is not None and int(denominator) == 0:
            raise ShapeError(f"entry {value!r} has a zero denominator")
        return Rational(int(numerator), int(denominator or 1))
    raise ShapeError(f"entry {value!r} of type {type(value).__name__} is not an exact rational")


def to_matrix(rows: Sequence[Sequence]) -> RatMatrix:
    """Build an exact matrix from nested rows of ints, Rationals or "p/q" strings."""
    if not isinstance(rows, (list, tuple)):
        raise ShapeError(f"matrix rows must be a list, got {type(rows).__name__}")
    data = []
    for row in rows:
        if not isinstance(row, (list, tuple)):
            raise ShapeError(f"matrix row {row!r} is not a list")
        data.append([as_rational(entry) for entry in row])
    if not data:
        return ImmutableMatrix(0, 0, [])
    if any(len(row) != len(data[0]) for row in data):
        raise ShapeError("matrix rows have different lengths")
    return ImmutableMatrix(data)


def identity(n: int) -> RatMatrix:
    return ImmutableMatrix(eye(n))


def zero_matrix(rows: int, cols: int) -> RatMatrix:
    return ImmutableMatrix(zeros(rows, cols))


def elementary(n: int, row: int, col: int) -> RatMatrix:
    """Matrix unit E_{row,col} (1-based)."""
    m = zeros(n, n)
    m[row - 1, col - 1] = 1
    return ImmutableMatrix(m)


def is_zero(M: RatMatrix) -> bool:
    return all(entry == 0 for entry in M)


# ==================== KERNEL ====================
def _domain(M: RatMatrix) -> DomainMatrix:
    return DomainMatrix.from_Matrix(Matrix(M)).convert_to(QQ)


def rank(M: RatMatrix) -> int:
    """Exact rank over the rationals."""
    if M.rows == 0 or M.cols == 0:
        return 0
    return _domain(M).rank()


def rref(M: RatMatrix) -> Tuple[RatMatrix, Tuple[int, ...]]:
    """Reduced row echelon form and pivot columns (0-based)."""
    if M.rows == 0 or M.cols == 0:
        return ImmutableMatrix(M), ()
    reduced, pivots = _domain(M).rref()
    return ImmutableMatrix(reduced.to_Matrix()), tuple(pivots)


def nullspace(M: RatMatrix) -> List[RatMatrix]:
    """Basis of {v : M v = 0} as column vectors, one per free column."""
    cols = M.cols
    if M.rows == 0:
        return [ImmutableMatrix(eye(cols)[:, j]) for j in range(cols)]
    reduced, pivots = rref(M)
    free = [j for j in range(cols) if j not in pivots]
    basis = []
    for f in free:
        v = zeros(cols, 1)
        v[f, 0] = 1
        for row, pc in enumerate(pivots):
            v[pc, 0] = -reduced[row, f]
        basis.append(ImmutableMatrix(v))
    return basis


def nullity(M: RatMatrix) -> int:
    return M.cols - rank(M)


def det(M: RatMatrix) -> RatScalar:
    if M.rows != M.cols:
        raise ShapeError(f"determinant needs a square matrix, got {M.rows}x{M.cols}")
    if M.rows == 0:
        return Rational(1)
    return Rational(M.det(method="bareiss"))


def inverse(M: RatMatrix) -> RatMatrix:
    if det(M) == 0:
        raise PreconditionError("matrix is singular")
    return ImmutableMatrix(Matrix(M).inv(method="LU"))


def mat_pow(M: RatMatrix, k: int) -> RatMatrix:
    if M.rows != M.cols:
        raise ShapeError(f"powers need a square matrix, got {M.rows}x{M.cols}")
    return ImmutableMatrix(identity(M.rows) if k == 0 else M ** k)


def conjugate(g: RatMatrix, N: RatMatrix) -> RatMatrix:
    """g N g^-1."""
    return ImmutableMatrix(g * N * inverse(g))


def corner_submatrix(M: RatMatrix, a: int, b: int) -> RatMatrix:
    """The last ``a`` rows and first ``b`` columns of M."""
    if a < 0 or b < 0 or a > M.rows or b > M.cols:
        raise ShapeError(f"corner ({a},{b}) out of range for a {M.rows}x{M.cols} matrix")
    return ImmutableMatrix(M[M.rows - a:, :b])


def nilpotency_degree(M: RatMatrix) -> Union[int, None]:
    """Smallest k with M^k = 0, or None when M is not nilpotent."""
    if M.rows != M.cols:
        raise ShapeError(f"nilpotency needs a square matrix, got {M.rows}x{M.cols}")
    power = identity(M.rows)
    for k in range(1, M.rows + 1):
        power = power * M
        if is_zero(power):
            return k
    return None


def require_nilpotent(M: RatMatrix, x: int) -> None:
    degree = nilpotency_degree(M)
    if degree is None or degree > x:
        raise NotNilpotentError(f"matrix is not {x}-nilpotent (nilpotency degree {degree})")


def in_pattern(g: RatMatrix, blocks: BlockData) -> bool:
    """True iff g vanishes below the block staircase of ``blocks``."""
    n = blocks.n
    if g.shape != (n, n):
        return False
    return all(g[i - 1, j - 1] == 0 for i in range(1, n + 1) for j in range(1, n + 1) if not blocks.allows(i, j))


def intertwiners(N: RatMatrix, Np: RatMatrix, blocks: BlockData) -> List[RatMatrix]:
    """Basis of {g in the block pattern : g N = N' g}."""
    n = blocks.n
    positions = [(i, j) for i in range(1, n + 1) for j in range(1, n + 1) if blocks.allows(i, j)]
    columns = []
    for i, j in positions:
        E = elementary(n, i, j)
        columns.append((E * N - Np * E).reshape(n * n, 1))
    basis = []
    for vector in nullspace(ImmutableMatrix(Matrix.hstack(*columns))):
        g = zeros(n, n)
        for (i, j), value in zip(positions, vector):
            g[i - 1, j - 1] = value
        basis.append(ImmutableMatrix(g))
    return basis


# ==================== SAMPLING ====================
def make_rng(seed: Seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_integer(rng: np.random.Generator, nonzero: bool = False) -> int:
    bound = get_settings().sample_bound
    while True:
        value = int(rng.integers(-bound, bound + 1))
        if value != 0 or not nonzero:
            return value


def random_rational(rng: np.random.Generator, nonzero: bool = False) -> RatScalar:
    bound = get_settings().sample_bound
    return Rational(random_integer(rng, nonzero), int(rng.integers(1, bound + 1)))


def _random_parabolic(blocks: BlockData, rng: np.random.Generator) -> RatMatrix:
    n = blocks.n
    while True:
        g = zeros(n, n)
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                if blocks.allows(i, j):
                    g[i - 1, j - 1] = random_rational(rng) if i != j else 1 + random_rational(rng)
        g = ImmutableMatrix(g)
        if det(g) != 0:
            return g


def _random_unipotent(n: int, rng: np.random.Generator) -> RatMatrix:
    u = eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            u[i, j] = random_rational(rng)
    return ImmutableMatrix(u)


def _random_staircase(n: int, x: int, rng: np.random.Generator) -> RatMatrix:
    # Jordan-type staircase: strictly lower chains of length <= x
    m = zeros(n, n)
    start = 0
    while start < n:
        remaining = n - start
        top = min(x, remaining)
        size = top if rng.random() < 0.75 else int(rng.integers(1, top + 1))
        for offset in range(1, size):
            m[start + offset, start + offset - 1] = random_integer(rng, nonzero=True)
        start += size
    return ImmutableMatrix(m)


def sample(kind: Union[SampleKind, str], blocks: BlockData, x: int = 1, seed: Seed = 0) -> RatMatrix:
    """
    Draw a deterministic random matrix.

    Args:
        kind: parabolic (invertible, block upper triangular), unipotent
            (upper unitriangular) or nilpotent (g N0 g^-1 with N0^x = 0).
        blocks: Block data fixing n and, for parabolic draws, the staircase.
        x: Nilpotency bound for nilpotent draws, 1 <= x <= n.
        seed: Integer seed or an explicit numpy Generator.

    Returns:
        RatMatrix: An exact n x n matrix.
    """
    kind = SampleKind(kind)
    rng = make_rng(seed)
    n = blocks.n
    if kind is SampleKind.PARABOLIC:
        return _random_parabolic(blocks, rng)
    if kind is SampleKind.UNIPOTENT:
        return _random_unipotent(n, rng)
    if x < 1 or x > n:
        raise PreconditionError(f"nilpotency bound x={x} must lie in 1..{n}")
    staircase = _random_staircase(n, x, rng)
    g = _random_parabolic(BlockData.of([n]), rng)
    N = conjugate(g, staircase)
    logger.debug("sampled %s-nilpotent %dx%d matrix", x, n, n)
    return N


# ==================== JSON ====================
def _entry_to_json(value: RatScalar) -> Union[int, str]:
    value = Rational(value)
    return int(value) if value.q == 1 else f"{value.p}/{value.q}"


def matrix_to_json(M: RatMatrix) -> Dict:
    return {
        "rows": M.rows,
        "cols": M.cols,
        "entries": [[_entry_to_json(M[i, j]) for j in range(M.cols)] for i in range(M.rows)],
    }


def matrix_from_json(payload: Dict) -> RatMatrix:
    """Parse the exact matrix JSON format; entries are ints or "p/q" strings."""
    try:
        rows, cols = int(payload["rows"]), int(payload["cols"])
        entries = payload["entries"]
    except (KeyError, TypeError, ValueError) as e:
        raise ShapeError(f"matrix JSON needs rows, cols and entries: {e}") from e
    if not isinstance(entries, list) or not all(isinstance(row, list) for row in entries):
        raise ShapeError("matrix JSON entries must be a list of rows")
    if len(entries) != rows or any(len(row) != cols for row in entries):
        raise ShapeError(f"matrix JSON entries do not match declared shape {rows}x{cols}")
    if rows == 0 or cols == 0:
        return zero_matrix(rows, cols)
    return to_matrix(entries)
