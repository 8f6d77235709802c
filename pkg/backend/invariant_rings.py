"""
Determinantal B-semi-invariants and U-invariants on the nilpotent cone.

A datum ((a_i), (a'_j), (P_{i,j})) with sum a_i = sum a'_j = r defines
f(N) = det N^P, where N^P is the r x r block matrix whose (i,j) block is the
corner of P_{i,j}(N) formed by the last a_i rows and the first a'_j columns.
f is a B-semi-invariant of weight
    sum_i (w_{n-a_i+1} + ... + w_n) - sum_j (w_1 + ... + w_{a'_j}),
hence U-invariant. Blocks of size zero contribute no rows or columns.
"""
from enum import Enum
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict
from sympy import ImmutableMatrix, Matrix, Poly, Rational, expand, symbols

from backend.config import get_settings
from backend.errors import IndexConstraintError, PreconditionError, ShapeError
from backend.exact_linalg import (RatMatrix, RatScalar, Seed, as_rational, corner_submatrix, det, identity,
                                  make_rng, matrix_to_json, random_integer, zero_matrix)
from backend.logger import get_logger
from backend.normal_forms import in_hu

logger = get_logger(__name__)

X = symbols("x")


# ==================== DATA ====================
class SemiInvDatum(BaseModel):
    """
    Block sizes and a polynomial table.

    ``polys[i][j]`` is the coefficient list (constant term first) of P_{i,j}.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    a: Tuple[int, ...]
    a_prime: Tuple[int, ...]
    polys: Tuple[Tuple[Tuple[RatScalar, ...], ...], ...]

    @classmethod
    def build(cls, a: Sequence[int], a_prime: Sequence[int], polys: Sequence[Sequence]) -> "SemiInvDatum":
        """
        Build a datum from polynomial entries.

        Args:
            a: Row block sizes (a_1, ..., a_s).
            a_prime: Column block sizes (a'_1, ..., a'_t).
            polys: s x t table; each entry is a sympy expression in ``x``, a
                Poly, or a coefficient list with the constant term first.
        """
        table = tuple(tuple(_coefficients(entry) for entry in row) for row in polys)
        datum = cls(a=tuple(int(v) for v in a), a_prime=tuple(int(v) for v in a_prime), polys=table)
        datum.check()
        return datum

    @property
    def s(self) -> int:
        return len(self.a)

    @property
    def t(self) -> int:
        return len(self.a_prime)

    @property
    def r(self) -> int:
        return sum(self.a)

    def check(self) -> None:
        if sum(self.a) != sum(self.a_prime):
            raise ShapeError(f"row sizes {self.a} and column sizes {self.a_prime} have different sums")
        if len(self.polys) != self.s or any(len(row) != self.t for row in self.polys):
            raise ShapeError(f"polynomial table must be {self.s}x{self.t}")
        if any(v < 0 for v in self.a + self.a_prime):
            raise ShapeError("block sizes must be non-negative")

    def poly(self, i: int, j: int) -> Poly:
        """P_{i,j} as a sympy Poly in x (0-based indices)."""
        return Poly(list(reversed(self.polys[i][j])) or [0], X, domain="QQ")

    def max_degree(self) -> int:
        return max((self.poly(i, j).degree() for i in range(self.s) for j in range(self.t)
                    if not self.poly(i, j).is_zero), default=0)

    def has_constant_terms(self) -> bool:
        return any(row_entry and row_entry[0] != 0 for row in self.polys for row_entry in row)

    def to_json(self) -> Dict:
        return {
            "a": list(self.a),
            "a_prime": list(self.a_prime),
            "polys": [[[_rational_to_json(c) for c in entry] for entry in row] for row in self.polys],
        }

    @classmethod
    def from_json(cls, payload: Dict) -> "SemiInvDatum":
        try:
            polys = [[[as_rational(c) for c in entry] for entry in row] for row in payload["polys"]]
            return cls.build(payload["a"], payload["a_prime"], polys)
        except (KeyError, TypeError, ValueError) as e:
            raise ShapeError(f"datum JSON needs a, a_prime and polys: {e}") from e


def _coefficients(entry) -> Tuple[RatScalar, ...]:
    if isinstance(entry, (list, tuple)):
        coeffs = [Rational(c) for c in entry]
    else:
        poly = entry if isinstance(entry, Poly) else Poly(entry, X, domain="QQ")
        coeffs = [Rational(c) for c in reversed(poly.all_coeffs())]
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


def _rational_to_json(value: RatScalar) -> Union[int, str]:
    value = Rational(value)
    return int(value) if value.q == 1 else f"{value.p}/{value.q}"


class Weight(BaseModel):
    """Integer coefficients over the characters w_1..w_n, w_i(g) = g_ii."""
    model_config = ConfigDict(frozen=True)

    coefficients: Tuple[int, ...]

    def __add__(self, other: "Weight") -> "Weight":
        return Weight(coefficients=tuple(a + b for a, b in zip(self.coefficients, other.coefficients)))


class ToricData(BaseModel):
    model_config = ConfigDict(frozen=True)

    predicted: Tuple[int, ...]
    measured: Tuple[int, ...]
    sum_free: bool
    positive_degree: bool
    matches: bool


class ToricCheck(BaseModel):
    """Outcome of randomized toricity testing; a False answer carries the separating H."""
    model_config = ConfigDict(frozen=True)

    toric: bool
    trials: int
    error_bound: str
    witness: Optional[Dict] = None


# ==================== EVALUATION ====================
def _poly_at(coeffs: Tuple[RatScalar, ...], powers: List[Matrix]) -> Matrix:
    out = Matrix.zeros(powers[0].rows, powers[0].cols)
    for degree, c in enumerate(coeffs):
        if c != 0:
            out += c * powers[degree]
    return out


def assemble(d: SemiInvDatum, N: Matrix) -> Matrix:
    """The block matrix N^P; zero-size blocks are dropped."""
    n = N.rows
    if any(v > n for v in d.a + d.a_prime):
        raise ShapeError(f"block sizes {d.a}, {d.a_prime} exceed n={n}")
    powers = [Matrix.eye(n)]
    for _ in range(d.max_degree()):
        powers.append(powers[-1] * N)
    rows = []
    for i, ai in enumerate(d.a):
        if ai == 0:
            continue
        blocks = []
        for j, aj in enumerate(d.a_prime):
            if aj == 0:
                continue
            value = _poly_at(d.polys[i][j], powers)
            blocks.append(value[n - ai:, :aj])
        rows.append(Matrix.hstack(*blocks))
    if not rows:
        return Matrix.zeros(0, 0)
    return Matrix.vstack(*rows)


def evaluate(d: SemiInvDatum, N: RatMatrix) -> RatScalar:
    """f(N) = det N^P."""
    if N.rows != N.cols:
        raise ShapeError(f"expected a square matrix, got {N.rows}x{N.cols}")
    block = assemble(d, Matrix(N))
    return det(ImmutableMatrix(block)) if block.rows else Rational(1)


def evaluate_symbolic(d: SemiInvDatum, N: Matrix):
    """f on a matrix with symbolic entries, expanded."""
    block = assemble(d, Matrix(N))
    return expand(block.det(method="berkowitz")) if block.rows else Rational(1)


def weight(d: SemiInvDatum, n: int) -> Weight:
    coefficients = [0] * n
    for ai in d.a:
        for index in range(n - ai, n):
            coefficients[index] += 1
    for aj in d.a_prime:
        for index in range(aj):
            coefficients[index] -= 1
    return Weight(coefficients=tuple(coefficients))


def character(w: Weight, g: RatMatrix) -> RatScalar:
    """chi(g) = prod g_ii^{c_i}."""
    value = Rational(1)
    for i, c in enumerate(w.coefficients):
        value *= Rational(g[i, i]) ** c
    return value


def multiply_data(d: SemiInvDatum, e: SemiInvDatum) -> SemiInvDatum:
    """Block-diagonal datum whose value is the product f_d * f_e."""
    t_d, t_e = d.t, e.t
    rows = [list(row) + [()] * t_e for row in d.polys] + [[()] * t_d + list(row) for row in e.polys]
    return SemiInvDatum.build(d.a + e.a, d.a_prime + e.a_prime, rows)


# ==================== BUILT-IN DATA ====================
class BuiltinName(Enum):
    DET = "det_i"
    F = "f_i"
    F_PAIR = "f_ij"
    UTWO_F21 = "utwo_f21"
    UTHREE_F1 = "uthree_f1"
    UTHREE_F2 = "uthree_f2"
    UTHREE_DET1 = "uthree_det1"
    UTHREE_DET2 = "uthree_det2"
    G_REL = "g_rel"

    @classmethod
    def get_all_names(cls) -> List[str]:
        return [name.value for name in cls]


def builtin(name: Union[BuiltinName, str], n: int, *indices: int) -> SemiInvDatum:
    """
    Named data.

    det_i (i): ((i), (i), x^{n-i}), 1 <= i <= n-1.
    f_i (i): ((i), (1,...,1), x^{n-i-1+j} in column j), 1 <= i <= n-1.
    f_ij (i, j): ((j-1, n-i+1), (j, n-i), [[x^{n-j+1}, 0], [x, x^i]]), j < i-1 <= n-1.
    g_rel: ((2),(2),(x)) for n = 4, ((n-2),(2,n-4),(x,x^4)) for n > 4.
    The utwo/uthree data fix n = 2 and n = 3.
    """
    try:
        name = BuiltinName(name)
    except ValueError as e:
        raise IndexConstraintError(f"unknown datum {name!r}, expected one of {BuiltinName.get_all_names()}") from e

    def need(count: int) -> None:
        if len(indices) != count:
            raise IndexConstraintError(f"{name.value} takes {count} indices, got {len(indices)}")

    if name is BuiltinName.DET:
        need(1)
        (i,) = indices
        if not 1 <= i <= n - 1:
            raise IndexConstraintError(f"det_i needs 1 <= i <= {n - 1}, got i={i}")
        return SemiInvDatum.build((i,), (i,), [[X ** (n - i)]])
    if name is BuiltinName.F:
        need(1)
        (i,) = indices
        if not 1 <= i <= n - 1:
            raise IndexConstraintError(f"f_i needs 1 <= i <= {n - 1}, got i={i}")
        return SemiInvDatum.build((i,), (1,) * i, [[X ** (n - i - 1 + j) for j in range(1, i + 1)]])
    if name is BuiltinName.F_PAIR:
        need(2)
        i, j = indices
        if not (1 <= j < i - 1 and i <= n):
            raise IndexConstraintError(f"f_ij needs 1 <= j < i-1 and i <= {n}, got ({i},{j})")
        return SemiInvDatum.build((j - 1, n - i + 1), (j, n - i), [[X ** (n - j + 1), 0], [X, X ** i]])
    if name is BuiltinName.G_REL:
        need(0)
        if n < 4:
            raise IndexConstraintError(f"g_rel needs n >= 4, got n={n}")
        if n == 4:
            return SemiInvDatum.build((2,), (2,), [[X]])
        return SemiInvDatum.build((n - 2,), (2, n - 4), [[X, X ** 4]])
    need(0)
    fixed = {
        BuiltinName.UTWO_F21: (2, ((1,), (1,), [[X]])),
        BuiltinName.UTHREE_F1: (3, ((2,), (1, 1), [[X, X ** 2]])),
        BuiltinName.UTHREE_F2: (3, ((1, 1), (2,), [[X ** 2], [X]])),
        BuiltinName.UTHREE_DET1: (3, ((2,), (2,), [[X]])),
        BuiltinName.UTHREE_DET2: (3, ((1,), (1,), [[X ** 2]])),
    }
    size, (a, a_prime, polys) = fixed[name]
    if n != size:
        raise IndexConstraintError(f"{name.value} is defined for n={size} only, got n={n}")
    return SemiInvDatum.build(a, a_prime, polys)


# ==================== TORIC MACHINERY ====================
def toric_part(H: RatMatrix) -> RatMatrix:
    if not in_hu(H):
        raise PreconditionError("toric part is defined on H_U (strictly lower, nonzero subdiagonal)")
    n = H.rows
    out = Matrix.zeros(n, n)
    for i in range(n - 1):
        out[i + 1, i] = H[i + 1, i]
    return ImmutableMatrix(out)


def sample_hu(n: int, rng: np.random.Generator) -> RatMatrix:
    """Random H in H_U with small integer entries."""
    out = Matrix.zeros(n, n)
    for i in range(n):
        for j in range(i):
            out[i, j] = random_integer(rng, nonzero=(i == j + 1))
    return ImmutableMatrix(out)


def toric_check(d: SemiInvDatum, n: int, trials: Optional[int] = None, seed: Seed = 0) -> ToricCheck:
    """
    Randomized test of f(H) = f(H_tor) on H_U.

    A failure is exact. Success has error at most (deg/|S|)^trials where deg
    bounds the total degree of f in the entries of H and |S| is the number of
    values each entry is drawn from.
    """
    trials = trials or get_settings().trials
    rng = make_rng(seed)
    for _ in range(trials):
        H = sample_hu(n, rng)
        if evaluate(d, H) != evaluate(d, toric_part(H)):
            return ToricCheck(toric=False, trials=trials, error_bound="0", witness=matrix_to_json(H))
    space = 2 * get_settings().sample_bound + 1
    degree = d.r * max(d.max_degree(), 1)
    bound = min(Rational(1), Rational(degree, space)) ** trials
    return ToricCheck(toric=True, trials=trials, error_bound=str(bound))


def is_toric_on_samples(d: SemiInvDatum, n: int, trials: Optional[int] = None, seed: Seed = 0) -> bool:
    result = toric_check(d, n, trials, seed)
    logger.debug("toricity %s after %d trials (error <= %s)", result.toric, result.trials, result.error_bound)
    return result.toric


def _proper_subset_sums(values: Tuple[int, ...]) -> set:
    sums = set()
    for size in range(1, len(values)):
        for subset in combinations(range(len(values)), size):
            sums.add(sum(values[k] for k in subset))
    return sums


def is_sum_free(d: SemiInvDatum) -> bool:
    """No nonempty proper subsets of (a_i) and (a'_j) with equal sums."""
    return not (_proper_subset_sums(d.a) & _proper_subset_sums(d.a_prime))


def predicted_exponents(d: SemiInvDatum, n: int) -> Tuple[int, ...]:
    s, t = d.s, d.t
    out = []
    for l in range(1, n - 1):
        grow = sum(sum(1 for aj in d.a_prime if aj >= k) for k in range(2, l + 1))
        shrink = sum(sum(1 for ai in d.a if ai >= n - k) for k in range(1, l))
        out.append(t + grow - shrink)
    out.append(s)
    return tuple(out)


def toric_exponents(d: SemiInvDatum, n: int) -> ToricData:
    """Predicted and measured exponents of f(H_tor) as a monomial in x_1..x_{n-1}."""
    xs = symbols(f"x1:{n}")
    H = Matrix.zeros(n, n)
    for i in range(n - 1):
        H[i + 1, i] = xs[i]
    value = evaluate_symbolic(d, H)
    poly = Poly(value, *xs)
    terms = poly.terms()
    if len(terms) != 1 or terms[0][1] == 0:
        raise PreconditionError(f"f(H_tor) = {value} is not a monomial")
    measured = tuple(int(e) for e in terms[0][0])
    predicted = predicted_exponents(d, n)
    data = ToricData(predicted=predicted, measured=measured, sum_free=is_sum_free(d),
                     positive_degree=not d.has_constant_terms(), matches=predicted == measured)
    if not data.positive_degree:
        logger.warning("datum has constant-term polynomials; the exponent formula does not apply")
    if not data.matches:
        logger.warning("exponent formula predicts %s, measured %s", predicted, measured)
    return data


# ==================== EXPLORATORY RELATION ====================
class RelationReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    samples: int
    holds: int
    g_formula_holds: int


def relation_check(n: int, samples: int = 20, seed: Seed = 0) -> RelationReport:
    """
    Evaluate g F = F' on random H in H_U, where
    F = det_{n-3} det_1 f_{n-3} f_{n-1} and
    F' = f_{3,1} f_{4,2} f_{n-3} f_{n-1} - f_{4,1} f_{n-2}^2 det_{n-3} det_1,
    and compare g(H) with (x_{3,1} x_{4,2} - x_2 x_{4,1}) det_{n-4}(H), det_0 = 1.
    """
    if n < 4:
        raise IndexConstraintError(f"relation is stated for n >= 4, got n={n}")
    rng = make_rng(seed)
    g = builtin(BuiltinName.G_REL, n)

    def det_at(i: int, H: RatMatrix) -> RatScalar:
        return Rational(1) if i == 0 else evaluate(builtin(BuiltinName.DET, n, i), H)

    def f(i: int, H: RatMatrix) -> RatScalar:
        return evaluate(builtin(BuiltinName.F, n, i), H)

    def fij(i: int, j: int, H: RatMatrix) -> RatScalar:
        return evaluate(builtin(BuiltinName.F_PAIR, n, i, j), H)

    holds = formula = 0
    for _ in range(samples):
        H = sample_hu(n, rng)
        F = det_at(n - 3, H) * det_at(1, H) * f(n - 3, H) * f(n - 1, H)
        Fp = (fij(3, 1, H) * fij(4, 2, H) * f(n - 3, H) * f(n - 1, H)
              - fij(4, 1, H) * f(n - 2, H) ** 2 * det_at(n - 3, H) * det_at(1, H))
        gH = evaluate(g, H)
        holds += int(gH * F == Fp)
        expected = (H[2, 0] * H[3, 1] - H[2, 1] * H[3, 0]) * det_at(n - 4, H)
        formula += int(gH == expected)
    report = RelationReport(n=n, samples=samples, holds=holds, g_formula_holds=formula)
    logger.warning("relation g*F = F' held on %d/%d samples, g formula on %d/%d (n=%d)",
                   holds, samples, formula, samples, n)
    return report
