"""
Built-in consistency suites run by the ``selftest`` subcommand.

Each suite compares two independent computations and counts agreements.
"""
from typing import Callable, Dict, List, Tuple

from pydantic import BaseModel

from backend.block_data import BlockData
from backend.exact_linalg import SampleKind, conjugate, make_rng, sample
from backend.finiteness import Answer, WitnessKind, are_conjugate, witness_family
from backend.invariant_rings import BuiltinName, builtin, evaluate, is_toric_on_samples, toric_exponents
from backend.link_patterns import enumerate_patterns
from backend.logger import get_logger
from backend.orbit_classify import classify, representative_matrix
from backend.quiver_reps import build_indecomposable, hom_dim_oracle, hom_label, labels_for

logger = get_logger(__name__)

ORBIT_COUNTS = {(1, 1): 3, (2, 1): 4, (1, 1, 1): 7, (1, 1, 1, 1): 25, (2,): 2, (3,): 2}


class SuiteResult(BaseModel):
    name: str
    passed: int = 0
    failed: int = 0
    failures: List[str] = []

    def record(self, ok: bool, what: str) -> None:
        if ok:
            self.passed += 1
        else:
            self.failed += 1
            self.failures.append(what)


def _orbit_counts(seed: int) -> SuiteResult:
    result = SuiteResult(name="orbit_counts")
    for blocks, expected in ORBIT_COUNTS.items():
        count = len(enumerate_patterns(BlockData.of(blocks)))
        result.record(count == expected, f"blocks {blocks}: {count} orbits, expected {expected}")
    return result


def _hom_oracle(seed: int) -> SuiteResult:
    result = SuiteResult(name="hom_oracle")
    for p in (1, 2, 3):
        for X in labels_for(p):
            for Y in labels_for(p):
                oracle = hom_dim_oracle(build_indecomposable(X, p), build_indecomposable(Y, p))
                result.record(oracle == hom_label(X, Y), f"[{X},{Y}] on Q_{p}: oracle {oracle}")
    return result


def _classification(seed: int) -> SuiteResult:
    result = SuiteResult(name="classification")
    rng = make_rng(seed)
    for blocks in (BlockData.of([1, 1, 1]), BlockData.of([2, 1]), BlockData.of([1, 2, 1])):
        for e in enumerate_patterns(blocks):
            N = representative_matrix(e, blocks)
            g = sample(SampleKind.PARABOLIC, blocks, seed=rng)
            result.record(classify(conjugate(g, N), blocks) == e, f"{e.describe()} on {blocks.blocks}")
    return result


def _example_identities(seed: int) -> SuiteResult:
    result = SuiteResult(name="example_identities")
    rng = make_rng(seed)
    blocks = BlockData.of([3])
    det1, det2 = builtin(BuiltinName.UTHREE_DET1, 3), builtin(BuiltinName.UTHREE_DET2, 3)
    f1, f2 = builtin(BuiltinName.UTHREE_F1, 3), builtin(BuiltinName.UTHREE_F2, 3)
    for trial in range(10):
        N = sample(SampleKind.NILPOTENT, blocks, x=3, seed=rng)
        d1 = evaluate(det1, N)
        result.record(d1 == evaluate(det2, N), f"det1 = det2 on sample {trial}")
        result.record(evaluate(f1, N) * evaluate(f2, N) == d1 ** 3, f"f1 f2 = det1^3 on sample {trial}")
    return result


def _toric_battery(seed: int) -> SuiteResult:
    result = SuiteResult(name="toric_battery")
    for n in (3, 4, 5):
        for name in (BuiltinName.DET, BuiltinName.F):
            for i in range(1, n):
                d = builtin(name, n, i)
                result.record(is_toric_on_samples(d, n, trials=5, seed=seed), f"{name.value}({i}) toric at n={n}")
                result.record(toric_exponents(d, n).matches, f"{name.value}({i}) exponents at n={n}")
    return result


def _witnesses(seed: int) -> SuiteResult:
    result = SuiteResult(name="witnesses")
    cases: List[Tuple[WitnessKind, BlockData]] = [
        (WitnessKind.D, BlockData.of([1, 1, 1])),
        (WitnessKind.D, BlockData.of([1, 2, 1])),
        (WitnessKind.E, BlockData.of([2, 2])),
    ]
    for kind, blocks in cases:
        n = blocks.n
        left = witness_family(kind, n, n, 1, blocks)
        right = witness_family(kind, n, n, 2, blocks)
        answer = are_conjugate(left, right, blocks, seed=seed).answer
        result.record(answer is Answer.NO, f"{kind.value}(1) vs {kind.value}(2) on {blocks.blocks}: {answer.value}")
    return result


SUITES: Dict[str, Callable[[int], SuiteResult]] = {
    "orbit_counts": _orbit_counts,
    "hom_oracle": _hom_oracle,
    "classification": _classification,
    "example_identities": _example_identities,
    "toric_battery": _toric_battery,
    "witnesses": _witnesses,
}


def run_selftest(seed: int = 0) -> List[SuiteResult]:
    results = []
    for name, suite in SUITES.items():
        logger.debug("running suite %s", name)
        outcome = suite(seed)
        if outcome.failed:
            logger.warning("suite %s: %d failures", name, outcome.failed)
        results.append(outcome)
    return results
