import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import typer
from rich.console import Console
from rich.table import Table

from backend.block_data import BlockData
from backend.config import get_settings
from backend.degeneration_poset import hasse, leq, minimality_report, to_dot
from backend.errors import OrbitCalcError, PreconditionError
from backend.exact_linalg import matrix_from_json, matrix_to_json
from backend.finiteness import WitnessKind, are_conjugate, is_finite, witness_family
from backend.invariant_rings import SemiInvDatum, builtin, evaluate, toric_check, toric_exponents, weight
from backend.link_patterns import eolp_from_json, eolp_to_json, enumerate_patterns, to_multiplicities
from backend.logger import get_logger
from backend.normal_forms import normal_form, u_normal_form
from backend.orbit_classify import classify
from backend.quiver_reps import Decomposition, orbit_dimension
from backend.selftest import run_selftest

logger = get_logger(__name__)

app = typer.Typer(add_completion=False, help="Exact orbit calculus for parabolic actions on nilpotent matrices.")
console = Console()

# ==================== OPTIONS ====================
BLOCKS = typer.Option(..., "--blocks", help="Block sizes, e.g. 1,2,1")
MATRIX = typer.Option(..., "--matrix", help="Matrix JSON file")
SEED = typer.Option(None, "--seed", help="Random seed (defaults to ORBITS_SEED)")
TRIALS = typer.Option(None, "--trials", help="Sampling budget (defaults to ORBITS_TRIALS)")
PRETTY = typer.Option(False, "--pretty", help="Render tables instead of JSON")


class MalformedInputError(OrbitCalcError):
    """An input file is missing or is not valid JSON."""


# ==================== HELPERS ====================
def _read_json(path: Path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except OSError as e:
        raise MalformedInputError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise MalformedInputError(f"{path} is not valid JSON: {e}") from e


def _load_datum(path: Path, size: Optional[int]) -> Tuple[SemiInvDatum, int]:
    """A datum file is either explicit JSON or ``{"builtin": name, "n": n, "indices": [...]}``."""
    payload = _read_json(path)
    if isinstance(payload, dict) and "builtin" in payload:
        try:
            n = int(payload.get("n", size or 0))
            indices = [int(i) for i in payload.get("indices", [])]
        except (TypeError, ValueError) as e:
            raise MalformedInputError(f"builtin datum needs integer n and indices: {e}") from e
        return builtin(payload["builtin"], n, *indices), n
    if size is None:
        raise PreconditionError("explicit data need --size to fix the matrix dimension")
    return SemiInvDatum.from_json(payload), size


def _seed(seed: Optional[int]) -> int:
    return get_settings().seed if seed is None else seed


def _emit(payload: Any, pretty: bool = False, title: str = "") -> None:
    if not pretty:
        typer.echo(json.dumps(payload))
        return
    if isinstance(payload, list) and payload and isinstance(payload[0], dict):
        table = Table(title=title or None)
        for key in payload[0]:
            table.add_column(str(key))
        for row in payload:
            table.add_row(*[json.dumps(row[key]) if not isinstance(row[key], str) else row[key] for key in row])
        console.print(table)
    else:
        console.print_json(json.dumps(payload))


def _fail(e: OrbitCalcError) -> None:
    logger.debug("command failed: %s", e)
    typer.echo(json.dumps({"error": type(e).__name__, "message": str(e)}))
    raise typer.Exit(code=1)


# ==================== COMMANDS ====================
@app.command()
def orbits(blocks: str = BLOCKS, pretty: bool = PRETTY):
    """List every orbit of 2-nilpotent matrices with its dimension."""
    try:
        data = BlockData.parse(blocks)
        rows = [{"pattern": pattern.describe(), "eolp": eolp_to_json(pattern, data),
                 "dim": orbit_dimension(to_multiplicities(pattern), data)} for pattern in enumerate_patterns(data)]
    except OrbitCalcError as e:
        _fail(e)
    if pretty:
        _emit([{"pattern": row["pattern"], "dim": row["dim"]} for row in rows], True, f"orbits for {blocks}")
    else:
        _emit(rows)


@app.command("classify")
def classify_cmd(blocks: str = BLOCKS, matrix: Path = MATRIX, pretty: bool = PRETTY):
    """Name the orbit of a 2-nilpotent matrix."""
    try:
        data = BlockData.parse(blocks)
        pattern = classify(matrix_from_json(_read_json(matrix)), data)
    except OrbitCalcError as e:
        _fail(e)
    _emit(eolp_to_json(pattern, data), pretty)


@app.command("leq")
def leq_cmd(blocks: str = BLOCKS, a: Path = typer.Option(..., "--a"), b: Path = typer.Option(..., "--b"),
            pretty: bool = PRETTY):
    """Whether the orbit closure of A contains the orbit of B."""
    try:
        data = BlockData.parse(blocks)
        X, x_blocks = eolp_from_json(_read_json(a))
        Y, y_blocks = eolp_from_json(_read_json(b))
        if x_blocks != data or y_blocks != data:
            raise PreconditionError(f"pattern files must both have blocks {data.blocks}")
        result = leq(X, Y, data)
    except OrbitCalcError as e:
        _fail(e)
    _emit({"leq": result}, pretty)


@app.command("hasse")
def hasse_cmd(blocks: str = BLOCKS, fmt: str = typer.Option("json", "--format", help="json or dot"),
              pretty: bool = PRETTY):
    """Covering relations of the degeneration order."""
    if fmt not in ("json", "dot"):
        raise typer.BadParameter(f"unknown format {fmt!r}", param_hint="--format")
    try:
        poset = hasse(BlockData.parse(blocks))
    except OrbitCalcError as e:
        _fail(e)
    if fmt == "dot":
        typer.echo(to_dot(poset), nl=False)
    else:
        _emit(poset.to_json(), pretty)


@app.command("normal-form")
def normal_form_cmd(blocks: str = BLOCKS, matrix: Path = MATRIX, pretty: bool = PRETTY):
    """Generic P-normal form of a nilpotent matrix with its certificate."""
    try:
        form = normal_form(matrix_from_json(_read_json(matrix)), BlockData.parse(blocks))
    except OrbitCalcError as e:
        _fail(e)
    _emit(form.to_json(), pretty)


@app.command("u-normal-form")
def u_normal_form_cmd(matrix: Path = MATRIX, pretty: bool = PRETTY):
    """Unipotent normal form of a generic nilpotent matrix."""
    try:
        form = u_normal_form(matrix_from_json(_read_json(matrix)))
    except OrbitCalcError as e:
        _fail(e)
    _emit(form.to_json(), pretty)


@app.command("invariant-eval")
def invariant_eval(datum: Path = typer.Option(..., "--datum"), matrix: Path = MATRIX,
                   size: Optional[int] = typer.Option(None, "--size")):
    """Evaluate a determinantal semi-invariant at a matrix."""
    try:
        N = matrix_from_json(_read_json(matrix))
        d, _ = _load_datum(datum, size or N.rows)
        value = evaluate(d, N)
    except OrbitCalcError as e:
        _fail(e)
    _emit({"value": str(value)})


@app.command("invariant-weight")
def invariant_weight(datum: Path = typer.Option(..., "--datum"), size: Optional[int] = typer.Option(None, "--size")):
    """Character weight of a datum as coefficients of w_1..w_n."""
    try:
        d, n = _load_datum(datum, size)
        w = weight(d, n)
    except OrbitCalcError as e:
        _fail(e)
    _emit({"weight": list(w.coefficients)})


@app.command("toric-check")
def toric_check_cmd(datum: Path = typer.Option(..., "--datum"), size: Optional[int] = typer.Option(None, "--size"),
                    seed: Optional[int] = SEED, trials: Optional[int] = TRIALS, pretty: bool = PRETTY):
    """Randomized toricity test and monomial exponents on the toric part."""
    try:
        d, n = _load_datum(datum, size)
        check = toric_check(d, n, trials, _seed(seed))
        payload: Dict[str, Any] = check.model_dump()
        if check.toric:
            payload["exponents"] = toric_exponents(d, n).model_dump()
    except OrbitCalcError as e:
        _fail(e)
    _emit(payload, pretty)


@app.command("finiteness")
def finiteness_cmd(blocks: str = BLOCKS, nilpotency: int = typer.Option(..., "--nilpotency"), pretty: bool = PRETTY):
    """Decide whether P has finitely many orbits on N^x = 0."""
    try:
        verdict = is_finite(BlockData.parse(blocks), nilpotency)
    except OrbitCalcError as e:
        _fail(e)
    _emit(verdict.to_json(), pretty)


@app.command("conjugate-test")
def conjugate_test(blocks: str = BLOCKS, a: Path = typer.Option(..., "--a"), b: Path = typer.Option(..., "--b"),
                   seed: Optional[int] = SEED, trials: Optional[int] = TRIALS, pretty: bool = PRETTY):
    """Exact P-conjugacy test between two matrices."""
    try:
        result = are_conjugate(matrix_from_json(_read_json(a)), matrix_from_json(_read_json(b)),
                               BlockData.parse(blocks), _seed(seed), trials)
    except OrbitCalcError as e:
        _fail(e)
    _emit(result.to_json(), pretty)


@app.command("minimality")
def minimality(blocks: str = BLOCKS, d: str = typer.Option(..., "--d"), d_prime: str = typer.Option(..., "--d-prime"),
               w: str = typer.Option("0", "--w")):
    """Compare the cover relation for (D + W, D' + W) with the summand criteria."""
    try:
        report = minimality_report(Decomposition.parse(d), Decomposition.parse(d_prime), Decomposition.parse(w),
                                   BlockData.parse(blocks))
    except OrbitCalcError as e:
        _fail(e)
    _emit({**report.model_dump(), "disagreements": report.disagreements})


@app.command("witness")
def witness(kind: str = typer.Option(..., "--kind", help="D, E or F"), n: int = typer.Option(..., "--n"),
            nilpotency: int = typer.Option(..., "--nilpotency"), lam: str = typer.Option("1", "--lam"),
            blocks: Optional[str] = typer.Option(None, "--blocks")):
    """Print a member of an infinite witness family."""
    if kind not in WitnessKind.get_all_kinds():
        raise typer.BadParameter(f"kind must be one of {WitnessKind.get_all_kinds()}", param_hint="--kind")
    try:
        data = BlockData.parse(blocks) if blocks else None
        N = witness_family(kind, n, nilpotency, lam, data)
    except OrbitCalcError as e:
        _fail(e)
    _emit(matrix_to_json(N))


@app.command("selftest")
def selftest(seed: Optional[int] = SEED, pretty: bool = PRETTY):
    """Run the built-in consistency suites; exit 0 iff all pass."""
    results = run_selftest(_seed(seed))
    rows: List[Dict] = [{"suite": r.name, "passed": r.passed, "failed": r.failed} for r in results]
    _emit(rows if pretty else {"suites": [r.model_dump() for r in results]}, pretty, "selftest")
    if any(r.failed for r in results):
        raise typer.Exit(code=1)


def main():
    app()


if __name__ == "__main__":
    try:
        main()
    except KeyboardInterrupt:
        console.print("\ninterrupted")
