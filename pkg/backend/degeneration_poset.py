"""
Degeneration order on the P-orbits of 2-nilpotent matrices.

X <= Y (the orbit of Y lies in the closure of the orbit of X) is decided by
the hom-order: a_k(X) <= a_k(Y) and b_{k,l}(X) <= b_{k,l}(Y) for all k, l.
For Borel blocks this is the closure order; for other blocks the poset is
flagged as a hom-order. Covers come from the transitive reduction.
"""
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
from pydantic import BaseModel, ConfigDict

from backend.block_data import BlockData
from backend.errors import DimensionVectorError, PreconditionError
from backend.exact_linalg import RatMatrix
from backend.link_patterns import Eolp, eolp_to_json, enumerate_patterns, from_multiplicities, to_multiplicities, validate
from backend.logger import get_logger
from backend.orbit_classify import representative_matrix
from backend.quiver_reps import (Decomposition, Label, build_indecomposable, hom_dim_formula, hom_dim_oracle,
                                 invariant_vector, orbit_dimension, rep_from_matrix)

logger = get_logger(__name__)


def _ab(e: Eolp, blocks: BlockData) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    vector = invariant_vector(to_multiplicities(e), blocks.p)
    return vector.a, vector.b


def _dominated(left: Tuple[Tuple[int, ...], Tuple[int, ...]], right: Tuple[Tuple[int, ...], Tuple[int, ...]]) -> bool:
    return all(x <= y for x, y in zip(left[0], right[0])) and all(x <= y for x, y in zip(left[1], right[1]))


def leq(X: Eolp, Y: Eolp, blocks: BlockData) -> bool:
    """True iff the orbit closure of X contains the orbit of Y."""
    for e in (X, Y):
        if not validate(e, blocks):
            raise PreconditionError(f"pattern {e.describe()} is not of type {blocks.blocks}")
    return _dominated(_ab(X, blocks), _ab(Y, blocks))


def oracle_invariants(N: RatMatrix, blocks: BlockData) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """a_k = dim Hom(V_k, M^N) and b_{k,l} = dim Hom(U_{k,l}, M^N) from the linear-system oracle."""
    p = blocks.p
    rep = rep_from_matrix(N, blocks, 2)
    a = tuple(hom_dim_oracle(build_indecomposable(Label.V(k), p), rep) for k in range(1, p + 1))
    b = tuple(hom_dim_oracle(build_indecomposable(Label.U(k, l), p), rep)
              for k in range(1, p + 1) for l in range(1, p + 1))
    return a, b


class OrbitPoset:
    """
    The orbit poset for one block type.

    ``relation[i][j]`` is True when elements[i] <= elements[j]; ``covers`` lists
    pairs (i, j) with elements[i] covered by elements[j], i.e. oriented from the
    denser orbit to the more degenerate one.
    """

    def __init__(self, blocks: BlockData, elements: List[Eolp], relation: List[List[bool]],
                 covers: List[Tuple[int, int]], dims: List[int]):
        self.blocks = blocks
        self.elements = elements
        self.relation = relation
        self.covers = covers
        self.dims = dims
        self.hom_order = not blocks.is_borel

    def index(self, e: Eolp) -> int:
        return self.elements.index(e)

    def is_cover(self, X: Eolp, Y: Eolp) -> bool:
        return (self.index(X), self.index(Y)) in set(self.covers)

    @property
    def maximum(self) -> Optional[int]:
        tops = [i for i in range(len(self.elements)) if all(self.relation[j][i] for j in range(len(self.elements)))]
        return tops[0] if len(tops) == 1 else None

    @property
    def minimum(self) -> Optional[int]:
        bottoms = [i for i in range(len(self.elements)) if all(self.relation[i][j] for j in range(len(self.elements)))]
        return bottoms[0] if len(bottoms) == 1 else None

    def graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        for i, e in enumerate(self.elements):
            g.add_node(i, label=e.describe(), dim=self.dims[i])
        g.add_edges_from(self.covers)
        return g

    def to_json(self) -> Dict:
        return {
            "elements": [eolp_to_json(e, self.blocks) for e in self.elements],
            "covers": [[i, j] for i, j in self.covers],
            "dims": list(self.dims),
            "hom_order": self.hom_order,
        }


def hasse(blocks: BlockData) -> OrbitPoset:
    elements = enumerate_patterns(blocks)
    vectors = [_ab(e, blocks) for e in elements]
    size = len(elements)
    relation = [[_dominated(vectors[i], vectors[j]) for j in range(size)] for i in range(size)]
    strict = nx.DiGraph()
    strict.add_nodes_from(range(size))
    strict.add_edges_from((i, j) for i in range(size) for j in range(size) if i != j and relation[i][j])
    covers = sorted(nx.transitive_reduction(strict).edges())
    dims = [orbit_dimension(to_multiplicities(e), blocks) for e in elements]
    logger.debug("poset for blocks %s: %d orbits, %d covers", blocks.blocks, size, len(covers))
    return OrbitPoset(blocks, elements, relation, covers, dims)


def to_dot(poset: OrbitPoset) -> str:
    g = poset.graph()
    lines = ["digraph orbits {"]
    for i, attrs in g.nodes(data=True):
        lines.append(f'  n{i} [label="{attrs["label"]} (dim {attrs["dim"]})"];')
    for i, j in g.edges:
        lines.append(f"  n{i} -> n{j};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def saturated_chain(chain: Sequence[Eolp], blocks: BlockData, poset: Optional[OrbitPoset] = None) -> bool:
    """True iff consecutive members of ``chain`` are covering pairs."""
    poset = poset or hasse(blocks)
    return all(poset.is_cover(X, Y) for X, Y in zip(chain, chain[1:]))


# ==================== MINIMALITY ====================
class MinimalityReport(BaseModel):
    """Cover ground truth for (D + W, D' + W) beside both readings of the summand criterion."""
    model_config = ConfigDict(frozen=True)

    is_cover: bool
    hom_difference_criterion: bool
    interior_criterion: Optional[bool] = None

    @property
    def disagreements(self) -> List[str]:
        out = []
        if self.hom_difference_criterion != self.is_cover:
            out.append("hom-difference")
        if self.interior_criterion is not None and self.interior_criterion != self.is_cover:
            out.append("interior")
        return out


def _hom_difference_criterion(D: Decomposition, Dp: Decomposition, W: Decomposition) -> bool:
    for label, _ in W.terms:
        X = Decomposition.of(label)
        if hom_dim_formula(X, D) != hom_dim_formula(X, Dp) or hom_dim_formula(D, X) != hom_dim_formula(Dp, X):
            return False
    return True


def _interior_criterion(D: Decomposition, Dp: Decomposition, W: Decomposition) -> Optional[bool]:
    # only defined for D = U(t,s), D' = U(s,t) with s < t
    if len(D.terms) != 1 or len(Dp.terms) != 1 or D.terms[0][1] != 1 or Dp.terms[0][1] != 1:
        return None
    d, dp = D.terms[0][0], Dp.terms[0][0]
    if not (d.is_u and dp.is_u and d.i == dp.j and d.j == dp.i and d.j < d.i):
        return None
    t, s = d.i, d.j
    for label, _ in W.terms:
        if label.is_u:
            k, l = label.i, label.j
            if (k < t and s < l < t) or (s < k < t and t < l):
                return False
        elif s < label.i < t:
            return False
    return True


def minimality_report(D: Decomposition, Dp: Decomposition, W: Decomposition, blocks: BlockData) -> MinimalityReport:
    try:
        lower = from_multiplicities(D + W, blocks)
        upper = from_multiplicities(Dp + W, blocks)
    except DimensionVectorError as e:
        raise PreconditionError(f"D + W and D' + W must both be of type {blocks.blocks}: {e}") from e
    if lower == upper or not leq(lower, upper, blocks):
        raise PreconditionError(f"{D} does not properly degenerate to {Dp} after adding {W}")
    poset = hasse(blocks)
    report = MinimalityReport(
        is_cover=poset.is_cover(lower, upper),
        hom_difference_criterion=_hom_difference_criterion(D, Dp, W),
        interior_criterion=_interior_criterion(D, Dp, W),
    )
    if report.disagreements:
        logger.warning("minimality readings disagree with the poset for %s < %s + %s: %s",
                       D, Dp, W, ", ".join(report.disagreements))
    return report


def minimality_check(D: Decomposition, Dp: Decomposition, W: Decomposition, blocks: BlockData) -> bool:
    return minimality_report(D, Dp, W, blocks).is_cover


def representative_pairs(blocks: BlockData) -> List[Tuple[Eolp, RatMatrix]]:
    """Every pattern together with its 0/1 representative matrix."""
    return [(e, representative_matrix(e, blocks)) for e in enumerate_patterns(blocks)]
