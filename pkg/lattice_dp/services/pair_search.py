"""
Shared maximizer for defect quotients over disjoint pairs.

Support splits (A, Aᶜ) are ranked by their normalized-indicator value, then the best
splits are refined by multiplicative coordinate ascent on the coefficients.
"""
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from .. import current_config, logger
from ..models import LatticeSpace
from ..utils.helpers import bit_matrix, chunked, parallel_map, spawn_rngs

Objective = Callable[[np.ndarray, np.ndarray], np.ndarray]
SignProposer = Callable[[np.ndarray], List[np.ndarray]]

_CHUNK = 4096


@dataclass
class PairCandidate:
    value: float
    x: np.ndarray
    y: np.ndarray
    order: int


@dataclass
class SplitRanking:
    splits: np.ndarray   # boolean (k, n), True marks the x side
    values: np.ndarray
    exhaustive: bool


def _indicator_pairs(space: LatticeSpace, B: np.ndarray):
    A = B.astype(float)
    C = 1.0 - A
    return A / space.norms(A)[:, None], C / space.norms(C)[:, None]


def evaluate_splits(space: LatticeSpace, B: np.ndarray, objective: Objective) -> np.ndarray:
    values = np.empty(B.shape[0])
    for rows in chunked(0, B.shape[0], _CHUNK):
        X, Y = _indicator_pairs(space, B[rows.start:rows.stop])
        values[rows.start:rows.stop] = objective(X, Y)
    return values


def rank_splits(space: LatticeSpace, objective: Objective, seed: int,
                exhaustive_limit: int, samples: int) -> Optional[SplitRanking]:
    """
    Value of every split when n ≤ exhaustive_limit (each unordered split once: the last
    coordinate always sits on the y side), else seeded random splits improved by greedy
    single flips.
    """
    n = space.dim
    if n < 2:
        return None
    if n <= exhaustive_limit:
        masks = np.arange(1, 2 ** (n - 1), dtype=np.int64)
        B = bit_matrix(masks, n).astype(bool)
        return SplitRanking(B, evaluate_splits(space, B, objective), exhaustive=True)

    rng = np.random.default_rng(seed)
    B = rng.random((samples, n)) < 0.5
    B[:, -1] = False
    empty = ~B.any(axis=1)
    B[empty, rng.integers(0, n - 1, size=int(empty.sum()))] = True
    values = evaluate_splits(space, B, objective)

    top = np.argsort(-values, kind='stable')[:max(4, samples // 64)]
    improved_B, improved_v = [], []
    for idx in top:
        b, v = _greedy_flips(space, B[idx].copy(), values[idx], objective)
        improved_B.append(b)
        improved_v.append(v)
    B = np.vstack([B, np.asarray(improved_B)])
    values = np.concatenate([values, np.asarray(improved_v)])
    logger.debug(f"Sampled {samples} splits of {n} atoms; best indicator value {values.max():.6g}")
    return SplitRanking(B, values, exhaustive=False)


def _greedy_flips(space, b, value, objective, max_rounds: int = 64):
    n = b.size
    for _ in range(max_rounds):
        flips = np.repeat(b[None, :], n - 1, axis=0)
        idx = np.arange(n - 1)
        flips[idx, idx] = ~flips[idx, idx]
        valid = flips.any(axis=1)
        if not valid.any():
            break
        flips = flips[valid]
        vals = evaluate_splits(space, flips, objective)
        k = int(np.argmax(vals))
        if vals[k] <= value:
            break
        b, value = flips[k], float(vals[k])
    return b, value


def coordinate_ascent(objective: Objective, b: np.ndarray, signs: np.ndarray, start: np.ndarray,
                      max_iters: int, tol: float):
    """
    Maximize objective(s⊙a⊙1_A, s⊙a⊙1_{Aᶜ}) over a > 0 by multiplicative single-coordinate moves.

    Returns:
        (value, x, y)
    """
    n = b.size
    A = b.astype(float)
    C = 1.0 - A
    a = start.copy()
    value = float(objective((signs * a * A)[None, :], (signs * a * C)[None, :])[0])
    step = 0.5
    idx = np.arange(n)
    for _ in range(max_iters):
        grow = np.repeat(a[None, :], n, axis=0)
        grow[idx, idx] *= 1.0 + step
        shrink = np.repeat(a[None, :], n, axis=0)
        shrink[idx, idx] /= 1.0 + step
        cand = np.vstack([grow, shrink])
        vals = objective(signs * cand * A, signs * cand * C)
        k = int(np.argmax(vals))
        if vals[k] > value + tol * max(1.0, abs(value)):
            a, value = cand[k], float(vals[k])
        else:
            step /= 2.0
            if step < tol:
                break
    return value, signs * a * A, signs * a * C


class PairSearch:
    """
    Search disjoint pairs (x, y) maximizing a batched objective.

    Args:
        space: Domain lattice space (norms the starting indicators)
        objective: Batched objective(X, Y) -> values
        rank_objective: Objective used to rank indicator splits; defaults to `objective`
        sign_proposer: Given a split row, the sign vectors to try (defaults to all-positive)
        atom_pairs: Also evaluate every pair of normalized atoms
    """

    def __init__(self, space: LatticeSpace, objective: Objective, rank_objective: Optional[Objective] = None,
                 sign_proposer: Optional[SignProposer] = None, atom_pairs: bool = True):
        self.space = space
        self.objective = objective
        self.rank_objective = rank_objective or objective
        self.sign_proposer = sign_proposer or (lambda b: [np.ones(b.size)])
        self.atom_pairs = atom_pairs
        self.exhaustive = False

    def run(self, seed: int = 0, restarts: Optional[int] = None) -> Optional[PairCandidate]:
        config = current_config()
        restarts = config.SEARCH_RESTARTS if restarts is None else max(1, int(restarts))
        n = self.space.dim
        ranking = rank_splits(
            self.space, self.rank_objective, seed,
            exhaustive_limit=config.SPLIT_EXHAUSTIVE_LIMIT,
            samples=max(256, 64 * restarts),
        )
        if ranking is None:
            return None
        self.exhaustive = ranking.exhaustive

        top = np.argsort(-ranking.values, kind='stable')[:restarts]
        jobs = []
        for rank, split_idx in enumerate(top):
            b = ranking.splits[split_idx]
            base = np.where(b, 1.0 / self.space.norm(b.astype(float)),
                            1.0 / self.space.norm((~b).astype(float)))
            for signs in self.sign_proposer(b):
                jobs.append((b, signs, base, False))
                jobs.append((b, signs, base, True))

        rngs = spawn_rngs(seed, max(1, len(jobs)))
        max_iters, tol = config.SEARCH_MAX_ITERS, config.SEARCH_TOL

        def refine(job_index):
            b, signs, base, randomized = jobs[job_index]
            start = base * np.exp(0.5 * rngs[job_index].standard_normal(n)) if randomized else base
            return coordinate_ascent(self.objective, b, signs, start, max_iters, tol)

        candidates = []
        for order, (value, x, y) in enumerate(parallel_map(refine, range(len(jobs)))):
            candidates.append(PairCandidate(value, x, y, order))

        if self.atom_pairs:
            candidates.extend(self._atom_pair_candidates(len(candidates)))

        best = None
        for cand in candidates:
            if best is None or cand.value > best.value:
                best = cand
        scale = max(self.space.norm(best.x), self.space.norm(best.y))
        if scale > 0:
            best = PairCandidate(best.value, best.x / scale, best.y / scale, best.order)
        logger.debug(f"Pair search over {n} atoms: {len(jobs)} refinements, best {best.value:.6g}")
        return best

    def _atom_pair_candidates(self, offset: int) -> List[PairCandidate]:
        n = self.space.dim
        atoms = np.eye(n) / self.space.atom_norms()[:, None]
        i, j = np.triu_indices(n, k=1)
        if i.size == 0:
            return []
        vals = self.objective(atoms[i], atoms[j])
        k = int(np.argmax(vals))
        return [PairCandidate(float(vals[k]), atoms[i[k]], atoms[j[k]], offset)]
