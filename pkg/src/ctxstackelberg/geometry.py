"""Best-response regions, their vertices, approximate extreme points and spanners.

Regions are polytopes in the leader simplex cut out by pairwise differences of
follower utilities. Vertices are found by brute-force enumeration of tight
constraint subsets, which is exponential in the number of leader actions and
is only meant for small games (``A <= 8``, ``A_f ** K <= 4096``).
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._validation import ConfigurationError, check_positive
from .game import TIE_TOL, best_response_from_matrix, is_context_free

logger = logging.getLogger(__name__)

GEO_TOL = 1e-9
DEDUPE_TOL = 1e-7
DET_TOL = 1e-12
MAX_LEADER_ACTIONS = 8
MAX_PROFILES = 4096
CAP_EXHAUSTIVE = 20
SWAP_FACTOR = 1 + 1e-6


@dataclass(frozen=True)
class Halfspace:
    """``<normal, x> >= 0`` (or ``> 0`` when ``strict``)."""

    normal: np.ndarray
    strict: bool = False

    def slack(self, x):
        return float(np.dot(self.normal, x))

    def contains(self, x, tol=0.0):
        s = self.slack(x)
        return s > tol if self.strict else s >= -tol


@dataclass
class Region:
    sigma: tuple
    halfspaces: list
    vertices: np.ndarray
    witness: Optional[np.ndarray] = None
    max_slack: float = -np.inf

    @property
    def is_empty(self):
        return self.witness is None


@dataclass
class ExtremePointSet:
    """Finite menu ``E_z(delta)`` with the best-response function of each point.

    ``sources[k]`` is the closure vertex that ``points[k]`` stands in for
    (identical to it unless the vertex fell outside its region).
    """

    context: object
    delta: float
    points: np.ndarray
    sigmas: np.ndarray
    sources: np.ndarray
    regions: list = field(default_factory=list)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(zip(self.points, map(tuple, self.sigmas)))


def _halfspaces_from_matrices(follower_mats, sigma):
    n_types, n_leader, n_follower = follower_mats.shape
    out = []
    for i, a in enumerate(sigma):
        mat = follower_mats[i]
        for b in range(n_follower):
            if b != a:
                out.append(Halfspace(mat[:, a] - mat[:, b], strict=b > a))
    eye = np.eye(n_leader)
    out.extend(Halfspace(eye[j], strict=False) for j in range(n_leader))
    return out


def region_halfspaces(game, z, sigma):
    """Halfspaces of the region where each type ``i`` plays ``sigma[i]`` under ``z``.

    Weak ``>= 0`` constraints against lower-indexed alternatives, strict
    ``> 0`` against higher-indexed ones (ties go to the higher index), plus
    ``x >= 0``. The simplex equality is implicit.
    """
    sigma = tuple(int(a) for a in sigma)
    if len(sigma) != game.n_types or any(not 0 <= a < game.n_follower_actions for a in sigma):
        raise ValueError(f"invalid best-response function {sigma}")
    return _halfspaces_from_matrices(game.follower_matrices(z), sigma)


def _normalized_rows(halfspaces, strict=None):
    rows = []
    for h in halfspaces:
        if strict is not None and h.strict != strict:
            continue
        n = np.asarray(h.normal, dtype=float)
        scale = np.abs(n).sum()
        rows.append(n / scale if scale > 0 else n)
    return np.array(rows).reshape(len(rows), -1)


def _unique_rows(rows):
    if len(rows) == 0:
        return rows
    return np.unique(np.round(rows, 12), axis=0)


def _dedupe(points, tol=DEDUPE_TOL):
    kept = []
    for p in points:
        if not any(np.max(np.abs(p - q)) <= tol for q in kept):
            kept.append(p)
    return kept


def _solve_tight_subsets(ineq, eq_row, eq_rhs, n_tight):
    """Solve every system made of ``n_tight`` inequality rows held tight plus the equality."""
    m, dim = ineq.shape
    if n_tight == 0:
        combos = np.zeros((1, 0), dtype=int)
    elif m < n_tight:
        return np.zeros((0, dim))
    else:
        combos = np.array(list(itertools.combinations(range(m), n_tight)), dtype=int)
    mats = np.empty((len(combos), dim, dim))
    mats[:, :n_tight, :] = ineq[combos]
    mats[:, n_tight, :] = eq_row
    rhs = np.zeros(dim)
    rhs[n_tight] = eq_rhs
    dets = np.linalg.det(mats)
    ok = np.abs(dets) > DET_TOL
    if not ok.any():
        return np.zeros((0, dim))
    return np.linalg.solve(mats[ok], np.broadcast_to(rhs, (ok.sum(), dim))[..., None])[..., 0]


def closure_vertices(halfspaces, tol=GEO_TOL):
    """Vertices of the closed polytope (strict constraints relaxed) inside the simplex.

    Enumerates every subset of ``A - 1`` constraints treated as equalities
    together with ``sum(x) = 1``. Returns an ``(n, A)`` array sorted in
    descending lexicographic order; empty when the polytope is.
    """
    if not halfspaces:
        raise ValueError("need at least the simplex constraints")
    n_leader = len(halfspaces[0].normal)
    if n_leader > MAX_LEADER_ACTIONS:
        raise ConfigurationError(f"vertex enumeration capped at A <= {MAX_LEADER_ACTIONS}")
    rows = _normalized_rows(halfspaces)
    rows = _unique_rows(rows[np.abs(rows).sum(axis=1) > 0])
    sols = _solve_tight_subsets(rows, np.full(n_leader, 1.0 / n_leader), 1.0 / n_leader, n_leader - 1)
    feasible = [s for s in sols if np.all(rows @ s >= -tol)]
    verts = []
    for s in feasible:
        s = np.where(np.abs(s) < tol, 0.0, s)
        s = np.clip(s, 0.0, None)
        verts.append(s / s.sum())
    verts = _dedupe(verts)
    verts.sort(key=lambda v: tuple(-v))
    return np.array(verts).reshape(len(verts), n_leader)


def region_feasibility(halfspaces, vertices, tol=GEO_TOL):
    """Decide whether the (not necessarily closed) region is non-empty.

    Maximizes the smallest strict slack ``t`` (normals scaled to unit L1
    norm) over the closed polytope, via vertex enumeration of the polytope
    lifted to ``(x, t)`` with the extra bound ``t >= -1``. Returns
    ``(witness, t_star)``; ``witness`` is ``None`` when the region is empty.
    Without strict constraints the witness is the vertex barycenter and
    ``t_star`` is ``inf``.
    """
    vertices = np.asarray(vertices, dtype=float)
    if len(vertices) == 0:
        return None, -np.inf
    strict = [h for h in halfspaces if h.strict]
    if not strict:
        return vertices.mean(axis=0), np.inf
    n_leader = vertices.shape[1]
    s_rows = _normalized_rows(strict)
    if np.any(np.abs(s_rows).sum(axis=1) == 0):
        return None, 0.0
    w_rows = _normalized_rows(halfspaces, strict=False)
    w_rows = _unique_rows(w_rows[np.abs(w_rows).sum(axis=1) > 0])
    s_rows = _unique_rows(s_rows)

    lifted = np.vstack([
        np.hstack([w_rows, np.zeros((len(w_rows), 1))]),
        np.hstack([s_rows, -np.ones((len(s_rows), 1))]),
    ])
    # t >= -1 keeps the lifted polyhedron bounded; slacks are >= -1 anyway.
    bound_row = np.zeros(n_leader + 1)
    bound_row[-1] = 1.0
    ineq = np.vstack([lifted, bound_row])
    rhs_ineq = np.zeros(len(ineq))
    rhs_ineq[-1] = -1.0

    eq_row = np.zeros(n_leader + 1)
    eq_row[:n_leader] = 1.0
    m = len(ineq)
    combos = np.array(list(itertools.combinations(range(m), n_leader)), dtype=int)
    mats = np.empty((len(combos), n_leader + 1, n_leader + 1))
    mats[:, :n_leader, :] = ineq[combos]
    mats[:, n_leader, :] = eq_row
    rhs = np.zeros((len(combos), n_leader + 1))
    rhs[:, :n_leader] = rhs_ineq[combos]
    rhs[:, n_leader] = 1.0
    dets = np.linalg.det(mats)
    ok = np.abs(dets) > DET_TOL
    if not ok.any():
        return None, -np.inf
    sols = np.linalg.solve(mats[ok], rhs[ok][..., None])[..., 0]
    feasible = np.all(sols @ ineq.T - rhs_ineq >= -tol, axis=1)
    sols = sols[feasible]
    if len(sols) == 0:
        return None, -np.inf
    t_star = sols[:, -1].max()
    if t_star <= tol:
        return None, float(t_star)
    best = sols[sols[:, -1] >= t_star - 1e-12][:, :n_leader]
    best = sorted(best, key=lambda v: tuple(-v))[0]
    best = np.clip(best, 0.0, None)
    return best / best.sum(), float(t_star)


def _member(follower_mats, x, sigma):
    return all(best_response_from_matrix(m, x) == a for m, a in zip(follower_mats, sigma))


def _profiles_to_check(follower_mats):
    """Per type, the follower actions whose single-type region is non-empty."""
    n_types, _, n_follower = follower_mats.shape
    allowed = []
    for i in range(n_types):
        acts = []
        for a in range(n_follower):
            hs = [h for h in _halfspaces_from_matrices(follower_mats[i:i + 1], (a,))]
            verts = closure_vertices(hs)
            if region_feasibility(hs, verts)[0] is not None:
                acts.append(a)
        allowed.append(acts)
    return allowed


def extreme_points_from_matrices(follower_mats, delta, context=None):
    follower_mats = np.asarray(follower_mats, dtype=float)
    delta = check_positive(delta, "delta")
    n_types, n_leader, n_follower = follower_mats.shape
    if n_leader > MAX_LEADER_ACTIONS:
        raise ConfigurationError(f"vertex enumeration capped at A <= {MAX_LEADER_ACTIONS}")
    if n_follower ** n_types > MAX_PROFILES:
        raise ConfigurationError(f"A_f ** K = {n_follower ** n_types} exceeds cap {MAX_PROFILES}")

    regions, points, sigmas, sources = [], [], [], []
    for sigma in itertools.product(*_profiles_to_check(follower_mats)):
        hs = _halfspaces_from_matrices(follower_mats, sigma)
        verts = closure_vertices(hs)
        witness, t_star = region_feasibility(hs, verts)
        region = Region(sigma, hs, verts, witness, t_star)
        if region.is_empty:
            continue
        regions.append(region)
        for v in verts:
            if _member(follower_mats, v, sigma):
                x = v
            else:
                x = _pull_inside(follower_mats, v, witness, sigma, delta)
                if x is None:
                    continue
            points.append(x)
            sigmas.append(sigma)
            sources.append(v)

    keep = []
    for k, p in enumerate(points):
        if not any(np.max(np.abs(p - points[j])) <= DEDUPE_TOL for j in keep):
            keep.append(k)
    return ExtremePointSet(
        context=context,
        delta=delta,
        points=np.array([points[k] for k in keep]).reshape(len(keep), n_leader),
        sigmas=np.array([sigmas[k] for k in keep], dtype=int).reshape(len(keep), n_types),
        sources=np.array([sources[k] for k in keep]).reshape(len(keep), n_leader),
        regions=regions,
    )


def _pull_inside(follower_mats, vertex, witness, sigma, delta):
    """Move ``vertex`` toward the interior witness by L1 distance ``delta``."""
    dist = np.abs(witness - vertex).sum()
    lam = 1.0 if dist == 0 else min(1.0, delta / dist)
    while True:
        x = (1 - lam) * vertex + lam * witness
        if _member(follower_mats, x, sigma):
            return x
        if lam >= 1.0:
            logger.warning("region %s: witness fails the membership test", sigma)
            return None
        # Float noise below the tie tolerance; step further in.
        logger.warning("region %s: perturbed vertex not a member at lambda=%g", sigma, lam)
        lam = min(1.0, 2 * lam)


def approx_extreme_points(game, z, delta):
    """``E_z(delta)``: one member of each non-empty region per closure vertex."""
    return extreme_points_from_matrices(game.follower_matrices(z), delta, context=z)


class ExtremePointCache:
    """Memoizes ``E_z(delta)`` by the follower utilities it depends on."""

    def __init__(self, game, delta):
        self.game = game
        self.delta = check_positive(delta, "delta")
        self._by_context = {}
        self._by_matrices = {}

    def __call__(self, z):
        hit = self._by_context.get(z.key)
        if hit is not None:
            return hit
        mats = self.game.follower_matrices(z)
        mkey = mats.tobytes()
        eps = self._by_matrices.get(mkey)
        if eps is None:
            eps = extreme_points_from_matrices(mats, self.delta, context=z)
            self._by_matrices[mkey] = eps
        self._by_context[z.key] = eps
        return eps


def check_context_free_followers(game):
    probes = game.context_space.probes()
    for i, model in enumerate(game.follower_utilities):
        if not is_context_free(model, probes):
            raise ConfigurationError(
                f"follower type {i} utility depends on the context; bandit feedback "
                "requires context-free follower utilities (declare 'context_free' or use one table)")
    return probes[0]


def indicator_set(game, extreme_points):
    """Distinct vectors ``1{sigma(i) = a_f}`` over E and follower actions, with realizers.

    Returns a list of ``(bits, x, a_f)`` in first-seen order.
    """
    check_context_free_followers(game)
    seen = {}
    for x, sigma in extreme_points:
        for a in range(game.n_follower_actions):
            bits = tuple(int(s == a) for s in sigma)
            if bits not in seen:
                seen[bits] = (bits, np.array(x), a)
    return list(seen.values())


@dataclass
class Spanner:
    """Basis of span(W) with bounded reconstruction coefficients."""

    vectors: np.ndarray
    realizers: np.ndarray
    actions: tuple
    exhaustive: bool = True
    bound: float = 1.0

    @property
    def rank(self):
        return len(self.vectors)

    def coefficients(self, w):
        w = np.asarray(w, dtype=float)
        if self.rank == 0:
            return np.zeros(0)
        lam, *_ = np.linalg.lstsq(self.vectors.T, w, rcond=None)
        return lam


def barycentric_spanner(indicators, cap_exhaustive=CAP_EXHAUSTIVE, swap_factor=SWAP_FACTOR):
    """Pick ``r = rank(W)`` elements of W maximizing the spanned volume.

    Exhaustive over all r-subsets when ``|W| <= cap_exhaustive`` (then every
    coefficient lies in [-1, 1] by Cramer's rule), otherwise the iterative
    swap scheme: replace a basis element whenever that grows ``|det|`` by
    more than ``swap_factor``.
    """
    if len(indicators) == 0:
        raise ValueError("indicator set is empty")
    vecs = np.array([b for b, _, _ in indicators], dtype=float)
    n, k = vecs.shape
    rank = np.linalg.matrix_rank(vecs)
    if rank == 0:
        return Spanner(np.zeros((0, k)), np.zeros((0, len(indicators[0][1]))), ())
    _, _, vt = np.linalg.svd(vecs)
    coords = vecs @ vt[:rank].T

    if n <= cap_exhaustive:
        combos = np.array(list(itertools.combinations(range(n), rank)), dtype=int)
        dets = np.abs(np.linalg.det(coords[combos]))
        best = int(np.flatnonzero(dets >= dets.max() * (1 - 1e-12))[0])
        chosen, exhaustive, bound = list(combos[best]), True, 1.0
    else:
        chosen, exhaustive, bound = _swap_spanner(coords, rank, swap_factor), False, swap_factor
    return Spanner(
        vectors=vecs[chosen],
        realizers=np.array([indicators[j][1] for j in chosen]),
        actions=tuple(int(indicators[j][2]) for j in chosen),
        exhaustive=exhaustive,
        bound=bound,
    )


def _swap_spanner(coords, rank, factor):
    chosen = []
    resid = coords.copy()
    for _ in range(rank):
        j = int(np.argmax(np.linalg.norm(resid, axis=1)))
        chosen.append(j)
        d = resid[j] / np.linalg.norm(resid[j])
        resid = resid - np.outer(resid @ d, d)
    current = abs(np.linalg.det(coords[chosen]))
    improved = True
    while improved:
        improved = False
        for pos in range(rank):
            for cand in range(len(coords)):
                if cand in chosen:
                    continue
                trial = list(chosen)
                trial[pos] = cand
                d = abs(np.linalg.det(coords[trial]))
                if d > factor * current:
                    chosen, current, improved = trial, d, True
    return chosen


def region_report(game, z, delta):
    """Structured per-context dump of regions and ``E_z`` for debugging."""
    eps = approx_extreme_points(game, z, delta)
    regions = []
    for reg in eps.regions:
        regions.append({
            "sigma": list(reg.sigma),
            "halfspaces": [{"normal": [float(v) for v in h.normal], "strict": h.strict}
                           for h in reg.halfspaces],
            "vertices": [[float(v) for v in p] for p in reg.vertices],
            "witness": [float(v) for v in reg.witness],
            "max_strict_slack": None if np.isinf(reg.max_slack) else float(reg.max_slack),
        })
    return {
        "context": {"label": z.label, "vector": list(z.vector)},
        "delta": delta,
        "tie_tolerance": TIE_TOL,
        "regions": regions,
        "extreme_points": [
            {"x": [float(v) for v in x], "sigma": [int(s) for s in sig],
             "source_vertex": [float(v) for v in src]}
            for x, sig, src in zip(eps.points, eps.sigmas, eps.sources)
        ],
    }
