"""Exact closed-path combinatorics behind trace moments.

A closed path ``i_0 -> i_1 -> ... -> i_{2s-1} -> i_0`` on the vertices
``1..n`` indexes one term of ``Tr A^{2s}``.  Its expectation is the product
over distinct unordered edges of ``E[a^mult]``, so exact moments and variances
are finite sums.  Two independent routes are provided:

* brute force over all ``n**(2s)`` vertex sequences, and
* a sum over vertex *patterns* (restricted growth strings) weighted by the
  number of injective labelings ``n (n-1) ... (n-k+1)``.

The second half of the module implements the gluing of a correlated pair of
paths into a single path of length ``4s-2``, the reconstruction of its
preimages, the three-fold augmentation of the joint edge, and the marked
moment statistic on Dyck paths.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, TextIO

import numpy as np

from .ensemble import EntryDistribution, moment_of

__all__ = [
    "ENUMERATION_BUDGET",
    "BudgetExceededError",
    "ClosedPath",
    "PathPair",
    "PathStatistics",
    "DyckProfile",
    "GlueResult",
    "GlueAudit",
    "edge_multiplicities",
    "enumerate_closed_paths",
    "path_expectation",
    "exact_trace_moment",
    "exact_variance",
    "classify_pair",
    "glue",
    "glue_details",
    "preimages",
    "augment_glued",
    "path_statistics",
    "audit_gluing",
    "audit_augmentation",
    "catalan",
    "enumerate_dyck_paths",
    "sample_dyck_path",
    "marked_moment_count",
    "mean_marked_moments",
    "write_paths",
    "read_paths",
    "write_statistics_csv",
]

#: Hard cap on the number of items any exhaustive scan may visit.
ENUMERATION_BUDGET = 10**8

Edge = tuple[int, int]


class BudgetExceededError(RuntimeError):
    """An exhaustive enumeration would exceed its budget."""

    def __init__(self, required: int, budget: int):
        super().__init__(f"enumeration needs {required} items, budget is {budget}")
        self.required = required
        self.budget = budget


def _check_budget(required: int, budget: int) -> None:
    if required > budget:
        raise BudgetExceededError(required, budget)


def _edge(a: int, b: int) -> Edge:
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class ClosedPath:
    """Cyclic vertex sequence ``i_0, ..., i_{L-1}`` (closing step back to ``i_0`` implied)."""

    vertices: tuple[int, ...]
    n: int

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(int(v) for v in self.vertices))
        length = len(self.vertices)
        if length < 2 or length % 2:
            raise ValueError(f"closed path length must be even and >= 2, got {length}")
        if any(v < 1 or v > self.n for v in self.vertices):
            raise ValueError(f"vertex labels must lie in [1, {self.n}]: {self.vertices}")

    def __len__(self) -> int:
        return len(self.vertices)

    def __str__(self) -> str:
        return " ".join(map(str, self.vertices))

    @property
    def steps(self) -> list[tuple[int, int]]:
        """Directed steps ``(i_k, i_{k+1})`` including the closing one."""
        v = self.vertices
        return [(v[k], v[(k + 1) % len(v)]) for k in range(len(v))]

    @property
    def edges(self) -> Counter:
        """Multiplicity of each unordered edge (loops allowed)."""
        return edge_multiplicities(self.vertices)


def edge_multiplicities(vertices: Iterable[int]) -> Counter:
    v = tuple(vertices)
    return Counter(_edge(v[k], v[(k + 1) % len(v)]) for k in range(len(v)))


@dataclass(frozen=True)
class PathPair:
    """Ordered pair of equal-length closed paths with its correlation data.

    ``joint_edge`` is the first edge along ``p1`` that also belongs to ``p2``
    and ``joint_position`` the index of the step of ``p1`` traversing it.
    """

    p1: ClosedPath
    p2: ClosedPath
    correlated: bool
    joint_edge: Edge | None = None
    joint_position: int | None = None


@dataclass(frozen=True)
class PathStatistics:
    odd_edge_count: int
    max_vertex_multiplicity: int
    single_edge_count: int
    is_even_path: bool


@dataclass(frozen=True)
class DyckProfile:
    """Walk ``x(0..L)`` with ``x(0) = 0``, unit steps and ``x >= 0``; ``window`` is the marking span."""

    trajectory: tuple[int, ...]
    window: int

    def __post_init__(self):
        x = np.asarray(self.trajectory)
        object.__setattr__(self, "trajectory", tuple(int(t) for t in x))
        if x.size == 0 or x[0] != 0:
            raise ValueError("trajectory must start at 0")
        if np.any(np.abs(np.diff(x)) != 1):
            raise ValueError("trajectory steps must be +-1")
        if np.any(x < 0):
            raise ValueError("trajectory must stay non-negative")
        if self.window < 0:
            raise ValueError("window must be non-negative")


# ---------------------------------------------------------------------------
# enumeration and exact moments


def enumerate_closed_paths(n: int, two_s: int, budget: int = ENUMERATION_BUDGET) -> Iterator[ClosedPath]:
    """Yield all ``n**two_s`` closed paths in lexicographic order."""
    if n < 1 or two_s < 2 or two_s % 2:
        raise ValueError("need n >= 1 and an even length >= 2")
    _check_budget(n**two_s, budget)
    for seq in itertools.product(range(1, n + 1), repeat=two_s):
        yield ClosedPath(seq, n)


def _expectation_of_counts(mults: Iterable[int], d: EntryDistribution) -> float:
    value = 1.0
    for k in mults:
        if k == 1:
            return 0.0
        value *= moment_of(d, k)
    return value


def path_expectation(p: ClosedPath, d: EntryDistribution) -> float:
    """``E prod a_{i_k i_{k+1}}`` without the ``1/sqrt(n)`` scaling."""
    return _expectation_of_counts(p.edges.values(), d)


def _restricted_growth_strings(length: int) -> Iterator[tuple[int, ...]]:
    # canonical vertex patterns: first occurrences appear in order 0, 1, 2, ...
    seq = [0] * length

    def rec(pos: int, top: int):
        if pos == length:
            yield tuple(seq)
            return
        for lab in range(top + 2):
            seq[pos] = lab
            yield from rec(pos + 1, max(top, lab))

    if length:
        yield from rec(1, 0)


def _bell(m: int) -> int:
    row = [1]
    for _ in range(m):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


def _falling(n: int, k: int) -> int:
    return math.perm(n, k) if k <= n else 0


def exact_trace_moment(
    n: int, s: int, d: EntryDistribution, method: str = "patterns", budget: int = ENUMERATION_BUDGET
) -> float:
    """``E Tr A_n^{2s}`` as an exact path sum.

    ``method="enumerate"`` visits every vertex sequence; ``"patterns"`` sums
    over vertex patterns times their labeling counts.
    """
    if n < 1 or s < 1:
        raise ValueError("need n >= 1 and s >= 1")
    if method == "enumerate":
        total = math.fsum(path_expectation(p, d) for p in enumerate_closed_paths(n, 2 * s, budget))
    elif method == "patterns":
        _check_budget(_bell(2 * s), budget)
        terms = []
        for pat in _restricted_growth_strings(2 * s):
            k = max(pat) + 1
            weight = _falling(n, k)
            if weight:
                terms.append(weight * _expectation_of_counts(edge_multiplicities(pat).values(), d))
        total = math.fsum(terms)
    else:
        raise ValueError(f"unknown method {method!r}")
    return total / n**s


def _pair_term(e1: Counter, e2: Counter, d: EntryDistribution, restricted: bool) -> float:
    shared = e1.keys() & e2.keys()
    if restricted and not shared:
        return 0.0
    union = e1 + e2
    if restricted and min(union.values()) < 2:
        return 0.0
    joint = _expectation_of_counts(union.values(), d)
    return joint - _expectation_of_counts(e1.values(), d) * _expectation_of_counts(e2.values(), d)


def exact_variance(
    n: int,
    s: int,
    d: EntryDistribution,
    restricted: bool = False,
    method: str = "enumerate",
    budget: int = ENUMERATION_BUDGET,
) -> float:
    """``Var Tr A_n^{2s}`` as an exact sum over ordered pairs of closed paths.

    With ``restricted=True`` only correlated pairs (a shared edge, and every
    edge of the union traversed at least twice) are summed; all other terms
    vanish identically, so both sums agree.
    """
    if n < 1 or s < 1:
        raise ValueError("need n >= 1 and s >= 1")
    two_s = 2 * s
    if method == "enumerate":
        _check_budget(n ** (2 * two_s), budget)
        counts = [edge_multiplicities(seq) for seq in itertools.product(range(1, n + 1), repeat=two_s)]
        terms = [_pair_term(e1, e2, d, restricted) for e1 in counts for e2 in counts]
    elif method == "patterns":
        _check_budget(_bell(2 * two_s), budget)
        terms = []
        for pat in _restricted_growth_strings(2 * two_s):
            weight = _falling(n, max(pat) + 1)
            if weight:
                e1 = edge_multiplicities(pat[:two_s])
                e2 = edge_multiplicities(pat[two_s:])
                terms.append(weight * _pair_term(e1, e2, d, restricted))
    else:
        raise ValueError(f"unknown method {method!r}")
    return math.fsum(terms) / n**two_s


# ---------------------------------------------------------------------------
# correlated pairs and gluing


def classify_pair(p1: ClosedPath, p2: ClosedPath) -> PathPair:
    """Decide correlation and locate the joint edge of ``(p1, p2)``."""
    if len(p1) != len(p2):
        raise ValueError("paths of a pair must have equal length")
    e1, e2 = p1.edges, p2.edges
    joint_edge = joint_position = None
    for k, (a, b) in enumerate(p1.steps):
        if _edge(a, b) in e2:
            joint_edge, joint_position = _edge(a, b), k
            break
    correlated = joint_edge is not None and min((e1 + e2).values()) >= 2
    return PathPair(p1, p2, correlated, joint_edge, joint_position)


class GlueResult(NamedTuple):
    """Glued path plus the times where it leaves and re-enters ``p1``."""

    path: ClosedPath
    switch_time: int
    return_time: int
    joint_edge: Edge
    reversed_p2: bool


def glue_details(pair: PathPair) -> GlueResult:
    """Merge a correlated pair into one closed path of length ``4s - 2``.

    Walk ``p1`` up to the first traversal ``u -> v`` of the joint edge, then
    make the ``2s - 1`` non-joint steps of ``p2`` from ``u`` to ``v`` (along
    ``p2`` if it crosses the joint edge as ``v -> u``, against it otherwise),
    then finish ``p1``.  The joint edge anchors on its first traversal in
    ``p2``.
    """
    if not pair.correlated:
        raise ValueError("gluing requires a correlated pair")
    p1, p2 = pair.p1.vertices, pair.p2.vertices
    two_s = len(p1)
    k = pair.joint_position
    u, v = p1[k], p1[(k + 1) % two_s]
    l = next(i for i, step in enumerate(pair.p2.steps) if _edge(*step) == pair.joint_edge)
    same_direction = p2[l] == u and p2[(l + 1) % two_s] == v
    if same_direction:
        walk = [p2[(l - i) % two_s] for i in range(two_s)]
    else:
        walk = [p2[(l + 1 + i) % two_s] for i in range(two_s)]
    closed = list(p1[: k + 1]) + walk[1:] + [p1[(j) % two_s] for j in range(k + 2, two_s + 1)]
    # closed ends at the start of p1; drop the repeated endpoint
    path = ClosedPath(tuple(closed[:-1]), pair.p1.n)
    return GlueResult(path, k, k + two_s - 1, pair.joint_edge, same_direction)


def glue(pair: PathPair) -> ClosedPath:
    """The glued path ``P1 v P2`` (see :func:`glue_details`)."""
    return glue_details(pair).path


def preimages(glued: ClosedPath, s: int, universe: int) -> list[PathPair]:
    """All correlated pairs of length ``2s`` on ``universe`` vertices gluing to ``glued``.

    The switch time ``t`` determines ``p1`` and the arc of ``p2``; the origin
    and orientation of ``p2`` add ``4s`` choices, so at most ``8 s**2``
    candidates are examined and each is verified by re-gluing.
    """
    two_s = 2 * s
    if len(glued) != 2 * two_s - 2:
        return []
    g = list(glued.vertices) + [glued.vertices[0]]
    found: dict[tuple, PathPair] = {}
    for t in range(two_s):
        p1_closed = g[: t + 1] + g[t + two_s - 1 :]
        arc = g[t : t + two_s]
        try:
            p1 = ClosedPath(tuple(p1_closed[:-1]), universe)
        except ValueError:
            continue
        for cycle in (arc, arc[::-1]):
            for r in range(two_s):
                p2 = ClosedPath(tuple(cycle[r:] + cycle[:r]), universe)
                pair = classify_pair(p1, p2)
                if pair.correlated and glue(pair).vertices == glued.vertices:
                    found.setdefault((p1.vertices, p2.vertices), pair)
    return list(found.values())


def augment_glued(glued: ClosedPath, joint: Edge, t: int) -> ClosedPath:
    """Insert two successive traversals of ``joint`` at the switch-back time ``t``.

    ``glued`` must contain exactly one edge of multiplicity one, equal to
    ``joint``, traversed before time ``t``; the result has length ``4s`` and
    the joint edge three times, the last two in succession.
    """
    joint = _edge(*joint)
    mults = glued.edges
    singles = [e for e, c in mults.items() if c == 1]
    if singles != [joint]:
        raise ValueError(f"glued path must have exactly one single edge equal to {joint}, has {singles}")
    closed = glued.vertices + glued.vertices[:1]
    if not 0 <= t <= len(glued) or closed[t] not in joint:
        raise ValueError(f"time {t} is not at an endpoint of the joint edge")
    occurrence = next(k for k, step in enumerate(glued.steps) if _edge(*step) == joint)
    if occurrence >= t:
        raise ValueError("the existing joint-edge traversal must precede the insertion time")
    here = closed[t]
    other = joint[1] if joint[0] == here else joint[0]
    # t == len(glued) inserts at the closing vertex
    augmented = closed[: t + 1] + (other, here) + closed[t + 1 :]
    return ClosedPath(augmented[:-1], glued.n)


def path_statistics(p: ClosedPath) -> PathStatistics:
    """Odd-edge count, max vertex multiplicity, single-edge count, evenness."""
    mults = p.edges.values()
    odd = sum(1 for c in mults if c % 2)
    single = sum(1 for c in mults if c == 1)
    nu = max(Counter(p.vertices).values())
    return PathStatistics(odd, nu, single, odd == 0)


@dataclass
class GlueAudit:
    """Outcome of an exhaustive check of the gluing map on ``n`` vertices."""

    n: int
    s: int
    pairs: int = 0
    correlated_pairs: int = 0
    distinct_glued: int = 0
    max_preimages: int = 0
    preimage_bound: int = 0
    case1_pairs: int = 0
    augmented: int = 0
    violations: Counter = field(default_factory=Counter)

    @property
    def violation_count(self) -> int:
        return sum(self.violations.values())


def audit_gluing(n: int, s: int, check_preimages: bool = True, budget: int = ENUMERATION_BUDGET) -> GlueAudit:
    """Check every correlated pair of length ``2s`` on ``n`` vertices.

    Checked per pair: the glued path is closed, has length ``4s - 2``, its
    edge multiplicities equal the union's minus two on the joint edge, and
    the pair is among the reconstructed preimages.  Per glued path: the
    reconstructed preimages coincide with the exhaustive fibre and number at
    most ``8 s**2`` (skipped when ``check_preimages`` is false).  Pairs whose
    joint edge survives once in the glued path (``case1_pairs``) and is
    traversed once in ``p1`` are augmented and checked for length ``4s`` and
    a joint multiplicity of three with the last two traversals adjacent; the
    mirror case (twice in ``p1``) is counted but not augmented.
    """
    two_s = 2 * s
    _check_budget(n ** (2 * two_s), budget)
    audit = GlueAudit(n=n, s=s, preimage_bound=8 * s * s)
    paths = list(enumerate_closed_paths(n, two_s, budget))
    fibres: dict[tuple[int, ...], set] = defaultdict(set)
    for p1 in paths:
        for p2 in paths:
            audit.pairs += 1
            pair = classify_pair(p1, p2)
            if not pair.correlated:
                continue
            audit.correlated_pairs += 1
            res = glue_details(pair)
            out = res.path
            fibres[out.vertices].add((p1.vertices, p2.vertices))
            if len(out) != 2 * two_s - 2:
                audit.violations["length"] += 1
            if out.vertices[0] != p1.vertices[0]:
                audit.violations["start"] += 1
            expected = p1.edges + p2.edges
            expected[pair.joint_edge] -= 2
            expected = +expected
            if out.edges != expected:
                audit.violations["multiplicity_drop"] += 1
            if out.edges.get(pair.joint_edge, 0) == 1:
                audit.case1_pairs += 1
                if p1.edges[pair.joint_edge] == 1:
                    p3 = augment_glued(out, pair.joint_edge, res.return_time)
                    audit.augmented += 1
                    _check_augmented(p3, pair.joint_edge, 2 * two_s, audit.violations)
    audit.distinct_glued = len(fibres)
    for glued_vertices, fibre in fibres.items():
        if not check_preimages:
            audit.max_preimages = max(audit.max_preimages, len(fibre))
            continue
        recon = {(pp.p1.vertices, pp.p2.vertices) for pp in preimages(ClosedPath(glued_vertices, n), s, n)}
        if recon != fibre:
            audit.violations["preimage_mismatch"] += 1
        audit.max_preimages = max(audit.max_preimages, len(fibre))
    if audit.max_preimages > audit.preimage_bound:
        audit.violations["preimage_bound"] += 1
    return audit


def _check_augmented(p3: ClosedPath, joint: Edge, length: int, violations: Counter) -> None:
    occ = [k for k, st in enumerate(p3.steps) if _edge(*st) == joint]
    if len(p3) != length:
        violations["augment_length"] += 1
    if len(occ) != 3 or occ[2] != occ[1] + 1:
        violations["augment_joint"] += 1


def audit_augmentation(n: int, s: int, budget: int = ENUMERATION_BUDGET) -> tuple[int, Counter]:
    """Augment every length ``4s - 2`` path on ``n`` vertices with exactly one single edge.

    Every admissible insertion time (an endpoint of the single edge, after
    its traversal) is tried.  Returns the number of augmentations and the
    violation counter.
    """
    violations: Counter = Counter()
    done = 0
    for g in enumerate_closed_paths(n, 4 * s - 2, budget):
        singles = [e for e, c in g.edges.items() if c == 1]
        if len(singles) != 1:
            continue
        joint = singles[0]
        first = next(k for k, st in enumerate(g.steps) if _edge(*st) == joint)
        closed = g.vertices + g.vertices[:1]
        for t in range(first + 1, len(g) + 1):
            if closed[t] not in joint:
                continue
            p3 = augment_glued(g, joint, t)
            done += 1
            _check_augmented(p3, joint, 4 * s, violations)
    return done, violations


# ---------------------------------------------------------------------------
# Dyck paths


def catalan(s: int) -> int:
    return math.comb(2 * s, s) // (s + 1)


def enumerate_dyck_paths(s: int) -> Iterator[tuple[int, ...]]:
    """All Dyck trajectories ``x(0..2s)`` of semilength ``s``."""

    def rec(x: list[int], ups: int):
        t = len(x) - 1
        if t == 2 * s:
            yield tuple(x)
            return
        if ups < s:
            yield from rec(x + [x[-1] + 1], ups + 1)
        if x[-1] > 0:
            yield from rec(x + [x[-1] - 1], ups)

    yield from rec([0], 0)


def sample_dyck_path(s: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform Dyck trajectory of semilength ``s`` via the cycle lemma.

    A uniform arrangement of ``s`` up-steps and ``s + 1`` down-steps has
    exactly one rotation whose partial sums stay non-negative until the
    last step; dropping that final down-step leaves a uniform Dyck path.
    """
    steps = np.concatenate([np.ones(s, dtype=np.int64), -np.ones(s + 1, dtype=np.int64)])
    rng.shuffle(steps)
    walk = np.concatenate([[0], np.cumsum(steps)])
    start = int(np.argmin(walk[:-1]))
    rotated = np.roll(steps, -start)[:-1]
    return np.concatenate([[0], np.cumsum(rotated)])


def _marked_mask(x: np.ndarray, window: int) -> np.ndarray:
    from scipy.ndimage import minimum_filter1d

    length = x.size
    # forward window min over [t, t+window], truncated at the end of the walk
    padded = np.concatenate([x, np.full(window, x.max() + 1)])
    fwd = minimum_filter1d(padded[::-1], size=window + 1, origin=window // 2, mode="nearest")[::-1]
    return fwd[:length] >= x


def marked_moment_count(profile: DyckProfile) -> int:
    """Number of times ``t`` after which the walk stays at or above ``x(t)`` for ``window`` steps."""
    x = np.asarray(profile.trajectory, dtype=np.int64)
    return int(np.count_nonzero(_marked_mask(x, profile.window)))


def mean_marked_moments(s_values: Iterable[int], samples: int, seed: int) -> list[tuple[int, float, float]]:
    """Mean marked-moment count on uniform Dyck paths of semilength ``2s``, window ``2s``.

    Returns ``(s, mean, stderr)`` per ``s``; the path for ``(s, k)`` is drawn
    from a generator seeded by ``(seed, s, k)``.
    """
    from .seeding import derive_seed

    rows = []
    for s in s_values:
        counts = np.empty(samples)
        for k in range(samples):
            rng = np.random.default_rng(derive_seed(seed, s, k))
            x = sample_dyck_path(2 * s, rng)
            counts[k] = np.count_nonzero(_marked_mask(x, 2 * s))
        stderr = counts.std(ddof=1) / math.sqrt(samples) if samples > 1 else float("nan")
        rows.append((int(s), float(counts.mean()), float(stderr)))
    return rows


# ---------------------------------------------------------------------------
# serialisation


def write_paths(paths: Iterable[ClosedPath], fh: TextIO) -> None:
    for p in paths:
        fh.write(f"{p}\n")


def read_paths(fh: TextIO, n: int) -> list[ClosedPath]:
    out = []
    for lineno, line in enumerate(fh, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            out.append(ClosedPath(tuple(int(tok) for tok in line.split()), n))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return out


def write_statistics_csv(paths: Iterable[ClosedPath], fh: TextIO) -> None:
    import csv

    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["path", "length", "odd_edge_count", "max_vertex_multiplicity", "single_edge_count", "is_even_path"])
    for p in paths:
        st = path_statistics(p)
        w.writerow([str(p), len(p), st.odd_edge_count, st.max_vertex_multiplicity, st.single_edge_count, int(st.is_even_path)])
