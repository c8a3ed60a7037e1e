"""Binary mask to ordered midline: thinning, branch pruning, ordering, scaling.

Pixel coordinates are (x, y) = (column, row); a mask's ``pitch`` converts
pixels to meters. The pipeline per frame is: fixture exclusion -> thinning ->
skeleton graph -> branch pruning / endpoint merge -> ordered, scaled midline.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AmbiguousTopologyError,
    EmptyMaskError,
    EmptySequenceError,
    InvalidArgumentError,
    MaskPipelineError,
    SoftwhipError,
)
from .kinematics import MidlineSequence
from .midline import Midline

BASE_HINTS = ("top", "bottom", "left", "right")


@dataclass(frozen=True)
class BinaryMask:
    """Row-major boolean grid plus meters-per-pixel scale."""

    bits: np.ndarray  # (height, width) bool
    pitch: float      # meters per pixel

    def __post_init__(self):
        bits = np.ascontiguousarray(np.asarray(self.bits, dtype=bool))
        if bits.ndim != 2 or bits.shape[0] < 3 or bits.shape[1] < 3:
            raise InvalidArgumentError("mask must be a 2-d grid of at least 3x3 pixels")
        if not self.pitch > 0.0:
            raise InvalidArgumentError("pitch must be positive")
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "pitch", float(self.pitch))

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    def foreground_count(self) -> int:
        return int(self.bits.sum())


@dataclass
class SkeletonGraph:
    """8-connected pixel graph of a thinned mask.

    Diagonal edges that are redundant (the two pixels also connect through a
    shared orthogonal pixel) are dropped, so path degrees are honest: the
    endpoints are exactly the degree<=1 nodes and branch points the degree>=3
    nodes, without diagonal double-counting at corners and junctions.
    """

    nodes: np.ndarray                    # (k, 2) int, (x, y), row-major pixel order
    adjacency: list[list[int]]           # sorted neighbor ids per node
    degrees: np.ndarray                  # (k,)
    endpoints: list[int] = field(default_factory=list)
    branch_points: list[int] = field(default_factory=list)
    shape: tuple[int, int] = (0, 0)      # (height, width)


def apply_exclusion(mask: BinaryMask, fixture: BinaryMask) -> BinaryMask:
    """Remove fixture foreground from the mask (set difference)."""
    if mask.bits.shape != fixture.bits.shape:
        raise InvalidArgumentError(
            f"mask {mask.bits.shape} and fixture {fixture.bits.shape} dimensions differ")
    return BinaryMask(mask.bits & ~fixture.bits, mask.pitch)


# ---------------------------------------------------------------------------
# thinning
# ---------------------------------------------------------------------------
# Zhang-Suen two-subiteration thinning with parallel deletion, iterated to a
# fixed point (so the result is idempotent by construction). The one known
# annihilation case of the parallel scheme -- a component whose every pixel
# satisfies the deletion conditions at once (isolated 2x2 blocks) -- is
# guarded by retaining one pixel of any component fully contained in the
# deletion set, which keeps the component count intact.

def _ring(g: np.ndarray, r: int, c: int) -> tuple:
    # neighbors in circular order N, NE, E, SE, S, SW, W, NW (padded coords)
    return (g[r - 1, c], g[r - 1, c + 1], g[r, c + 1], g[r + 1, c + 1],
            g[r + 1, c], g[r + 1, c - 1], g[r, c - 1], g[r - 1, c - 1])


def _transitions(ring: tuple) -> int:
    t = 0
    for i in range(8):
        if ring[i] == 0 and ring[(i + 1) % 8] == 1:
            t += 1
    return t


def _candidate_grid(g: np.ndarray, sub: int) -> np.ndarray:
    p2 = g[:-2, 1:-1]
    p3 = g[:-2, 2:]
    p4 = g[1:-1, 2:]
    p5 = g[2:, 2:]
    p6 = g[2:, 1:-1]
    p7 = g[2:, :-2]
    p8 = g[1:-1, :-2]
    p9 = g[:-2, :-2]
    ring = (p2, p3, p4, p5, p6, p7, p8, p9)
    b = sum(int(0) + p for p in ring)
    a = np.zeros_like(b)
    for i in range(8):
        a += (ring[i] == 0) & (ring[(i + 1) % 8] == 1)
    cand = (g[1:-1, 1:-1] == 1) & (b >= 2) & (b <= 6) & (a == 1)
    if sub == 0:
        cand &= (p2 * p4 * p6 == 0) & (p4 * p6 * p8 == 0)
    else:
        cand &= (p2 * p4 * p8 == 0) & (p2 * p6 * p8 == 0)
    return cand


def _protect_survivors(bits: np.ndarray, cand: np.ndarray) -> None:
    """Unmark one candidate per component that would otherwise vanish."""
    if not cand.any():
        return
    survivors = bits & ~cand
    seen = np.zeros_like(bits)
    h, w = bits.shape
    for r0, c0 in np.argwhere(cand):
        if seen[r0, c0]:
            continue
        stack = [(int(r0), int(c0))]
        seen[r0, c0] = True
        comp = []
        alive = False
        while stack:
            r, c = stack.pop()
            comp.append((r, c))
            for dr, dc in _OFFSETS:
                rr, cc = r + dr, c + dc
                if 0 <= rr < h and 0 <= cc < w and bits[rr, cc] and not seen[rr, cc]:
                    seen[rr, cc] = True
                    if survivors[rr, cc]:
                        alive = True
                    stack.append((rr, cc))
        if not alive:
            cand[min(comp)] = False


def thin(mask: BinaryMask) -> BinaryMask:
    """Reduce the mask to a unit-width 8-connected skeleton (a fixed point)."""
    if mask.foreground_count() == 0:
        raise EmptyMaskError("cannot thin a mask with no foreground")
    h, w = mask.bits.shape
    g = np.zeros((h + 2, w + 2), dtype=np.uint8)
    g[1:-1, 1:-1] = mask.bits
    while True:
        removed = 0
        for sub in (0, 1):
            cand = _candidate_grid(g, sub)
            _protect_survivors(g[1:-1, 1:-1] == 1, cand)
            n = int(cand.sum())
            if n:
                g[1:-1, 1:-1][cand] = 0
                removed += n
        if removed == 0:
            break
    return BinaryMask(g[1:-1, 1:-1].astype(bool), mask.pitch)


# ---------------------------------------------------------------------------
# skeleton graph
# ---------------------------------------------------------------------------

_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))


def build_graph(skeleton: BinaryMask) -> SkeletonGraph:
    """8-adjacency graph over the skeleton's foreground pixels.

    A diagonal adjacency is skipped when either orthogonal pixel bridging the
    pair is foreground; the path then runs through the bridge pixel instead of
    cutting the corner.
    """
    bits = skeleton.bits
    h, w = bits.shape
    coords = np.argwhere(bits)  # (r, c), row-major
    ids = {(int(r), int(c)): i for i, (r, c) in enumerate(coords)}

    def fg(r, c):
        return 0 <= r < h and 0 <= c < w and bits[r, c]

    k = coords.shape[0]
    adjacency: list[list[int]] = [[] for _ in range(k)]
    for i, (r, c) in enumerate(coords):
        r, c = int(r), int(c)
        for dr, dc in _OFFSETS:
            j = ids.get((r + dr, c + dc))
            if j is None:
                continue
            if dr != 0 and dc != 0 and (fg(r, c + dc) or fg(r + dr, c)):
                continue  # redundant diagonal across a corner
            adjacency[i].append(j)
    for nbrs in adjacency:
        nbrs.sort()
    degrees = np.array([len(nbrs) for nbrs in adjacency], dtype=int)
    nodes = np.column_stack([coords[:, 1], coords[:, 0]]).astype(int)  # (x, y)
    return SkeletonGraph(
        nodes=nodes,
        adjacency=adjacency,
        degrees=degrees,
        endpoints=[i for i in range(k) if degrees[i] <= 1],
        branch_points=[i for i in range(k) if degrees[i] >= 3],
        shape=(h, w),
    )


def _fragments(graph: SkeletonGraph, removed: set[int]) -> list[list[int]]:
    """Connected components (sorted id lists) after dropping ``removed``."""
    seen = set(removed)
    comps = []
    for start in range(len(graph.adjacency)):
        if start in seen:
            continue
        comp = []
        stack = [start]
        seen.add(start)
        while stack:
            u = stack.pop()
            comp.append(u)
            for v in graph.adjacency[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        comps.append(sorted(comp))
    return comps


def _walk_from(graph: SkeletonGraph, frag: list[int], start: int) -> list[int]:
    """Order a degree<=2 fragment from one of its ends."""
    frag_set = set(frag)
    path = [start]
    prev = -1
    cur = start
    while True:
        nxt = [v for v in graph.adjacency[cur] if v in frag_set and v != prev]
        if not nxt:
            break
        if len(nxt) > 1:
            raise AmbiguousTopologyError("fragment is not a simple path")
        prev, cur = cur, nxt[0]
        path.append(cur)
    if len(path) != len(frag):
        raise AmbiguousTopologyError("fragment contains a cycle")
    return path


def _fragment_end(graph: SkeletonGraph, frag: list[int]) -> int:
    frag_set = set(frag)
    ends = [u for u in frag if sum(v in frag_set for v in graph.adjacency[u]) <= 1]
    if not ends:
        raise AmbiguousTopologyError("fragment contains a cycle")
    return min(ends)


def closest_endpoint_pair(graph: SkeletonGraph) -> tuple[int, int]:
    """The two mutually closest endpoints (E2, E3).

    Distance ties break on the smaller (id, id) pair, which is row-major
    pixel order, so the choice is deterministic.
    """
    ends = graph.endpoints
    pairs = []
    for ii in range(len(ends)):
        for jj in range(ii + 1, len(ends)):
            a, b = ends[ii], ends[jj]
            d = float(np.hypot(*(graph.nodes[a] - graph.nodes[b])))
            pairs.append((d, min(a, b), max(a, b)))
    if not pairs:
        raise AmbiguousTopologyError("need at least two endpoints to pair")
    pairs.sort()
    _, e2, e3 = pairs[0]
    return e2, e3


def _orient(points: np.ndarray, base_hint: str) -> np.ndarray:
    if base_hint not in BASE_HINTS:
        raise InvalidArgumentError(f"base_hint must be one of {BASE_HINTS}")
    first, last = points[0], points[-1]
    key = {"top": (first[1], last[1]), "bottom": (-first[1], -last[1]),
           "left": (first[0], last[0]), "right": (-first[0], -last[0])}[base_hint]
    if key[0] > key[1]:
        return points[::-1].copy()
    return points


def prune_and_order(graph: SkeletonGraph, pitch: float, base_hint: str = "top") -> Midline:
    """Reduce a skeleton graph to one ordered base-to-tip midline.

    A clean skeleton (two endpoints, no branch points) is ordered directly.
    With exactly three endpoints -- one spurious branch -- the two mutually
    closest endpoints E2, E3 are merged into their midpoint M: branch pixels
    are removed and the surviving main fragment (the one holding the third
    endpoint) is extended by M, which stands in for the forked tip region.
    Anything else (more endpoints, cycles, multiple components) raises
    :class:`AmbiguousTopologyError` so the frame can be flagged, not repaired.
    """
    if pitch <= 0.0:
        raise InvalidArgumentError("pitch must be positive")
    n = len(graph.adjacency)
    if n == 0:
        raise EmptyMaskError("skeleton graph has no pixels")
    ends = graph.endpoints
    branch = graph.branch_points

    if not branch:
        if len(ends) != 2:
            raise AmbiguousTopologyError(
                f"skeleton without branch points has {len(ends)} endpoints, need 2")
        frags = _fragments(graph, set())
        if len(frags) != 1:
            raise AmbiguousTopologyError(f"skeleton has {len(frags)} disconnected pieces")
        order = _walk_from(graph, frags[0], min(ends))
        px = graph.nodes[order].astype(float)
    elif len(ends) == 3:
        e2, e3 = closest_endpoint_pair(graph)
        (e1,) = [e for e in ends if e not in (e2, e3)]
        m_point = (graph.nodes[e2] + graph.nodes[e3]) / 2.0

        frags = _fragments(graph, set(branch))
        main = [f for f in frags if e1 in f]
        if not main:
            raise AmbiguousTopologyError("base endpoint lost during branch pruning")
        main = main[0]
        if e2 in main or e3 in main:
            raise AmbiguousTopologyError("merged endpoints share the main fragment")
        order = _walk_from(graph, main, e1)
        px = np.vstack([graph.nodes[order].astype(float), m_point])
    else:
        raise AmbiguousTopologyError(
            f"skeleton has {len(ends)} endpoints and {len(branch)} branch points")

    if px.shape[0] < 3:
        raise MaskPipelineError("midline path shorter than 3 pixels")
    return Midline(_orient(px, base_hint) * pitch, 0.0)


# ---------------------------------------------------------------------------
# sequence extraction
# ---------------------------------------------------------------------------

_GAP_KINDS = {
    AmbiguousTopologyError: "ambiguous-topology",
    EmptyMaskError: "empty-mask",
}


@dataclass(frozen=True)
class GapRecord:
    frame: int
    kind: str
    detail: str


@dataclass(frozen=True)
class ExtractionResult:
    sequence: MidlineSequence
    gaps: tuple[GapRecord, ...]


def extract_midline(mask: BinaryMask, fixture: BinaryMask | None,
                    base_hint: str = "top") -> Midline:
    """Full single-frame pipeline: exclusion, thinning, graph, prune, order."""
    work = apply_exclusion(mask, fixture) if fixture is not None else mask
    return prune_and_order(build_graph(thin(work)), work.pitch, base_hint)


def extract_sequence(masks: list[BinaryMask], fixture: BinaryMask | None,
                     dt: float, pitch: float | None = None,
                     base_hint: str = "top") -> ExtractionResult:
    """Run the pipeline per frame; failed frames become gap records.

    Frame i keeps timestamp i*dt even when earlier frames failed, so gaps are
    visible in the timeline. Raises :class:`EmptySequenceError` if no frame
    survives. ``pitch``, when given, overrides the masks' own pitch.
    """
    if dt <= 0.0:
        raise InvalidArgumentError("dt must be positive")
    if not masks:
        raise EmptySequenceError("no input masks")
    frames = []
    gaps = []
    for i, mask in enumerate(masks):
        if pitch is not None and pitch != mask.pitch:
            mask = BinaryMask(mask.bits, pitch)
        try:
            mid = extract_midline(mask, fixture, base_hint)
            frames.append(Midline(mid.points, i * dt))
        except SoftwhipError as exc:
            kind = _GAP_KINDS.get(type(exc))
            if kind is None:
                kind = type(exc).__name__.removesuffix("Error").lower()
            gaps.append(GapRecord(i, kind, str(exc)))
    if not frames:
        raise EmptySequenceError(f"all {len(masks)} frames failed extraction")
    return ExtractionResult(MidlineSequence(tuple(frames), dt), tuple(gaps))
