"""Brush-fire wall tracing on hexahedral meshes.

Fire walls start at singular edges and spread facet-by-facet through the
mesh along straight continuations, stopping where they would cross terrain
that is already burnt. The tagged facet set, together with all boundary
facets, forms the walls of the raw decomposition.
"""

from __future__ import annotations

import heapq
import random


class WallField:
    """Set of burnt (tagged) facets with per-facet propagation distance.

    Distances are integers for hex meshes and reals for parametrizations.
    ``origin`` records the singular edge whose fire tagged each facet.
    """

    __slots__ = ("tagged", "distance", "origin")

    def __init__(self):
        self.tagged = set()
        self.distance = {}
        self.origin = {}

    def tag(self, f, d, origin):
        self.tagged.add(f)
        if f not in self.distance:
            self.distance[f] = d
            self.origin[f] = origin

    def untag(self, f):
        self.tagged.discard(f)
        self.distance.pop(f, None)
        self.origin.pop(f, None)

    def copy(self) -> "WallField":
        out = WallField()
        out.tagged = set(self.tagged)
        out.distance = dict(self.distance)
        out.origin = dict(self.origin)
        return out

    def __contains__(self, f):
        return f in self.tagged

    def __len__(self):
        return len(self.tagged)


def alive(mesh, field: WallField, e) -> bool:
    """True iff at most two facets incident to ``e`` are tagged, or ``e`` is singular."""
    if mesh.classify_edge(e).singular:
        return True
    return sum(1 for f in mesh.edge_facets[e] if f in field.tagged) <= 2


def ignition_sources(mesh, seed=None):
    """Fire sources: (singular edge, incident interior facet) pairs.

    Ordered by edge id then facet fan position; a seed permutes the order to
    probe tie sensitivity while keeping runs reproducible.
    """
    sources = []
    for e in mesh.singular_edges():
        fan_f, _, _ = mesh.edge_fan(e)
        for f in fan_f:
            if not mesh.facet_boundary[f]:
                sources.append((e, f))
    if seed is not None:
        random.Random(seed).shuffle(sources)
    return sources


def _tag_boundary(mesh, field):
    for f in range(mesh.n_facets):
        if mesh.facet_boundary[f]:
            field.tag(f, 0, None)


def trace_hex(mesh, seed=None) -> WallField:
    """Simultaneous brush fire: priority queue over (edge, facet, distance).

    Entries are popped smallest distance first, FIFO among equal distances.
    Spreading pushes the straight continuation across every regular interior
    edge of a freshly tagged facet. Boundary facets are tagged at the end.
    """
    field = WallField()
    heap = []
    seq = 0
    for e, f in ignition_sources(mesh, seed):
        heapq.heappush(heap, (0, seq, e, f, e))
        seq += 1
    while heap:
        d, _, e, f, origin = heapq.heappop(heap)
        if f in field.tagged or not alive(mesh, field, e):
            continue
        field.tag(f, d, origin)
        for e2 in field_spread_edges(mesh, f, e):
            f2 = mesh.opp_facet(e2, f)
            if f2 is not None and f2 not in field.tagged:
                heapq.heappush(heap, (d + 1, seq, e2, f2, origin))
                seq += 1
    _tag_boundary(mesh, field)
    return field


def field_spread_edges(mesh, f, e):
    """Regular interior edges of facet ``f`` other than ``e``."""
    out = []
    for e2 in mesh.facet_edges[f]:
        if e2 == e or mesh.edge_boundary[e2]:
            continue
        if mesh.classify_edge(e2).regular:
            out.append(e2)
    return out


def necessary(mesh, field: WallField, e, f) -> bool:
    """Whether skipping fire source (e, f) would leave an inner angle of 270° or more.

    Evaluated over the (possibly cyclically self-overlapping) facet sequence
    f-2, f-1, f, f+1, f+2 around singular edge ``e``: true iff f-1 and f+1
    are both unburnt, or f-1 and f+2 are burnt but f+1 is not, or f-2 and
    f+1 are burnt but f-1 is not. Facet positions that do not exist in an
    open boundary fan count as unburnt.
    """
    fan_f, _, closed = mesh.edge_fan(e)
    i = fan_f.index(f)
    n = len(fan_f)

    def burnt(j):
        if closed:
            return fan_f[j % n] in field.tagged
        if j < 0 or j >= n:
            return False
        return fan_f[j] in field.tagged

    if not burnt(i - 1) and not burnt(i + 1):
        return True
    if burnt(i - 1) and burnt(i + 2) and not burnt(i + 1):
        return True
    if burnt(i - 2) and burnt(i + 1) and not burnt(i - 1):
        return True
    return False


def trace_hex_sparse(mesh, seed=None) -> WallField:
    """Serial variant: sources processed one at a time, each fire run to
    completion, and sources that are not necessary() at their turn skipped."""
    field = WallField()
    for e, f in ignition_sources(mesh, seed):
        if f in field.tagged or not necessary(mesh, field, e, f):
            continue
        heap = [(0, 0, e, f, e)]
        seq = 1
        while heap:
            d, _, e1, f1, origin = heapq.heappop(heap)
            if f1 in field.tagged or not alive(mesh, field, e1):
                continue
            field.tag(f1, d, origin)
            for e2 in field_spread_edges(mesh, f1, e1):
                f2 = mesh.opp_facet(e2, f1)
                if f2 is not None and f2 not in field.tagged:
                    heapq.heappush(heap, (d + 1, seq, e2, f2, origin))
                    seq += 1
    _tag_boundary(mesh, field)
    return field


def trace_hex_base(mesh, seed=None) -> WallField:
    """Base-complex tagging: fronts spread across every regular interior
    edge without ever stopping at burnt terrain, so walls extend until the
    boundary or singularities. The result is conforming (no T-joints)."""
    field = WallField()
    heap = []
    seq = 0
    for e, f in ignition_sources(mesh, seed):
        heapq.heappush(heap, (0, seq, e, f, e))
        seq += 1
    while heap:
        d, _, e, f, origin = heapq.heappop(heap)
        if f in field.tagged:
            continue
        field.tag(f, d, origin)
        for e2 in field_spread_edges(mesh, f, e):
            f2 = mesh.opp_facet(e2, f)
            if f2 is not None and f2 not in field.tagged:
                heapq.heappush(heap, (d + 1, seq, e2, f2, origin))
                seq += 1
    _tag_boundary(mesh, field)
    return field
