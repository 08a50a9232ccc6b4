import numpy as np
import pytest

from volmc import synth
from volmc.errors import MeshError
from volmc.hexmesh import HEX_CORNER_COORDS, HexMesh


def test_box_counts():
    hm = synth.box_mesh(2, 2, 2)
    assert len(hm.hexes) == 8
    assert hm.n_vertices == 27
    assert hm.n_facets == 36
    assert hm.n_edges == 54


def test_single_hex_boundary():
    hm = synth.box_mesh(1, 1, 1)
    assert all(hm.facet_boundary)
    assert all(hm.classify_edge(e).boundary for e in range(hm.n_edges))
    # convex corner edges have valence 1, not the regular boundary valence 2
    assert all(hm.classify_edge(e).singular for e in range(hm.n_edges))


def test_interior_edge_valence():
    hm = synth.box_mesh(2, 2, 2)
    interior = [e for e in range(hm.n_edges) if not hm.edge_boundary[e]]
    assert len(interior) == 6
    for e in interior:
        ec = hm.classify_edge(e)
        assert hm.edge_valence(e) == 4 and not ec.singular


@pytest.mark.parametrize("k", [3, 5])
def test_pie_singular_edges(k):
    hm = synth.pie_mesh(k)
    sing = [e for e in hm.singular_edges() if not hm.edge_boundary[e]]
    # the central axis: one edge per layer
    assert len(sing) == 2
    for e in sing:
        assert hm.edge_valence(e) == k


def test_torus_has_no_interior_singularities():
    hm = synth.torus_mesh()
    assert [e for e in hm.singular_edges() if not hm.edge_boundary[e]] == []


def test_repeated_corner_rejected():
    with pytest.raises(MeshError):
        HexMesh(np.eye(8, 3), [[0, 1, 2, 3, 4, 5, 6, 6]])


def test_out_of_range_vertex_rejected():
    with pytest.raises(MeshError):
        HexMesh(np.zeros((4, 3)), [[0, 1, 2, 3, 4, 5, 6, 7]])


def test_non_manifold_facet_rejected():
    # three unit cubes stacked on the same bottom face
    base = synth.box_mesh(1, 1, 1)
    pos = list(map(tuple, base.positions))
    hexes = [list(base.hexes[0])]
    for dz in (1.0, 2.0):
        top = []
        for v in base.hexes[0]:
            x, y, z = base.positions[v]
            p = (x, y, z + dz)
            if p not in pos:
                pos.append(p)
            top.append(pos.index(p))
        hexes.append(top)
    hexes.append(list(hexes[1]))  # duplicate cell glues 3 hexes on one facet
    with pytest.raises(MeshError):
        HexMesh(pos, hexes)


def test_local_coords_match_corner_table():
    hm = synth.box_mesh(1, 1, 1)
    h = 0
    for c, v in enumerate(hm.hexes[h]):
        assert tuple(hm.local_coords(h, int(v))) == tuple(HEX_CORNER_COORDS[c])


def test_face_gluing_is_rigid_and_consistent():
    hm = synth.box_mesh(2, 1, 1)
    shared = [f for f in range(hm.n_facets) if not hm.facet_boundary[f]]
    assert len(shared) == 1
    f = shared[0]
    h1, h2 = hm.facet_cells[f]
    g = hm.face_gluing(h1, f, h2)
    for v in hm.facet_vertices(f):
        a = hm.local_coords(h1, v)
        b = hm.local_coords(h2, v)
        assert np.allclose(g.apply(a), b)


def test_edge_fan_structure():
    hm = synth.pie_mesh(3)
    e = [x for x in hm.singular_edges() if not hm.edge_boundary[x]][0]
    facets, cells, closed = hm.edge_fan(e)
    assert closed and len(cells) == 3 and len(facets) == 3
    hm2 = synth.box_mesh(1, 1, 1)
    facets2, cells2, closed2 = hm2.edge_fan(0)
    assert not closed2 and len(facets2) == len(cells2) + 1
