import numpy as np
import pytest

from volmc import synth
from volmc.errors import MeshError
from volmc.octahedral import IDENTITY
from volmc.tetparam import ParamTetMesh, hex_to_param


def unit_tet():
    pos = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]
    par = [np.array(pos, float)]
    return ParamTetMesh(pos, [(0, 1, 2, 3)], par)


def test_single_tet_basics():
    pm = unit_tet()
    assert len(pm.tets) == 1
    assert pm.n_facets == 4
    assert all(pm.facet_boundary[f] for f in range(pm.n_facets))


def test_flipped_param_rejected():
    pos = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]
    par = [np.array([(0, 0, 0), (0, 1, 0), (1, 0, 0), (0, 0, 1)], float)]
    with pytest.raises(MeshError):
        ParamTetMesh(pos, [(0, 1, 2, 3)], par)


def test_repeated_vertex_rejected():
    pos = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]
    with pytest.raises(MeshError):
        ParamTetMesh(pos, [(0, 1, 2, 2)], [np.eye(4, 3)])


def test_hex_to_param_tet_count(meshes):
    for name, hm in meshes.items():
        pm = hex_to_param(hm)
        # hexes split into tets; every hex contributes the same number
        assert len(pm.tets) % len(hm.hexes) == 0, name
        assert len(pm.tets) // len(hm.hexes) == 12, name


def test_hex_to_param_transitions_are_rigid(meshes):
    """Across every interior facet, the gluing maps one chart's parameter
    values exactly onto the other's."""
    hm = meshes["pie3"]
    pm = hex_to_param(hm)
    for f in range(pm.n_facets):
        if pm.facet_boundary[f]:
            continue
        a, b = pm.facet_cells[f]
        g = pm.cell_gluing(a, f, b)
        for v in pm.facet_keys[f]:
            pa = pm.corner_param(a, v)
            pb = pm.corner_param(b, v)
            assert np.allclose(g.apply(pa), pb, atol=1e-12)


def test_hex_to_param_interior_gluings_identity():
    """Within one hex, the tets share a single chart."""
    hm = synth.box_mesh(1, 1, 1)
    pm = hex_to_param(hm)
    for f in range(pm.n_facets):
        if pm.facet_boundary[f]:
            continue
        a, b = pm.facet_cells[f]
        g = pm.cell_gluing(a, f, b)
        assert g.rot == IDENTITY


def test_singular_edges_match_hex(meshes):
    """The parametric singular set reproduces the hex-mesh singular set."""
    for name, hm in meshes.items():
        pm = hex_to_param(hm)
        hex_mids = set()
        for e in hm.singular_edges():
            if hm.edge_boundary[e]:
                continue
            a, b = hm.edge_vertices[e]
            hex_mids.add(tuple(np.round((hm.positions[a] + hm.positions[b]) / 2, 9)))
        par_mids = set()
        for e in pm.singular_edges():
            if pm.edge_boundary[e]:
                continue
            a, b = pm.edge_keys[e]
            par_mids.add(tuple(np.round((pm.positions[a] + pm.positions[b]) / 2, 9)))
        assert hex_mids == par_mids, name


def test_compact_preserves_geometry():
    pm = hex_to_param(synth.box_mesh(1, 1, 1))
    out, fmap = pm.compact()
    assert len(out.tets) == len(pm.live_cells())
    assert out.positions.shape[1] == 3
    for old, new in fmap.items():
        assert sorted(pm.facet_keys[old]) == sorted(out.facet_keys[new])
