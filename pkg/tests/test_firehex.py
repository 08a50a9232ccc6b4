import pytest

from volmc import synth
from volmc.cellcomplex import extract_complex, split_tori, validate_field
from volmc.errors import IntegrityError
from volmc.firehex import (
    alive,
    necessary,
    trace_hex,
    trace_hex_base,
    trace_hex_sparse,
)


def test_boundary_always_tagged(meshes):
    for hm in meshes.values():
        field = trace_hex(hm, seed=0)
        for f in range(hm.n_facets):
            if hm.facet_boundary[f]:
                assert f in field.tagged


def test_field_is_a_fixpoint(meshes):
    """No tagged facet still has a live continuation: the fire has finished."""
    for hm in meshes.values():
        field = trace_hex(hm, seed=0)
        validate_field(hm, field)


def test_box_interior_stays_untouched():
    hm = synth.box_mesh(2, 2, 2)
    field = trace_hex(hm, seed=0)
    interior = [f for f in range(hm.n_facets) if not hm.facet_boundary[f]]
    assert not any(f in field.tagged for f in interior)


def test_pie_walls_reach_from_axis():
    hm = synth.pie_mesh(3)
    field = trace_hex(hm, seed=0)
    interior_tagged = [f for f in field.tagged if not hm.facet_boundary[f]]
    assert interior_tagged
    sing = {e for e in hm.singular_edges() if not hm.edge_boundary[e]}
    touching = set()
    for f in interior_tagged:
        quad = hm.facet_corners[f]
        for i in range(4):
            a, b = quad[i], quad[(i + 1) % 4]
            key = (a, b) if a < b else (b, a)
            if hm.edge_id[key] in sing:
                touching.add(f)
    assert touching


def test_determinism_same_seed(meshes):
    for hm in meshes.values():
        f1 = trace_hex(hm, seed=7)
        f2 = trace_hex(hm, seed=7)
        assert f1.tagged == f2.tagged
        assert f1.distance == f2.distance


def test_sparse_subset_of_standard(meshes):
    """Sparse ignition never tags more than the standard trace does blocks-wise."""
    for name, hm in meshes.items():
        raw = len(split_tori(extract_complex(hm, trace_hex(hm, seed=0))).blocks)
        sparse = len(
            split_tori(extract_complex(hm, trace_hex_sparse(hm, seed=0))).blocks
        )
        assert sparse <= raw, name


def test_base_walls_superset(meshes):
    for name, hm in meshes.items():
        std = trace_hex(hm, seed=0)
        base = trace_hex_base(hm, seed=0)
        assert std.tagged <= base.tagged, name


def test_base_complex_conforming(meshes):
    """Base complex arcs never terminate against wall interiors (no T-arcs)."""
    for name, hm in meshes.items():
        bc = split_tori(extract_complex(hm, trace_hex_base(hm, seed=0)))
        assert not any(a.tarc for a in bc.arcs), name
