import pytest

from volmc import synth
from volmc.cellcomplex import (
    base_complex,
    check_grid_blocks,
    extract_complex,
    reduce_complex,
    split_tori,
)
from volmc.fireparam import trace_param, trace_param_base
from volmc.tetparam import hex_to_param


def _hex_counts(hm):
    from volmc.firehex import trace_hex

    mc = split_tori(extract_complex(hm, trace_hex(hm, seed=0)))
    return (
        len(mc.blocks),
        len(reduce_complex(mc, mode="regular").blocks),
        len(reduce_complex(mc, mode="full").blocks),
    )


def _param_counts(pm):
    work, field = trace_param(pm, seed=0)
    mc = split_tori(extract_complex(work, field))
    return (
        len(mc.blocks),
        len(reduce_complex(mc, mode="regular").blocks),
        len(reduce_complex(mc, mode="full").blocks),
    )


@pytest.mark.parametrize("name", ["box", "pie3", "pie5", "torus"])
def test_param_matches_hex_pipeline(meshes, name):
    hm = meshes[name]
    assert _param_counts(hex_to_param(hm)) == _hex_counts(hm)


def test_param_blocks_partition_tets(meshes):
    hm = meshes["pie3"]
    work, field = trace_param(hex_to_param(hm), seed=0)
    mc = split_tori(extract_complex(work, field))
    seen = []
    for b in mc.blocks:
        seen.extend(b.cells)
    assert sorted(seen) == list(range(work.n_cells))


def test_param_base_complex_matches_hex(meshes):
    for name in ("box", "pie3", "notch"):
        hm = meshes[name]
        bc_hex = split_tori(base_complex(hm, seed=0))
        bc_par = split_tori(base_complex(hex_to_param(hm), seed=0))
        assert len(bc_hex.blocks) == len(bc_par.blocks), name


def test_param_trace_deterministic(meshes):
    pm = hex_to_param(meshes["pie3"])
    w1, f1 = trace_param(pm, seed=3)
    w2, f2 = trace_param(pm, seed=3)
    assert f1.tagged == f2.tagged
    assert len(w1.tets) == len(w2.tets)


def test_base_trace_superset(meshes):
    pm = hex_to_param(meshes["pie3"])
    w1, std = trace_param(pm, seed=0)
    w2, base = trace_param_base(pm, seed=0)
    # base-complex walls keep running where the standard trace stops
    assert len(base.tagged) >= len(std.tagged)
