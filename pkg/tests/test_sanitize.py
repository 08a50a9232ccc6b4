import numpy as np
import pytest

from volmc import synth
from volmc.sanitize import (
    add_noise,
    detect_cut_structure,
    reanchor,
    sanitize,
    verify_seamless,
)
from volmc.tetparam import hex_to_param


def _singular_set(pm):
    out = set()
    for e in pm.singular_edges():
        a, b = pm.edge_keys[e]
        mid = (pm.positions[a] + pm.positions[b]) / 2
        out.add(tuple(np.round(mid, 9)))
    return out


def test_clean_input_already_seamless(meshes):
    pm = hex_to_param(meshes["pie3"])
    assert verify_seamless(pm) == []


def test_noise_breaks_seamlessness(meshes):
    pm = add_noise(hex_to_param(meshes["pie3"]), eps=1e-8, seed=0)
    assert verify_seamless(pm) != []


@pytest.mark.parametrize("name", ["box", "pie3", "pie5", "notch", "torus", "composite"])
def test_sanitize_restores_exact_seamlessness(meshes, name):
    pm = hex_to_param(meshes[name])
    noisy = add_noise(pm, eps=1e-8, seed=0)
    fixed = sanitize(noisy)
    assert verify_seamless(fixed) == []


@pytest.mark.parametrize("name", ["pie3", "pie5", "composite"])
def test_sanitize_preserves_singular_set(meshes, name):
    pm = hex_to_param(meshes[name])
    noisy = add_noise(pm, eps=1e-8, seed=1)
    fixed = sanitize(noisy)
    assert _singular_set(fixed) == _singular_set(pm), name


def test_sanitize_idempotent_on_clean_input(meshes):
    pm = hex_to_param(meshes["box"])
    fixed = sanitize(pm)
    assert verify_seamless(fixed) == []
    assert _singular_set(fixed) == _singular_set(pm)


def test_reanchor_removes_tree_transitions(meshes):
    pm = hex_to_param(meshes["pie3"])
    out = reanchor(pm)
    assert verify_seamless(out) == []


def test_cut_structure_shape_box(meshes):
    """A parametrization of a plain box: no interior cuts, six boundary
    alignment sheets, twelve branches, eight nodes."""
    cs = detect_cut_structure(reanchor(hex_to_param(meshes["box"])))
    cut_sheets = [s for s in cs.sheets if s.kind == "cut"]
    align_sheets = [s for s in cs.sheets if s.kind == "align"]
    assert len(cut_sheets) == 0
    assert len(align_sheets) == 6
    assert len(cs.branches) == 12
    assert len(cs.nodes) == 8


def test_cut_structure_pie3(meshes):
    cs = detect_cut_structure(reanchor(hex_to_param(meshes["pie3"])))
    cut_sheets = [s for s in cs.sheets if s.kind == "cut"]
    assert len(cut_sheets) == 1  # one interior cut fan off the singular axis


def test_different_noise_seeds_converge(meshes):
    pm = hex_to_param(meshes["pie3"])
    fixed = [sanitize(add_noise(pm, eps=1e-8, seed=s)) for s in (0, 5)]
    for f in fixed:
        assert verify_seamless(f) == []
        assert _singular_set(f) == _singular_set(pm)
