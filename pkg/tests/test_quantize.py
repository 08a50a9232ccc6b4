import itertools
import math

import numpy as np
import pytest

from volmc import synth
from volmc.cellcomplex import (
    check_grid_blocks,
    extract_complex,
    reduce_complex,
    split_tori,
)
from volmc.errors import IntegrityError
from volmc.firehex import trace_hex
from volmc.quantize import (
    build_ip,
    extract_hexmesh,
    reparametrize_block,
    solve_quantization,
)


def brute_force_optimum(qp, hi=None):
    """Independent oracle: enumerate all integer assignments in a box and
    keep the feasible one with least squared deviation from the targets.

    Recursion with completed-row rejection only; no relaxation, bounding or
    ordering heuristics shared with the solver under test.
    """
    arcs = list(qp.arcs)
    targets = qp.targets
    if hi is None:
        hi = max(2, int(math.ceil(2 * max(targets.values()))) + 1)
    rows = [dict(r) for r in qp.rows]
    best = [None, math.inf]

    def rec(i, partial, cost):
        if cost >= best[1]:
            return
        if i == len(arcs):
            best[0], best[1] = dict(partial), cost
            return
        a = arcs[i]
        for val in range(1, hi + 1):
            partial[a] = val
            ok = True
            for row in rows:
                if a in row and all(x in partial for x in row):
                    if sum(c * partial[x] for x, c in row.items()) != 0:
                        ok = False
                        break
            if ok:
                rec(i + 1, partial, cost + (val - targets[a]) ** 2)
            del partial[a]

    rec(0, {}, 0.0)
    return best[0], best[1]


def _quantizable(mc):
    for mode in ("full", "regular"):
        red = reduce_complex(mc, mode=mode)
        if not any(w.slit or w.annulus for w in red.walls):
            return red
    return None


def small_random_problems(count=12, max_arcs=12):
    """Fully reduced complexes of small random blobs with few arcs."""
    out = []
    seed = 0
    while len(out) < count and seed < 400:
        hm = synth.random_glued_cubes(seed, n_cells=2 + seed % 7)
        mc = split_tori(extract_complex(hm, trace_hex(hm, seed=0)))
        red = _quantizable(mc)
        seed += 1
        if red is not None and len(red.arcs) <= max_arcs:
            out.append(red)
    return out


def test_solver_matches_brute_force_on_fixtures(complexes):
    for name in ("box", "torus"):
        red = _quantizable(complexes[name])
        qp = build_ip(red, 1.0)
        sol = solve_quantization(qp)
        ref, ref_obj = brute_force_optimum(qp)
        obj = sum((sol[a] - qp.targets[a]) ** 2 for a in qp.arcs)
        assert ref is not None
        assert abs(obj - ref_obj) < 1e-9, name


def test_solver_matches_brute_force_on_random_blobs():
    problems = small_random_problems(count=10)
    assert len(problems) >= 5
    for red in problems:
        qp = build_ip(red, 1.0)
        sol = solve_quantization(qp)
        ref, ref_obj = brute_force_optimum(qp)
        obj = sum((sol[a] - qp.targets[a]) ** 2 for a in qp.arcs)
        assert abs(obj - ref_obj) < 1e-9


def test_row_residuals_exactly_zero(complexes):
    for name, mc in complexes.items():
        red = _quantizable(mc)
        qp = build_ip(red, 2.0)
        sol = solve_quantization(qp)
        for row in qp.rows:
            assert sum(c * sol[a] for a, c in row.items()) == 0, name


def test_all_lengths_positive_integers(complexes):
    red = _quantizable(complexes["pie5"])
    sol = solve_quantization(build_ip(red, 1.0))
    for v in sol.values():
        assert isinstance(v, int) and v >= 1


def test_extracted_mesh_is_conforming(complexes):
    for name, mc in complexes.items():
        red = _quantizable(mc)
        sol = solve_quantization(build_ip(red, 1.0))
        hx = extract_hexmesh(red, sol)  # HexMesh validates manifoldness
        assert len(hx.hexes) > 0, name


def test_extracted_mesh_passes_grid_oracle_recursively(complexes):
    for name in ("pie3", "torus", "composite"):
        red = _quantizable(complexes[name])
        sol = solve_quantization(build_ip(red, 1.0))
        hx = extract_hexmesh(red, sol)
        mc2 = split_tori(extract_complex(hx, trace_hex(hx, seed=0)))
        check_grid_blocks(mc2)


def test_hex_count_scales_with_s(complexes):
    red = _quantizable(complexes["pie3"])
    counts = []
    for s in (1, 2, 4):
        sol = solve_quantization(build_ip(red, float(s)))
        counts.append(len(extract_hexmesh(red, sol).hexes))
    assert counts[0] < counts[1] < counts[2]
    assert counts[1] / counts[0] == pytest.approx(8.0)


def test_block_rescaling_map_orientation(complexes):
    red = _quantizable(complexes["pie3"])
    sol = solve_quantization(build_ip(red, 1.0))
    for b in red.blocks:
        bm = reparametrize_block(red, b.id, sol)
        assert bm.orientation_ok()
        # corners of the new box map into the original box
        L, M, N = bm.new_dims
        for c in itertools.product((0, L), (0, M), (0, N)):
            p = bm.to_original(c)
            assert np.all(p >= -1e-6)
            assert np.all(p <= np.array(bm.dims) + 1e-6)


def test_annulus_wall_rejected(complexes):
    mc = complexes["composite"]
    full = reduce_complex(mc, mode="full")
    if any(w.slit or w.annulus for w in full.walls):
        with pytest.raises(IntegrityError):
            build_ip(full, 1.0)
    else:
        pytest.skip("composite full reduction has no slit/annulus wall")
