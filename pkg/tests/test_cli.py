import pytest
from click.testing import CliRunner

from volmc import synth
from volmc.cli import main
from volmc.meshio import write_hex_mesh, write_param
from volmc.sanitize import add_noise
from volmc.tetparam import hex_to_param


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    write_hex_mesh(synth.pie_mesh(3), str(d / "pie3.mesh"))
    write_hex_mesh(synth.torus_mesh(), str(d / "torus.vtk"))
    write_param(hex_to_param(synth.box_mesh(2, 2, 2)), str(d / "box.param"))
    write_param(
        add_noise(hex_to_param(synth.pie_mesh(3)), eps=1e-8, seed=0),
        str(d / "noisy.param"),
    )
    corpus = d / "corpus"
    corpus.mkdir()
    write_hex_mesh(synth.box_mesh(2, 2, 2), str(corpus / "box.mesh"))
    write_hex_mesh(synth.notched_box_mesh(), str(corpus / "notch.mesh"))
    return d


def run_cli(args):
    result = CliRunner().invoke(main, args, catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return result.output


def test_mc_hex_summary(files):
    out = run_cli(["mc-hex", str(files / "pie3.mesh"), "--reduce", "full"])
    assert "blocks=2" in out and "raw=3" in out


def test_mc_hex_reduce_none(files):
    out = run_cli(["mc-hex", str(files / "pie3.mesh"), "--reduce", "none"])
    assert "blocks=3" in out


def test_mc_param_summary(files):
    out = run_cli(["mc-param", str(files / "box.param")])
    assert "blocks=1" in out


def test_sanitize_roundtrip(files, tmp_path):
    out_path = tmp_path / "fixed.param"
    out = run_cli(["sanitize", str(files / "noisy.param"), "--output", str(out_path)])
    assert out_path.exists()


def test_quantize_writes_mesh_and_report(files, tmp_path):
    mesh_path = tmp_path / "q.mesh"
    rep_path = tmp_path / "q.txt"
    out = run_cli([
        "quantize", str(files / "pie3.mesh"), "--scale", "1",
        "--output", str(mesh_path), "--report", str(rep_path),
    ])
    assert "hexes=" in out
    assert "objective" in rep_path.read_text()
    from volmc.meshio import read_hex_mesh

    assert len(read_hex_mesh(str(mesh_path)).hexes) > 0


def test_base_complex_summary(files):
    out = run_cli(["base-complex", str(files / "pie3.mesh")])
    assert "blocks=3" in out


def test_export_obj(files, tmp_path):
    out_path = tmp_path / "w.obj"
    run_cli(["export", str(files / "torus.vtk"), "--output", str(out_path)])
    assert "g wall_" in out_path.read_text()


def test_stats_csv(files, tmp_path):
    csv_path = tmp_path / "s.csv"
    out = run_cli(["stats", str(files / "corpus"), "--output", str(csv_path)])
    lines = csv_path.read_text().splitlines()
    assert lines[0].startswith("model;")
    assert len(lines) == 3  # header + 2 models
    assert "box" in lines[1] and "notch" in lines[2]


def test_stats_cache_resumes(files, tmp_path):
    cache = tmp_path / "cache.json"
    csv1 = tmp_path / "a.csv"
    csv2 = tmp_path / "b.csv"
    run_cli(["stats", str(files / "corpus"), "--output", str(csv1), "--cache", str(cache)])
    assert cache.exists()
    run_cli(["stats", str(files / "corpus"), "--output", str(csv2), "--cache", str(cache)])
    assert csv1.read_text() == csv2.read_text()


def test_stats_error_rows_do_not_abort(files, tmp_path):
    corpus = tmp_path / "c"
    corpus.mkdir()
    (corpus / "broken.mesh").write_text("Vertices\n1\nnot a number\n")
    write_hex_mesh(synth.box_mesh(1, 1, 1), str(corpus / "ok.mesh"))
    csv_path = tmp_path / "s.csv"
    run_cli(["stats", str(corpus), "--output", str(csv_path)])
    lines = csv_path.read_text().splitlines()
    assert len(lines) == 3
    assert "ParseError" in lines[1]


@pytest.mark.parametrize("args_output", [
    (["mc-hex", "{d}/pie3.mesh", "--output", "{o}/w.obj"], "w.obj"),
    (["mc-param", "{d}/box.param", "--output", "{o}/w.obj"], "w.obj"),
    (["sanitize", "{d}/noisy.param", "--output", "{o}/f.param"], "f.param"),
    (["quantize", "{d}/pie3.mesh", "--output", "{o}/q.mesh", "--report", "{o}/q.txt"], "q.mesh"),
    (["base-complex", "{d}/pie3.mesh", "--output", "{o}/b.obj"], "b.obj"),
    (["export", "{d}/torus.vtk", "--output", "{o}/t.obj", "--explode", "0.2"], "t.obj"),
    (["stats", "{d}/corpus", "--output", "{o}/s.csv"], "s.csv"),
])
def test_subcommands_byte_identical_across_runs(files, tmp_path, args_output):
    template, fname = args_output
    outputs = []
    for run in range(3):
        o = tmp_path / f"run{run}"
        o.mkdir()
        args = [a.format(d=str(files), o=str(o)) for a in template]
        stdout = run_cli(args).replace(str(o), "OUT")
        outputs.append((stdout, (o / fname).read_bytes()))
    assert outputs[0] == outputs[1] == outputs[2]
