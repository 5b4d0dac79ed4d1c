import json
import math

import numpy as np
import pytest

from visrepair import RepairConfig, hausdorff, is_manifold, is_watertight, repair, shapes
from visrepair.cli import main
from visrepair.config import bbox_diagonal
from visrepair.mesh_io import IndexedMesh, load_mesh, save_mesh
from visrepair.pipeline import REPORT_KEYS

FAST = RepairConfig(n_total=3000)


def test_perfect_cube_passthrough():
    out, rep = repair(shapes.cube(), FAST)
    assert rep.watertight and rep.manifold
    assert out.n_faces <= 12 and rep.hausdorff < 1e-12
    assert out.signed_volume() == pytest.approx(1.0, abs=1e-12)
    assert rep.flipped_patches == 0 and rep.offset_faces == 0 and rep.extra_faces == 0


def test_defective_cube_closed():
    m = shapes.defective_cube()
    out, rep = repair(m, FAST)
    assert is_watertight(out) and is_manifold(out)
    assert rep.input_faces == 11
    assert rep.hausdorff <= RepairConfig().d_offset_frac * bbox_diagonal(m.vertices) * 2


def test_open_quad_shell():
    m = shapes.grid_plane(1)
    out, rep = repair(m, FAST)
    d = math.sqrt(2) / 20000
    assert rep.watertight and rep.manifold
    assert 0 < rep.hausdorff <= d + 1e-9 * math.sqrt(2)
    assert rep.offset_faces > 0


def test_flipped_cube_reoriented():
    out, rep = repair(shapes.cube().flipped(), FAST)
    assert rep.flipped_patches == 1
    assert out.signed_volume() == pytest.approx(1.0, abs=1e-12)


def test_empty_and_zero_area_errors():
    with pytest.raises(ValueError):
        repair(IndexedMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64)), FAST)
    flat = IndexedMesh(np.array([[0.0, 0, 0], [1, 0, 0], [2, 0, 0]]), np.array([[0, 1, 2]]))
    with pytest.raises(ValueError):
        repair(flat, FAST)


def test_skip_simplify_keeps_more_faces():
    m = shapes.subdivided_cube()
    a, _ = repair(m, FAST)
    b, _ = repair(m, FAST.replace(simplify=False))
    assert a.n_faces == 12 and b.n_faces >= a.n_faces


def test_report_keys_exact():
    _, rep = repair(shapes.cube(), FAST)
    d = json.loads(rep.to_json())
    assert tuple(d) == REPORT_KEYS
    assert set(d["stage_ms"]) >= {"measures", "partition", "cut", "extract"}


def test_threads_bit_identical():
    m = shapes.scene()
    a, ra = repair(m, FAST.replace(threads=1))
    b, rb = repair(m, FAST.replace(threads=3))
    assert np.array_equal(a.vertices, b.vertices) and np.array_equal(a.faces, b.faces)
    strip = lambda r: {k: v for k, v in r.to_dict().items() if k != "stage_ms"}
    assert strip(ra) == strip(rb)


def test_uv_seam_plane_keeps_attributes():
    out, rep = repair(shapes.grid_plane(2, size=2.0, uv_seam=True), FAST)
    assert rep.watertight and out.uvs is not None and out.face_material is not None
    assert set(out.face_material) == {"left", "right"}


def test_hole_preservation():
    m = shapes.sphere_with_hole(16, 5.0)
    loop = shapes.hole_loop(m)
    out, rep = repair(m, FAST.replace(n_total=5000, preserve_hole_boundaries=[loop]))
    assert rep.closed_before_hole_removal and not rep.watertight
    assert rep.hausdorff < 1e-9


# ---------------------------------------------------------------- CLI


def test_cli_repair(tmp_path, capsys):
    src, dst, rpt = tmp_path / "in.obj", tmp_path / "out.obj", tmp_path / "r.json"
    save_mesh(shapes.split_cube(), src)
    code = main(["repair", str(src), "-o", str(dst), "--n-total", "2000", "--report", str(rpt), "--threads", "2"])
    assert code == 0
    out = load_mesh(dst)
    assert is_watertight(out) and is_manifold(out)
    assert tuple(json.loads(rpt.read_text())) == REPORT_KEYS
    assert "watertight=True" in capsys.readouterr().err


def test_cli_missing_input(tmp_path):
    assert main(["repair", str(tmp_path / "nope.obj"), "-o", str(tmp_path / "o.obj")]) == 2


def test_cli_parse_error(tmp_path, capsys):
    bad = tmp_path / "bad.obj"
    bad.write_text("v 0 0 0\nf 1 2 3\n")
    assert main(["repair", str(bad), "-o", str(tmp_path / "o.obj")]) == 2
    assert "line 2" in capsys.readouterr().err


def test_cli_bad_offset(tmp_path):
    src = tmp_path / "in.obj"
    save_mesh(shapes.cube(), src)
    assert main(["repair", str(src), "-o", str(tmp_path / "o.obj"), "--offset", "0"]) == 2


def test_cli_preserve_holes_and_debug(tmp_path):
    m = shapes.sphere_with_hole(16, 5.0)
    src, loops, dbg = tmp_path / "s.obj", tmp_path / "loops.txt", tmp_path / "dbg"
    save_mesh(m, src)
    loops.write_text(" ".join(map(str, shapes.hole_loop(m))) + "\n")
    code = main(["repair", str(src), "-o", str(tmp_path / "o.obj"), "--n-total", "5000",
                 "--preserve-holes", str(loops), "--dump-debug", str(dbg)])
    assert code == 0
    assert (dbg / "measures.csv").exists() and (dbg / "cells.csv").exists()


def test_cli_usage_error():
    with pytest.raises(SystemExit) as e:
        main(["repair"])
    assert e.value.code == 2
