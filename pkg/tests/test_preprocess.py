import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from visrepair import shapes
from visrepair.config import RepairConfig
from visrepair.hausdorff import hausdorff
from visrepair.measures import compute_measures, measures_from_counts
from visrepair.mesh_io import IndexedMesh
from visrepair.preprocess import OFFSET, ORIGINAL, WALL, flipped_patch_count, offset_open_surfaces, reorient
from visrepair.topology import build_adjacency, is_manifold, is_watertight

CFG = RepairConfig(n_total=300)


def fake(mesh, front, back, n_dirs=5):
    """One sample per face with the given valid-ray counts."""
    c = np.stack([np.broadcast_to(front, mesh.n_faces), np.broadcast_to(back, mesh.n_faces)], axis=1)
    return measures_from_counts(c, np.arange(mesh.n_faces), mesh.n_faces, n_dirs)


def test_inward_cube_flipped():
    inward = shapes.cube().flipped()
    meas = compute_measures(inward, CFG)
    assert (meas.orientation == -1).all()
    out, mask = reorient(inward, meas)
    assert mask.all() and flipped_patch_count(out, mask) == 1
    assert inward.signed_volume() < 0 < out.signed_volume()
    np.testing.assert_array_equal(out.vertices, inward.vertices)


def test_outward_cube_identity():
    m = shapes.cube()
    out, mask = reorient(m, compute_measures(m, CFG))
    assert not mask.any() and out.equals(m)


def test_open_quad_not_flipped():
    m = shapes.grid_plane(1)
    meas = compute_measures(m, CFG)
    assert (meas.orientation == 0).all()
    assert not reorient(m, meas)[1].any()


def test_tie_not_flipped():
    m = shapes.cube()
    out, mask = reorient(m, fake(m, 0, 0))
    assert not mask.any()


def test_patchwise_vote():
    # one patch, mostly voting front: the single backward face does not flip alone
    m = shapes.cube()
    front = np.full(12, 5)
    back = np.zeros(12, int)
    front[3], back[3] = 0, 5
    assert not reorient(m, fake(m, front, back))[1].any()


def test_reorient_idempotent():
    m = shapes.partly_flipped_cube()
    once, _ = reorient(m, compute_measures(m, CFG))
    twice, mask = reorient(once, compute_measures(once, CFG))
    assert not mask.any() and twice.equals(once)


def test_reorient_keeps_attributes():
    m = shapes.grid_plane(2, uv_seam=True).flipped()
    out, mask = reorient(m, fake(m, 0, 5))
    assert mask.all()
    for f in range(m.n_faces):
        a = {int(v): tuple(m.uvs[c]) for v, c in zip(m.faces[f], m.face_uv_corners[f])}
        b = {int(v): tuple(out.uvs[c]) for v, c in zip(out.faces[f], out.face_uv_corners[f])}
        assert a == b
    assert out.face_material == m.face_material


def test_closed_cube_no_offset():
    m = shapes.cube()
    out, rec = offset_open_surfaces(m, compute_measures(m, CFG), CFG, 0.1)
    assert out.equals(m) and rec.n_generated == 0


@pytest.mark.parametrize("t", [1e-4, 0.01, 0.1])
def test_open_quad_shell(t):
    m = shapes.grid_plane(1)
    out, rec = offset_open_surfaces(m, fake(m, 5, 5), CFG, t)
    assert out.n_faces == 12 and is_watertight(out) and is_manifold(out)
    kinds = np.bincount(rec.face_kind, minlength=3)
    assert list(kinds) == [2, 2, 8]
    assert abs(hausdorff(m, out, 500) - t) < 1e-12
    assert set(rec.face_origin.tolist()) == {0, 1}


def test_offset_displacement_exact():
    m = shapes.disk(12)
    t = 0.05
    out, rec = offset_open_surfaces(m, fake(m, 5, 5), CFG, t)
    np.testing.assert_allclose(np.linalg.norm(rec.displacement, axis=1), t, rtol=0, atol=1e-15)
    new = out.vertices[m.n_vertices:]
    np.testing.assert_array_equal(new, m.vertices[rec.vertex_origin] + rec.displacement)
    # flat disk facing +z is pushed to -z
    assert (rec.displacement[:, 2] < 0).all()


def test_mobius_even_incidence():
    m = shapes.mobius()
    out, rec = offset_open_surfaces(m, fake(m, 5, 5), CFG, 0.01)
    assert all(len(inc) % 2 == 0 and sum(d for _, d in inc) == 0 for inc in build_adjacency(out).values())
    # the twist forces extra copies for vertices where sectors meet
    assert len(rec.vertex_origin) > m.n_vertices


def test_generated_face_kinds():
    m = shapes.grid_plane(2, uv_seam=True)
    out, rec = offset_open_surfaces(m, fake(m, 5, 5), CFG, 0.01)
    for f in range(out.n_faces):
        src = rec.face_origin[f]
        assert out.face_material[f] == m.face_material[src]
        if rec.face_kind[f] == ORIGINAL:
            assert f == src
        if rec.face_kind[f] == OFFSET:
            # reversed copy: same corners, opposite normal
            assert np.dot(out.face_normals()[f], m.face_normals()[src]) < 0
            for k in range(3):
                want = m.uvs[m.face_uv_corners[src][rec.corner_origin[f, k]]]
                np.testing.assert_array_equal(out.uvs[out.face_uv_corners[f][k]], want)
    assert {OFFSET, WALL} <= set(rec.face_kind.tolist())


@given(st.lists(st.booleans(), min_size=8, max_size=8))
def test_shell_closed_for_any_open_subset(mask):
    m = shapes.grid_plane(2)
    front = np.where(mask, 5, 5)
    back = np.where(mask, 5, 0)
    out, rec = offset_open_surfaces(m, fake(m, front, back), CFG, 0.01)
    gen = np.nonzero(rec.face_kind != ORIGINAL)[0]
    opened = [f for f in range(m.n_faces) if mask[f]]
    shell = IndexedMesh(out.vertices, out.faces[np.concatenate([opened, gen]).astype(int)])
    if opened:
        assert is_watertight(shell)
    else:
        assert len(gen) == 0
