import math

import numpy as np
import pytest

from potspec.discretization import (
    DimensionMismatchError,
    KernelMatrix,
    OperatorKind,
    apply,
    assemble,
    dump_matrix,
    load_matrix,
)
from potspec.domains import Ball, Box, Disc, Mesh, make_mesh
from potspec.eigensolve import decompose
from potspec.experiments import analytic_top, challenger_zoo_2d, convergence_study
from potspec.kernels import kernel_value, self_cell_integral


def test_single_cell_matrix_is_self_integral():
    mesh = Mesh.from_points(Disc(1.0), 0.1, [[0.0, 0.0]])
    a = assemble(mesh, "log2d")
    assert a.n == 1
    assert a.entries[0, 0] == self_cell_integral(2, 0.01)


def test_two_cell_entries():
    mesh = Mesh.from_points(Ball(1.0), 0.2, [[0, 0, 0], [0.3, 0.4, 0]])
    a = assemble(mesh)
    assert a.kind is OperatorKind.NEWTON3D
    assert a.entries[0, 1] == pytest.approx(kernel_value(3, 0.5) * 0.008, rel=1e-15)
    assert a.diagonal_value == pytest.approx(0.5 * (3 * 0.008 / (4 * math.pi)) ** (2 / 3))


@pytest.mark.parametrize("dom,h", [(Disc(1.0), 0.1), (Ball(1.0), 0.25), (Box((2.0, 1.0)), 0.1)])
def test_matrix_is_bitwise_symmetric_and_read_only(dom, h):
    a = assemble(make_mesh(dom, h))
    assert np.array_equal(a.entries, a.entries.T)
    assert not a.entries.flags.writeable
    if dom.dimension == 3:
        assert np.all(a.entries > 0)


def test_operator_kind_parsing():
    assert OperatorKind.parse("LOG2D") is OperatorKind.LOG2D
    assert OperatorKind.parse("newton3d").dimension == 3
    with pytest.raises(ValueError):
        OperatorKind.parse("helmholtz")


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        assemble(make_mesh(Disc(1.0), 0.1), OperatorKind.NEWTON3D)


def test_apply_examples():
    mesh = Mesh.from_points(Disc(1.0), 0.1, [[0, 0], [1, 0]])
    a = assemble(mesh)
    out = apply(a, [1.0, 0.0])
    assert out[0] == a.entries[0, 0] and out[1] == 0.0  # ln(1/1) = 0
    with pytest.raises(ValueError):
        apply(a, [1.0, 2.0, 3.0])


def test_dump_roundtrip(tmp_path):
    a = assemble(make_mesh(Disc(1.0), 0.2))
    path = tmp_path / "m.bin"
    dump_matrix(a, path)
    raw = path.read_bytes()
    assert len(raw) == 8 + 8 * a.n * a.n
    dim, entries = load_matrix(path)
    assert dim == 2 and np.array_equal(entries, a.entries)
    path.write_bytes(raw[:-8])
    with pytest.raises(ValueError):
        load_matrix(path)


def test_disc_top_eigenvalue_near_analytic():
    a = assemble(make_mesh(Disc(1.0), 0.05))
    lam = decompose(a, k=1).eigenvalues[0]
    assert abs(lam - 1 / 2.404825557695773 ** 2) / 0.1729150690 < 0.02


def test_newton_matrix_is_positive_semidefinite():
    a = assemble(make_mesh(Ball(1.0), 0.2))
    vals = decompose(a).eigenvalues
    assert vals.min() >= -1e-10 * np.abs(vals).max()


def test_log_matrices_have_at_most_one_negative_eigenvalue():
    for name, dom in challenger_zoo_2d():
        spec = decompose(assemble(make_mesh(dom, 0.12)))
        assert spec.negative_count <= 1, name


@pytest.mark.slow
@pytest.mark.parametrize("dom", [Disc(1.0), Ball(1.0)], ids=["disc", "ball"])
def test_observed_convergence_order(dom):
    kind = OperatorKind.for_dimension(dom.dimension)
    table = convergence_study(dom, kind, k_top=5, analytic=analytic_top(kind, 5))
    orders = np.asarray(table.orders)
    assert np.all(orders[:5] >= 1.0)
