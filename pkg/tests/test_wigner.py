import numpy as np
import pytest

from covariant_weyl.expr_lang import Context, parse_expr
from covariant_weyl.wigner_numeric import (DegreeTooHigh, GridMismatch, UnderResolved,
                                           direct_operator_check, hermiticity,
                                           moyal_residual_flat, plane_wave_1d, sample,
                                           wigner_flat)

L = 2 * np.pi


def gaussian(width=0.3, k0=1.0, eps=0.1, grid=256, x0=np.pi):
    norm = (np.pi * width ** 2) ** -0.25
    return sample(lambda x: norm * np.exp(-(x - x0) ** 2 / (2 * width ** 2) + 1j * k0 * x / eps),
                  (0.0,), (L,), (grid,), eps)


def test_gaussian_wigner_is_the_classical_gaussian():
    width, k0, eps = 0.3, 1.0, 0.1
    psi = gaussian(width, k0, eps)
    W = wigner_flat(psi, psi, boundary="zero")
    x = psi.axes()[0][W.index[:, 0]]
    p = W.momentum[0]
    exact = np.exp(-(x[:, None] - np.pi) ** 2 / width ** 2
                   - width ** 2 * (p[None, :] - k0) ** 2 / eps ** 2) / (np.pi * eps)
    got = W.values[..., 0, 0]
    assert np.max(np.abs(got - exact)) < 1e-8 * np.max(exact)
    assert np.min(got.real) > -1e-10
    assert float(np.sum(got.real)) * W.dz() * W.dp() == pytest.approx(1.0, abs=1e-6)


def test_periodic_transform_shows_the_image_interference():
    psi = gaussian()
    W = wigner_flat(psi, psi).values[..., 0, 0].real
    ghost = W[0]
    assert np.max(np.abs(ghost)) == pytest.approx(np.max(W[128]), rel=1e-8)
    assert abs(float(np.sum(ghost))) < 1e-8 * float(np.sum(np.abs(ghost)))


def test_diagonal_wigner_is_real():
    psi = gaussian(k0=0.7)
    W = wigner_flat(psi, psi)
    assert np.max(np.abs(W.values.imag)) < 1e-10


def test_plane_wave_peaks_at_its_momentum():
    eps, mode = 0.1, 5
    k = eps * mode
    psi = sample(lambda x: np.exp(1j * k * x / eps), (0.0,), (L,), (128,), eps)
    W = wigner_flat(psi, psi, centers=[(17,)])
    peak = W.momentum[0][np.argmax(np.abs(W.values[0, :, 0, 0]))]
    assert peak == pytest.approx(k, abs=1e-12)


def test_marginals():
    psi = gaussian(k0=0.5)
    W = wigner_flat(psi, psi, boundary="zero")
    dens = np.abs(psi.values[W.index[:, 0], 0]) ** 2
    np.testing.assert_allclose(W.marginal_p()[:, 0, 0].real, dens, atol=1e-10)
    # momentum marginal against the continuum Fourier transform of the packet
    x = psi.axes()[0]
    p = W.momentum[0]
    ft = np.exp(-1j * np.outer(p, x) / psi.epsilon) @ psi.values[:, 0] * psi.spacing[0]
    ft /= np.sqrt(2 * np.pi * psi.epsilon)
    np.testing.assert_allclose(np.sum(W.values[..., 0, 0], axis=0).real * W.dz(),
                               np.abs(ft) ** 2, atol=1e-8)


def test_hermiticity_of_two_component_transforms():
    assert hermiticity() < 1e-10


def test_on_and_off_shell_plane_waves():
    assert plane_wave_1d().relative < 1e-6
    assert plane_wave_1d(k_symbol=0.7).relative > 1e-2


def test_direct_operator_route_agrees_to_second_order_in_the_spacing():
    # z-derivatives are central differences, so the two routes differ by O(h^2)
    coarse, fine = direct_operator_check(grid=512), direct_operator_check(grid=1024)
    assert coarse < 2e-3
    assert coarse / fine == pytest.approx(4.0, abs=0.1)


def test_degree_too_high():
    ctx = Context()
    psi = gaussian()
    W = wigner_flat(psi, psi, centers=[(100,)], reach=1)
    with pytest.raises(DegreeTooHigh):
        moyal_residual_flat(parse_expr("p[_a] * p[^a] * p[_b] * p[^b]", ctx), W)


def test_grid_errors():
    a = gaussian(grid=256)
    with pytest.raises(GridMismatch):
        wigner_flat(a, gaussian(grid=128))
    coarse = sample(lambda x: np.exp(1j * 3.0 * x / 0.1), (0.0,), (L,), (64,), 0.1)
    with pytest.raises(UnderResolved):
        wigner_flat(coarse, coarse)
