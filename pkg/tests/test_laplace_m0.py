import numpy as np
import pytest

from conftest import random_couplings
from qdspin.blocks import assemble_hamiltonian, sector_blocks
from qdspin import laplace_m0
from qdspin.errors import DegeneratePolesError, NumericError
from qdspin.evolver import evolve_sector
from qdspin.laplace_m0 import (CharPoly, approx_poles, char_poly_coeffs, exact_y_branch_poles,
                               find_poles, invert_xj, invert_y0, pole_approx_amplitudes,
                               rational_solution, symmetric_product_weights, y_branch_poles)
from qdspin.model import CouplingSet


def random_initial(rng, n):
    v = rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1)
    v /= np.linalg.norm(v)
    return v[0], v[1:]


def test_n1_polynomial():
    a = 0.6
    poly = char_poly_coeffs(CouplingSet([a]))
    # (z + a/2)^2 - a^2/16
    np.testing.assert_allclose(poly.coeffs, [1.0, a, a * a / 4 - a * a / 16], atol=1e-15)
    np.testing.assert_allclose(find_poles(poly), [-3 * a / 4, -a / 4], atol=1e-15)
    np.testing.assert_allclose(find_poles(char_poly_coeffs(CouplingSet([4.0]))), [-3, -1],
                               atol=1e-14)


def test_decoupled_polynomial():
    eps = 0.7
    poly = char_poly_coeffs(CouplingSet([0.0] * 3, eps))
    np.testing.assert_allclose(poly.coeffs, np.poly([-eps, eps, eps, eps]), atol=1e-15)
    np.testing.assert_allclose(find_poles(char_poly_coeffs(CouplingSet([0.0, 0.0], 1.0))),
                               [-1, 1, 1], atol=1e-15)


@pytest.mark.parametrize("couplings, eps", [
    ([1.0] * 6, 100.0),
    ([0.3] * 10, 0.0),
    ([0.5, 0.5, 0.3, 0.0, 0.3], 0.2),
])
def test_repeated_poles_found_exactly(couplings, eps):
    cs = CouplingSet(couplings, eps)
    lam = np.linalg.eigvalsh(assemble_hamiltonian(sector_blocks(cs, 0)))
    np.testing.assert_allclose(find_poles(char_poly_coeffs(cs)), lam, rtol=1e-12, atol=1e-12)


def test_n3_quartic_against_explicit_form(rng):
    a = 1.0 - rng.random(3)
    eps = 0.35
    cs = CouplingSet(a, eps)
    b0 = eps + a.sum() / 2
    poly = char_poly_coeffs(cs)
    for z in [0.3, -1.1, 2.0 + 0.5j, -0.4j, 0.77]:
        d3 = np.prod([z - b0 + ai for ai in a])
        d2 = [np.prod([z - b0 + a[j] for j in range(3) if j != i]) for i in range(3)]
        explicit = (z + b0) * d3 - sum(a[i] ** 2 * d2[i] for i in range(3)) / 16
        assert poly(z) == pytest.approx(explicit, rel=1e-13, abs=1e-14)
        assert np.polyval(poly.coeffs, z) == pytest.approx(explicit, rel=1e-12, abs=1e-13)


def test_n3_poles_equal_eigenvalues(rng):
    cs = random_couplings(rng, 3, 0.2)
    lam = np.linalg.eigvalsh(assemble_hamiltonian(sector_blocks(cs, 0)))
    np.testing.assert_allclose(find_poles(char_poly_coeffs(cs)), lam, rtol=1e-12, atol=1e-14)


def test_complex_roots_rejected(monkeypatch):
    # real levels and couplings always give real roots; feed z^2 + 1 directly
    monkeypatch.setattr(laplace_m0, "_local_coeffs", lambda *args: np.array([1.0, 0.0, 1.0]))
    poly = CharPoly(0.0, np.array([0.5]), np.array([1.0]), np.array([1.0, 0.0, 1.0]))
    with pytest.raises(NumericError, match="imaginary part"):
        find_poles(poly)


def test_sum_rules(rng):
    cs = random_couplings(rng, 4, 0.5)
    y0, x0 = random_initial(rng, 4)
    sol = rational_solution(cs, y0, x0)
    assert abs(invert_y0(sol, 0.0) - y0) <= 1e-12
    assert abs(np.sum(sol.y_residues) - y0) <= 1e-12
    for j in range(4):
        assert abs(invert_xj(sol, j, 0.0) - x0[j]) <= 1e-12


def test_n1_closed_form():
    a = 0.7
    sol = rational_solution(CouplingSet([a]), 1.0, [0.0])
    t = np.linspace(0, 60, 200)
    np.testing.assert_allclose(np.abs(invert_y0(sol, t)) ** 2, np.cos(a * t / 4) ** 2, atol=1e-13)
    # Y_0(t) = cos(at/4) exp(i a t / 2)
    np.testing.assert_allclose(invert_y0(sol, t), np.cos(a * t / 4) * np.exp(0.5j * a * t),
                               atol=1e-13)


@pytest.mark.parametrize("n, eps", [(3, 0.0), (3, 1.0), (4, 0.3), (4, 10.0)])
def test_matches_spectral_route(rng, n, eps):
    cs = random_couplings(rng, n, eps)
    y0, x0 = random_initial(rng, n)
    t = np.linspace(0, 50 / cs.a.max(), 200)
    sol = rational_solution(cs, y0, x0)
    ref = evolve_sector(sector_blocks(cs, 0), np.concatenate([[y0], x0]), t)
    assert np.max(np.abs(invert_y0(sol, t) - ref.y_amps[:, 0])) <= 1e-8
    for j in range(n):
        assert np.max(np.abs(invert_xj(sol, j, t) - ref.x_amps[:, j])) <= 1e-8


def test_degenerate_couplings_refused():
    with pytest.raises(DegeneratePolesError, match="spectral evolver"):
        rational_solution(CouplingSet([0.5, 0.5, 0.3]), 1.0, [0, 0, 0])


def test_decoupled_pole_collision_refused():
    # with A = 0 every bare X level is itself a pole
    with pytest.raises(DegeneratePolesError):
        rational_solution(CouplingSet([0.0], 1.0), 1.0, [0.0])


def test_x0_shape_checked():
    with pytest.raises(ValueError):
        rational_solution(CouplingSet([0.3, 0.5]), 1.0, [0.0])


def test_vandermonde_weights(rng):
    cs = random_couplings(rng, 3, 0.6)
    poles = find_poles(char_poly_coeffs(cs))
    direct = [1.0 / np.prod(np.delete(p - poles, l)) for l, p in enumerate(poles)]
    np.testing.assert_allclose(symmetric_product_weights(poles), direct, rtol=1e-12)


def test_pole_approx_decoupled_is_exact():
    cs = CouplingSet([0.0] * 4, 1.3)
    for m in range(4):
        exact = exact_y_branch_poles(cs, m)
        np.testing.assert_allclose(np.sort(y_branch_poles(cs, m, "PA0")), exact)
        np.testing.assert_allclose(np.sort(y_branch_poles(cs, m, "PA1")), exact)


def test_pa1_exact_on_single_y_config(rng):
    a = 0.8
    np.testing.assert_allclose(approx_poles(CouplingSet([a]), 0, "PA1")[0], [-3 * a / 4, -a / 4],
                               atol=1e-15)
    cs = random_couplings(rng, 5, 0.4)
    np.testing.assert_allclose(approx_poles(cs, 0, "PA1")[0], find_poles(char_poly_coeffs(cs)),
                               atol=1e-12)
    blocks = sector_blocks(cs, 0)
    psi0 = np.concatenate(random_initial(rng, 5), axis=None)
    t = np.linspace(0, 40, 50)
    approx = pole_approx_amplitudes(blocks, psi0, t, "PA1")
    exact = evolve_sector(blocks, psi0, t)
    assert np.max(np.abs(approx.amplitudes - exact.amplitudes)) <= 1e-11


def test_pa1_root_counts(rng):
    cs = random_couplings(rng, 6, 2.0)
    for m in range(6):
        for roots in approx_poles(cs, m, "PA1"):
            assert len(roots) == 6 - m + 1
            assert np.all(np.diff(roots) >= 0)


def test_pa0_amplitudes_are_bare_phases():
    blocks = sector_blocks(CouplingSet([0.3, 0.6, 0.9], 2.0), 1)
    psi0 = np.ones(6) / np.sqrt(6)
    t = np.array([0.0, 1.5])
    traj = pole_approx_amplitudes(blocks, psi0, t, "PA0")
    np.testing.assert_allclose(traj.amplitudes[1], psi0 * np.exp(-1.5j * blocks.diagonal))


def test_pa1_close_to_exact_at_large_zeeman(rng):
    cs = random_couplings(rng, 5, 100.0)
    blocks = sector_blocks(cs, 2)
    psi0 = np.zeros(blocks.dim, complex)
    psi0[0] = 1.0
    t = np.linspace(0, 20, 40)
    approx = pole_approx_amplitudes(blocks, psi0, t, "PA1")
    exact = evolve_sector(blocks, psi0, t)
    assert np.max(np.abs(approx.y_amps - exact.y_amps)) < 1e-2


@pytest.mark.parametrize("m", [1, 2, 3])
def test_pa1_error_shrinks_with_zeeman(m):
    errors = []
    for ratio in (10, 100, 1000):
        cs = CouplingSet.uniform(6, 1.0, epsilon_e=ratio)
        errors.append(np.max(np.abs(np.sort(y_branch_poles(cs, m, "PA1"))
                                    - exact_y_branch_poles(cs, m))))
    assert errors[0] > errors[1] > errors[2]


def test_unknown_variant():
    with pytest.raises(ValueError):
        approx_poles(CouplingSet([0.3, 0.4]), 0, "PA2")
