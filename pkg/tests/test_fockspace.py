import json
import math

import numpy as np
import pytest

from phonon_optics import (
    JointState,
    MotionalState,
    QubitState,
    Truncation,
    expect,
    fidelity,
    inner,
    joint_state,
    make_cat,
    make_coherent,
    make_fock,
    number_distributions,
    reduced_purity,
    state_from_json,
    state_to_json,
    truncation_for_coherent,
)


def poisson_pmf(lam, k):
    return math.exp(-lam) * lam**k / math.factorial(k)


def test_truncation_dimension():
    assert Truncation(0).dim == 1
    assert Truncation(4).dim == 15
    assert Truncation(40).dim == 41 * 42 // 2


def test_truncation_rejects_negative():
    with pytest.raises(ValueError):
        Truncation(-1)


def test_truncation_index_ordering():
    t = Truncation(3)
    ms, ns = t.mode_numbers()
    # lexicographic (total, m): block N occupies indices N(N+1)/2 ..
    assert list(zip(ms[:6], ns[:6])) == [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]
    for i, (m, n) in enumerate(zip(ms, ns)):
        assert t.index(int(m), int(n)) == i


def test_make_fock_basic():
    t = Truncation(4)
    s = make_fock(1, 0, t)
    assert s.amplitude(1, 0) == 1.0
    assert abs(np.vdot(s.amps, s.amps) - 1) < 1e-15
    assert s.tail_mass == 0.0


def test_make_fock_vacuum_in_trivial_space():
    t = Truncation(0)
    s = make_fock(0, 0, t)
    assert s.amps.shape == (1,)
    assert s.amplitude(0, 0) == 1.0


def test_make_fock_rejects_out_of_truncation():
    with pytest.raises(ValueError, match="outside truncation"):
        make_fock(2, 3, Truncation(4))


def test_coherent_vacuum():
    s = make_coherent(0, 0, Truncation(5))
    assert s.amplitude(0, 0) == pytest.approx(1.0, abs=1e-15)
    assert s.tail_mass == 0.0
    assert not s.flagged


def test_coherent_poisson_marginal():
    # |0>_c |beta=2>_r: p_n is Poisson with mean 4
    s = make_coherent(0, 2, Truncation(30))
    assert s.tail_mass < 1e-12
    d = number_distributions(s)
    for n in range(20):
        assert d.p_n[n] == pytest.approx(poisson_pmf(4.0, n), abs=1e-12)
    assert expect(s, "nr") == pytest.approx(4.0, abs=1e-9)


def test_coherent_tail_mass_flagging():
    # alpha = beta = 1 at n_total_max = 2 keeps weight exp(-2) * sum_{m+n<=2} 1/(m! n!)
    s = make_coherent(1, 1, Truncation(2))
    retained = math.exp(-2) * (1 + 1 + 1 + 0.5 + 1 + 0.5)
    assert s.tail_mass == pytest.approx(1 - retained, abs=1e-12)
    assert s.flagged


def test_coherent_moments_are_poissonian():
    beta = 1.7
    s = make_coherent(0, beta, Truncation(40))
    assert s.tail_mass < 1e-12
    d = number_distributions(s)
    n = np.arange(d.p_n.size)
    mean = float(n @ d.p_n)
    var = float((n**2) @ d.p_n) - mean**2
    assert mean == pytest.approx(beta**2, abs=1e-9)
    assert var == pytest.approx(beta**2, abs=1e-9)


def test_cat_even_alpha_zero_is_vacuum():
    s = make_cat(0, "even", "c", Truncation(4))
    assert s.amplitude(0, 0) == pytest.approx(1.0, abs=1e-15)


def test_cat_odd_alpha_zero_rejected():
    with pytest.raises(ValueError, match="zero vector"):
        make_cat(0, "odd", "c", Truncation(4))


def test_cat_odd_support():
    s = make_cat(1, "odd", "c", Truncation(20))
    ms, ns = s.trunc.mode_numbers()
    # support only on odd m with the breathing mode in vacuum, exactly
    assert np.all(s.amps[ns != 0] == 0)
    assert np.all(s.amps[ms % 2 == 0] == 0)
    # amplitudes match the explicit expansion N_- (|alpha> - |-alpha>)
    norm = 1 / math.sqrt(2 * (1 - math.exp(-2)))
    for m in (1, 3, 5, 7):
        want = norm * 2 * math.exp(-0.5) / math.sqrt(math.factorial(m))
        assert s.amplitude(m, 0) == pytest.approx(want, abs=1e-12)


def test_cat_even_parity_exact():
    s = make_cat(1.3, "even", "r", Truncation(30))
    _, ns = s.trunc.mode_numbers()
    assert np.all(s.amps[ns % 2 == 1] == 0)
    d = number_distributions(s)
    parity = sum((-1) ** n * p for n, p in enumerate(d.p_n))
    assert parity == pytest.approx(1.0, abs=1e-12)


def test_cat_validates_arguments():
    with pytest.raises(ValueError):
        make_cat(1, "weird", "c", Truncation(4))
    with pytest.raises(ValueError):
        make_cat(1, "even", "x", Truncation(4))


def test_inner_self_and_orthogonal():
    t = Truncation(4)
    a = make_fock(1, 0, t)
    b = make_fock(0, 1, t)
    assert inner(a, a) == pytest.approx(1.0)
    assert inner(a, b) == 0.0
    assert fidelity(a, b) == 0.0


def test_inner_requires_matching_truncation():
    with pytest.raises(ValueError, match="truncation mismatch"):
        inner(make_fock(0, 0, Truncation(2)), make_fock(0, 0, Truncation(3)))


def test_inner_coherent_overlap():
    # <alpha=1 | alpha=-1> = exp(-|1 - (-1)|^2 / 2) = exp(-2)
    t = Truncation(30)
    a = make_coherent(1, 0, t)
    b = make_coherent(-1, 0, t)
    assert inner(a, b) == pytest.approx(math.exp(-2), abs=1e-12)


def test_number_distributions_fock():
    d = number_distributions(make_fock(1, 0, Truncation(4)))
    assert d.p_mn[1, 0] == 1.0
    assert d.mean_jz == pytest.approx(0.5)


def test_number_distributions_single_phonon_superposition():
    t = Truncation(4)
    amps = np.zeros(t.dim, complex)
    amps[t.index(1, 0)] = 1 / math.sqrt(2)
    amps[t.index(0, 1)] = -1j / math.sqrt(2)
    d = number_distributions(MotionalState(t, amps))
    assert d.p_m[0] == pytest.approx(0.5)
    assert d.p_m[1] == pytest.approx(0.5)
    assert d.mean_jz == pytest.approx(0.0, abs=1e-15)


def test_number_distributions_coherent_mean():
    d = number_distributions(make_coherent(0, 2, Truncation(30)))
    assert d.mean_jz == pytest.approx(-2.0, abs=1e-9)


def test_marginals_consistent_with_expect():
    rng = np.random.default_rng(3)
    t = Truncation(7)
    for _ in range(5):
        amps = rng.normal(size=t.dim) + 1j * rng.normal(size=t.dim)
        amps /= np.linalg.norm(amps)
        s = MotionalState(t, amps)
        d = number_distributions(s)
        assert d.p_m.sum() == pytest.approx(1.0, abs=1e-12)
        assert d.p_n.sum() == pytest.approx(1.0, abs=1e-12)
        assert d.mean_jz == pytest.approx(expect(s, "jz"), abs=1e-12)


def test_expect_jz_fock():
    assert expect(make_fock(1, 0, Truncation(3)), "jz") == pytest.approx(0.5)


def test_expect_jx_single_phonon():
    # (|1,0> + |0,1>)/sqrt(2) lies in the 2x2 block with off-diagonal 1/2
    t = Truncation(3)
    amps = np.zeros(t.dim, complex)
    amps[t.index(1, 0)] = amps[t.index(0, 1)] = 1 / math.sqrt(2)
    s = MotionalState(t, amps)
    assert expect(s, "jx") == pytest.approx(0.5, abs=1e-14)
    assert expect(s, "jy") == pytest.approx(0.0, abs=1e-14)


def test_expect_rejects_unknown():
    with pytest.raises(ValueError, match="unknown observable"):
        expect(make_fock(0, 0, Truncation(1)), "jw")


def test_norm_validation():
    t = Truncation(2)
    with pytest.raises(ValueError, match="not normalized"):
        MotionalState(t, np.ones(t.dim))


def test_reduced_purity_product_and_entangled():
    t = Truncation(4)
    assert reduced_purity(make_fock(2, 1, t)) == pytest.approx(1.0)
    amps = np.zeros(t.dim, complex)
    amps[t.index(1, 0)] = 1 / math.sqrt(2)
    amps[t.index(0, 1)] = -1j / math.sqrt(2)
    assert reduced_purity(MotionalState(t, amps)) == pytest.approx(0.5, abs=1e-12)


def test_state_json_round_trip():
    s = make_coherent(0.3 + 0.1j, -0.4, Truncation(12))
    text = state_to_json(s)
    data = json.loads(text)
    assert data["n_total_max"] == 12
    back = state_from_json(text)
    assert fidelity(s, back) == pytest.approx(1.0, abs=1e-15)
    assert back.tail_mass == s.tail_mass


def test_distribution_csv_format():
    d = number_distributions(make_fock(1, 1, Truncation(2)))
    lines = d.to_csv().strip().splitlines()
    assert lines[0] == "m,n,p"
    assert lines[1:4] == ["0,0,0", "0,1,0", "1,0,0"]
    assert lines[5] == "1,1,1"


def test_truncation_for_coherent_tail():
    for alpha, beta in ((0, 1), (0, 2), (0, 3), (1, 2)):
        t = truncation_for_coherent(alpha, beta, 1e-12)
        s = make_coherent(alpha, beta, t)
        assert s.tail_mass < 1e-12
        assert not s.flagged


# qubit and joint states ----------------------------------------------------


def test_qubit_state_constructors():
    g = QubitState.ground()
    assert g.amps[0] == 1.0
    assert QubitState.plus().sigma_x_eigenvalue() == 1
    assert QubitState.minus().sigma_x_eigenvalue() == -1
    assert QubitState.of(1 / math.sqrt(2), 1j / math.sqrt(2)).sigma_x_eigenvalue() is None
    with pytest.raises(ValueError, match="not normalized"):
        QubitState.of(1.0, 1.0)


def test_joint_state_shapes_and_norm():
    s = make_fock(1, 0, Truncation(3))
    js = joint_state(s, ion1=QubitState.plus(), ion2=QubitState.ground())
    assert js.ions == (1, 2)
    assert js.amps.shape == (2, 2, s.trunc.dim)
    assert js.qubit_count == 2
    js2 = joint_state(s, ion2=QubitState.excited())
    assert js2.ions == (2,)
    assert js2.ground_probability(2) == pytest.approx(0.0)
    with pytest.raises(ValueError, match="no qubit register"):
        js2.axis_of(1)


def test_joint_state_reduced_quantities():
    s = make_fock(0, 0, Truncation(2))
    js = joint_state(s, ion2=QubitState.plus())
    rho = js.reduced_qubit(2)
    assert np.allclose(rho, 0.5 * np.ones((2, 2)))
    assert js.expect_sigma_x(2) == pytest.approx(1.0)
    assert js.qubit_fidelity(2, QubitState.plus()) == pytest.approx(1.0)
    assert js.motional_fidelity(s) == pytest.approx(1.0)


def test_joint_state_motional_fidelity_mixes_branches():
    # (|g> (x) |1,0> + |e> (x) |0,1>)/sqrt(2): fidelity with |1,0> is 1/2
    t = Truncation(2)
    amps = np.zeros((2, t.dim), complex)
    amps[0, t.index(1, 0)] = 1 / math.sqrt(2)
    amps[1, t.index(0, 1)] = 1 / math.sqrt(2)
    js = JointState(t, (2,), amps)
    assert js.motional_fidelity(make_fock(1, 0, t)) == pytest.approx(0.5)
