import math
from fractions import Fraction as F

import pytest

from mrsolve.errors import NotBoundState, ParameterError, UnphysicalLevel
from mrsolve.potentials import PotentialSpec
from mrsolve.reduction import reduce
from mrsolve.spectrum import (
    PRESETS,
    Provenance,
    SolverConfig,
    closed_form_epsilon2,
    energy_equation_roots,
    enumerate_levels,
    get_preset,
    preset_energy,
    preset_levels,
    solve_energy,
)

BINDING = PotentialSpec(V1=0.02, V2=-0.2, alpha=0.1, q=1.0, m=1.0)


def test_closed_form_examples():
    assert closed_form_epsilon2(F(1), F(0), 0) == F(1, 4)
    # 4 beta^4 = 16 here
    assert closed_form_epsilon2(F(2), F(2), 1) == F(97, 36)
    assert closed_form_epsilon2(F(2), F(-2), 1) == F(97, 36)
    assert closed_form_epsilon2(F(2), F(1), 0) == F(5, 4)
    with pytest.raises(ParameterError):
        closed_form_epsilon2(F(-2), F(1), 2)


def test_free_limit_roots_are_unphysical():
    spec = PotentialSpec(0.0, 0.0, 0.1, 1.0)
    roots = energy_equation_roots(spec, 0)
    assert [r[0] for r in roots] == pytest.approx([-math.sqrt(0.99), math.sqrt(0.99)], rel=1e-12)
    assert not any(r[1] for r in roots)
    with pytest.raises(UnphysicalLevel):
        solve_energy(spec, 0)


def test_repulsive_and_pinned_sets_have_no_levels():
    assert enumerate_levels(PotentialSpec(0.5, 0.2, 0.1, 1.0)) == []
    assert enumerate_levels(PotentialSpec(0.5, -0.2, 0.1, 1.0)) == []


def test_binding_levels():
    levels = enumerate_levels(BINDING)
    assert [lv.n for lv in levels] == [0, 1, 2]
    Es = [lv.E for lv in levels]
    assert all(a < b < 1 for a, b in zip(Es, Es[1:]))
    for lv in levels:
        assert lv.c > 0 and abs(lv.E) < 1
        assert lv.residual < 1e-12
        assert lv.provenance is Provenance.CLOSED_FORM
    with pytest.raises(NotBoundState):
        solve_energy(BINDING, 3)
    with pytest.raises(NotBoundState):
        solve_energy(BINDING, 40)


def test_self_consistency():
    for lv in enumerate_levels(BINDING):
        p = reduce(BINDING, lv.E)
        eps2 = closed_form_epsilon2(p.gamma, p.beta2, lv.n)
        assert eps2 == pytest.approx(lv.epsilon2, rel=1e-12)
        assert p.epsilon2 == pytest.approx(lv.epsilon2, rel=1e-10)


@pytest.mark.parametrize("mode", ["symbolic-aim", "numeric-aim"])
def test_modes_agree(mode):
    ref = enumerate_levels(BINDING)
    other = enumerate_levels(BINDING, mode=mode)
    assert len(other) == len(ref)
    for a, b in zip(ref, other):
        assert b.E == pytest.approx(a.E, rel=1e-10)
        assert b.provenance.value == mode


def test_printed_convention_changes_spectrum():
    printed = enumerate_levels(BINDING, config=SolverConfig(convention="printed"))
    derived = enumerate_levels(BINDING)
    assert abs(printed[0].E - derived[0].E) > 0.1


def test_antiparticle_branch_not_above_particle():
    spec = PotentialSpec(-0.05, 0.0, 0.1, -1.0)
    for n in range(2):
        roots = [r for r in energy_equation_roots(spec, n) if r[1]]
        part = solve_energy(spec, n).E
        anti = solve_energy(spec, n, "antiparticle").E
        assert anti <= part and anti == min(r[0] for r in roots)


def test_complex_gamma_warns():
    spec = PotentialSpec(-0.004, -0.2, 0.1, 1.0)
    with pytest.warns(RuntimeWarning, match="complex"):
        try:
            solve_energy(spec, 0)
        except NotBoundState:
            pass


def test_pt_preset_has_no_tail_term():
    levels = preset_levels("poschl-teller", 0.05, 0.0, 0.1)
    assert len(levels) >= 2
    for lv in levels:
        assert lv.beta2 == 0
        g = lv.gamma + lv.n
        assert lv.epsilon2 == pytest.approx(g * g / 4, rel=1e-14)


@pytest.mark.parametrize("name,V1,V2", [("poschl-teller", 0.05, 0.0), ("rosen-morse", 0.05, 0.01), ("eckart", 0.02, 0.2)])
def test_preset_identity(name, V1, V2):
    case = get_preset(name)
    general = case.to_general(V1, V2, 0.1)
    a = preset_levels(case, V1, V2, 0.1)
    b = enumerate_levels(general)
    assert len(a) == len(b) > 0
    for x, y in zip(a, b):
        assert x.E == pytest.approx(y.E, rel=1e-12)


def test_preset_substitutions():
    assert PRESETS["rosen-morse"].to_general(1.0, 0.3, 0.2) == PotentialSpec(-1.0, 0.3, 0.2, -1.0)
    assert PRESETS["eckart"].to_general(1.0, 0.3, 0.2) == PotentialSpec(1.0, -0.3, 0.2, 1.0)
    with pytest.raises(ParameterError):
        PRESETS["poschl-teller"].to_general(1.0, 0.1, 0.2)
    with pytest.raises(ParameterError):
        get_preset("morse")


def test_preset_energy_single_level():
    lv = preset_energy("eckart", 0.02, 0.2, 0.1, 0)
    assert lv.E == pytest.approx(solve_energy(BINDING, 0).E, rel=1e-12)


def test_negative_n_rejected():
    with pytest.raises(ParameterError):
        solve_energy(BINDING, -1)


def test_numeric_precision_fallback():
    from mrsolve.reduction import quantized_c
    from mrsolve.spectrum import numeric_c

    g, b2 = F(29, 6), F(13, 6)
    exact = float(quantized_c(g, b2, 3))
    assert numeric_c(float(g), float(b2), 1.0, 3) == pytest.approx(exact, abs=1e-9)
