#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
気体力学コアのテスト

変換・流束・導出量の代表値と、乱数で生成した状態に対する性質を確認します。
"""

import numpy as np
import numpy.testing as npt
import pytest

from errors import ConfigError, NonPhysicalState
from gasdynamics_core import (
    ConservedState,
    GasModel,
    Geometry,
    PrimitiveState,
    RadialGrid,
    conserved_to_primitive,
    flux_from_primitive,
    mach_number,
    physical_flux,
    primitive_to_conserved,
    sound_speed,
    temperature,
    total_energy,
)

GAS = GasModel(1.4)


def random_states(seed=0, count=1000):
    rng = np.random.default_rng(seed)
    return PrimitiveState(rng.uniform(0.5, 2.0, count), rng.uniform(-1.0, 1.0, count), rng.uniform(0.5, 2.0, count))


def test_gas_model_rejects_gamma_at_or_below_one():
    with pytest.raises(ConfigError):
        GasModel(1.0)
    with pytest.raises(ConfigError):
        GasModel(0.5)


def test_total_energy_examples():
    assert total_energy(PrimitiveState(1.0, 0.0, 1.0), GAS) == pytest.approx(2.5, rel=1e-15)
    assert total_energy(PrimitiveState(2.0, 3.0, 4.0), GAS) == pytest.approx(9.5, rel=1e-15)
    assert 0.0 < total_energy(PrimitiveState(1.0, 0.0, 1e-300), GAS) < 1e-290


def test_primitive_to_conserved_examples():
    cons = primitive_to_conserved(PrimitiveState(1.0, 0.0, 1.0), GAS)
    npt.assert_allclose(cons.as_array(), [1.0, 0.0, 2.5], rtol=1e-15)
    cons = primitive_to_conserved(PrimitiveState(2.0, 3.0, 4.0), GAS)
    npt.assert_allclose(cons.as_array(), [2.0, 6.0, 19.0], rtol=1e-15)


def test_conserved_to_primitive_examples():
    prim = conserved_to_primitive(ConservedState(1.0, 0.0, 2.5), GAS)
    npt.assert_allclose(prim.as_array(), [1.0, 0.0, 1.0], rtol=1e-14)
    prim = conserved_to_primitive(ConservedState(2.0, 6.0, 19.0), GAS)
    npt.assert_allclose(prim.as_array(), [2.0, 3.0, 4.0], rtol=1e-14)


def test_negative_energy_is_non_physical():
    with pytest.raises(NonPhysicalState):
        conserved_to_primitive(ConservedState(1.0, 0.0, -1.0), GAS)


def test_non_physical_cells_are_reported():
    cons = ConservedState(np.array([1.0, -1.0, 1.0, 1.0]), np.zeros(4), np.array([2.5, 2.5, 2.5, -0.1]))
    with pytest.raises(NonPhysicalState) as info:
        conserved_to_primitive(cons, GAS)
    assert info.value.cells == [1, 3]


def test_sound_speed_examples():
    assert sound_speed(PrimitiveState(1.0, 0.0, 1.0 / 1.4), GAS) == pytest.approx(1.0, rel=1e-15)
    assert sound_speed(PrimitiveState(1.0, 0.0, 1.4), GAS) == pytest.approx(1.4, rel=1e-15)
    assert sound_speed(PrimitiveState(4.0, 0.0, 4.0 / 1.4), GAS) == pytest.approx(1.0, rel=1e-15)


def test_temperature_examples():
    assert temperature(PrimitiveState(1.0, 0.0, 1.0 / 1.4), GAS) == pytest.approx(1.0, rel=1e-15)
    assert temperature(PrimitiveState(4.0, 0.0, 4.0 / 1.4), GAS) == pytest.approx(1.0, rel=1e-15)
    assert temperature(PrimitiveState(1.0, 0.0, 2.0 / 1.4), GAS) == pytest.approx(2.0, rel=1e-15)


def test_mach_number_uses_absolute_velocity():
    assert mach_number(PrimitiveState(1.0, -0.5, 1.0 / 1.4), GAS) == pytest.approx(0.5)


def test_physical_flux_examples():
    stationary = primitive_to_conserved(PrimitiveState(1.0, 0.0, 1.0), GAS)
    npt.assert_allclose(physical_flux(stationary, GAS), [0.0, 1.0, 0.0], atol=1e-15)
    moving = primitive_to_conserved(PrimitiveState(1.0, 2.0, 1.0), GAS)
    npt.assert_allclose(physical_flux(moving, GAS), [2.0, 5.0, 11.0], rtol=1e-14)


def test_flux_from_primitive_matches_physical_flux():
    prim = random_states(seed=3)
    cons = primitive_to_conserved(prim, GAS)
    npt.assert_allclose(flux_from_primitive(prim, GAS), physical_flux(cons, GAS), rtol=1e-13, atol=1e-14)


def test_round_trip_is_identity():
    prim = random_states(seed=1)
    back = conserved_to_primitive(primitive_to_conserved(prim, GAS), GAS)
    npt.assert_allclose(back.rho, prim.rho, rtol=1e-14)
    npt.assert_allclose(back.u, prim.u, rtol=1e-14, atol=1e-15)
    npt.assert_allclose(back.p, prim.p, rtol=1e-14)


def test_flux_parity_under_mirroring():
    prim = random_states(seed=2)
    flux = flux_from_primitive(prim, GAS)
    mirrored = flux_from_primitive(prim.mirrored(), GAS)
    npt.assert_allclose(mirrored[0], -flux[0], rtol=1e-14)
    npt.assert_allclose(mirrored[1], flux[1], rtol=1e-14)
    npt.assert_allclose(mirrored[2], -flux[2], rtol=1e-14)


def test_sound_speed_and_temperature_are_positive():
    prim = random_states(seed=4)
    assert np.all(sound_speed(prim, GAS) > 0.0)
    assert np.all(temperature(prim, GAS) > 0.0)
    npt.assert_allclose(sound_speed(prim, GAS) ** 2, temperature(prim, GAS), rtol=1e-14)


def test_sound_speed_and_temperature_are_scale_invariant():
    prim = random_states(seed=5, count=2000)
    k = np.random.default_rng(6).uniform(1e-3, 1e3, 2000)
    scaled = PrimitiveState(k * prim.rho, prim.u, k * prim.p)
    npt.assert_allclose(sound_speed(scaled, GAS), sound_speed(prim, GAS), rtol=1e-14)
    npt.assert_allclose(temperature(scaled, GAS), temperature(prim, GAS), rtol=1e-14)


def test_geometry_alpha_and_names():
    assert Geometry.from_name("planar").alpha == 0
    assert Geometry.from_name("Cylindrical").alpha == 1
    assert Geometry.from_name(" spherical ").alpha == 2
    with pytest.raises(ConfigError):
        Geometry.from_name("toroidal")


def test_radial_grid_is_cell_centered():
    grid = RadialGrid.from_extent(2.0, 400)
    assert grid.dr == pytest.approx(0.005)
    assert grid.centers[0] == pytest.approx(0.0025)
    assert grid.centers[-1] == pytest.approx(1.9975)
    assert grid.faces.size == 401
    assert grid.r_max == pytest.approx(2.0)
    grid.check_geometry(Geometry.CYLINDRICAL)


def test_radial_grid_rejects_bad_extent():
    with pytest.raises(ConfigError):
        RadialGrid.from_extent(0.0, 10)
    with pytest.raises(ConfigError):
        RadialGrid.from_extent(1.0, 2)
