import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from risdof.channel import PhaseVector
from risdof.manifold import (
    DegenerateRetraction,
    TangentVec,
    inner,
    project_tangent,
    retract,
    transport,
)
from risdof.numerics import Rng

angles = st.lists(st.floats(-np.pi, np.pi), min_size=1, max_size=8)


def test_hand_values():
    assert np.allclose(project_tangent(np.array([1 + 0j]), np.array([1j])).z, [1j])
    assert np.allclose(project_tangent(np.array([1 + 0j]), np.array([1 + 0j])).z, [0])
    z = project_tangent(np.array([np.exp(1j * np.pi / 4)]), np.array([1 + 0j])).z
    assert np.allclose(z, [0.5 - 0.5j], atol=1e-15)


def test_retract():
    assert np.allclose(retract(np.array([3 + 4j])).phi, [0.6 + 0.8j])
    v = np.exp(1j * np.array([0.1, 2.0]))
    assert np.max(np.abs(retract(v).phi - v)) < 1e-15
    with pytest.raises(DegenerateRetraction):
        retract(np.array([1.0, 0.0]))


def test_transport():
    phi = np.exp(1j * np.array([0.2, 1.0]))
    d = project_tangent(phi, np.array([1 + 1j, -2j]))
    assert np.allclose(transport(phi, phi, d).z, d.z)
    assert np.allclose(transport(phi, phi[::-1], TangentVec(phi, np.zeros(2, complex))).z, 0)
    out = transport(np.array([1 + 0j]), np.array([1j]), np.array([1j]))
    assert np.allclose(out.z, 0)


def test_inner():
    phi = np.array([1 + 0j])
    a = TangentVec(phi, np.array([1j]))
    b = TangentVec(phi, np.array([2j]))
    assert inner(a, b) == 2
    assert inner(a, a) == pytest.approx(np.linalg.norm(a.z) ** 2)
    assert inner(a, TangentVec(phi, np.zeros(1, complex))) == 0
    with pytest.raises(ValueError):
        inner(a, TangentVec(np.array([1j]), np.array([1 + 0j])))


@settings(max_examples=60, deadline=None)
@given(angles, st.integers(0, 2**31 - 1))
def test_projection_properties(theta, seed):
    phi = PhaseVector(np.array(theta)).phi
    rng = Rng(seed)
    z = rng.gen.standard_normal(len(theta)) + 1j * rng.gen.standard_normal(len(theta))
    g = project_tangent(phi, z).z
    assert np.max(np.abs(np.real(g * np.conj(phi)))) < 1e-12
    assert np.max(np.abs(project_tangent(phi, g).z - g)) < 1e-12
    # the removed part is normal: orthogonal to every tangent vector
    assert abs(np.real(np.vdot(z - g, g))) < 1e-10


@settings(max_examples=60, deadline=None)
@given(st.lists(st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3), min_size=1,
                max_size=8))
def test_retract_unit_modulus(v):
    out = retract(np.array(v)).phi
    assert np.max(np.abs(np.abs(out) - 1)) < 1e-12
