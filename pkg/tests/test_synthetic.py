"""Generators: determinism, noiseless geometry, degeneracy control."""

import math

import numpy as np
import pytest

from sca.dataset import DataSet
from sca.errors import ValidationError
from sca.prototypes import ComponentLibrary
from sca.synthetic import GeneratorSpec, generate


def test_noiseless_circle_four_points():
    data = generate(GeneratorSpec(kind="noisy-circle", n=4, seed=0))
    angles = [0.0, math.pi / 2, math.pi, 3 * math.pi / 2]
    expected = [[math.cos(a), math.sin(a)] for a in angles]
    np.testing.assert_allclose(data.points, expected, atol=1e-15)
    np.testing.assert_allclose(data.response, angles, atol=0)


def test_swiss_roll_bitwise_determinism():
    spec = GeneratorSpec(kind="swiss-roll", n=50, noise_sd=0.1, seed=4)
    a = generate(spec)
    b = generate(spec)
    assert a.points.tobytes() == b.points.tobytes()
    assert a.response.tobytes() == b.response.tobytes()


def test_swiss_roll_response_is_spiral_arc_length():
    data = generate(GeneratorSpec(kind="swiss-roll", n=30, seed=5))
    radius = np.hypot(data.points[:, 0], data.points[:, 2])  # theta for rho=theta
    expected = 0.5 * (radius * np.hypot(1.0, radius) + np.arcsinh(radius))
    np.testing.assert_allclose(data.response, expected, rtol=1e-9)


def test_swiss_roll_shape():
    data = generate(GeneratorSpec(kind="swiss-roll", n=25, seed=6, height=4.0))
    assert isinstance(data, DataSet)
    assert data.points.shape == (25, 3)
    assert data.points[:, 1].min() >= 0
    assert data.points[:, 1].max() <= 4.0


def test_line_chain_noiseless_symmetric():
    data = generate(GeneratorSpec(kind="line-chain", n=5, seed=7, length=2.0))
    np.testing.assert_allclose(data.points[:, 0], [0.0, 0.5, 1.0, 1.5, 2.0])
    np.testing.assert_allclose(data.response, data.points[:, 0])


def test_per_point_noise_is_order_independent():
    # keyed by (seed, index): the first rows do not depend on how many follow
    short = generate(GeneratorSpec(kind="swiss-roll", n=10, noise_sd=0.2, seed=8))
    long = generate(GeneratorSpec(kind="swiss-roll", n=25, noise_sd=0.2, seed=8))
    assert np.array_equal(short.points, long.points[:10])


def test_component_families_library_structure():
    lib = generate(GeneratorSpec(kind="component-families", n=30, seed=9,
                                 n_families=3, n_bins=24))
    assert isinstance(lib, ComponentLibrary)
    assert lib.spectra.shape == (30, 24)
    assert (lib.spectra[:, lib.ref_index] == 1.0).all()
    assert lib.ages.min() > 0
    assert lib.metallicities.min() > 0


def test_degenerate_families_collapse_as_separation_shrinks():
    def hausdorff(a, b):
        d = np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2))
        return max(d.min(axis=1).max(), d.min(axis=0).max())

    gaps = []
    for sep in (1e-1, 1e-2, 1e-3):
        lib = generate(GeneratorSpec(kind="degenerate-components", n=40, seed=2,
                                     separation=sep))
        gaps.append(hausdorff(lib.spectra[:20], lib.spectra[20:]))
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] <= 1.5e-2 * gaps[0]  # linear scaling in the separation


def test_degenerate_families_have_disjoint_ages():
    lib = generate(GeneratorSpec(kind="degenerate-components", n=40, seed=3))
    young = lib.ages[:20]
    old = lib.ages[20:]
    assert young.max() < old.min()


def test_generators_are_pure_functions():
    for kind in ("noisy-circle", "line-chain", "component-families",
                 "degenerate-components"):
        spec = GeneratorSpec(kind=kind, n=12, noise_sd=0.05, seed=10)
        a, b = generate(spec), generate(spec)
        arr_a = a.points if isinstance(a, DataSet) else a.spectra
        arr_b = b.points if isinstance(b, DataSet) else b.spectra
        assert arr_a.tobytes() == arr_b.tobytes()


def test_invalid_specs_rejected():
    with pytest.raises(ValidationError, match="kind"):
        GeneratorSpec(kind="torus", n=10)
    with pytest.raises(ValidationError, match="n must"):
        GeneratorSpec(kind="swiss-roll", n=1)
    with pytest.raises(ValidationError, match="noise_sd"):
        GeneratorSpec(kind="swiss-roll", n=10, noise_sd=-0.1)
    with pytest.raises(ValidationError, match="seed"):
        GeneratorSpec(kind="swiss-roll", n=10, seed=-1)
    with pytest.raises(ValidationError, match="n_bins"):
        GeneratorSpec(kind="component-families", n=10, n_bins=4)
    with pytest.raises(ValidationError, match="n_families"):
        GeneratorSpec(kind="component-families", n=4, n_families=5)
