import json

import numpy as np
import pytest

from ecf_toolkit import formats
from ecf_toolkit.ecf import compute_tau, random_spectral_measure, random_valid_ecf
from ecf_toolkit.semigroup import GroundSet


def test_subset_keys():
    g = GroundSet(("a", "b", "c"))
    assert formats.subset_key(g, 0b101) == '["a","c"]'
    assert formats.parse_subset_key(g, '["c","a"]') == 0b101
    with pytest.raises(ValueError, match="repeats"):
        formats.parse_subset_key(g, '["a","a"]')
    with pytest.raises(ValueError):
        formats.parse_subset_key(g, '"a"')


def test_ecf_json_roundtrip_is_exact():
    ecf = random_valid_ecf(4, 6, seed=11)
    text = formats.dumps(formats.ecf_to_json(ecf))
    back = formats.ecf_from_json(json.loads(text))
    np.testing.assert_array_equal(back.theta, ecf.theta)
    assert back.ground == ecf.ground


def test_ecf_json_missing_subset():
    obj = {"labels": ["a", "b"], "theta": {'["a"]': 1.0, '["b"]': 1.0}}
    with pytest.raises(ValueError, match="no entry"):
        formats.ecf_from_json(obj)


def test_ecf_json_keeps_coordinates():
    g = GroundSet(("a", "b"), np.array([[0.0, 1.0], [2.0, 3.0]]))
    from ecf_toolkit.models import independent_ecf

    obj = formats.ecf_to_json(independent_ecf(g))
    assert obj["coords"] == [[0.0, 1.0], [2.0, 3.0]]
    assert formats.ecf_from_json(obj).ground.coords.tolist() == obj["coords"]


def test_tau_json_roundtrip():
    tau = compute_tau(random_valid_ecf(3, 4, seed=1))
    back = formats.tau_from_json(json.loads(formats.dumps(formats.tau_to_json(tau))))
    np.testing.assert_array_equal(back.tau, tau.tau)


def test_spectral_csv_roundtrip():
    sm = random_spectral_measure(3, 5, seed=0)
    back = formats.spectral_from_csv(formats.spectral_to_csv(sm))
    np.testing.assert_array_equal(back.atoms, sm.atoms)
    assert formats.spectral_to_csv(sm).startswith("site,a1,a2,a3,a4,a5\n")


def test_spectral_csv_errors():
    with pytest.raises(ValueError, match="header"):
        formats.spectral_from_csv("x,a1\n0,1\n")
    with pytest.raises(ValueError, match="atoms"):
        formats.spectral_from_csv("site,a1,a2\n0,1\n")


def test_sites_csv_roundtrip():
    g = GroundSet(("s1", "s2"), np.array([[0.5, 1.0], [2.0, -1.0]]))
    back = formats.sites_from_csv(formats.sites_to_csv(g))
    assert back.labels == g.labels
    np.testing.assert_array_equal(back.coords, g.coords)
    with pytest.raises(ValueError):
        formats.sites_to_csv(GroundSet.of_size(2))
    with pytest.raises(ValueError, match="coordinates"):
        formats.sites_from_csv("label,x1\na,1,2\n")
