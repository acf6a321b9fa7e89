import json

import pytest

from frontlab.model import LinearG, ModelParams, ReactionSpec, Regular, SuperSlow


@pytest.fixture
def superslow_params():
    """eps = 0.1, tau = 1, gamma = 2: two fronts, v1 ~ 0.815 and v2 ~ 5.41 for H = U^2."""
    return ModelParams(epsilon=0.1, tau=1.0, regime=SuperSlow(gamma=2.0))


@pytest.fixture
def quadratic_spec(superslow_params):
    """H = U^2 with the linear G of the super-slow regime."""
    return ReactionSpec.power(1.0, g1=superslow_params.g1)


@pytest.fixture
def regular_params():
    return ModelParams(epsilon=0.1, tau=1.0, regime=Regular(g1=-1.0))


@pytest.fixture
def regular_spec():
    return ReactionSpec.power(1.0, g1=-1.0)


@pytest.fixture
def reaction_for():
    """Build a ReactionSpec whose G is the linear slow reaction of the regime."""

    def _build(params, h):
        return ReactionSpec(h=h, g=LinearG(params.g1))

    return _build


@pytest.fixture
def superslow_descriptor():
    return {
        "epsilon": 0.1,
        "tau": 1.0,
        "regime": {"super_slow": {"gamma": 2.0}},
        "H": {"kind": "power", "h0": 1.0, "m": 1},
    }


@pytest.fixture
def regular_descriptor():
    return {
        "epsilon": 0.1,
        "tau": 1.0,
        "regime": {"regular": {"g1": -1.0}},
        "H": {"kind": "power", "h0": 1.0, "m": 1},
        "G": {"kind": "linear"},
    }


@pytest.fixture
def write_config(tmp_path):
    """Write a descriptor to tmp_path and return its path."""

    def _write(data, name="model.json"):
        path = tmp_path / name
        if name.endswith((".yaml", ".yml")):
            import yaml

            path.write_text(yaml.safe_dump(data))
        else:
            path.write_text(json.dumps(data))
        return path

    return _write


@pytest.fixture(scope="session")
def scalar_ctx():
    """
    H = 0 decouples V: the front is the Allen-Cahn kink with point
    eigenvalues 0 and -3/2, and the essential spectrum lies left of -2.
    """
    from frontlab.existence import build_composite_front, regular_front_v_peak
    from frontlab.spectrum.evans import LinearizationContext

    params = ModelParams(epsilon=0.02, tau=0.25, regime=Regular(g1=-1.0))
    spec = ReactionSpec.power(0.0, g1=-1.0)
    front = build_composite_front(regular_front_v_peak(params, spec), params, spec)
    return LinearizationContext.build(front, params, spec)
