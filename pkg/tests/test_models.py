import numpy as np
import pytest
from pydantic import ValidationError

from cqlab import channels, qmat
from cqlab.models import ChannelSpec, RunConfig, from_pairs, to_pairs
from cqlab.packing import CqChannel
from cqlab.private import BipartiteCqChannel


def _qubit_spec(**kw):
    data = {
        "k": 2,
        "p": [0.5, 0.5],
        "outputs": [to_pairs(np.diag([1.0, 0.0])), to_pairs(np.diag([0.0, 1.0]))],
    }
    data.update(kw)
    return data


def test_pairs_round_trip(rng):
    rho = qmat.random_density(3, rng)
    assert np.abs(from_pairs(to_pairs(rho)) - rho).max() <= 1e-15


def test_channel_spec_valid():
    spec = ChannelSpec.model_validate(_qubit_spec())
    w = spec.channel()
    assert isinstance(w, CqChannel)
    assert w.k == 2 and w.d == 2


def test_channel_spec_names_bad_letter():
    bad = _qubit_spec(outputs=[to_pairs(np.diag([1.0, 0.0])), to_pairs(np.diag([1.2, -0.2]))])
    with pytest.raises(ValidationError, match="letter 1"):
        ChannelSpec.model_validate(bad)


@pytest.mark.parametrize("p", [[0.5, 0.6], [1.2, -0.2], [1.0]])
def test_channel_spec_bad_distribution(p):
    with pytest.raises(ValidationError):
        ChannelSpec.model_validate(_qubit_spec(p=p))


def test_channel_spec_mixed_sizes():
    with pytest.raises(ValidationError, match="differ in size"):
        ChannelSpec.model_validate(_qubit_spec(outputs=[to_pairs(np.diag([1.0, 0.0])),
                                                         to_pairs(np.eye(3) / 3)]))


def test_bipartite_spec_needs_dims():
    w = channels.degraded_wiretap()
    data = _qubit_spec(outputs=[to_pairs(o) for o in w.outputs], bipartite=True)
    with pytest.raises(ValidationError, match="d_B and d_E"):
        ChannelSpec.model_validate(data)
    with pytest.raises(ValidationError, match="does not match"):
        ChannelSpec.model_validate({**data, "d_B": 2, "d_E": 3})
    spec = ChannelSpec.model_validate({**data, "d_B": 2, "d_E": 2})
    assert isinstance(spec.bipartite_channel(), BipartiteCqChannel)


def test_plain_spec_is_not_bipartite():
    with pytest.raises(ValueError):
        ChannelSpec.model_validate(_qubit_spec()).bipartite_channel()


def test_run_config_defaults():
    cfg = RunConfig(subcommand="verify")
    assert cfg.n == [4]
    assert cfg.trials == 100
    assert cfg.seed == 0


@pytest.mark.parametrize("field,value", [("trials", 0), ("n", [11]), ("n", [0]), ("eps", 1.0),
                                         ("t", 0.0), ("delta", 0.0), ("seed", -1), ("ln", [0])])
def test_run_config_rejects(field, value):
    with pytest.raises(ValidationError):
        RunConfig(subcommand="packing", channel="c.json", **{field: value})


def test_run_config_needs_channel():
    with pytest.raises(ValidationError, match="needs --channel"):
        RunConfig(subcommand="covering")
