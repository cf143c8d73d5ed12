import json
import math

import pytest

from fracpath.config import OUT_ENV, config_from_dict, parse_config
from fracpath.continuation import ContinuationSettings
from fracpath.errors import ParseError, ValidationError
from fracpath.models import ModelName


def minimal(**over):
    d = {
        "model": "allen_cahn",
        "s": 0.5,
        "n_p": 301,
        "domain": [-5, 5],
        "tasks": [{"kind": "trivial_branch", "name": "trivial", "mu_start": 0.05}],
        "output_dir": "out/x",
    }
    d.update(over)
    return d


def write(tmp_path, obj, name="c.json"):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return p


def test_minimal_config_defaults(tmp_path):
    cfg = parse_config(write(tmp_path, minimal()))
    assert cfg.model is ModelName.ALLEN_CAHN
    assert (cfg.a, cfg.b, cfg.n_p, cfg.s) == (-5, 5, 301, 0.5)
    assert cfg.params.gamma == 1.0
    assert cfg.continuation == ContinuationSettings()
    assert [b.value for b in cfg.bc] == ["dirichlet"]
    assert cfg.snapshots == "events" and cfg.seed == 0
    t = cfg.tasks[0]
    assert (t.direction, t.mu_start) == (1, 0.05)


def test_order_out_of_range(tmp_path):
    with pytest.raises(ValidationError) as ei:
        parse_config(write(tmp_path, minimal(s=1.2)))
    assert "s must lie in (0,1)" in str(ei.value)


def test_all_violations_listed():
    with pytest.raises(ValidationError) as ei:
        config_from_dict(minimal(s=0.0, n_p=2, colour="red", tasks=[]))
    assert len(ei.value.problems) == 4


def test_schnak_tuned_domain():
    cfg = config_from_dict(minimal(model="schnakenberg", s=0.9, params={"d": 60}, domain={"schnak_tuned": 2}))
    assert cfg.length / math.pi == pytest.approx(6.5, abs=0.05)
    assert cfg.tuned_m == 2
    assert [b.value for b in cfg.bc] == ["neumann", "neumann"]
    with pytest.raises(ValidationError):
        config_from_dict(minimal(domain={"schnak_tuned": 2}))


@pytest.mark.parametrize("bad", [
    {"model": "brusselator"},
    {"params": {"nu": 2.0}},
    {"domain": [5, -5]},
    {"bc": ["neumann"]},
    {"continuation": {"ds0": 1.0, "ds_max": 0.1}},
    {"continuation": {"step": 0.1}},
    {"tasks": [{"kind": "switch", "name": "b", "from": "nowhere", "point": 1}]},
    {"tasks": [{"kind": "trivial_branch", "name": "t", "mu_start": 0.0},
               {"kind": "switch", "name": "t", "from": "t", "point": 0}]},
    {"plot": {"norm": "norm3"}},
    {"snapshots": "some"},
    {"seed": 1.5},
    {"singular": "pinv"},
])
def test_invalid_fields(bad):
    with pytest.raises(ValidationError):
        config_from_dict(minimal(**bad))


def test_parse_errors(tmp_path):
    with pytest.raises(ParseError) as ei:
        parse_config(write(tmp_path, '{\n  "model": "allen_cahn",\n  "s": \n}'))
    assert ":4:1:" in str(ei.value)
    with pytest.raises(ParseError):
        parse_config(write(tmp_path, "[1, 2]"))
    with pytest.raises(ParseError):
        parse_config(tmp_path / "missing.json")


def test_hash_tracks_semantics():
    base = config_from_dict(minimal())
    assert base.config_hash() == config_from_dict(minimal()).config_hash()
    # output location and seed do not change results
    assert base.config_hash() == config_from_dict(minimal(output_dir="elsewhere", seed=3)).config_hash()
    # spelled-out defaults are the same configuration
    same = minimal(params={"gamma": 1.0}, continuation={"ds0": 0.01})
    assert base.config_hash() == config_from_dict(same).config_hash()
    for change in ({"s": 0.6}, {"n_p": 303}, {"params": {"gamma": 2.0}}, {"continuation": {"ds_max": 0.05}},
                   {"tasks": [{"kind": "trivial_branch", "name": "trivial", "mu_start": 0.06}]}):
        assert config_from_dict(minimal(**change)).config_hash() != base.config_hash()


def test_output_dir_override(monkeypatch):
    cfg = config_from_dict(minimal())
    monkeypatch.delenv(OUT_ENV, raising=False)
    assert str(cfg.resolved_output_dir()) == "out/x"
    monkeypatch.setenv(OUT_ENV, "/tmp/elsewhere")
    assert str(cfg.resolved_output_dir()) == "/tmp/elsewhere"


def test_task_overrides():
    cfg = config_from_dict(minimal(
        continuation={"ds_max": 0.05},
        tasks=[{"kind": "trivial_branch", "name": "t", "mu_start": 0.0, "continuation": {"mu_range": [-1, 1]}}]))
    st = cfg.settings_for(cfg.tasks[0])
    assert st.ds_max == 0.05 and st.mu_range == (-1.0, 1.0)


@pytest.mark.parametrize("name", ["allen_cahn_s05.json", "swift_hohenberg_s09.json",
                                  "schnakenberg_sigma0_s09.json", "schnakenberg_sigma-0.6_s095.json"])
def test_shipped_configs_parse(name):
    from pathlib import Path

    parse_config(Path(__file__).resolve().parents[1] / "configs" / name)
