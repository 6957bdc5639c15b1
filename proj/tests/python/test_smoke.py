import json

import pytest

import rili


def small(env, variant="rili"):
    cfg = rili.default_config(env)
    cfg["variant"] = variant
    cfg["train_interactions"] = 30
    cfg["sac"]["hidden"] = [16, 16]
    cfg["sac"]["batch_size"] = 16
    cfg["sac"]["warmup_steps"] = 100
    cfg["representation"]["encoder_hidden"] = 8
    cfg["representation"]["decoder_hidden"] = [16]
    cfg["representation"]["batch_size"] = 8
    cfg["transfer"]["library_size"] = 10
    cfg["transfer"]["library_source"] = 30
    return cfg


def test_default_config_round_trips():
    for env in ("circle", "driving", "robot", "tower"):
        cfg = rili.default_config(env)
        assert cfg["env"] == env
        assert rili.normalize_config(cfg) == cfg


def test_bad_config_is_value_error():
    cfg = rili.default_config("circle")
    cfg["not_a_key"] = 1
    with pytest.raises(ValueError):
        rili.normalize_config(cfg)
    with pytest.raises(ValueError):
        rili.default_config("pinball")


def test_train_is_deterministic_and_writes_outputs(tmp_path):
    cfg = small("circle")
    a = rili.train(cfg, seed=3, output_dir=tmp_path / "a")
    b = rili.train(cfg, seed=3)
    assert len(a) == 30
    assert a == b
    assert all(r <= 0 for r in a)
    assert (tmp_path / "a" / "metrics.csv").read_text().startswith("seed,interaction,dynamics_id,return")

    table = rili.evaluate(cfg, tmp_path / "a" / "checkpoint.bin", n=5, seed=1)
    assert set(table) == {"d1", "d2", "d3", "average"}
    mean = sum(table[d][0] for d in ("d1", "d2", "d3")) / 3
    assert table["average"][0] == pytest.approx(mean, rel=1e-12)


def test_gradient_checks():
    reports = rili.gradient_checks(instances=2, seed=0)
    assert {r["network"] for r in reports} == {"gru_encoder", "decoder", "actor", "critics"}
    assert all(r["max_relative_error"] < 1e-4 for r in reports)


def test_tower_reward():
    assert rili.tower_reward([0, 1, 2, 3], [0, 1, 2, 3]) == 0
    assert rili.tower_reward([0, 1, 2, 3], [1, 2, 3, 0]) == -800
    with pytest.raises(ValueError):
        rili.tower_reward([0, 1, 2, 3], [0, 0, 2, 3])


def test_tower_service_session(tmp_path):
    cfg = small("tower")
    rili.train(cfg, seed=1, output_dir=tmp_path / "run")
    svc = rili.TowerService(cfg, tmp_path / "run" / "checkpoint.bin", journal_dir=tmp_path / "journal",
                            max_interactions=3, reward_visible=True)
    status, created = svc.request("POST", "/api/sessions")
    assert status == 201
    sid = created["session_id"]
    assert len(created["layout"]["distances"]) == 4
    for i in range(3):
        status, out = svc.request("POST", f"/api/sessions/{sid}/submissions", {"interaction": i, "order": [0, 1, 2, 3]})
        assert status == 200
        assert out["reward"] in (0, -200, -400, -600, -800)
    assert out["session_complete"]
    status, err = svc.request("POST", f"/api/sessions/{sid}/submissions", {"interaction": 3, "order": [0, 1, 2, 3]})
    assert status == 409 and "error" in err
    status, csv = svc.request("GET", f"/api/sessions/{sid}/export")
    assert status == 200 and len(csv.strip().splitlines()) == 4
    assert (tmp_path / "journal" / f"{sid}.jsonl").exists()


def test_missing_checkpoint_gives_server_error(tmp_path):
    svc = rili.TowerService(small("tower"), tmp_path / "absent.bin")
    status, err = svc.request("POST", "/api/sessions")
    assert status == 500
    assert json.dumps(err)
