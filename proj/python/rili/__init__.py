"""Python access to the rili agents, experiment harness and tower service."""

import json
import os

from . import _rili

__all__ = [
    "default_config",
    "normalize_config",
    "train",
    "evaluate",
    "gradient_checks",
    "tower_reward",
    "TowerService",
]


def default_config(env="circle"):
    return json.loads(_rili.default_config(env))


def normalize_config(cfg):
    """Validated copy of `cfg` with every default filled in."""
    return json.loads(_rili.normalize_config(json.dumps(cfg)))


def train(cfg, seed=0, output_dir=None):
    """Per-interaction returns of one training run."""
    return _rili.train(json.dumps(cfg), seed, os.fspath(output_dir) if output_dir else "")


def evaluate(cfg, checkpoint, dynamics=(), n=100, seed=0):
    return _rili.evaluate(json.dumps(cfg), os.fspath(checkpoint), list(dynamics), n, seed)


gradient_checks = _rili.gradient_checks
tower_reward = _rili.tower_reward


class TowerService:
    """In-process partner service; the same routes the HTTP server exposes."""

    def __init__(self, cfg, checkpoint, journal_dir=None, max_interactions=35, reward_visible=False, seed=0):
        self._svc = _rili.PartnerService(
            json.dumps(cfg),
            os.fspath(checkpoint),
            os.fspath(journal_dir) if journal_dir else "",
            max_interactions,
            reward_visible,
            seed,
        )

    def request(self, method, path, payload=None):
        body = "" if payload is None else json.dumps(payload)
        status, text, content_type = self._svc.handle(method, path, body)
        return status, json.loads(text) if content_type == "application/json" else text

    @property
    def active_sessions(self):
        return self._svc.active_sessions
