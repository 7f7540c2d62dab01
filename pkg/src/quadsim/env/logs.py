"""Line-delimited episode logs.

One JSON object per line: {step, agent, state, action, reward, flags}.
Floats are serialized with repr round-tripping, so identical rollouts
produce byte-identical logs.
"""

from __future__ import annotations

import json

import numpy as np


def format_record(step: int, agent: int, state, action, reward: float, flags: dict) -> str:
    record = {
        "step": int(step),
        "agent": int(agent),
        "state": [float(x) for x in np.asarray(state).ravel()],
        "action": [float(x) for x in np.asarray(action).ravel()],
        "reward": float(reward),
        "flags": {k: bool(v) for k, v in flags.items()},
    }
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


class EpisodeLogWriter:
    def __init__(self, path):
        self.path = path
        self._fh = open(path, "w", encoding="utf-8")

    def append(self, step, agent, state, action, reward, flags):
        self._fh.write(format_record(step, agent, state, action, reward, flags))
        self._fh.write("\n")

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_episode_log(path) -> list:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records
