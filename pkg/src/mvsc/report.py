"""Serializable run report written by the command-line front end."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass

import numpy as np

from . import __version__
from .data import MultiViewDataset
from .errors import ValidationError
from .solver import ClusteringResult, SolverConfig


@dataclass
class RunReport:
    """Everything needed to reproduce and audit one clustering run.

    ``timings`` (wall-clock seconds per phase) is optional so that reports
    stay byte-identical across repeated seeded runs unless timings are
    explicitly requested.
    """

    config: dict
    dataset: dict
    result: dict
    version: str
    timings: dict | None = None

    def to_json(self) -> str:
        payload = {
            "config": self.config,
            "dataset": self.dataset,
            "result": self.result,
            "version": self.version,
        }
        if self.timings is not None:
            payload["timings"] = self.timings
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as e:
            raise ValidationError(f"report is not valid JSON: {e}") from e
        for key in ("config", "dataset", "result", "version"):
            if key not in payload:
                raise ValidationError(f"report is missing '{key}'")
        return cls(config=payload["config"], dataset=payload["dataset"],
                   result=payload["result"], version=payload["version"],
                   timings=payload.get("timings"))

    @classmethod
    def build(cls, data: MultiViewDataset, config: SolverConfig,
              result: ClusteringResult,
              timings: dict | None = None) -> "RunReport":
        return cls(config=dataclasses.asdict(config),
                   dataset=dataset_fingerprint(data),
                   result={
                       "labels": result.labels.tolist(),
                       "component_count": result.component_count,
                       "converged": result.converged,
                       "used_fallback": result.used_fallback,
                       "outer_iterations": result.outer_iterations,
                       "final_lambda": result.final_lambda,
                       "objective_trace": [float(v) for v in result.objective_trace],
                       "metrics": result.metrics,
                   },
                   version=__version__,
                   timings=timings)


def dataset_fingerprint(data: MultiViewDataset) -> dict:
    """Shapes plus a content hash, for provenance checks in reports."""
    digest = hashlib.sha256()
    for v in data.views:
        digest.update(np.ascontiguousarray(v).tobytes())
    if data.labels is not None:
        digest.update(np.ascontiguousarray(data.labels).tobytes())
    return {
        "n": data.n,
        "view_shapes": [list(v.shape) for v in data.views],
        "labeled": data.labels is not None,
        "sha256": digest.hexdigest(),
    }
