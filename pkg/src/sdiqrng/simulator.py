"""Monte Carlo experiment records from the photonic event model.

Each round draws an input ``x`` from the priors and an outcome ``b`` from
``p(b|x)``; only the counts ``n[b, x]`` are kept, so a repetition is sampled
as one multinomial over inputs followed by one multinomial per input.
Repetitions use independent child streams of a single ``SeedSequence``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np

from .photonics import DetectorConfig, SourceConfig, event_probabilities
from .stats import ConditionalStats

BIT_GENERATOR = "PCG64"


@dataclass(frozen=True)
class RunConfig:
    src: SourceConfig = field(default_factory=SourceConfig)
    det: DetectorConfig = field(default_factory=DetectorConfig)
    n_rounds: int = 10**6
    seed: int = 0
    repetitions: int = 1
    jitter: float = 0.0          # relative 1-sigma drift of alpha, beta per repetition

    def __post_init__(self):
        if self.n_rounds < 1:
            raise ValueError("need at least one round")
        if self.repetitions < 1:
            raise ValueError("need at least one repetition")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.jitter < 0:
            raise ValueError("jitter must be nonnegative")

    def as_dict(self) -> dict:
        out = asdict(self)
        out["src"]["priors"] = list(self.src.priors)
        out["det"]["g"] = list(self.det.g)
        return out


@dataclass
class RunRecord:
    config: RunConfig
    counts: List[np.ndarray]                 # one 3x3 n[b, x] table per repetition
    amplitudes: List[Tuple[float, float, float]]

    def stats(self, rep: int = 0) -> ConditionalStats:
        return ConditionalStats.from_counts(self.counts[rep])

    def pooled(self) -> ConditionalStats:
        return ConditionalStats.from_counts(sum(self.counts))

    def frequencies(self) -> List[np.ndarray]:
        return [self.stats(i).probs for i in range(len(self.counts))]

    def to_json(self) -> str:
        doc = {
            "config": self.config.as_dict(),
            "seed": self.config.seed,
            "rng": {"bit_generator": BIT_GENERATOR, "numpy": np.__version__,
                    "streams": "SeedSequence(seed).spawn(repetitions)"},
            "amplitudes": [list(a) for a in self.amplitudes],
            "counts": [c.tolist() for c in self.counts],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunRecord":
        doc = json.loads(text)
        cfg = doc["config"]
        src = SourceConfig(**{**cfg["src"], "priors": tuple(cfg["src"]["priors"])})
        det = DetectorConfig(**{**cfg["det"], "g": tuple(cfg["det"]["g"])})
        run = RunConfig(src, det, cfg["n_rounds"], cfg["seed"], cfg["repetitions"], cfg["jitter"])
        counts = [np.asarray(c, dtype=np.int64) for c in doc["counts"]]
        for c in counts:
            if c.shape != (3, 3) or c.sum() != run.n_rounds:
                raise ValueError("record counts do not match the configured round count")
        return cls(run, counts, [tuple(a) for a in doc["amplitudes"]])


def _drifted(src: SourceConfig, jitter: float, rng: np.random.Generator) -> SourceConfig:
    if jitter == 0:
        return src
    f = 1.0 + jitter * rng.standard_normal(3)
    return SourceConfig(max(0.0, src.alpha * f[0]), max(0.0, src.beta0 * f[1]),
                        max(0.0, src.beta1 * f[2]), src.priors)


def sample_counts(probs: np.ndarray, priors: Sequence[float], n_rounds: int,
                  rng: np.random.Generator) -> np.ndarray:
    """``n[b, x]`` for ``n_rounds`` i.i.d. rounds."""
    n_x = rng.multinomial(n_rounds, np.asarray(priors, dtype=float))
    cols = [rng.multinomial(n_x[x], probs[:, x] / probs[:, x].sum()) for x in range(3)]
    return np.column_stack(cols).astype(np.int64)


def simulate(cfg: RunConfig) -> RunRecord:
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.repetitions)
    counts, amps = [], []
    for child in children:
        rng = np.random.Generator(np.random.PCG64(child))
        src = _drifted(cfg.src, cfg.jitter, rng)
        probs = event_probabilities(src, cfg.det).probs
        counts.append(sample_counts(probs, src.priors, cfg.n_rounds, rng))
        amps.append((src.alpha, src.beta0, src.beta1))
    return RunRecord(cfg, counts, amps)


def aggregate(records: Sequence[Mapping[str, float]]) -> Dict[str, Tuple[float, float]]:
    """Sample mean and 1-sigma sample standard deviation (``n - 1``) per key."""
    if len(records) < 2:
        raise ValueError("aggregate needs at least two repetitions")
    keys = list(records[0])
    out = {}
    for k in keys:
        vals = np.array([float(r[k]) for r in records])
        out[k] = (float(vals.mean()), float(vals.std(ddof=1)))
    return out
