"""On-disk resolution cache with content-addressed keys.

Entries are JSON files named by the digest of their context (p, n,
degree, canonical expression, depth, sweep, schema version).  Matrices
are stored as rows of base-p digit strings, which round-trip bit
exactly and diff cleanly.  Writes go through a temporary file and a
rename so concurrent runs never observe torn entries.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import time
from pathlib import Path

import numpy as np

from . import fp

SCHEMA_VERSION = 1

ENV_CACHE_DIR = "SPFEXT_CACHE"


def stable_json(data) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def cache_key(context: dict) -> str:
    return hashlib.sha256(stable_json(context).encode("utf-8")).hexdigest()


def encode_matrix(mat: np.ndarray, p: int) -> dict:
    if p >= 10:
        raise ValueError("digit-string encoding supports p < 10")
    rows, cols = mat.shape
    data = ["".join(str(int(x)) for x in mat[r]) for r in range(rows)]
    return {"rows": rows, "cols": cols, "data": data}


def decode_matrix(payload: dict, p: int) -> np.ndarray:
    rows, cols = payload["rows"], payload["cols"]
    out = fp.zeros(rows, cols)
    for r, line in enumerate(payload["data"]):
        if len(line) != cols:
            raise ValueError("corrupt matrix row in cache entry")
        out[r] = np.frombuffer(line.encode("ascii"), dtype=np.uint8) - ord("0")
    return out % p


def _comp_str(comp: tuple[int, ...]) -> str:
    return ",".join(str(x) for x in comp)


def _comp_parse(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",")) if text else ()


def resolution_context(source: str, p: int, n: int, depth: int, sweep: str) -> dict:
    return {"expression": source, "p": p, "n": n, "depth": depth,
            "sweep": sweep, "schema": SCHEMA_VERSION}


def resolution_payload(res) -> dict:
    context = resolution_context(res.source, res.p, res.n, res.depth, res.sweep)
    stages = [[_comp_str(s.partition) for s in stage.summands]
              for stage in res.stages]
    diffs = []
    for diff in res.diffs:
        diffs.append({_comp_str(comp): encode_matrix(block, res.p)
                      for comp, block in sorted(diff.items())})
    return {
        "version": SCHEMA_VERSION,
        "key": cache_key(context),
        "context": context,
        "stages": stages,
        "diffs": diffs,
        "truncated": res.truncated,
        "created": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }


def resolution_from_payload(payload: dict):
    from .functors import evaluate
    from .homology import Resolution, Stage, Summand, gamma_shape

    ctx = payload["context"]
    p, n = ctx["p"], ctx["n"]
    module = evaluate(ctx["expression"], p)
    stages = []
    for parts in payload["stages"]:
        summands = []
        offset = 0
        for text in parts:
            lam = _comp_parse(text)
            shape = gamma_shape(p, n, lam)
            summands.append(Summand(lam, shape, offset))
            offset += shape.dim
        stages.append(Stage(summands, n))
    diffs = [{_comp_parse(comp): decode_matrix(block, p)
              for comp, block in stage_diff.items()}
             for stage_diff in payload["diffs"]]
    res = Resolution(source=ctx["expression"], p=p, n=n, module=module,
                     stages=stages, diffs=diffs, depth=ctx["depth"],
                     sweep=ctx["sweep"], truncated=payload["truncated"])
    res.meta["stage_dims"] = [st.dim for st in stages]
    res.meta["cache_key"] = payload["key"]
    return res


class ResolutionCache:
    """Directory of serialized resolutions, one file per context digest."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def path_for(self, context: dict) -> Path:
        return self.directory / f"{cache_key(context)}.json"

    def load(self, source: str, p: int, n: int, depth: int, sweep: str):
        path = self.path_for(resolution_context(source, p, n, depth, sweep))
        if not path.exists():
            return None
        with open(path, "r", encoding="utf-8") as handle:
            payload = json.load(handle)
        if payload.get("version") != SCHEMA_VERSION:
            return None
        return resolution_from_payload(payload)

    def store(self, res) -> Path:
        payload = resolution_payload(res)
        path = self.directory / f"{payload['key']}.json"
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                json.dump(payload, handle, sort_keys=True, separators=(",", ":"))
            os.replace(tmp, path)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)
        return path


def default_cache_dir(cli_value: str | None) -> str | None:
    env = os.environ.get(ENV_CACHE_DIR)
    return env if env else cli_value
