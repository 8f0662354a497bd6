"""Command-line front end: build, verify, branch, crystal, rmatrix, all.

Exit status 0 means every check passed, 1 a verification failure and 2 a
usage, resource or cache error.  Built modules are cached on disk under a
content-addressed key that includes the Cartan table hash and a digest of
the fundamental module, so a change to either invalidates the cache.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from . import __version__
from .cartan import AffineType, cartan_data, parse_type

log = logging.getLogger("krcrystal")

COMMANDS = ("build", "verify", "branch", "crystal", "rmatrix", "all")
# levels at which the fused model is built; beyond them the recursive model is used
FUSED_LEVELS = {AffineType.G2_1: 3, AffineType.D4_3: 2}


class UsageError(Exception):
    pass


class CacheError(Exception):
    pass


@dataclass
class RunConfig:
    type: AffineType
    ell: int
    command: str
    out: str = "text"
    cache_dir: str | None = None
    max_level: int = 3
    jobs: int = 1
    output: str | None = None

    def validate(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.ell < 1:
            raise UsageError("--level must be >= 1")
        if self.ell > self.max_level:
            raise UsageError(f"--level {self.ell} exceeds --max-level {self.max_level}")
        if self.out == "dot" and self.command != "crystal":
            raise UsageError("--out dot is only available for the crystal command")
        if self.jobs < 1:
            raise UsageError("--jobs must be >= 1")


# ---------------------------------------------------------------------------
# cache


def table_hash(t) -> str:
    from .fusion import w1_report

    w1 = w1_report(t).rep
    blob = cartan_data(t).table_hash() + w1.dumps()
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def model_for(t, ell: int) -> str:
    return "fused" if ell <= FUSED_LEVELS[parse_type(t)] else "recursive"


def cache_key(t, ell: int) -> str:
    t = parse_type(t)
    blob = json.dumps([__version__, t.value, ell, model_for(t, ell), table_hash(t)])
    return hashlib.sha256(blob.encode()).hexdigest()[:24]


def _cache_path(cache_dir, t, ell):
    return os.path.join(cache_dir, f"{parse_type(t).cli_name}-l{ell}-{cache_key(t, ell)}.json")


def cache_load(cache_dir, t, ell):
    from .fusion import KRModule

    if not cache_dir:
        return None
    path = _cache_path(cache_dir, t, ell)
    if not os.path.exists(path):
        return None
    try:
        with open(path) as fh:
            doc = json.load(fh)
        payload = doc["payload"]
        text = json.dumps(payload, sort_keys=True)
    except (OSError, ValueError, KeyError) as exc:
        raise CacheError(f"unreadable cache entry {path}: {exc}") from exc
    if hashlib.sha256(text.encode()).hexdigest() != doc.get("checksum"):
        raise CacheError(f"checksum mismatch in cache entry {path}")
    log.info("loaded level %d from cache", ell)
    return KRModule.from_json(payload)


def cache_store(cache_dir, t, ell, M) -> str | None:
    if not cache_dir:
        return None
    os.makedirs(cache_dir, exist_ok=True)
    payload = M.to_json()
    text = json.dumps(payload, sort_keys=True)
    doc = {"key": cache_key(t, ell), "checksum": hashlib.sha256(text.encode()).hexdigest(),
           "payload": payload}
    path = _cache_path(cache_dir, t, ell)
    fd, tmp = tempfile.mkstemp(dir=cache_dir, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        json.dump(doc, fh, sort_keys=True)
    os.replace(tmp, path)
    return path


# ---------------------------------------------------------------------------
# stages


def build_module(t, ell: int, cache_dir=None, max_level: int = 3):
    """W^l from the cache or by construction (fused where tractable, else recursive)."""
    from .fusion import fuse, kr_recursive, w1_module

    t = parse_type(t)
    M = cache_load(cache_dir, t, ell)
    if M is not None:
        return M
    t0 = time.time()
    if ell == 1:
        M = w1_module(t)
    elif model_for(t, ell) == "fused":
        log.info("fusing level %d", ell)
        M = fuse(t, ell, max_level=max_level)
    else:
        prev = build_module(t, ell - 1, cache_dir, max_level)
        log.info("recursive construction of level %d", ell)
        M = kr_recursive(t, ell, prev)
    log.info("built level %d: dim %d in %.1fs", ell, M.dim, time.time() - t0)
    cache_store(cache_dir, t, ell, M)
    return M


def stage_build(M) -> dict:
    from collections import Counter

    mults = Counter(tuple(w) for w in M.rep.weights)
    return {"stage": "build", "type": M.type.value, "level": M.ell, "dim": M.dim,
            "provenance": M.provenance,
            "weights": sorted([list(w), n] for w, n in mults.items())}


def stage_branch(M) -> dict:
    from .branching import branch_verify

    rep = branch_verify(M)
    return {"stage": "branch", "pass": rep.passed, "report": rep.to_json(), "text": rep.text()}


def stage_verify(M) -> dict:
    from .branching import branch_verify
    from .polarverify import (check_kz_integrality, check_lattice_conditions,
                              check_polarization_positive, check_statements)

    log.info("statement battery at level %d", M.ell)
    reports = check_statements(M)
    log.info("lattice conditions at level %d", M.ell)
    reports += check_lattice_conditions(M)
    reports.append(check_kz_integrality(M))
    positive = check_polarization_positive(M.gram, M.rep)
    branch = branch_verify(M)
    ok = all(r.ok for r in reports) and positive and branch.passed
    lines = [r.summary_line() for r in reports]
    lines.append(f"polarization positive: {'PASS' if positive else 'FAIL'}")
    lines.append(branch.text().splitlines()[0])
    return {"stage": "verify", "pass": ok,
            "reports": [r.to_json() for r in reports],
            "positive": positive, "branch": branch.to_json(), "text": "\n".join(lines)}


def stage_crystal(M) -> dict:
    from .crystal import export_graph, extract_pseudobase

    log.info("extracting the crystal pseudobase at level %d", M.ell)
    P = extract_pseudobase(M)
    text = "\n".join(f"{'PASS' if v else 'FAIL'}  {k}" for k, v in P.checks.items())
    text = f"crystal {M.type.value} l={M.ell}: {len(P.graph.nodes)} nodes, {len(P.graph.edges)} edges\n" + text
    return {"stage": "crystal", "pass": P.ok, "checks": P.checks, "graph": P.graph.to_json(),
            "dot": export_graph(P.graph, "dot"), "text": text}


def stage_rmatrix(t, ell: int) -> dict:
    from .fusion import compose_R, fusion_shifts, solve_R, staircase_word, w1_report

    W = w1_report(t).rep
    shifts = fusion_shifts(t, ell)
    word = staircase_word(ell)
    order = list(shifts)
    rows, ok = [], True
    done = set()
    for p in word:
        a, b = order[p], order[p + 1]
        if (a, b) not in done:
            done.add((a, b))
            R = solve_R(W, a, b)
            rows.append({"shifts": [a, b], "method": R.method, "solution_dim": R.solution_dim,
                         "rank": R.rank(), "dim": len(R.cols)})
            ok &= R.solution_dim == 1
        order[p], order[p + 1] = b, a
    out = {"stage": "rmatrix", "shifts": shifts, "word": word, "pairs": rows}
    if ell == 3:
        r1, _ = compose_R(W, shifts, [0, 1, 0])
        r2, _ = compose_R(W, shifts, [1, 0, 1])
        out["yang_baxter"] = r1 == r2
        ok &= r1 == r2
    out["pass"] = ok
    lines = [f"R({r['shifts'][0]},{r['shifts'][1]}): method={r['method']} solution_dim={r['solution_dim']} "
             f"rank={r['rank']}/{r['dim']}" for r in rows]
    if "yang_baxter" in out:
        lines.append(f"Yang-Baxter (two reduced words): {'PASS' if out['yang_baxter'] else 'FAIL'}")
    out["text"] = "\n".join(lines) if lines else "level 1: no R-matrices needed"
    return out


def _level_pipeline(t, ell, command, cache_dir, max_level):
    """Run the stages of ``command`` at one level; returns a list of stage dicts."""
    stages = []
    if command == "rmatrix":
        return [stage_rmatrix(t, ell)]
    M = build_module(t, ell, cache_dir, max_level)
    if command in ("build", "all"):
        stages.append(stage_build(M))
    if command == "branch":
        stages.append(stage_branch(M))
    if command in ("verify", "all"):
        stages.append(stage_verify(M))
    if command in ("crystal", "all"):
        stages.append(stage_crystal(M))
    if command == "all" and ell >= 2:
        stages.append(stage_rmatrix(t, ell))
    return stages


def run(cfg: RunConfig) -> tuple[int, str]:
    """Execute a configuration; returns (exit status, rendered output)."""
    from .polarverify import DISCLAIMER

    cfg.validate()
    t = cfg.type
    levels = list(range(1, cfg.ell + 1)) if cfg.command == "all" else [cfg.ell]
    if cfg.command == "all" and cfg.jobs > 1 and len(levels) > 1:
        # fill the cache sequentially (single writer), then verify levels in parallel
        for ell in levels:
            build_module(t, ell, cfg.cache_dir, cfg.max_level)
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            futs = [pool.submit(_level_pipeline, t, ell, cfg.command, None if cfg.cache_dir is None
                                else cfg.cache_dir, cfg.max_level) for ell in levels]
            results = [f.result() for f in futs]
    else:
        results = [_level_pipeline(t, ell, cfg.command, cfg.cache_dir, cfg.max_level) for ell in levels]
    stages = [s for level in results for s in level]
    ok = all(s.get("pass", True) for s in stages)
    status = 0 if ok else 1
    if cfg.out == "dot":
        return status, stages[-1]["dot"]
    if cfg.out == "json":
        doc = {"header": DISCLAIMER, "tool": "krcrystal", "version": __version__,
               "type": t.value, "level": cfg.ell, "command": cfg.command, "pass": ok,
               "table_hash": table_hash(t),
               "stages": [{k: v for k, v in s.items() if k not in ("text", "dot")} for s in stages],
               "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())}
        return status, json.dumps(doc, sort_keys=True, indent=1) + "\n"
    lines = [f"# {DISCLAIMER}", f"# {t.value} level {cfg.ell}, command {cfg.command}"]
    for s in stages:
        if "text" in s:
            lines.append(s["text"])
        else:
            lines.append(f"{s['stage']}: dim {s['dim']} ({s['provenance']})")
    lines.append("RESULT: " + ("PASS" if ok else "FAIL"))
    return status, "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="krcrystal",
                                description="Kirillov-Reshetikhin modules of type G2^(1) and D4^(3): "
                                            "construction, bounded verification and crystal export.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--type", required=True, choices=[t.cli_name for t in AffineType])
    p.add_argument("--level", type=int, default=1)
    p.add_argument("--out", choices=("text", "json", "dot"), default="text")
    p.add_argument("--cache", default=None, help="cache directory for built modules")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--max-level", type=int, default=3)
    p.add_argument("-o", "--output", default=None, help="write the result here instead of stdout")
    p.add_argument("-q", "--quiet", action="store_true", help="no progress on stderr")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="[%(relativeCreated)7.0fms] %(message)s", stream=sys.stderr)
    cfg = RunConfig(parse_type(args.type), args.level, args.command, args.out, args.cache,
                    args.max_level, args.jobs, args.output)
    try:
        status, text = run(cfg)
    except (UsageError, CacheError) as exc:
        print(f"krcrystal: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # resource bounds and build failures
        from .fusion import FusionError

        if isinstance(exc, (FusionError, RuntimeError, MemoryError)):
            print(f"krcrystal: error: {exc}", file=sys.stderr)
            return 2
        raise
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
