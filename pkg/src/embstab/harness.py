"""Dimension sweeps: many seeded embeddings per dimension, all stability measures.

For every dimension in the grid the sweep

1. trains ``runs_per_dim`` embeddings with seeds ``seed + run`` (or reads them
   from a directory of ``<name>_d<dim>_s<run>.emb`` files),
2. fits one classifier per embedding; the L2 strength is selected on run 0's
   validation accuracy, either per dimension or once at an anchor dimension,
3. evaluates every selected pairwise measure over all ``R(R-1)/2`` unordered
   run pairs, plus the stable core over the whole group and per-run accuracy.

Work is distributed over a thread pool; every task is deterministic and results
are reduced in a fixed order, so reports do not depend on the worker count.
Failures inside a cell produce an error row and the sweep continues.
"""

from __future__ import annotations

import csv
import itertools
import json
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import jsonschema
import numpy as np

from . import funcsim, repsim
from .classify import DEFAULT_L2_GRID, TrainConfig, accuracy, predict_proba, select_l2, train_logreg
from .embed import EmbeddingMatrix, Node2vecConfig, node2vec_lite, read_embedding, spectral_embed, write_embedding
from .errors import DataError
from .graph import Graph, SbmConfig, generate_sbm, load_edge_list, load_labels, split_nodes

log = logging.getLogger(__name__)

REPRESENTATIONAL = ("aligned_cos", "dist_corr", "knn_jaccard", "second_cos")
FUNCTIONAL_PAIRWISE = ("disagreement", "norm_disagreement", "jsd")
ALL_MEASURES = REPRESENTATIONAL + ("disagreement", "norm_disagreement", "stable_core", "jsd", "accuracy")
METHODS = ("node2vec_lite", "spectral", "external")
CSV_COLUMNS = ("dataset", "method", "dim", "measure", "mean", "std", "n", "optimal_flag", "elapsed_seconds")


CONFIG_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "additionalProperties": False,
    "required": ["dims", "runs_per_dim"],
    "properties": {
        "dataset": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "name": {"type": "string"},
                "sbm": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["block_sizes", "p_in", "p_out"],
                    "properties": {
                        "block_sizes": {"type": "array", "minItems": 1,
                                        "items": {"type": "integer", "minimum": 1}},
                        "p_in": {"type": "number", "minimum": 0, "maximum": 1},
                        "p_out": {"type": "number", "minimum": 0, "maximum": 1},
                        "seed": {"type": "integer", "minimum": 0},
                    },
                },
                "edges": {"type": "string"},
                "labels": {"type": "string"},
                "num_nodes": {"type": "integer", "minimum": 1},
            },
        },
        "method": {"enum": list(METHODS)},
        "dims": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 1}},
        "runs_per_dim": {"type": "integer", "minimum": 2},
        "seed": {"type": "integer", "minimum": 0},
        "measures": {"type": "array", "items": {"enum": list(ALL_MEASURES)}, "uniqueItems": True},
        "knn_k": {"type": "integer", "minimum": 1},
        "l2_grid": {"type": "array", "minItems": 1, "items": {"type": "number", "minimum": 0}},
        "tuning": {"enum": ["per_dim", "anchor"]},
        "anchor_dim": {"type": "integer", "minimum": 1},
        "split": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "fractions": {"type": "array", "minItems": 3, "maxItems": 3,
                              "items": {"type": "number", "minimum": 0, "maximum": 1}},
                "seed": {"type": "integer", "minimum": 0},
            },
        },
        "node2vec": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "walks_per_node": {"type": "integer", "minimum": 1},
                "walk_length": {"type": "integer", "minimum": 2},
                "context_size": {"type": "integer", "minimum": 1},
                "p": {"type": "number", "exclusiveMinimum": 0},
                "q": {"type": "number", "exclusiveMinimum": 0},
                "negative_samples": {"type": "integer", "minimum": 1},
                "epochs": {"type": "integer", "minimum": 1},
                "learning_rate": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "classifier": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "learning_rate": {"type": "number", "exclusiveMinimum": 0},
                "max_epochs": {"type": "integer", "minimum": 1},
                "tolerance": {"type": "number", "minimum": 0},
            },
        },
        "external": {
            "type": "object",
            "additionalProperties": False,
            "required": ["dir", "name"],
            "properties": {
                "dir": {"type": "string"},
                "name": {"type": "string"},
                "eval_labels": {"type": "string"},
            },
        },
        "workers": {"type": "integer", "minimum": 1},
        "record_timing": {"type": "boolean"},
        "spill_dir": {"type": "string"},
        "output": {"type": "string"},
        "format": {"enum": ["csv", "json"]},
    },
}


@dataclass(frozen=True)
class DatasetSpec:
    name: str = "dataset"
    sbm: Optional[SbmConfig] = None
    edges: Optional[str] = None
    labels: Optional[str] = None
    num_nodes: Optional[int] = None

    def load(self) -> Optional[Graph]:
        if self.sbm is not None:
            return generate_sbm(self.sbm)
        if self.edges is None:
            return None
        g = load_edge_list(self.edges, self.num_nodes)
        return load_labels(self.labels, g) if self.labels else g


@dataclass(frozen=True)
class ExternalSource:
    dir: str
    name: str
    eval_labels: Optional[str] = None

    def path(self, dim: int, run: int, ext: str) -> Path:
        return Path(self.dir) / f"{self.name}_d{dim}_s{run}.{ext}"


@dataclass(frozen=True)
class SweepConfig:
    dims: Tuple[int, ...]
    runs_per_dim: int
    dataset: DatasetSpec = DatasetSpec()
    method: str = "node2vec_lite"
    seed: int = 0
    measures: Tuple[str, ...] = ALL_MEASURES
    knn_k: int = repsim.DEFAULT_K
    l2_grid: Tuple[float, ...] = DEFAULT_L2_GRID
    tuning: str = "per_dim"
    anchor_dim: int = 128
    split_fractions: Tuple[float, float, float] = (0.7, 0.1, 0.2)
    split_seed: int = 0
    node2vec: Dict[str, float] = field(default_factory=dict)
    classifier: Dict[str, float] = field(default_factory=dict)
    external: Optional[ExternalSource] = None
    workers: int = 1
    record_timing: bool = False
    spill_dir: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "measures", tuple(self.measures))
        if not self.dims or any(b <= a for a, b in zip(self.dims, self.dims[1:])):
            raise DataError("dims must be nonempty and strictly increasing")
        if self.runs_per_dim < 2:
            raise DataError("runs_per_dim must be >= 2")
        if self.method not in METHODS:
            raise DataError(f"unknown method {self.method!r}")
        if self.method == "external" and self.external is None:
            raise DataError("external method needs an 'external' source")
        if self.method != "external" and self.dataset.sbm is None and self.dataset.edges is None:
            raise DataError(f"method {self.method!r} needs a dataset (sbm or edges)")
        unknown = set(self.measures) - set(ALL_MEASURES)
        if unknown:
            raise DataError(f"unknown measures: {sorted(unknown)}")
        if self.tuning not in ("per_dim", "anchor"):
            raise DataError("tuning must be 'per_dim' or 'anchor'")

    @property
    def method_name(self) -> str:
        return self.external.name if self.method == "external" else self.method

    @property
    def anchor(self) -> int:
        """Grid dimension closest to ``anchor_dim`` on a log scale (smaller on ties)."""
        return min(self.dims, key=lambda d: (abs(math.log2(d) - math.log2(self.anchor_dim)), d))


def config_from_dict(doc: dict, base_dir: Optional[os.PathLike] = None) -> SweepConfig:
    """Validate ``doc`` against ``CONFIG_SCHEMA`` and build a ``SweepConfig``.

    Relative file paths are resolved against ``base_dir``.
    """
    try:
        jsonschema.validate(doc, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise DataError(f"invalid sweep config at {where}: {exc.message}") from None

    def resolve(p):
        if p is None or base_dir is None:
            return p
        return str(Path(base_dir, p)) if not os.path.isabs(p) else p

    ds = dict(doc.get("dataset", {}))
    sbm = SbmConfig(**{**{"seed": 0}, **ds.pop("sbm")}) if "sbm" in ds else None
    dataset = DatasetSpec(name=ds.get("name", "dataset"), sbm=sbm, edges=resolve(ds.get("edges")),
                          labels=resolve(ds.get("labels")), num_nodes=ds.get("num_nodes"))
    ext = doc.get("external")
    external = None
    if ext is not None:
        external = ExternalSource(resolve(ext["dir"]), ext["name"], resolve(ext.get("eval_labels")))
    split = doc.get("split", {})
    seed = doc.get("seed", 0)
    return SweepConfig(
        dims=tuple(doc["dims"]),
        runs_per_dim=doc["runs_per_dim"],
        dataset=dataset,
        method=doc.get("method", "external" if external else "node2vec_lite"),
        seed=seed,
        measures=tuple(doc.get("measures", ALL_MEASURES)),
        knn_k=doc.get("knn_k", repsim.DEFAULT_K),
        l2_grid=tuple(doc.get("l2_grid", DEFAULT_L2_GRID)),
        tuning=doc.get("tuning", "per_dim"),
        anchor_dim=doc.get("anchor_dim", 128),
        split_fractions=tuple(split.get("fractions", (0.7, 0.1, 0.2))),
        split_seed=split.get("seed", seed),
        node2vec=dict(doc.get("node2vec", {})),
        classifier=dict(doc.get("classifier", {})),
        external=external,
        workers=doc.get("workers", 1),
        record_timing=doc.get("record_timing", False),
        spill_dir=resolve(doc.get("spill_dir")),
    )


def load_config(path: os.PathLike) -> SweepConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON: {exc}") from None
    return config_from_dict(doc, Path(path).parent)


# -- report ----------------------------------------------------------------


@dataclass
class ReportRow:
    dataset: str
    method: str
    dim: int
    measure: str
    mean: float
    std: float
    n: int
    optimal_flag: str = ""
    elapsed_seconds: float = 0.0

    @property
    def is_error(self) -> bool:
        return self.optimal_flag == "error"


@dataclass
class StabilityReport:
    rows: List[ReportRow] = field(default_factory=list)

    def select(self, measure: Optional[str] = None, dim: Optional[int] = None) -> List[ReportRow]:
        return [r for r in self.rows
                if (measure is None or r.measure == measure) and (dim is None or r.dim == dim)]

    def value(self, measure: str, dim: int) -> float:
        (row,) = self.select(measure, dim)
        return row.mean

    def __eq__(self, other):
        if not isinstance(other, StabilityReport) or len(self.rows) != len(other.rows):
            return False
        for a, b in zip(self.rows, other.rows):
            for f in fields(ReportRow):
                x, y = getattr(a, f.name), getattr(b, f.name)
                if isinstance(x, float) and math.isnan(x) and isinstance(y, float) and math.isnan(y):
                    continue
                if x != y:
                    return False
        return True


def pairwise_aggregate(values: Sequence[float]) -> Tuple[float, float]:
    """Mean and population standard deviation with exactly rounded sums."""
    if len(values) == 0:
        raise DataError("cannot aggregate an empty list")
    n = len(values)
    mean = math.fsum(values) / n
    std = math.sqrt(math.fsum((v - mean) ** 2 for v in values) / n)
    return mean, std


def mark_optimum(report: StabilityReport, tolerance: float = 0.01) -> StabilityReport:
    """Flag the best-accuracy dimension and all dimensions within ``tolerance`` of it.

    Applied per (dataset, method); every non-error row of a flagged dimension
    gets ``optimal`` or ``near_optimal``. Ties go to the smallest dimension.
    """
    acc = [r for r in report.rows if r.measure == "accuracy" and not r.is_error]
    if not acc:
        raise DataError("report has no accuracy rows")
    flags: Dict[Tuple[str, str, int], str] = {}
    for key, group in itertools.groupby(sorted(acc, key=lambda r: (r.dataset, r.method, r.dim)),
                                        key=lambda r: (r.dataset, r.method)):
        group = list(group)
        best = max(r.mean for r in group)
        opt = min(r.dim for r in group if r.mean == best)
        for r in group:
            if r.dim == opt:
                flags[key + (r.dim,)] = "optimal"
            elif r.mean >= best - tolerance:
                flags[key + (r.dim,)] = "near_optimal"
    for r in report.rows:
        if not r.is_error:
            r.optimal_flag = flags.get((r.dataset, r.method, r.dim), "")
    return report


def _fmt(x: float) -> str:
    return format(x, ".17g")


def emit_report(report: StabilityReport, fmt: str, path: os.PathLike) -> None:
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_COLUMNS)
            for r in report.rows:
                w.writerow([r.dataset, r.method, r.dim, r.measure, _fmt(r.mean), _fmt(r.std), r.n,
                            r.optimal_flag, _fmt(r.elapsed_seconds)])
    elif fmt == "json":
        def clean(row):
            d = asdict(row)
            for k in ("mean", "std", "elapsed_seconds"):
                d[k] = None if math.isnan(d[k]) else float(_fmt(d[k]))
            return d
        with open(path, "w") as fh:
            json.dump([clean(r) for r in report.rows], fh, indent=1)
            fh.write("\n")
    else:
        raise DataError(f"unknown report format {fmt!r}")


def read_report(path: os.PathLike, fmt: Optional[str] = None) -> StabilityReport:
    fmt = fmt or ("json" if str(path).endswith(".json") else "csv")
    rows = []
    if fmt == "csv":
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
                raise DataError(f"{path}: unexpected CSV columns {reader.fieldnames}")
            for rec in reader:
                rows.append(ReportRow(rec["dataset"], rec["method"], int(rec["dim"]), rec["measure"],
                                      float(rec["mean"]), float(rec["std"]), int(rec["n"]),
                                      rec["optimal_flag"], float(rec["elapsed_seconds"])))
    else:
        with open(path) as fh:
            for rec in json.load(fh):
                for k in ("mean", "std", "elapsed_seconds"):
                    rec[k] = math.nan if rec[k] is None else float(rec[k])
                rows.append(ReportRow(**rec))
    return StabilityReport(rows)


# -- sweep -----------------------------------------------------------------


@dataclass
class _RunResult:
    embedding: Optional[EmbeddingMatrix]
    output: Optional[funcsim.OutputMatrix] = None
    accuracy: Optional[float] = None
    classifier_seconds: float = 0.0
    error: Optional[str] = None


class _Cell:
    """Per-measure accumulator for one dimension."""

    def __init__(self):
        self.values: List[float] = []
        self.elapsed = 0.0
        self.error: Optional[str] = None
        self.failed = 0


class _Pool:
    def __init__(self, workers: int):
        self.workers = max(1, int(workers))

    def map(self, fn, items):
        items = list(items)
        if self.workers == 1 or len(items) <= 1:
            return [fn(x) for x in items]
        with ThreadPoolExecutor(max_workers=self.workers) as ex:
            return list(ex.map(fn, items))


class _Sweep:
    def __init__(self, config: SweepConfig, workers: Optional[int]):
        self.cfg = config
        self.pool = _Pool(workers if workers is not None else config.workers)
        self.graph = config.dataset.load()
        self.split = None
        self.labels = None
        self.eval_labels = None
        wants_fn = any(m not in REPRESENTATIONAL for m in config.measures)
        if config.method != "external":
            if wants_fn and self.graph.is_labeled:
                self.split = split_nodes(self.graph, config.split_fractions, config.split_seed)
                self.labels = self.graph.labels
                self.eval_labels = self.labels[self.split.test_mask]
        else:
            self._check_external(wants_fn)
        self.train_cfg = TrainConfig(**config.classifier)
        self.n2v = dict(config.node2vec)
        Node2vecConfig(dim=1, **self.n2v)  # fail fast on bad walk parameters

    def _check_external(self, wants_fn: bool) -> None:
        ext = self.cfg.external
        missing = [str(ext.path(d, r, "emb")) for d in self.cfg.dims for r in range(self.cfg.runs_per_dim)
                   if not ext.path(d, r, "emb").exists()]
        if missing:
            raise DataError(f"missing external embedding files: {missing[:3]}{' ...' if len(missing) > 3 else ''}")
        self.has_outputs = wants_fn and all(
            ext.path(d, r, "out").exists() for d in self.cfg.dims for r in range(self.cfg.runs_per_dim))
        if self.has_outputs and ext.eval_labels:
            n = funcsim.read_output(ext.path(self.cfg.dims[0], 0, "out")).n
            self.eval_labels = funcsim.read_eval_labels(ext.eval_labels, n)

    # phase 1 ---------------------------------------------------------------

    def embed(self, dim: int, run: int) -> EmbeddingMatrix:
        cfg = self.cfg
        if cfg.method == "spectral":
            return spectral_embed(self.graph, dim)
        if cfg.method == "node2vec_lite":
            return node2vec_lite(self.graph, Node2vecConfig(dim=dim, seed=cfg.seed + run, **self.n2v))
        n = self.graph.num_nodes if self.graph is not None else None
        return read_embedding(cfg.external.path(dim, run, "emb"), n)

    def select(self, z: EmbeddingMatrix) -> float:
        return select_l2(z, self.labels, self.split, self.cfg.l2_grid, self.train_cfg, self.graph.num_classes)

    def classify(self, z: EmbeddingMatrix, l2: float, dim: int, run: int) -> _RunResult:
        res = _RunResult(z)
        t0 = time.perf_counter()
        try:
            if self.cfg.method == "external":
                if self.has_outputs:
                    res.output = funcsim.read_output(self.cfg.external.path(dim, run, "out"))
            elif self.split is not None:
                model = train_logreg(z, self.labels, self.split, replace(self.train_cfg, l2_strength=l2),
                                     self.graph.num_classes)
                res.output = predict_proba(model, z, self.split.test_mask)
            if res.output is not None and self.eval_labels is not None:
                res.accuracy = accuracy(res.output, self.eval_labels)
        except Exception as exc:  # recorded as error rows
            log.warning("classifier failed at dim=%d run=%d: %s", dim, run, exc)
            res.error = f"{type(exc).__name__}: {exc}"
        res.classifier_seconds = time.perf_counter() - t0
        return res

    def spill(self, res: _RunResult, dim: int, run: int) -> _RunResult:
        if self.cfg.spill_dir is not None:
            write_embedding(res.embedding, self._spill_path(dim, run))
            res.embedding = None
        return res

    def _spill_path(self, dim: int, run: int) -> Path:
        return Path(self.cfg.spill_dir) / f"{self.cfg.method_name}_d{dim}_s{run}.emb"

    def get_embedding(self, results: List[_RunResult], dim: int, run: int) -> EmbeddingMatrix:
        z = results[run].embedding
        return z if z is not None else read_embedding(self._spill_path(dim, run))

    # phase 2 ---------------------------------------------------------------

    def pair_task(self, results, dim, pair):
        a, b = pair
        out = {}
        rep = [m for m in self.cfg.measures if m in REPRESENTATIONAL]
        fn = [m for m in self.cfg.measures if m in FUNCTIONAL_PAIRWISE]
        za = zb = None
        if rep:
            za, zb = self.get_embedding(results, dim, a), self.get_embedding(results, dim, b)
        for m in rep:
            out[m] = self._timed(repsim.compare, m, za, zb, self.cfg.knn_k)
        oa, ob = results[a].output, results[b].output
        for m in fn:
            if oa is None or ob is None:
                out[m] = (None, 0.0, results[a].error or results[b].error or "no classifier outputs")
            elif m == "norm_disagreement" and self.eval_labels is None:
                out[m] = (None, 0.0, "no evaluation labels")
            else:
                out[m] = self._timed(funcsim.PAIRWISE[m], oa, ob, self.eval_labels)
        return out

    @staticmethod
    def _timed(fn, *args):
        t0 = time.perf_counter()
        try:
            value = fn(*args)
            err = None
        except Exception as exc:  # recorded as error rows
            value, err = None, f"{type(exc).__name__}: {exc}"
        return value, time.perf_counter() - t0, err

    # driver ----------------------------------------------------------------

    def run(self) -> StabilityReport:
        cfg = self.cfg
        report = StabilityReport()
        needs_classifier = any(m not in REPRESENTATIONAL for m in cfg.measures)
        fixed_l2 = None
        if needs_classifier and self.split is not None and cfg.tuning == "anchor":
            fixed_l2 = self.select(self.embed(cfg.anchor, 0))
            log.info("anchor tuning at dim=%d selected l2=%g", cfg.anchor, fixed_l2)
        for dim in cfg.dims:
            report.rows.extend(self.run_dim(dim, needs_classifier, fixed_l2))
        if any(r.measure == "accuracy" and not r.is_error for r in report.rows):
            mark_optimum(report)
        return report

    def run_dim(self, dim: int, needs_classifier: bool, fixed_l2: Optional[float]) -> List[ReportRow]:
        cfg = self.cfg
        runs = range(cfg.runs_per_dim)
        try:
            first = self.embed(dim, 0)
            l2 = fixed_l2
            if needs_classifier and self.split is not None and l2 is None:
                l2 = self.select(first)
                log.info("dim=%d selected l2=%g", dim, l2)

            def phase1(run):
                z = first if run == 0 else self.embed(dim, run)
                res = self.classify(z, l2, dim, run) if needs_classifier else _RunResult(z)
                return self.spill(res, dim, run)

            results = self.pool.map(phase1, runs)
        except Exception as exc:  # whole dimension failed
            log.error("dim=%d failed: %s", dim, exc)
            return [self._error_row(dim, m) for m in cfg.measures]

        pairs = list(itertools.combinations(runs, 2))
        pair_out = self.pool.map(lambda p: self.pair_task(results, dim, p), pairs)
        cells: Dict[str, _Cell] = {m: _Cell() for m in cfg.measures}
        for out in pair_out:
            for m, (value, elapsed, err) in out.items():
                cell = cells[m]
                cell.elapsed += elapsed
                if err is not None:
                    cell.failed += 1
                    cell.error = cell.error or err
                else:
                    cell.values.append(value)

        rows = []
        for m in cfg.measures:
            cell = cells[m]
            if m == "stable_core":
                self._stable_core(cell, results)
            elif m == "accuracy":
                cell.values = [r.accuracy for r in results if r.accuracy is not None]
                cell.elapsed = sum(r.classifier_seconds for r in results)
                if len(cell.values) != cfg.runs_per_dim:
                    cell.error = next((r.error for r in results if r.error), "no accuracy available")
            if cell.error is not None or not cell.values:
                extra = f" ({cell.failed} of {len(pairs)} pairs failed)" if cell.failed else ""
                log.warning("dim=%d %s: %s%s", dim, m, cell.error or "no defined values", extra)
                rows.append(self._error_row(dim, m))
                continue
            mean, std = pairwise_aggregate(cell.values)
            n = 1 if m == "stable_core" else len(cell.values)
            rows.append(ReportRow(cfg.dataset.name, cfg.method_name, dim, m, mean, std, n,
                                  elapsed_seconds=cell.elapsed if cfg.record_timing else 0.0))
            log.info("%s %s dim=%d %s mean=%.6f std=%.6f n=%d", cfg.dataset.name, cfg.method_name,
                     dim, m, mean, std, n)
        return rows

    def _stable_core(self, cell: _Cell, results: List[_RunResult]) -> None:
        outputs = [r.output for r in results]
        if any(o is None for o in outputs):
            cell.error = next((r.error for r in results if r.error), "no classifier outputs")
            return
        t0 = time.perf_counter()
        try:
            cell.values = [funcsim.stable_core(outputs)]
        except Exception as exc:  # recorded as error rows
            cell.error = f"{type(exc).__name__}: {exc}"
        cell.elapsed = time.perf_counter() - t0

    def _error_row(self, dim: int, measure: str) -> ReportRow:
        return ReportRow(self.cfg.dataset.name, self.cfg.method_name, dim, measure,
                         math.nan, math.nan, 0, "error", 0.0)


def run_sweep(config: SweepConfig, workers: Optional[int] = None) -> StabilityReport:
    """Run the full dimension sweep; ``workers`` overrides ``config.workers``."""
    if config.spill_dir is not None:
        Path(config.spill_dir).mkdir(parents=True, exist_ok=True)
    return _Sweep(config, workers).run()
