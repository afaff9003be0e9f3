"""Command-line pipeline: ingest, sdd, cluster, curve, stadro, stadre, report.

Each subcommand reads a flat ``key = value`` config file (``--config``) whose
values can be overridden by flags, and writes its outputs into ``--out``.
Exit codes: 0 ok, 2 ingestion error, 3 configuration error, 4 computation error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .cluster import kmeans_dtw, load_model, save_model, select_clusters
from .distance import DistanceMeasure
from .errors import ConfigError, MissingArtifactError, SddError
from .forecast import (export_predictions, import_predictions, metrics, one_step_predictions,
                       parse_forecaster, window_errors)
from .series import fit_normalizer, read_series_csv, segments, sliding_windows, split, windows_array
from .stadre import stadre
from .stadro import (build_curve_points, fit_quadratic, invert_curve, load_curve, save_curve,
                     stadro, write_verdicts)

OUTPUTS = {
    "ingest": ["ingest.csv"],
    "sdd": ["sdd.csv"],
    "cluster": ["model.json"],
    "curve": ["curve.json", "plot.csv", "predictions.csv"],
    "stadro": ["verdicts.csv"],
    "stadre": ["reliability.jsonl"],
    "report": ["summary.json"],
}
PRODUCER = {name: cmd for cmd, names in OUTPUTS.items() for name in names}


@dataclass
class RunConfig:
    input: str | None = None
    split_ratio: float = 0.8
    window: int = 20
    stride: int = 1
    segment_length: int = 70
    k_min: int = 2
    k_max: int = 8
    k_step: int = 1
    k: int | None = None
    max_iter: int = 50
    dtw_cost: str = "abs"
    measure: str = "wasserstein"
    metric: str = "rmse"
    p_min: float | None = None
    seed: int = 0
    forecaster: str = "persistence"
    cluster_repr: str = "centroid"
    stadre_stride: int | None = None

    def validate(self) -> "RunConfig":
        if not self.input:
            raise ConfigError("no input file given (config key 'input' or --input)")
        if not 0 < self.split_ratio < 1:
            raise ConfigError(f"split_ratio must lie in (0, 1), got {self.split_ratio}")
        for name in ("window", "stride", "segment_length", "k_step", "max_iter"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if not 2 <= self.k_min <= self.k_max:
            raise ConfigError("need 2 <= k_min <= k_max")
        if self.k is not None and self.k < 2:
            raise ConfigError("k must be >= 2")
        if self.stadre_stride is not None and self.stadre_stride < 1:
            raise ConfigError("stadre_stride must be >= 1")
        if self.dtw_cost not in ("abs", "squared"):
            raise ConfigError("dtw_cost must be 'abs' or 'squared'")
        if self.metric not in ("rmse", "mape"):
            raise ConfigError("metric must be 'rmse' or 'mape'")
        if self.cluster_repr not in ("centroid", "pooled"):
            raise ConfigError("cluster_repr must be 'centroid' or 'pooled'")
        try:
            DistanceMeasure.parse(self.measure)
            parse_forecaster(self.forecaster)
        except (SddError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        return self


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, raw: str):
    kind = _TYPES[key]
    text = raw.strip()
    if "None" in kind and text.lower() in ("", "none"):
        return None
    try:
        if kind.startswith("int"):
            return int(text)
        if kind.startswith("float"):
            return float(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r}") from None
    return text


def read_config_file(path) -> dict:
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from exc
    values = {}
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        if key not in _TYPES:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = _coerce(key, value)
    # relative paths in a config file are relative to that file
    for key in ("input",):
        if values.get(key) and not Path(values[key]).is_absolute():
            values[key] = str(path.parent / values[key])
    fc = values.get("forecaster")
    if fc and fc.startswith("external:") and not Path(fc[9:]).is_absolute():
        values["forecaster"] = "external:" + str(path.parent / fc[9:])
    return values


def _file_digest(path) -> str:
    try:
        return hashlib.sha256(Path(path).read_bytes()).hexdigest()
    except OSError:
        return "missing"


def config_digest(cfg: RunConfig) -> str:
    """Hash of the effective config; file paths are replaced by their content hashes."""
    lines = []
    for f in fields(RunConfig):
        value = getattr(cfg, f.name)
        if f.name == "input" and value:
            value = "sha256:" + _file_digest(value)
        elif f.name == "forecaster" and value.startswith("external:"):
            value = "external:sha256:" + _file_digest(value[9:])
        lines.append(f"{f.name}={value}")
    return hashlib.sha256("\n".join(lines).encode()).hexdigest()[:16]


def provenance(cfg: RunConfig) -> dict:
    return {"tool": "sddsafe", "version": __version__, "config_digest": config_digest(cfg)}


def _comment(cfg: RunConfig) -> str:
    p = provenance(cfg)
    return f"{p['tool']} {p['version']} config_digest={p['config_digest']}"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--out", default="out", help="output directory (default: out)")
    common.add_argument("--threads", type=int, default=1,
                        help="worker threads for DTW matrices; never changes results")
    for f in fields(RunConfig):
        common.add_argument("--" + f.name.replace("_", "-"), dest=f.name, default=None,
                            metavar=f.name.upper())
    parser = _Parser(prog="sddsafe", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"sddsafe {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "ingest": "validate the input, split and normalize it",
        "sdd": "SDD between the training data and each validation segment",
        "cluster": "DTW K-means over training windows",
        "curve": "fit the performance-vs-SDD curve",
        "stadro": "robustness verdict per validation segment",
        "stadre": "reliability score per validation window",
        "report": "combined summary of all outputs",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text)
    return parser


def resolve_config(args) -> RunConfig:
    values = read_config_file(args.config) if args.config else {}
    for f in fields(RunConfig):
        raw = getattr(args, f.name, None)
        if raw is not None:
            values[f.name] = _coerce(f.name, raw)
    return RunConfig(**values).validate()


class Pipeline:
    """Shared state of one CLI invocation."""

    def __init__(self, cfg: RunConfig, out: Path, threads: int = 1):
        self.cfg = cfg
        self.out = out
        self.threads = max(1, int(threads))
        self.series = read_series_csv(cfg.input)
        self.split = split(self.series, cfg.split_ratio)
        self.normalizer = fit_normalizer(self.split.train)
        self.measure = DistanceMeasure.parse(cfg.measure)
        self.prov = provenance(cfg)

    @property
    def train(self):
        return self.split.train

    @property
    def validation(self):
        return self.split.validation

    def path(self, name: str) -> Path:
        return self.out / name

    def require(self, name: str) -> Path:
        p = self.path(name)
        if not p.exists():
            raise MissingArtifactError(f"{p} not found; run `sddsafe {PRODUCER[name]}` first")
        return p

    def _writer(self, name: str):
        self.out.mkdir(parents=True, exist_ok=True)
        fh = self.path(name).open("w", newline="", encoding="utf-8")
        fh.write(f"# {_comment(self.cfg)}\n")
        return fh, csv.writer(fh, lineterminator="\n")

    def _write_json(self, name: str, data: dict) -> None:
        self.out.mkdir(parents=True, exist_ok=True)
        self.path(name).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")

    def forecaster(self):
        spec = parse_forecaster(self.cfg.forecaster)
        if isinstance(spec, Path):
            return None
        return spec.fit(self.normalizer.apply(self.train.values))

    def predictions(self):
        """One-step predictions for every validation tick."""
        fc = self.forecaster()
        if fc is None:
            records = import_predictions(parse_forecaster(self.cfg.forecaster))
            wanted = set(int(t) for t in self.validation.index)
            return [r for r in records if r.time in wanted]
        return one_step_predictions(fc, self.series, self.normalizer, len(self.train))

    # subcommands -----------------------------------------------------------

    def ingest(self):
        fh, w = self._writer("ingest.csv")
        with fh:
            w.writerow(["tick", "value", "normalized", "part"])
            scaled = self.normalizer.apply(self.series.values)
            n_train = len(self.train)
            for i, (t, v) in enumerate(zip(self.series.index, self.series.values)):
                w.writerow([int(t), repr(float(v)), repr(float(scaled[i])),
                            "train" if i < n_train else "validation"])

    def sdd(self):
        fh, w = self._writer("sdd.csv")
        with fh:
            w.writerow(["start", "end", "sdd"])
            for seg in segments(self.validation, self.cfg.segment_length):
                w.writerow([seg.start, seg.end, repr(self.measure(self.train.values, seg.values))])

    def cluster(self):
        cfg = self.cfg
        scaled = self.normalizer.apply(self.train.values)
        wins = sliding_windows(scaled, cfg.window, cfg.stride)
        X = windows_array(wins)
        squared = cfg.dtw_cost == "squared"
        if cfg.k is not None:
            model = kmeans_dtw(X, cfg.k, seed=cfg.seed, max_iter=cfg.max_iter, squared=squared,
                               threads=self.threads)
            selection = {"k_min": cfg.k, "k_max": cfg.k, "step": 1,
                         "scores": {str(cfg.k): model.silhouette}, "chosen_k": cfg.k,
                         "override": True}
        else:
            sel, model = select_clusters(X, cfg.k_min, cfg.k_max, cfg.k_step, seed=cfg.seed,
                                         max_iter=cfg.max_iter, squared=squared,
                                         threads=self.threads)
            selection = sel.to_dict()
        model = replace(model, window_starts=np.array([w.start for w in wins]))
        self.out.mkdir(parents=True, exist_ok=True)
        save_model(model, self.path("model.json"),
                   extra={"selection": selection, "provenance": self.prov})

    def curve(self):
        cfg = self.cfg
        records = self.predictions()
        points = build_curve_points(self.train, self.validation, records,
                                    cfg.segment_length, self.measure)
        fitted = fit_quadratic(points, cfg.metric)
        self.out.mkdir(parents=True, exist_ok=True)
        save_curve(fitted, self.path("curve.json"), extra={"provenance": self.prov})
        export_predictions(records, self.path("predictions.csv"), comment=_comment(cfg))
        cols = {name: np.array([getattr(p, name) for p in points]) for name in ("sdd", "rmse", "mape")}
        normed = {name: _minmax(v) for name, v in cols.items()}
        fh, w = self._writer("plot.csv")
        with fh:
            w.writerow(["start", "end", "sdd", "rmse", "mape", "sdd_norm", "rmse_norm", "mape_norm"])
            for i, p in enumerate(points):
                w.writerow([p.start, p.end] + [repr(float(cols[c][i])) for c in ("sdd", "rmse", "mape")]
                           + [repr(float(normed[c][i])) for c in ("sdd", "rmse", "mape")])

    def stadro(self):
        cfg = self.cfg
        fitted = load_curve(self.require("curve.json"))
        records = {r.time: r for r in import_predictions(self.require("predictions.csv"))}
        if cfg.p_min is None:
            raise ConfigError("stadro needs p_min (config key 'p_min' or --p-min)")
        if fitted.metric != cfg.metric:
            raise ConfigError(f"curve.json was fit on {fitted.metric}, config asks for {cfg.metric};"
                              " re-run `sddsafe curve`")
        rows = []
        for seg in segments(self.validation, cfg.segment_length):
            verdict = stadro(self.train, seg, fitted, cfg.p_min, self.measure)
            ticks = self.validation.index[seg.start:seg.end]
            recs = [records[int(t)] for t in ticks if int(t) in records]
            value = getattr(metrics(recs), cfg.metric) if recs else float("nan")
            rows.append((verdict, value))
        self.out.mkdir(parents=True, exist_ok=True)
        write_verdicts(rows, self.path("verdicts.csv"), comment=_comment(cfg))

    def window_errors(self, model) -> dict:
        cfg = self.cfg
        if model.window_starts is None:
            raise ConfigError("model.json lacks window_starts; re-run `sddsafe cluster`")
        scaled = self.normalizer.apply(self.series.values)
        fc = self.forecaster()
        if fc is not None:
            return window_errors(fc, scaled, model.window_starts, model.w)
        by_tick = {r.time: r for r in import_predictions(parse_forecaster(cfg.forecaster))}
        out = {}
        for i, s in enumerate(model.window_starts):
            pos = int(s) + model.w
            if pos < len(self.series):
                rec = by_tick.get(int(self.series.index[pos]))
                if rec is not None:
                    out[i] = self.normalizer.apply(rec.predicted) - self.normalizer.apply(rec.actual)
        return out

    def stadre(self):
        cfg = self.cfg
        model = load_model(self.require("model.json"))
        if model.w != cfg.window:
            raise ConfigError(f"model.json has window {model.w}, config has {cfg.window};"
                              " re-run `sddsafe cluster`")
        errors = self.window_errors(model)
        train_windows = None
        if cfg.cluster_repr == "pooled":
            scaled_train = self.normalizer.apply(self.train.values)
            train_windows = [scaled_train[s:s + model.w] for s in model.window_starts]
        scaled_val = self.normalizer.apply(self.validation.values)
        stride = cfg.stadre_stride or cfg.window
        self.out.mkdir(parents=True, exist_ok=True)
        with self.path("reliability.jsonl").open("w", encoding="utf-8", newline="\n") as fh:
            for win in sliding_windows(scaled_val, cfg.window, stride):
                tick = int(self.validation.index[win.start])
                report = stadre(win, model, errors, self.measure, seed=cfg.seed,
                                instance_start=tick, cluster_repr=cfg.cluster_repr,
                                windows=train_windows)
                fh.write(report.to_json(**self.prov) + "\n")

    def report(self):
        cfg = self.cfg
        model_data = json.loads(self.require("model.json").read_text(encoding="utf-8"))
        fitted = load_curve(self.require("curve.json"))
        with self.require("verdicts.csv").open(encoding="utf-8") as fh:
            verdicts = list(csv.DictReader(line for line in fh if not line.startswith("#")))
        with self.require("reliability.jsonl").open(encoding="utf-8") as fh:
            reports = [json.loads(line) for line in fh if line.strip()]
        scores = np.array([r["stadre"] for r in reports])
        summary = {
            "provenance": self.prov,
            "data": {"n": len(self.series), "n_train": len(self.train),
                     "n_validation": len(self.validation)},
            "clustering": {"k": model_data["k"], "silhouette": model_data["silhouette"],
                           "sizes": model_data["sizes"]},
            "curve": {"metric": fitted.metric, "coeffs": list(fitted.coeffs),
                      "domain": list(fitted.domain), "rss": fitted.rss},
            "stadro": {"p_min": cfg.p_min,
                       "d_pmin": invert_curve(fitted, cfg.p_min) if cfg.p_min is not None else None,
                       "segments": len(verdicts),
                       "robust": sum(v["robust"] == "TRUE" for v in verdicts)},
            "stadre": {"instances": len(reports),
                       "mean": float(scores.mean()) if len(scores) else None,
                       "min": float(scores.min()) if len(scores) else None,
                       "max": float(scores.max()) if len(scores) else None,
                       "out_of_range": sum(bool(r["out_of_range"]) for r in reports)},
        }
        self._write_json("summary.json", summary)


def _minmax(v: np.ndarray) -> np.ndarray:
    finite = v[np.isfinite(v)]
    if finite.size == 0:
        return np.full_like(v, np.nan)
    lo, hi = finite.min(), finite.max()
    if hi == lo:
        return np.zeros_like(v)
    return (v - lo) / (hi - lo)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
        pipe = Pipeline(cfg, Path(args.out), args.threads)
        getattr(pipe, args.command)()
    except SddError as exc:
        print(f"sddsafe: error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
