"""``matmix`` command line interface.

Exit codes: 0 success, 2 validation error, 3 every fit failed, 4 I/O error.
"""

from __future__ import annotations

import json
import logging
import os
import sys
from pathlib import Path

import click
import jsonschema
import numpy as np

from . import io
from .ecm import FitError, FitOptions
from .matvar import DistKind
from .select import ari, contingency, misclassification_rate, select_over_g
from .sim import PRESETS, preset_spec, simulate_dataset

EXIT_VALIDATION = 2
EXIT_FIT = 3
EXIT_IO = 4

RUN_CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": [k.value for k in DistKind] + ["all"]},
        "g_min": {"type": "integer", "minimum": 1},
        "g_max": {"type": "integer", "minimum": 1},
        "epsilon": {"type": "number", "exclusiveMinimum": 0},
        "max_iter": {"type": "integer", "minimum": 3},
        "n_starts": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "init": {"enum": ["kmeans", "random-soft"]},
    },
}

DEFAULT_CONFIG = {"kind": "mvvg", "g_min": 1, "g_max": 4, "epsilon": 1e-5, "max_iter": 1000, "n_starts": 5, "seed": 0, "init": "kmeans"}


class Failure(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def load_run_config(path) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise Failure(f"cannot read config: {exc}", EXIT_IO) from exc
    except json.JSONDecodeError as exc:
        raise Failure(f"config is not valid JSON: {exc}", EXIT_VALIDATION) from exc
    validate_run_config(cfg)
    return cfg


def validate_run_config(cfg: dict):
    try:
        jsonschema.validate(cfg, RUN_CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise Failure(f"invalid run config: {exc.message}", EXIT_VALIDATION) from exc
    if cfg.get("g_min", 1) > cfg.get("g_max", cfg.get("g_min", 1)):
        raise Failure("invalid run config: g_min exceeds g_max", EXIT_VALIDATION)


def _read(fn, *args):
    try:
        return fn(*args)
    except io.DataFormatError as exc:
        raise Failure(str(exc), EXIT_VALIDATION) from exc
    except OSError as exc:
        raise Failure(f"I/O error: {exc}", EXIT_IO) from exc


def _write(fn, *args):
    try:
        return fn(*args)
    except OSError as exc:
        raise Failure(f"I/O error: {exc}", EXIT_IO) from exc


def _run(fn, *args, **kwargs):
    try:
        fn(*args, **kwargs)
    except Failure as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(exc.code)


def confusion_table(pred, truth) -> dict:
    """Cross-tabulation, true classes down the rows and predictions across."""
    table, rows, cols = contingency(truth, pred)
    return {
        "rows": [int(r) for r in rows],
        "columns": [f"P{int(c)}" for c in cols],
        "counts": table.tolist(),
    }


def evaluate(pred, truth, mask=None) -> dict:
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise Failure("predicted and true label vectors differ in length", EXIT_VALIDATION)
    sel = np.ones(len(pred), dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    if not sel.any():
        raise Failure("evaluation mask selects no observations", EXIT_VALIDATION)
    p, t = pred[sel], truth[sel]
    return {
        "n_evaluated": int(sel.sum()),
        "ari": ari(p, t) if len(p) >= 2 else None,
        "mcr": misclassification_rate(p, t),
        "confusion_table": confusion_table(p, t),
    }


@click.group()
@click.option("-v", "--verbose", count=True)
def main(verbose):
    """Mixtures of skewed matrix variate distributions."""
    logging.basicConfig(level=logging.WARNING - 10 * verbose, format="%(levelname)s %(name)s: %(message)s")


@main.command()
@click.argument("preset")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--per-group", type=int, default=200, show_default=True)
@click.option("-o", "--out", "out", type=click.Path(file_okay=False), required=True)
def simulate(preset, seed, per_group, out):
    """Draw a dataset from a named simulation preset."""
    _run(_simulate, preset, seed, per_group, out)


def _simulate(preset, seed, per_group, out):
    if preset not in PRESETS:
        raise Failure(f"unknown preset {preset!r}; choose from {', '.join(PRESETS)}", EXIT_VALIDATION)
    spec = preset_spec(preset, seed=seed, per_group=per_group)
    ds = simulate_dataset(spec)
    out = Path(out)
    truth = {
        "preset": preset,
        "seed": seed,
        "kind": spec.kind.value,
        "counts": [int(c) for _, c in spec.groups],
        "components": [c.to_dict() for c, _ in spec.groups],
    }
    _write(io.write_dataset, out / "data.csv", ds.tensor)
    _write(io.write_labels, out / "labels.csv", ds.labels)
    _write(io.write_json, out / "params.json", truth)
    click.echo(f"wrote {ds.tensor.shape[0]} observations of {ds.tensor.shape[1]}x{ds.tensor.shape[2]} to {out}")


@main.command()
@click.argument("data", type=click.Path())
@click.option("--labels", type=click.Path(), help="obs,label file; -1 marks unlabelled (semi-supervised fit).")
@click.option("--truth", type=click.Path(), help="True labels for scoring the unlabelled points.")
@click.option("--config", type=click.Path(), help="JSON run configuration.")
@click.option("--kind", type=click.Choice([k.value for k in DistKind] + ["all"]))
@click.option("--g-min", type=int)
@click.option("--g-max", type=int)
@click.option("--epsilon", type=float)
@click.option("--max-iter", type=int)
@click.option("--starts", "n_starts", type=int)
@click.option("--seed", type=int)
@click.option("-o", "--out", "out", type=click.Path(file_okay=False), required=True)
def fit(data, labels, truth, config, out, **overrides):
    """Fit mixtures over a range of G and report BIC/ICL winners."""
    _run(_fit, data, labels, truth, config, out, overrides)


def _fit(data, labels, truth, config, out, overrides):
    cfg = dict(DEFAULT_CONFIG)
    if config:
        cfg.update(load_run_config(config))
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    kinds = list(DistKind) if cfg["kind"] == "all" else [DistKind.parse(cfg["kind"])]
    validate_run_config(cfg)

    tensor = _read(io.read_dataset, data)
    n_obs = tensor.shape[0]
    lab = _read(io.read_labels, labels, n_obs) if labels else None
    if lab is not None and lab.max() >= cfg["g_min"]:
        # known classes need components of their own
        cfg["g_min"] = int(lab.max()) + 1
        if cfg["g_max"] < cfg["g_min"]:
            raise Failure("labels name more classes than g_max allows", EXIT_VALIDATION)
    true_lab = _read(io.read_labels, truth, n_obs) if truth else None

    try:
        options = FitOptions(
            max_iter=cfg["max_iter"], epsilon=cfg["epsilon"], n_starts=cfg["n_starts"], init=cfg["init"], seed=cfg["seed"]
        )
    except ValueError as exc:
        raise Failure(str(exc), EXIT_VALIDATION) from exc

    g_range = range(cfg["g_min"], cfg["g_max"] + 1)
    n_jobs = int(os.environ.get("MATMIX_THREADS", "1"))
    try:
        result = select_over_g(tensor, lab, kinds, g_range, options, n_jobs=n_jobs)
    except FitError as exc:
        out = Path(out)
        _write(io.write_json, out / "summary.json", {"error": str(exc), "config": cfg})
        raise Failure(str(exc), EXIT_FIT) from exc

    out = Path(out)
    fits = []
    for kind, g, rep in result.per_g:
        name = f"fit_{kind.value}_G{g}.json"
        if isinstance(rep, str):
            _write(io.write_json, out / name, {"kind": kind.value, "G": g, "failed": True, "reason": rep})
            fits.append({"kind": kind.value, "G": g, "failed": True, "reason": rep})
        else:
            _write(io.write_json, out / name, rep.to_dict())
            fits.append({
                "kind": kind.value, "G": g, "failed": False, "loglik": rep.loglik, "bic": rep.bic,
                "icl": rep.icl, "converged": rep.converged, "iterations": rep.iterations,
            })

    best_kind, best_g = result.chosen_bic
    best = next(r for k, g, r in result.per_g if k == best_kind and g == best_g)
    summary = {
        "config": cfg,
        "semi_supervised": lab is not None,
        "fits": fits,
        "chosen_bic": {"kind": best_kind.value, "G": best_g},
        "chosen_icl": {"kind": result.chosen_icl[0].value, "G": result.chosen_icl[1]},
    }
    if true_lab is not None:
        mask = (lab < 0) if lab is not None else None
        if mask is not None and not mask.any():
            mask = None
        summary["evaluation"] = evaluate(best.map_labels, true_lab, mask)
    _write(io.write_json, out / "summary.json", summary)
    _write(io.write_labels, out / "map_labels.csv", best.map_labels)
    _write(io.write_json, out / "params.json", best.model.to_dict())
    click.echo(f"BIC chose {best_kind.value} with G={best_g}; ICL chose {result.chosen_icl[0].value} with G={result.chosen_icl[1]}")


@main.command("evaluate")
@click.argument("pred_labels", type=click.Path())
@click.argument("true_labels", type=click.Path())
@click.option("--mask", type=click.Path(), help="Labels file; only its -1 (unlabelled) rows are scored.")
@click.option("-o", "--out", "out", type=click.Path(dir_okay=False))
def evaluate_cmd(pred_labels, true_labels, mask, out):
    """Score predicted labels: ARI, misclassification rate, confusion table."""
    _run(_evaluate, pred_labels, true_labels, mask, out)


def _evaluate(pred_labels, true_labels, mask, out):
    pred = _read(io.read_labels, pred_labels)
    truth = _read(io.read_labels, true_labels)
    if len(pred) != len(truth):
        raise Failure("predicted and true label files differ in length", EXIT_VALIDATION)
    sel = None
    if mask:
        sel = _read(io.read_labels, mask, len(pred)) < 0
    report = evaluate(pred, truth, sel)
    if out:
        _write(io.write_json, out, report)
    click.echo(json.dumps(report))


@main.command()
@click.argument("data", type=click.Path())
@click.argument("labels", type=click.Path())
@click.option("-o", "--out", "out", type=click.Path(dir_okay=False), required=True)
def marginals(data, labels, out):
    """Export per-column marginals as long CSV for plotting."""
    _run(_marginals, data, labels, out)


def _marginals(data, labels, out):
    tensor = _read(io.read_dataset, data)
    lab = _read(io.read_labels, labels, tensor.shape[0])
    n_obs, n, p = tensor.shape
    rows = [
        (i, int(lab[i]), f"V{c + 1}", r, f"{tensor[i, r, c]:.17g}")
        for i in range(n_obs)
        for c in range(p)
        for r in range(n)
    ]
    _write(io.write_csv, out, ["obs", "group", "col", "row", "value"], rows)
    click.echo(f"wrote {len(rows)} rows to {out}")


if __name__ == "__main__":
    main()
