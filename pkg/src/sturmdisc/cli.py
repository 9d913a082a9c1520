"""Command-line front-end.

``sturmdisc <command> --config file.json [--out path] [--format json|csv]``
reads a JSON run configuration, dispatches to the library, and writes a
report.  Exit codes: 0 success, 1 config validation error, 2 computation
failure, 3 property-check failure (asympt/uniq pass/fail modes).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__
from .asympt import decay_order_fit
from .charfn import char_delta, delta_consistency
from .config import ConfigError, RunConfig, get_int, get_real, load_config, require
from .entire import (
    ProductModel,
    doubling_check,
    fit_constant,
    growth_fit,
    ray_points,
)
from .norming import check_identity, compute_norming
from .spectrum import ZeroSequence, find_eigenvalues
from .uniq import collapse_consistency, bracket_decay_probe, product_ratio_probe

COMMANDS = ("spectrum", "norming", "charfn", "product", "growth", "asympt", "uniq")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_COMPUTE = 2
EXIT_PROPERTY = 3


def _c(z) -> list:
    """Complex number as a JSON-friendly [re, im] pair."""

    z = complex(z)
    return [z.real, z.imag]


def _fmt(x) -> str:
    return "%.17g" % float(x)


def _parse_lams(params, path):
    raw = require(params, "lambdas", path)
    if not isinstance(raw, list) or not raw:
        raise ConfigError(path + ".lambdas", "expected a non-empty list")
    out = []
    for k, item in enumerate(raw):
        if isinstance(item, (int, float)):
            out.append(complex(item))
        elif isinstance(item, list) and len(item) == 2:
            out.append(complex(item[0], item[1]))
        else:
            raise ConfigError(f"{path}.lambdas[{k}]", "expected number or [re, im]")
    return out


# ---------------------------------------------------------------------------
# Command implementations: each returns (payload, rows, status)
# where rows is the CSV form ([header, *records]) and status the exit code.
# ---------------------------------------------------------------------------


def _run_spectrum(cfg: RunConfig):
    p = cfg.problem("problem", "$.spectrum.problem")
    bound = get_real(cfg.params, "modulus_bound", "$.spectrum")
    halfwidth = get_real(cfg.params, "im_halfwidth", "$.spectrum", default=50.0)
    records = find_eigenvalues(p, bound, im_halfwidth=halfwidth)
    payload = {
        "eigenvalues": [
            {"lam": _c(r.lam), "multiplicity": r.multiplicity, "residual": r.residual}
            for r in records
        ]
    }
    rows = [["re", "im", "multiplicity", "residual"]] + [
        [_fmt(r.lam.real), _fmt(r.lam.imag), str(r.multiplicity), _fmt(r.residual)]
        for r in records
    ]
    return payload, rows, EXIT_OK


def _run_norming(cfg: RunConfig):
    p = cfg.problem("problem", "$.norming.problem")
    bound = get_real(cfg.params, "modulus_bound", "$.norming")
    halfwidth = get_real(cfg.params, "im_halfwidth", "$.norming", default=50.0)
    records = find_eigenvalues(p, bound, im_halfwidth=halfwidth)
    out = []
    rows = [["re", "im", "multiplicity", "kappa0_re", "kappa0_im", "alpha0_re",
             "alpha0_im", "identity_residual"]]
    for rec in records:
        norm = compute_norming(p, rec)
        resids = check_identity(p, rec, norm)
        out.append(
            {
                "lam": _c(rec.lam),
                "multiplicity": rec.multiplicity,
                "kappas": [_c(k) for k in norm.kappas],
                "alphas": [_c(a) for a in norm.alphas],
                "identity_residuals": list(resids),
            }
        )
        rows.append(
            [
                _fmt(rec.lam.real),
                _fmt(rec.lam.imag),
                str(rec.multiplicity),
                _fmt(norm.kappas[0].real),
                _fmt(norm.kappas[0].imag),
                _fmt(norm.alphas[0].real),
                _fmt(norm.alphas[0].imag),
                _fmt(max(resids)),
            ]
        )
    return {"norming": out}, rows, EXIT_OK


def _run_charfn(cfg: RunConfig):
    p = cfg.problem("problem", "$.charfn.problem")
    lams = _parse_lams(cfg.params, "$.charfn")
    out = []
    rows = [["lam_re", "lam_im", "delta_re", "delta_im", "delta_inf_re",
             "delta_inf_im", "log_scale", "consistency"]]
    for lam in lams:
        s = char_delta(p, lam)
        cons = delta_consistency(p, lam)
        out.append(
            {
                "lam": _c(lam),
                "delta": _c(s.delta.val),
                "delta_inf": _c(s.delta_inf.val),
                "log_scale": s.delta.log,
                "consistency": cons,
            }
        )
        rows.append(
            [_fmt(lam.real), _fmt(lam.imag), _fmt(s.delta.val.real),
             _fmt(s.delta.val.imag), _fmt(s.delta_inf.val.real),
             _fmt(s.delta_inf.val.imag), _fmt(s.delta.log), _fmt(cons)]
        )
    return {"samples": out}, rows, EXIT_OK


def _run_product(cfg: RunConfig):
    p = cfg.problem("problem", "$.product.problem")
    path = "$.product"
    if "zeros" in cfg.params:
        raw = cfg.params["zeros"]
        if not isinstance(raw, list) or not raw:
            raise ConfigError(path + ".zeros", "expected a non-empty list")
        zeros = [complex(z) if isinstance(z, (int, float)) else complex(z[0], z[1])
                 for z in raw]
        seq = ZeroSequence(np.array(zeros), np.ones(len(zeros), dtype=int),
                           origin="config")
    else:
        bound = get_real(cfg.params, "modulus_bound", path)
        halfwidth = get_real(cfg.params, "im_halfwidth", path, default=50.0)
        records = find_eigenvalues(p, bound, im_halfwidth=halfwidth)
        seq = ZeroSequence.from_records(records)
    constant = fit_constant(p, seq, lam=0.0)
    lams = _parse_lams(cfg.params, path) if "lambdas" in cfg.params else [
        complex(v) for v in np.linspace(-4.9, 4.9, 11)
    ]
    out = []
    rows = [["lam_re", "lam_im", "product_re", "product_im", "delta_re",
             "delta_im", "doubling_gap"]]
    for lam in lams:
        full, half = doubling_check(seq, lam, constant)
        ref = char_delta(p, lam).delta
        gap = abs(full.value - half.value)
        out.append(
            {
                "lam": _c(lam),
                "product": _c(full.value),
                "delta": _c(ref.value),
                "doubling_gap": gap,
            }
        )
        rows.append(
            [_fmt(lam.real), _fmt(lam.imag), _fmt(full.value.real),
             _fmt(full.value.imag), _fmt(ref.value.real), _fmt(ref.value.imag),
             _fmt(gap)]
        )
    payload = {"constant": _c(constant), "n_zeros": len(seq), "samples": out}
    return payload, rows, EXIT_OK


def _run_growth(cfg: RunConfig):
    p = cfg.problem("problem", "$.growth.problem")
    target = cfg.params.get("target", "delta")
    if target not in ("delta", "delta_inf"):
        raise ConfigError("$.growth.target", "expected 'delta' or 'delta_inf'")
    y_lo = get_real(cfg.params, "y_lo", "$.growth", default=1e2)
    y_hi = get_real(cfg.params, "y_hi", "$.growth", default=1e6)
    per_decade = get_int(cfg.params, "per_decade", "$.growth", default=2)
    ys = ray_points(y_lo, y_hi, per_decade)
    logs = np.empty(ys.size)
    for k, y in enumerate(ys):
        s = char_delta(p, 1j * y)
        logs[k] = (s.delta if target == "delta" else s.delta_inf).log_abs
    fit = growth_fit(ys, logs)
    preds = fit.c * np.sqrt(ys / 2.0) + fit.p * np.log(ys) + fit.const
    payload = {
        "target": target,
        "c": fit.c,
        "p": fit.p,
        "const": fit.const,
        "max_residual": fit.max_residual,
        "samples": [
            {"y": float(y), "log_abs": float(l), "model": float(m)}
            for y, l, m in zip(ys, logs, preds)
        ],
    }
    rows = [["y", "log_abs_f", "model_prediction"]] + [
        [_fmt(y), _fmt(l), _fmt(m)] for y, l, m in zip(ys, logs, preds)
    ]
    return payload, rows, EXIT_OK


def _run_asympt(cfg: RunConfig):
    pa = cfg.problem("problem_a", "$.asympt.problem_a")
    pb = cfg.problem("problem_b", "$.asympt.problem_b")
    r = get_real(cfg.params, "r", "$.asympt")
    x0 = get_real(cfg.params, "x0", "$.asympt")
    m = get_int(cfg.params, "m", "$.asympt")
    combo = cfg.params.get("combination", "22")
    try:
        fit = decay_order_fit(pa, pb, r, x0, combo=combo, m_claimed=m)
    except KeyError:
        raise ConfigError("$.asympt.combination", "expected one of 11, 12, 21, 22")
    payload = {
        "combination": "%d%d" % fit.combo,
        "claimed_exponent": fit.claimed_exponent,
        "fitted_slope": fit.slope,
        "pass": bool(fit.passes),
        "points_used": int(fit.used.sum()),
    }
    rows = [["combination", "claimed_exponent", "fitted_slope", "pass"],
            [payload["combination"], _fmt(fit.claimed_exponent),
             _fmt(fit.slope) if math.isfinite(fit.slope) else "-inf",
             str(payload["pass"]).lower()]]
    return payload, rows, EXIT_OK if fit.passes else EXIT_PROPERTY


def _run_uniq(cfg: RunConfig):
    mode = cfg.params.get("mode")
    if mode not in ("iy", "collapse", "ratio"):
        raise ConfigError("$.uniq.mode", "expected one of 'iy', 'collapse', 'ratio'")
    pa = cfg.problem("problem_a", "$.uniq.problem_a")
    pb = cfg.problem("problem_b", "$.uniq.problem_b")
    b = get_real(cfg.params, "b", "$.uniq")
    if mode == "iy":
        m = get_int(cfg.params, "m", "$.uniq")
        probe = bracket_decay_probe(pa, pb, b, m)
        payload = {
            "mode": mode,
            "fitted_slope": probe.slope,
            "threshold": probe.threshold,
            "pass": bool(probe.passes),
        }
        status = EXIT_OK if probe.passes else EXIT_PROPERTY
        rows = [["fitted_slope", "threshold", "pass"],
                [_fmt(probe.slope), _fmt(probe.threshold),
                 str(payload["pass"]).lower()]]
    elif mode == "collapse":
        tol = get_real(cfg.params, "tolerance", "$.uniq", default=1e-8)
        rep = collapse_consistency(pa, pb, b)
        ok = rep.max_rel <= tol
        payload = {
            "mode": mode,
            "max_relative_gap": rep.max_rel,
            "tolerance": tol,
            "pass": ok,
        }
        status = EXIT_OK if ok else EXIT_PROPERTY
        rows = [["max_relative_gap", "tolerance", "pass"],
                [_fmt(rep.max_rel), _fmt(tol), str(ok).lower()]]
    else:
        rep = product_ratio_probe(pa, pb, b)
        payload = {
            "mode": mode,
            "fitted_rate": rep.fitted_rate,
            "expected_rate": rep.expected_rate,
            "monotone_tail": rep.monotone_tail,
            "log_ratios": [float(v) for v in rep.log_ratios],
            "pass": rep.monotone_tail,
        }
        status = EXIT_OK if rep.monotone_tail else EXIT_PROPERTY
        rows = [["y", "log_ratio"]] + [
            [_fmt(y), _fmt(v)] for y, v in zip(rep.ys, rep.log_ratios)
        ]
    return payload, rows, status


_RUNNERS = {
    "spectrum": _run_spectrum,
    "norming": _run_norming,
    "charfn": _run_charfn,
    "product": _run_product,
    "growth": _run_growth,
    "asympt": _run_asympt,
    "uniq": _run_uniq,
}


def _emit(report, rows, fmt, out_path):
    if fmt == "json":
        text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerows(rows)
        text = buf.getvalue()
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sturmdisc",
        description="Spectral computations for Sturm-Liouville problems "
        "with an interior discontinuity",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True)
        cmd.add_argument("--out", default=None)
        cmd.add_argument("--format", choices=("json", "csv"), default="json")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config, args.command)
        payload, rows, status = _RUNNERS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - boundary of the CLI
        print(f"computation failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE

    report = {
        "version": __version__,
        "command": args.command,
        "config": cfg.raw,
        "result": payload,
    }
    if status == EXIT_PROPERTY:
        report["failed"] = True
    _emit(report, rows, args.format, args.out)
    return status


if __name__ == "__main__":
    sys.exit(main())
