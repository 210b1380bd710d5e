"""Command-line front end.

Usage::

    meanper CONFIG [--command extend] [--R 5] [--threads 4] ...

Every config key has a one-to-one flag (``--alpha``, ``--half-width``,
``--grid-size`` ...).  ``MEANPER_OUT`` overrides ``out_dir`` from the config;
an explicit ``--out-dir`` beats both.

Exit status: 0 success, 2 success with gate warnings, 1 error.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import report
from .coeff import ExponentialSum, Sampled, extract_coefficients, sigma
from .config import SCHEMA, RunConfig, load_config, override
from .convolver import Convolver
from .errors import InvalidArgument, MeanperError
from .spectrum import build_spectrum
from .synth import ExtensionRequest, extend, smoothness_budget, theorem_budget
from .verify import run_suite

log = logging.getLogger("meanper")

EXIT_OK, EXIT_ERROR, EXIT_WARN = 0, 1, 2


class CommandError(Exception):
    pass


@contextlib.contextmanager
def stage(module: str, op: str):
    try:
        yield
    except MeanperError as exc:
        raise CommandError(f"{module}.{op}: {exc}") from exc


def make_convolver(cfg: RunConfig) -> Convolver:
    c = cfg.convolver
    if c.kind == "tent":
        return Convolver.tent(c.r)
    if c.kind == "weighted":
        return Convolver.weighted(c.alpha, c.h_coeffs, c.r)
    return Convolver.gegenbauer(c.alpha, c.r)


def read_samples(path: Path) -> tuple[np.ndarray, np.ndarray]:
    """Two-column CSV ``t, value``; ``#`` lines and a non-numeric header are skipped."""
    from .config import parse_number

    ts, vs = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            if len(row) != 2:
                raise InvalidArgument(f"{path}:{lineno}: expected two columns t,value")
            try:
                t = float(row[0])
            except ValueError:
                if not ts:
                    continue  # header row
                raise InvalidArgument(f"{path}:{lineno}: bad abscissa {row[0]!r}")
            try:
                vs.append(parse_number(row[1]))
            except ValueError as exc:
                raise InvalidArgument(f"{path}:{lineno}: {exc}") from exc
            ts.append(t)
    return np.array(ts), np.array(vs)


def make_function(cfg: RunConfig):
    fn = cfg.function
    if fn.variant == "sampled":
        if not fn.sample_file:
            raise InvalidArgument("sampled function needs 'sample_file'")
        path = Path(fn.sample_file)
        if not path.is_absolute():
            path = cfg.base_dir / path
        t, v = read_samples(path)
        return Sampled(t, v, smoothness_k=fn.smoothness_k or 0)
    if not fn.terms:
        raise InvalidArgument("exponential function needs 'terms'")
    return ExponentialSum(fn.terms, half_width=fn.half_width, smoothness_k=fn.smoothness_k)


def _out_dir(cfg: RunConfig, explicit: bool) -> Path:
    out = cfg.run.out_dir
    if not explicit and os.environ.get("MEANPER_OUT"):
        out = os.environ["MEANPER_OUT"]
    path = Path(out)
    if not path.is_absolute():
        path = cfg.base_dir / path if not explicit else Path.cwd() / path
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_spectrum(cfg: RunConfig, out: Path) -> int:
    T = make_convolver(cfg)
    with stage("spectrum", "build_spectrum"):
        S = build_spectrum(T, cfg.run.cutoff, order=cfg.run.quad_order, workers=cfg.run.threads)
    with stage("coeff", "sigma"):
        for p in S:
            sigma(p)
    report.write_csv(out / "spectrum.csv", report.SPECTRUM_COLUMNS, report.spectrum_rows(S))
    print(f"spectrum: {len(S)} points -> {out / 'spectrum.csv'}")
    return EXIT_OK


def cmd_coeffs(cfg: RunConfig, out: Path) -> int:
    T = make_convolver(cfg)
    with stage("coeff", "make_function"):
        f = make_function(cfg)
    with stage("spectrum", "build_spectrum"):
        S = build_spectrum(T, cfg.run.cutoff, order=cfg.run.quad_order, workers=cfg.run.threads)
    with stage("coeff", "extract_coefficients"):
        table = extract_coefficients(f, T, S, probes=cfg.run.probes, workers=cfg.run.threads)
        for p in S:
            sigma(p)
    report.write_csv(out / "spectrum.csv", report.SPECTRUM_COLUMNS, report.spectrum_rows(S))
    report.write_csv(out / "coeffs.csv", report.COEFF_COLUMNS, report.coeff_rows(table))
    print(f"coeffs: {len(table)} entries -> {out / 'coeffs.csv'}")
    return EXIT_OK


def cmd_extend(cfg: RunConfig, out: Path) -> int:
    T = make_convolver(cfg)
    run = cfg.run
    with stage("coeff", "make_function"):
        f = make_function(cfg)
    if run.R is None:
        raise CommandError("synth.extend: run.R is required for extend")
    with stage("synth", "extend"):
        req = ExtensionRequest(
            R=run.R,
            q=run.q,
            grid_size=run.grid_size,
            cutoff=run.cutoff,
            k=run.k,
            gamma=run.gamma,
            quad_order=run.quad_order,
            probes=run.probes,
            workers=run.threads,
        )
        rep = extend(f, T, req)
        for p in rep.spectrum:
            sigma(p)
    report.write_csv(out / "spectrum.csv", report.SPECTRUM_COLUMNS, report.spectrum_rows(rep.spectrum))
    report.write_csv(out / "coeffs.csv", report.COEFF_COLUMNS, report.coeff_rows(rep.table))
    report.write_csv(out / "extension.csv", report.EXTENSION_COLUMNS, report.extension_rows(rep.grid, rep.samples))
    report.write_csv(
        out / "functional.csv",
        report.FUNCTIONAL_COLUMNS,
        report.functional_rows(rep.spectrum, rep.functional_terms, rep.functional_partial_sums),
    )
    payload = rep.summary()
    payload["convolver"] = T.to_dict()
    payload["functional_partial_sums"] = rep.functional_partial_sums
    payload["samples_file"] = "extension.csv"
    report.write_json(out / "report.json", payload)
    for key in ("lemma_sup", "lemma_pass", "budget_q", "theorem_q", "tail_ratio", "residual_sup"):
        print(f"{key}: {payload[key]}")
    for w in rep.warnings:
        print(f"warning: {w}")
    return EXIT_WARN if rep.warnings else EXIT_OK


def cmd_verify(cfg: RunConfig, out: Path) -> int:
    T = make_convolver(cfg)
    with stage("verify", cfg.run.suite):
        checks = run_suite(cfg.run.suite, T)
    report.write_csv(
        out / "verify.csv",
        ("check", "value", "tolerance", "passed"),
        ((c.name, c.value, c.tolerance, c.passed) for c in checks),
    )
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.value:.3e} (tol {c.tolerance:.0e})")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_ERROR


def cmd_bounds(cfg: RunConfig, out: Path) -> int:
    alpha = cfg.convolver.alpha
    if alpha is None:
        raise CommandError("synth.smoothness_budget: bounds needs convolver.alpha")
    gamma = cfg.run.gamma if cfg.run.gamma is not None else alpha + 0.5
    kmax = cfg.run.k if cfg.run.k is not None else 10
    rows = [(k, smoothness_budget(k, alpha), theorem_budget(k, gamma)) for k in range(1, kmax + 1)]
    report.write_csv(out / "bounds.csv", ("k", "proposition_q", "theorem_q"), rows)
    for k, pq, tq in rows:
        print(f"k={k}: proposition q={'none' if pq is None else pq}, theorem q={'none' if tq is None else tq}")
    return EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "coeffs": cmd_coeffs,
    "extend": cmd_extend,
    "verify": cmd_verify,
    "bounds": cmd_bounds,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="meanper", description=__doc__.split("\n\n")[0], allow_abbrev=False)
    p.add_argument("config", help="configuration file ([convolver], [function], [run] sections)")
    for section, keys in SCHEMA.items():
        group = p.add_argument_group(f"[{section}] overrides")
        for key in keys:
            flag = "--" + key.replace("_", "-")
            group.add_argument(flag, dest=f"{section}.{key}", metavar=key.upper(), default=None)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def run_command(cfg: RunConfig, explicit_out: bool = False) -> int:
    out = _out_dir(cfg, explicit_out)
    return COMMANDS[cfg.run.command](cfg, out)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        explicit_out = False
        for dest, raw in vars(args).items():
            if "." not in dest or raw is None:
                continue
            section, key = dest.split(".", 1)
            cfg = override(cfg, section, key, raw)
            explicit_out = explicit_out or key == "out_dir"
        return run_command(cfg, explicit_out)
    except CommandError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except MeanperError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
