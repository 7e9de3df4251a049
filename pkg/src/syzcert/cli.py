"""Command line front end.

    syzcert certify --surface bielliptic:Z/6 --L 2,2 --out cert.json --md cert.md
    syzcert sweep --surface bielliptic:Z/3 --window 1:10,1:10 --jobs 4 --table sweep.tsv
    syzcert moduli-dim --surface enriques --Lsq 4
    syzcert enumerate-movable --surface enriques --L 2,2,0,0,0,0,0,0,0,0
    syzcert check-lemma34 --surface bielliptic:Z/2 --L 3,3
    syzcert check-lemma34 --max-Lsq 10000
    syzcert dispatch --surface k3

Options can also come from a TOML file (``--config run.toml``); flags win.
Exit codes: 0 success/CERTIFIED, 1 usage or config error, 2 REJECTED_INPUT,
3 VIOLATIONS_FOUND.
"""

from __future__ import annotations

import argparse
import itertools
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional, Sequence

from .errors import SyzcertError
from .lattice import NumClass, intersect, square
from .report import emit_certificate, ledger_rows, render_table, LEDGER_HEADER
from .surface import BIELLIPTIC, ENRIQUES, build_surface, movable_families
from .syzygy import moduli_dimension_from_square
from .verifier import (
    CERTIFIED,
    REJECTED_INPUT,
    VIOLATIONS_FOUND,
    certify,
    check_big_movable_sweep,
    dispatch_kodaira_zero,
    replay_lemma34,
)

log = logging.getLogger("syzcert")

COMMANDS = ("certify", "sweep", "moduli-dim", "enumerate-movable", "check-lemma34", "dispatch")
EXIT = {CERTIFIED: 0, REJECTED_INPUT: 2, VIOLATIONS_FOUND: 3}


class UsageError(Exception):
    """Bad flags or config; maps to exit status 1."""


@dataclass
class RunConfig:
    command: Optional[str] = None
    surface: Optional[str] = None
    L: Optional[list[int]] = None
    Lsq: Optional[int] = None
    window: Optional[list[tuple[int, int]]] = None
    max_Lsq: Optional[int] = None
    max_degree: Optional[int] = None
    jobs: int = 1
    unsafe_skip_validation: bool = False
    oracle: bool = False
    out: Optional[str] = None
    markdown: Optional[str] = None
    table: Optional[str] = None
    cert_dir: Optional[str] = None
    format: str = "md"


def _parse_coords(text: str, name: str = "L") -> list[int]:
    try:
        return [int(x) for x in str(text).replace(" ", "").split(",") if x != ""]
    except ValueError:
        raise UsageError(f"{name}: expected comma-separated integers, got {text!r}") from None


def _parse_window(text) -> list[tuple[int, int]]:
    if isinstance(text, list):
        try:
            out = [(int(a), int(b)) for a, b in text]
        except (TypeError, ValueError):
            raise UsageError("window: expected a list of [lo, hi] pairs") from None
    else:
        out = []
        for part in str(text).split(","):
            lo, sep, hi = part.partition(":")
            try:
                out.append((int(lo), int(hi if sep else lo)))
            except ValueError:
                raise UsageError(f"window: cannot parse range {part!r} (use lo:hi)") from None
    if not out or any(lo > hi for lo, hi in out):
        raise UsageError("window: every coordinate range must be nonempty")
    return out


def _load_config_file(path: str) -> dict:
    try:
        import tomllib  # type: ignore[import-not-found]
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise UsageError(f"config: cannot read {path}: {exc}") from None
    flat: dict = {}
    for key, value in raw.items():
        if isinstance(value, dict):  # [sweep], [output] sections
            flat.update(value)
        else:
            flat[key] = value
    known = {f.name for f in fields(RunConfig)} | {"json"}
    unknown = set(flat) - known
    if unknown:
        raise UsageError(f"config: unknown field(s) {', '.join(sorted(unknown))}")
    if "json" in flat:
        flat["out"] = flat.pop("json")
    return flat


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="syzcert", description="Stability certificates for syzygy bundles.")
    p.add_argument("command", nargs="?", choices=COMMANDS)
    p.add_argument("--config", help="TOML file with the same fields as the flags")
    p.add_argument("--surface", help='"enriques", "bielliptic:<type>", "k3" or "abelian"')
    p.add_argument("--L", help="coordinates of L, comma separated")
    p.add_argument("--Lsq", type=int, help="L^2 (moduli-dim only)")
    p.add_argument("--window", help="sweep ranges per coordinate, e.g. 1:10,1:10")
    p.add_argument("--max-Lsq", dest="max_Lsq", type=int, help="skip sweep cells with larger L^2; bound for check-lemma34")
    p.add_argument("--max-degree", dest="max_degree", type=int, help="narrow the enumerate-movable degree window")
    p.add_argument("--jobs", type=int, help="worker count for sweeps and family rows")
    p.add_argument("--unsafe-skip-validation", dest="unsafe_skip_validation", action="store_true", default=None)
    p.add_argument("--oracle", action="store_true", default=None, help="sweep: also run the brute-force oracle")
    p.add_argument("--out", help="certificate JSON path ('-' for stdout)")
    p.add_argument("--md", dest="markdown", help="Markdown summary path")
    p.add_argument("--table", help="table output path (default stdout)")
    p.add_argument("--cert-dir", dest="cert_dir", help="sweep: write one certificate per cell here")
    p.add_argument("--format", choices=("md", "tsv", "csv"), help="table format")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # exit 1, not argparse's 2 (2 means REJECTED_INPUT)
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def resolve_config(ns: argparse.Namespace) -> RunConfig:
    values = _load_config_file(ns.config) if ns.config else {}
    for f in fields(RunConfig):
        v = getattr(ns, f.name, None)
        if v is not None:
            values[f.name] = v
    cfg = RunConfig()
    for key, v in values.items():
        setattr(cfg, key, v)
    if cfg.command is None:
        raise UsageError("command: none given (flag or config)")
    if cfg.command not in COMMANDS:
        raise UsageError(f"command: unknown command {cfg.command!r}")
    if cfg.L is not None and not isinstance(cfg.L, list):
        cfg.L = _parse_coords(cfg.L)
    if cfg.window is not None:
        cfg.window = _parse_window(cfg.window)
    if not isinstance(cfg.jobs, int) or cfg.jobs < 1:
        raise UsageError("jobs: must be a positive integer")
    return cfg


def _surface(cfg: RunConfig):
    if not cfg.surface:
        raise UsageError("surface: required")
    try:
        return build_surface(cfg.surface)
    except SyzcertError as exc:
        raise UsageError(f"surface: {exc}") from None


def _lattice_L(cfg: RunConfig, X) -> NumClass:
    if cfg.L is None:
        raise UsageError("L: required")
    if X.form is None:
        raise UsageError(f"L: {X.kind} surfaces have no lattice model")
    if len(cfg.L) != X.form.rank:
        raise UsageError(f"L: expected {X.form.rank} coordinates for {X.descriptor}, got {len(cfg.L)}")
    return NumClass(tuple(cfg.L))


def _write(path: Optional[str], data: "bytes | str") -> None:
    if isinstance(data, str):
        data = data.encode()
    if path is None or path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_bytes(data)


# ---------------------------------------------------------------------------
# commands


def cmd_certify(cfg: RunConfig) -> int:
    X = _surface(cfg)
    L = _lattice_L(cfg, X)
    cert = certify(X, L, jobs=cfg.jobs, unsafe=cfg.unsafe_skip_validation)
    _write(cfg.out, emit_certificate(cert, "json"))
    if cfg.markdown:
        _write(cfg.markdown, emit_certificate(cert, "markdown"))
    for c in cert.report.failed():
        log.warning("failed condition %s: %s (%s)", c.code, c.statement, c.detail)
    print(f"{cert.verdict} {cert.hash}", file=sys.stderr)
    return EXIT[cert.verdict]


SWEEP_HEADER = ("L", "L^2", "h0(L)", "rank", "dim_general", "dim_closed", "verdict", "oracle", "hash")


def _sweep_cell(args: tuple) -> tuple[tuple, Optional[bytes]]:
    surface, coords, unsafe, oracle, want_cert = args
    from .verifier import brute_force_oracle

    X = build_surface(surface)
    L = NumClass(coords)
    Lsq = square(L, X.form)
    label = ",".join(map(str, coords))
    if Lsq <= 0 or Lsq % 2:
        return (label, Lsq, None, None, None, None, REJECTED_INPUT, None, None), None
    cert = certify(X, L, unsafe=unsafe)
    h0 = rank = dg = dc = None
    if cert.syzygy is not None:
        h0, rank = cert.syzygy.h0L, cert.syzygy.rank
        dg = moduli_dimension_from_square(X, Lsq, False)
        dc = moduli_dimension_from_square(X, Lsq, True)
    orc = None
    if oracle and cert.syzygy is not None:
        orc = len(brute_force_oracle(X, L))
    raw = emit_certificate(cert, "json") if want_cert else None
    return (label, Lsq, h0, rank, dg, dc, cert.verdict, orc, cert.hash), raw


def sweep_rows(cfg: RunConfig) -> list[tuple]:
    X = _surface(cfg)
    if X.form is None:
        raise UsageError(f"surface: cannot sweep {X.kind} (no lattice model)")
    if cfg.window is None:
        raise UsageError("window: required for sweep")
    if len(cfg.window) != X.form.rank:
        raise UsageError(f"window: expected {X.form.rank} coordinate ranges, got {len(cfg.window)}")
    cells = []
    for coords in itertools.product(*[range(lo, hi + 1) for lo, hi in cfg.window]):
        if cfg.max_Lsq is not None and square(NumClass(coords), X.form) > cfg.max_Lsq:
            continue
        cells.append((X.descriptor, coords, cfg.unsafe_skip_validation, cfg.oracle, cfg.cert_dir is not None))
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_sweep_cell, cells, chunksize=8))
    else:
        results = [_sweep_cell(c) for c in cells]
    rows = []
    for (row, raw), cell in zip(results, cells):
        rows.append(row)
        if raw is not None:
            name = "L_" + "_".join(str(c) for c in cell[1]) + ".json"
            _write(str(Path(cfg.cert_dir) / name), raw)
    return rows


def cmd_sweep(cfg: RunConfig) -> int:
    rows = sweep_rows(cfg)
    _write(cfg.table, render_table(SWEEP_HEADER, rows, cfg.format))
    verdicts = [r[6] for r in rows]
    if VIOLATIONS_FOUND in verdicts or any(r[7] for r in rows if r[7] is not None):
        return 3
    return 0


def cmd_moduli_dim(cfg: RunConfig) -> int:
    X = _surface(cfg)
    if cfg.Lsq is not None:
        Lsq = cfg.Lsq
    else:
        Lsq = square(_lattice_L(cfg, X), X.form)
    general = moduli_dimension_from_square(X, Lsq, False)
    closed = moduli_dimension_from_square(X, Lsq, True)
    print(f"general {general}")
    print(f"closed_form {closed}")
    return 0 if general == closed else 3


def cmd_enumerate_movable(cfg: RunConfig) -> int:
    X = _surface(cfg)
    L = _lattice_L(cfg, X)
    fams = movable_families(X, L, unsafe=cfg.unsafe_skip_validation, max_degree=cfg.max_degree)
    rows = [
        (D.family, D.label, "(" + ",".join(map(str, D.cls.coords)) + ")", intersect(L, D.cls, X.form),
         square(D.cls, X.form), D.h0)
        for D in fams
    ]
    _write(cfg.table, render_table(("family", "param", "class", "L·M", "M^2", "h⁰"), rows, cfg.format))
    return 0


def cmd_check_lemma34(cfg: RunConfig) -> int:
    if cfg.L is None and cfg.max_Lsq is not None:
        lines = []
        bad = 0
        for chi in (1, 0):
            n, failures = replay_lemma34(cfg.max_Lsq, chi)
            bad += len(failures)
            lines.append((chi, cfg.max_Lsq, n, len(failures)))
        _write(cfg.table, render_table(("chi", "max L^2", "pairs", "failures"), lines, cfg.format))
        return 3 if bad else 0
    X = _surface(cfg)
    L = _lattice_L(cfg, X)
    rows = check_big_movable_sweep(X, L)
    table = [(r.label, r.LdotM, r.r_min if r.r_min is not None else "none", r.h0, r.verdict) for r in rows]
    _write(cfg.table, render_table(("M^2", "L·M (Hodge floor)", "r_min", "h⁰", "verdict"), table, cfg.format))
    return 3 if any(r.verdict == "VIOLATION" for r in rows) else 0


def cmd_dispatch(cfg: RunConfig) -> int:
    X = _surface(cfg)
    L = _lattice_L(cfg, X) if X.form is not None else None
    v = dispatch_kodaira_zero(X, L, jobs=cfg.jobs, unsafe=cfg.unsafe_skip_validation)
    _write(cfg.out, json.dumps(v.to_dict(), sort_keys=True, indent=2) + "\n")
    if v.source == "EXTERNAL":
        return 0
    return EXIT[v.verdict]


HANDLERS = {
    "certify": cmd_certify,
    "sweep": cmd_sweep,
    "moduli-dim": cmd_moduli_dim,
    "enumerate-movable": cmd_enumerate_movable,
    "check-lemma34": cmd_check_lemma34,
    "dispatch": cmd_dispatch,
}


def run(cfg: RunConfig) -> int:
    return HANDLERS[cfg.command](cfg)


def main(argv: Optional[Sequence[str]] = None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(ns)
        return run(cfg)
    except UsageError as exc:
        print(f"syzcert: error: {exc}", file=sys.stderr)
        return 1
    except SyzcertError as exc:
        print(f"syzcert: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
