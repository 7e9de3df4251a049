"""Serialization of certificates and tables (JSON, Markdown, delimited)."""

from __future__ import annotations

import csv
import io
import json
from typing import Iterable, Sequence

from .verifier import StabilityCertificate


def emit_certificate(cert: StabilityCertificate, fmt: str = "json") -> bytes:
    if fmt == "json":
        return (json.dumps(cert.to_dict(), sort_keys=True, indent=2) + "\n").encode()
    if fmt in ("md", "markdown"):
        return certificate_markdown(cert).encode()
    raise ValueError(f"unknown certificate format {fmt!r}")


def load_certificate(raw: "bytes | str") -> StabilityCertificate:
    return StabilityCertificate.from_dict(json.loads(raw))


def markdown_table(header: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    def cell(v: object) -> str:
        return "-" if v is None else str(v).replace("|", "\\|")

    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(cell(v) for v in row) + " |" for row in rows]
    return "\n".join(lines) + "\n"


def delimited_table(header: Sequence[str], rows: Iterable[Sequence[object]], delimiter: str = "\t") -> str:
    buf = io.StringIO()
    w = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else v for v in row])
    return buf.getvalue()


def render_table(header: Sequence[str], rows: Sequence[Sequence[object]], fmt: str) -> str:
    if fmt == "md":
        return markdown_table(header, rows)
    if fmt == "csv":
        return delimited_table(header, rows, ",")
    if fmt == "tsv":
        return delimited_table(header, rows, "\t")
    raise ValueError(f"unknown table format {fmt!r}")


def _cls(c) -> str:
    return "(" + ",".join(map(str, c)) + ")" if c is not None else "-"


LEDGER_HEADER = ("family", "class", "L·M", "r_min", "h⁰", "verdict")


def ledger_rows(cert: StabilityCertificate) -> list[tuple]:
    out = []
    for r in cert.rows:
        cls = _cls(r.cls) if r.cls is not None else r.label
        r_min = r.r_min if r.r_min is not None else "none"
        out.append((r.kind, cls, r.LdotM, r_min, r.h0, r.verdict))
    return out


def certificate_markdown(cert: StabilityCertificate) -> str:
    parts = [
        f"# Stability certificate: {cert.surface}, L = {_cls(cert.L)}\n",
        f"**Verdict:** {cert.verdict}\n",
        f"Content hash: `{cert.hash}`  (schema {cert.schema_version}, tool {cert.tool_version})\n",
    ]
    if cert.hypotheses:
        parts.append(f"Hypotheses: {cert.hypotheses}\n")
    if cert.validation_overridden:
        parts.append("**Polarization checks were overridden for this run.**\n")
    parts.append("## Polarization checks\n")
    parts.append(
        markdown_table(
            ("code", "condition", "result", "detail"),
            [(c.code, c.statement, "pass" if c.passed else "FAIL", c.detail) for c in cert.report.conditions],
        )
    )
    parts.append(f"\n{cert.report.note}\n")
    if cert.syzygy is not None:
        s = cert.syzygy
        parts.append("## Syzygy bundle\n")
        parts.append(
            markdown_table(
                ("rank", "c1", "c2", "h⁰(L)", "slope"),
                [(s.rank, _cls(s.c1.coords), s.c2, s.h0L, f"{s.slope_num}/{s.slope_den}")],
            )
        )
        if s.degenerate:
            parts.append("\nRank one: the window 0 < r < rank is empty and stability is vacuous.\n")
    if cert.rows:
        parts.append("## Candidate ledger\n")
        parts.append(markdown_table(LEDGER_HEADER, ledger_rows(cert)))
        parts.append("\n## Enumeration bounds\n")
        parts.append(markdown_table(("bound", "value"), sorted((k, json.dumps(v)) for k, v in cert.bounds.items())))
        parts.append(f"\n{cert.reduction_note}\n")
    return "\n".join(parts)
