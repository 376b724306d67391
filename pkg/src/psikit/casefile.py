"""The ``key = value`` case-file format and the CSV report row.

A case file looks like::

    # FINAL_MIN at p = 2
    identity = final_min
    a = [0.25+0.1i, 0.35+0i]
    b = [1.4-0.2i]
    tol = 1e-8

Vectors are bracketed lists of complex literals ``x``, ``x+yi`` or ``x-yi``;
whitespace is ignored.  Blank lines and lines starting with ``#`` are
skipped.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional

from .errors import CaseFileError
from .identities import IdentityCase, IdentityId, VerificationReport, effective_sign
from .series import as_sign

KEYS = ("identity", "a", "b", "c", "d", "m", "n", "s", "sign", "tol", "seed")
VECTOR_KEYS = ("a", "b", "c", "d")

_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX = re.compile(rf"^(?P<re>[+-]?{_NUM})(?:(?P<im>[+-]{_NUM})i)?$")

REPORT_COLUMNS = (
    "identity", "p", "m", "n", "s", "sign", "lhs_re", "lhs_im", "rhs_re", "rhs_im",
    "residual", "pass", "terms_lhs", "terms_rhs", "warnings",
)


def parse_complex(text: str, line: Optional[int] = None) -> complex:
    t = re.sub(r"\s+", "", text)
    mt = _COMPLEX.match(t)
    if not mt:
        raise CaseFileError(f"malformed complex literal {text.strip()!r}", line)
    im = mt.group("im")
    return complex(float(mt.group("re")), float(im) if im else 0.0)


def parse_vector(text: str, line: Optional[int] = None) -> tuple:
    t = re.sub(r"\s+", "", text)
    if not (t.startswith("[") and t.endswith("]")):
        raise CaseFileError(f"vector must be bracketed: {text.strip()!r}", line)
    body = t[1:-1]
    if not body:
        return ()
    return tuple(parse_complex(x, line) for x in body.split(","))


def format_float(x: float) -> str:
    return f"{x:.17g}"


def format_complex(z: complex) -> str:
    z = complex(z)
    im = format_float(z.imag)
    if not im.startswith("-"):
        im = "+" + im
    return f"{format_float(z.real)}{im}i"


def format_vector(v: Iterable[complex]) -> str:
    return "[" + ", ".join(format_complex(x) for x in v) + "]"


@dataclass
class CaseFile:
    """Parsed contents of a case file (missing keys keep their defaults)."""

    values: Dict[str, object] = field(default_factory=dict)

    def get(self, key, default=None):
        return self.values.get(key, default)

    def __contains__(self, key):
        return key in self.values

    def to_case(self) -> IdentityCase:
        if "identity" not in self.values:
            raise CaseFileError("missing key 'identity'")
        kw = {k: self.values[k] for k in ("a", "b", "c", "d", "m", "n", "s", "sign") if k in self.values}
        return IdentityCase(self.values["identity"], **kw)


def _parse_int(text, key, line):
    try:
        return int(text.strip())
    except ValueError:
        raise CaseFileError(f"{key} must be an integer, got {text.strip()!r}", line) from None


def parse_casefile(text: str) -> CaseFile:
    out: Dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CaseFileError(f"expected 'key = value', got {line!r}", lineno)
        key, _, value = line.partition("=")
        key = key.strip().lower()
        if key not in KEYS:
            raise CaseFileError(f"unknown key {key!r}", lineno)
        if key in out:
            raise CaseFileError(f"duplicate key {key!r}", lineno)
        if key in VECTOR_KEYS:
            out[key] = parse_vector(value, lineno)
        elif key == "identity":
            try:
                out[key] = IdentityId.parse(value)
            except ValueError as exc:
                raise CaseFileError(str(exc), lineno) from None
        elif key in ("m", "n", "s", "seed"):
            out[key] = _parse_int(value, key, lineno)
        elif key == "sign":
            try:
                out[key] = as_sign(value.strip())
            except (ValueError, TypeError):
                raise CaseFileError(f"sign must be +1 or -1, got {value.strip()!r}", lineno) from None
        else:
            try:
                out[key] = float(value.strip())
            except ValueError:
                raise CaseFileError(f"tol must be a number, got {value.strip()!r}", lineno) from None
    return CaseFile(out)


def read_casefile(path) -> CaseFile:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_casefile(fh.read())
    except OSError as exc:
        raise CaseFileError(f"cannot read {path}: {exc.strerror}") from None


def format_case(case: IdentityCase, tol: Optional[float] = None, seed: Optional[int] = None) -> str:
    """Case-file text that parses back to ``case``."""
    lines = [f"identity = {case.id.value}"]
    for name in VECTOR_KEYS:
        v = getattr(case, name)
        if v:
            lines.append(f"{name} = {format_vector(v)}")
    for name in ("m", "n", "s"):
        if getattr(case, name):
            lines.append(f"{name} = {getattr(case, name)}")
    lines.append(f"sign = {int(case.sign):+d}")
    if tol is not None:
        lines.append(f"tol = {format_float(tol)}")
    if seed is not None:
        lines.append(f"seed = {seed}")
    return "\n".join(lines) + "\n"


def report_row(case: IdentityCase, rep: VerificationReport) -> List[str]:
    return [
        case.id.value,
        str(case.p),
        str(case.m),
        str(case.n),
        str(case.s),
        f"{effective_sign(case):+d}",
        format_float(rep.lhs.real),
        format_float(rep.lhs.imag),
        format_float(rep.rhs.real),
        format_float(rep.rhs.imag),
        format_float(rep.residual),
        "true" if rep.passed else "false",
        str(rep.terms_lhs),
        str(rep.terms_rhs),
        "; ".join(rep.diagnostics),
    ]


def write_report(rows: Iterable[List[str]], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for r in rows:
        w.writerow(r)


def report_text(pairs) -> str:
    buf = io.StringIO()
    write_report((report_row(c, r) for c, r in pairs), buf)
    return buf.getvalue()
