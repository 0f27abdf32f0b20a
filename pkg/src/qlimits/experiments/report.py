"""ConvergenceReport: the self-contained record of one run, plus its file forms."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

FORMAT_VERSION = 1

CSV_HEADERS = {
    "slln": ("n", "part", "error", "ci_lo", "ci_hi", "ks_D", "ks_p"),
    "l1": ("n", "part", "error", "ci_lo", "ci_hi", "ks_D", "ks_p"),
    "clt": ("n", "part", "statistic", "ci_lo", "ci_hi", "ks_D", "ks_p"),
    "walk": ("t", "part", "statistic", "ci_lo", "ci_hi", "ks_D", "ks_p"),
}


@dataclass
class ConvergenceReport:
    theorem: str
    mode: str
    channel: str
    seed: int
    config: dict
    probes: list
    verdict: str
    warnings: list = field(default_factory=list)
    runtime: dict = field(default_factory=dict)
    format_version: int = FORMAT_VERSION

    def to_dict(self) -> dict:
        return _clean(asdict(self))

    @classmethod
    def from_dict(cls, d: dict) -> "ConvergenceReport":
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ConvergenceReport":
        return cls.from_dict(json.loads(text))

    def probe(self, name: str) -> dict:
        for p in self.probes:
            if p["name"] == name:
                return p
        raise KeyError(name)

    @property
    def passed(self) -> bool:
        return self.verdict in ("pass", "vacuous")

    def csv_tables(self) -> dict[str, str]:
        """One CSV document per probe, keyed by probe name."""
        header = CSV_HEADERS[self.mode]
        out = {}
        for p in self.probes:
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(header)
            for row in p.get("csv_rows", []):
                writer.writerow([_fmt(v) for v in row])
            out[p["name"]] = buf.getvalue()
        return out


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _clean(obj):
    """Recursively turn numpy scalars into Python ones and non-finite floats into None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        obj = obj.item()
    if isinstance(obj, bool) or obj is None or isinstance(obj, (str, int)):
        return obj
    if isinstance(obj, complex):
        return [_clean(obj.real), _clean(obj.imag)]
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    raise TypeError(f"cannot serialise {type(obj).__name__}")
