"""Run configuration: flat UTF-8 "key = value" text with a fixed schema.

A parsed config round-trips to identical canonical text, so run manifests
diff cleanly.  All referenced object invariants are re-validated when the
objects are built, not at parse time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .frame import SectorFrame
from .function import GenusZeroFunction, canonical
from .modulus import ScanConfig

SCHEMA: dict[str, tuple] = {
    "function.family": ("cosh-sqrt", str),
    "function.c_re": (1.0, float),
    "function.c_im": (0.0, float),
    "function.q": (0, int),
    "function.coeff": (1.0, float),
    "function.exponent": (2.0, float),
    "function.offset": (0.0, float),
    "function.zeros": ("", str),            # semicolon list of head zeros
    "function.tail_coeff": (0.0, float),
    "function.tail_exponent": (2.0, float),
    "function.tail_offset": (0.0, float),
    "frame.theta2": (0.1, float),
    "frame.psi": (0.6, float),
    "frame.psi_prime": (0.8, float),
    "scan.r_min": (1.0, float),
    "scan.r_max": (1e10, float),
    "scan.ratio": (1.25, float),
    "scan.probe_samples": (64, int),
    "scan.r1_cap": (1e6, float),
    "scan.growth_cap": (256.0, float),
    "verify.samples": (10000, int),
    "verify.grid_factor": (10.0, float),
    "verify.grid_ratio": (1.25, float),
    "verify.checks": ("all", str),          # "all" or comma list of check ids
    "islands.r": (1e7, float),
    "islands.nu": (1.0, float),
    "islands.c1": (1e-3, float),
    "islands.mesh": (512, int),
    "islands.max_count": (4, int),
    "render.x_min": (0.0, float),
    "render.x_max": (60.0, float),
    "render.y_min": (-20.0, float),
    "render.y_max": (20.0, float),
    "render.width": (48, int),
    "render.height": (32, int),
    "render.n_max": (24, int),
    "render.escape_radius": (1e8, float),
    "render.tile": (64, int),
    "dimension.source": ("model", str),     # model | levels | raster
    "dimension.levels": ("", str),          # CSV path for source=levels
    "dimension.raster": ("", str),          # PGM path for source=raster
    "dimension.n_max": (4, int),
    "dimension.c3": (0.0, float),           # 0: measure via construction
    "output.dir": ("out", str),
    "run.workers": (1, int),
}


def _coerce(key: str, raw, typ):
    try:
        if typ is int:
            if isinstance(raw, str) and raw.strip().lower() in ("true", "false"):
                raise ValueError(raw)
            v = int(str(raw).strip())
        elif typ is float:
            v = float(str(raw).strip())
        else:
            v = str(raw).strip()
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    if typ is float and not math.isfinite(v):
        raise ConfigError(f"bad value for {key}: {raw!r} (must be finite)")
    return v


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        merged = {k: default for k, (default, _t) in SCHEMA.items()}
        for k, v in self.values.items():
            if k not in SCHEMA:
                raise ConfigError(f"unknown config key {k!r}")
            merged[k] = _coerce(k, v, SCHEMA[k][1])
        self.values = merged

    def __getitem__(self, key: str):
        return self.values[key]

    def canonical_text(self) -> str:
        from .reporting import fmt_number

        lines = []
        for k in sorted(self.values):
            v = self.values[k]
            lines.append(f"{k} = {fmt_number(v)}")
        return "\n".join(lines) + "\n"

    # ---- object builders --------------------------------------------------

    def build_function(self) -> GenusZeroFunction:
        fam = self["function.family"]
        c = complex(self["function.c_re"], self["function.c_im"])
        try:
            if fam == "cosh-sqrt":
                return canonical("cosh-sqrt")
            if fam == "positive-real-zeros":
                return canonical(
                    "positive-real-zeros",
                    coeff=self["function.coeff"],
                    exponent=self["function.exponent"],
                    offset=self["function.offset"],
                    c=c,
                    q=self["function.q"],
                )
            if fam == "custom":
                zeros_text = self["function.zeros"]
                if not zeros_text or self["function.tail_coeff"] <= 0.0:
                    raise ConfigError(
                        "custom family needs function.zeros and a positive function.tail_coeff"
                    )
                head = [complex(tok) for tok in zeros_text.split(";") if tok.strip()]
                return canonical(
                    "custom",
                    zeros=head,
                    tail_coeff=self["function.tail_coeff"],
                    tail_exponent=self["function.tail_exponent"],
                    tail_offset=self["function.tail_offset"],
                    c=c,
                    q=self["function.q"],
                )
        except (ValueError, ConfigError) as exc:
            raise ConfigError(str(exc)) from exc
        raise ConfigError(f"unknown function.family {fam!r}")

    def build_frame(self) -> SectorFrame:
        try:
            return SectorFrame(
                theta2=self["frame.theta2"],
                psi=self["frame.psi"],
                psi_prime=self["frame.psi_prime"],
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def build_scan(self) -> ScanConfig:
        return ScanConfig(
            r_min=self["scan.r_min"],
            r_max=self["scan.r_max"],
            ratio=self["scan.ratio"],
            probe_samples=self["scan.probe_samples"],
            r1_search_cap=self["scan.r1_cap"],
            growth_search_cap=self["scan.growth_cap"],
            nu=self["islands.nu"],
            c1=self["islands.c1"],
        )


def parse_config(text: str) -> RunConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        values[key.strip()] = value.strip()
    return RunConfig(values)


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
