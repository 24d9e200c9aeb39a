"""Flat key-value run configuration.

The config file is plain text, one `key = value` per line, `#` comments.
Keys are dotted (section.name).  Example:

    model.name = cosine
    model.params = 2, 1
    data.profile = gaussian
    data.params = 1, 0, 1
    solver.h = 0.0078125
    solver.t_max = 1.0
    snapshots.times = 0.25, 0.5, 1.0
    chars.starts = -0.5, +0.25
    output.dir = runs/demo

Initial data may instead be given as two-column CSV files (x, value)
via data.csv / data.u1.csv.  Characteristic start tokens carry a
mandatory leading family sign (`-` backward, `+` forward) followed by
the start abscissa, e.g. `-0.5` or `+-1.0`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ValidationError

_DEFAULTS = {
    "model.name": "constant",
    "model.params": "1.0",
    "model.interval": "-10, 10",
    "data.profile": "gaussian",
    "data.params": "1, 0, 1",
    "data.u1.profile": "zero",
    "data.u1.params": "",
    "data.csv": "",
    "data.u1.csv": "",
    "data.pad": "0.5",
    "solver.h": "0.0078125",
    "solver.t_max": "1.0",
    "snapshots.times": "",
    "snapshots.nu_floor": "1e-3",
    "chars.starts": "",
    "qseries.samples": "13",
    "oracle.name": "none",
    "output.dir": "run",
    "output.grid_csv": "true",
    "output.deterministic": "true",
}


def _floats(s: str) -> list[float]:
    s = s.strip()
    if not s:
        return []
    return [float(tok) for tok in s.replace(",", " ").split()]


def _char_starts(s: str) -> list[tuple[int, float]]:
    out = []
    for tok in s.replace(",", " ").split():
        if tok[0] not in "+-":
            raise ValidationError(
                f"characteristic start {tok!r} must begin with a family "
                "sign (+ forward, - backward)")
        out.append((+1 if tok[0] == "+" else -1, float(tok[1:])))
    return out


def _bool(s: str) -> bool:
    return s.strip().lower() in ("true", "1", "yes", "on")


@dataclass
class RunConfig:
    model_name: str
    model_params: list[float]
    model_interval: tuple[float, float]
    profile: str
    profile_params: list[float]
    u1_profile: str
    u1_params: list[float]
    data_csv: str
    u1_csv: str
    data_pad: float
    h: float
    t_max: float
    snapshot_times: list[float]
    nu_floor: float
    char_starts: list[tuple[int, float]]
    qseries_samples: int
    oracle: str
    out_dir: str
    grid_csv: bool
    deterministic: bool
    raw: dict = field(default_factory=dict)

    def validate(self):
        if self.h <= 0:
            raise ValidationError("solver.h must be positive")
        if self.t_max <= 0:
            raise ValidationError("solver.t_max must be positive")
        for tau in self.snapshot_times:
            if not (0.0 <= tau <= self.t_max):
                raise ValidationError(
                    f"snapshot time {tau} outside [0, t_max={self.t_max}]")
        if not (0.0 < self.nu_floor < 1.0):
            raise ValidationError("snapshots.nu_floor must be in (0, 1)")
        if self.qseries_samples < 2:
            raise ValidationError("qseries.samples must be >= 2")
        if self.oracle not in ("none", "dalembert", "fd"):
            raise ValidationError(f"unknown oracle {self.oracle!r}")
        if self.data_pad < 0:
            raise ValidationError("data.pad must be nonnegative")
        return self


def parse_config_text(text: str) -> RunConfig:
    kv = dict(_DEFAULTS)
    for ln, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"config line {ln}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _DEFAULTS:
            raise ValidationError(f"config line {ln}: unknown key {key!r}")
        kv[key] = val
    try:
        iv = _floats(kv["model.interval"])
        if len(iv) != 2 or iv[0] >= iv[1]:
            raise ValidationError("model.interval must be two increasing "
                                  "numbers")
        cfg = RunConfig(
            model_name=kv["model.name"],
            model_params=_floats(kv["model.params"]),
            model_interval=(iv[0], iv[1]),
            profile=kv["data.profile"],
            profile_params=_floats(kv["data.params"]),
            u1_profile=kv["data.u1.profile"],
            u1_params=_floats(kv["data.u1.params"]),
            data_csv=kv["data.csv"].strip(),
            u1_csv=kv["data.u1.csv"].strip(),
            data_pad=float(kv["data.pad"]),
            h=float(kv["solver.h"]),
            t_max=float(kv["solver.t_max"]),
            snapshot_times=_floats(kv["snapshots.times"]),
            nu_floor=float(kv["snapshots.nu_floor"]),
            char_starts=_char_starts(kv["chars.starts"]),
            qseries_samples=int(kv["qseries.samples"]),
            oracle=kv["oracle.name"].strip().lower(),
            out_dir=kv["output.dir"],
            grid_csv=_bool(kv["output.grid_csv"]),
            deterministic=_bool(kv["output.deterministic"]),
            raw=kv,
        )
    except ValueError as exc:
        raise ValidationError(f"malformed config value: {exc}") from exc
    return cfg.validate()


def load_config(path) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_config_text(fh.read())
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
