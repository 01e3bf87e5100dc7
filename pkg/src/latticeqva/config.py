"""Suite configuration: JSON schema, validation, and Context construction."""

from __future__ import annotations

import json

from .deform import DeformationMap
from .errors import ConfigInvalid
from .lattice import Isometry, Lattice, isometry_validate
from .scalars import CyclotomicField, mpq, parse_scalar
from .suites import SUITES, Context

DEFAULT_TRUNCATION = {"xlo": -8, "xhi": 8, "zorder": 6, "maxWeight": 4, "coordBox": 2}
DEFAULT_SAMPLES = {"seed": 0, "pairs": 20, "triples": 50, "tensorTriples": 10}


class SuiteConfig:
    def __init__(self, name, field, lattice, fmaps, group, trunc, samples, suites):
        self.name = name
        self.field = field
        self.lattice = lattice
        self.fmaps = fmaps
        self.group = group
        self.trunc = trunc
        self.samples = samples
        self.suites = suites

    def context(self) -> Context:
        return Context(self.lattice, self.field, self.fmaps, self.group,
                       self.trunc, self.samples)


def _coeff(value, field):
    if isinstance(value, int):
        return field.from_rational(value)
    if isinstance(value, str):
        return parse_scalar(value, field)
    if isinstance(value, list) and len(value) == 2:
        return field.from_rational(value[0], value[1])
    raise ConfigInvalid(f"cannot parse scalar {value!r}")


def load_config(source) -> SuiteConfig:
    """Parse and validate a configuration mapping or JSON text/path."""
    if isinstance(source, str):
        with open(source, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    elif isinstance(source, dict):
        data = source
    else:
        data = json.load(source)
    return validate_config(data)


def validate_config(data: dict) -> SuiteConfig:
    problems = []
    name = data.get("name", "unnamed")
    m = int(data.get("scalars", {}).get("m", 2))
    if m < 1:
        problems.append("scalars.m must be >= 1")
        m = 2
    field = CyclotomicField(m)

    lat_data = data.get("lattice")
    if not lat_data or "gram" not in lat_data:
        raise ConfigInvalid("lattice.gram is required")
    gram = lat_data["gram"]
    if not gram or any(len(row) != len(gram) for row in gram):
        raise ConfigInvalid("lattice.gram must be a nonempty square matrix")
    lat = Lattice(gram, lat_data.get("cocycle"))
    problems.extend(lat.validate())

    trunc = dict(DEFAULT_TRUNCATION)
    trunc.update({k: int(v) for k, v in data.get("truncation", {}).items()})
    if trunc["xlo"] > trunc["xhi"]:
        problems.append("truncation window is empty")
    if trunc["zorder"] < 1 or trunc["maxWeight"] < 0 or trunc["coordBox"] < 0:
        problems.append("truncation orders must be nonnegative (zorder >= 1)")

    samples = dict(DEFAULT_SAMPLES)
    samples.update({k: int(v) for k, v in data.get("samples", {}).items()
                    if k in DEFAULT_SAMPLES})

    fmaps = {}
    for fname, triples in data.get("deformations", {}).items():
        entries = {}
        for item in triples:
            if len(item) != 4:
                problems.append(f"deformation {fname}: entries are [row, col, exp, coeff]")
                continue
            row, col, exp, coeff = item
            if not (0 <= row < lat.rank and 0 <= col < lat.rank):
                problems.append(f"deformation {fname}: index out of range")
                continue
            if exp < 1:
                problems.append(f"deformation {fname}: exponents must be >= 1")
                continue
            entries.setdefault((row, col), {})[exp] = _coeff(coeff, field)
        try:
            fmaps[fname] = DeformationMap(lat.rank, entries)
        except ValueError as exc:
            problems.append(f"deformation {fname}: {exc}")

    group = []
    for gdata in data.get("group", []):
        try:
            chi = _coeff(gdata.get("character", 1), field)
        except ConfigInvalid as exc:
            problems.append(str(exc))
            continue
        g = Isometry(gdata["matrix"], chi)
        rep = isometry_validate(lat, g)
        if rep:
            problems.append(f"group element {gdata['matrix']}: " + "; ".join(rep))
        else:
            group.append(g)

    suites = data.get("suites", list(SUITES))
    for s in suites:
        if s not in SUITES:
            problems.append(f"unknown suite {s!r}")

    if problems:
        raise ConfigInvalid("; ".join(problems))
    return SuiteConfig(name, field, lat, fmaps, group, trunc, samples, suites)
