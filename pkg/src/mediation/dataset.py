"""Four-layer data table: covariates C, exposures X, mediators M, outcome Y."""

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError

ROLES = ("covariate", "exposure", "mediator", "outcome_value", "outcome_time", "outcome_event")
OUTCOME_KINDS = ("continuous", "binary", "survival")


def _frozen(a, ndim):
    a = np.array(a, dtype=float, copy=True)
    if ndim == 2 and a.ndim == 1:
        a = a[:, None]
    if a.ndim != ndim:
        raise DataError(f"expected a {ndim}-d array, got shape {a.shape}")
    a.setflags(write=False)
    return a


def _check_binary(v, what):
    if not np.all((v == 0) | (v == 1)):
        raise DataError(f"{what} must be 0/1")


@dataclass(frozen=True)
class Continuous:
    values: np.ndarray
    kind = "continuous"

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values, 1))

    def __len__(self):
        return self.values.shape[0]

    def take(self, idx):
        return Continuous(self.values[idx])

    def columns(self):
        return {"value": self.values}


@dataclass(frozen=True)
class Binary:
    values: np.ndarray
    kind = "binary"

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values, 1))
        _check_binary(self.values, "binary outcome")

    def __len__(self):
        return self.values.shape[0]

    def take(self, idx):
        return Binary(self.values[idx])

    def columns(self):
        return {"value": self.values}


@dataclass(frozen=True)
class Survival:
    time: np.ndarray
    event: np.ndarray
    kind = "survival"

    def __post_init__(self):
        object.__setattr__(self, "time", _frozen(self.time, 1))
        object.__setattr__(self, "event", _frozen(self.event, 1))
        if self.time.shape != self.event.shape:
            raise DataError("time and event columns differ in length")
        if np.any(self.time <= 0):
            raise DataError("survival times must be strictly positive")
        _check_binary(self.event, "event indicator")
        if not np.any(self.event == 1):
            raise DataError("no observed events: every survival time is censored")

    def __len__(self):
        return self.time.shape[0]

    def take(self, idx):
        return Survival(self.time[idx], self.event[idx])

    def columns(self):
        return {"time": self.time, "event": self.event}


@dataclass(frozen=True)
class Dataset:
    """Validated, immutable four-layer table.

    Row ``l`` of every layer refers to the same unit. ``covariates`` may have
    zero columns.
    """

    exposures: np.ndarray
    mediators: np.ndarray
    outcome: object
    covariates: np.ndarray = None
    exposure_names: tuple = None
    mediator_names: tuple = None
    covariate_names: tuple = None

    def __post_init__(self):
        X = _frozen(self.exposures, 2)
        M = _frozen(self.mediators, 2)
        n = X.shape[0]
        C = np.empty((n, 0)) if self.covariates is None else self.covariates
        C = _frozen(C, 2)
        for name, a in (("exposures", X), ("mediators", M), ("covariates", C)):
            if a.shape[0] != n:
                raise DataError(f"{name} has {a.shape[0]} rows, exposures have {n}")
            if not np.all(np.isfinite(a)):
                raise DataError(f"{name} contain non-finite values")
        if X.shape[1] < 1 or M.shape[1] < 1:
            raise DataError("need at least one exposure and one mediator")
        if not isinstance(self.outcome, (Continuous, Binary, Survival)):
            raise DataError(f"unsupported outcome column {type(self.outcome).__name__}")
        if len(self.outcome) != n:
            raise DataError(f"outcome has {len(self.outcome)} rows, exposures have {n}")
        for arr in self.outcome.columns().values():
            if not np.all(np.isfinite(arr)):
                raise DataError("outcome contains non-finite values")
        object.__setattr__(self, "exposures", X)
        object.__setattr__(self, "mediators", M)
        object.__setattr__(self, "covariates", C)
        for attr, prefix, k in (
            ("exposure_names", "x", X.shape[1]),
            ("mediator_names", "m", M.shape[1]),
            ("covariate_names", "c", C.shape[1]),
        ):
            names = getattr(self, attr)
            names = tuple(f"{prefix}{j + 1}" for j in range(k)) if names is None else tuple(names)
            if len(names) != k:
                raise DataError(f"{attr} has {len(names)} entries for {k} columns")
            object.__setattr__(self, attr, names)

    @property
    def n(self):
        return self.exposures.shape[0]

    @property
    def p(self):
        return self.exposures.shape[1]

    @property
    def q(self):
        return self.covariates.shape[1]

    @property
    def r(self):
        return self.mediators.shape[1]

    @property
    def outcome_kind(self):
        return self.outcome.kind

    def take(self, idx):
        """Rows ``idx`` (with repeats allowed) of every layer jointly."""
        idx = np.asarray(idx)
        return Dataset(
            exposures=self.exposures[idx],
            mediators=self.mediators[idx],
            outcome=self.outcome.take(idx),
            covariates=self.covariates[idx],
            exposure_names=self.exposure_names,
            mediator_names=self.mediator_names,
            covariate_names=self.covariate_names,
        )

    def exposure_index(self, key):
        """Resolve an exposure given by name or 0-based index."""
        if isinstance(key, str) and key in self.exposure_names:
            return self.exposure_names.index(key)
        try:
            i = int(key)
        except (TypeError, ValueError):
            raise ConfigError(f"unknown exposure {key!r}; have {list(self.exposure_names)}") from None
        if not 0 <= i < self.p:
            raise ConfigError(f"exposure index {i} out of range [0, {self.p})")
        return i


@dataclass(frozen=True)
class Intervention:
    exposure_index: int
    x_low: float
    x_high: float

    def __post_init__(self):
        if not (math.isfinite(self.x_low) and math.isfinite(self.x_high)):
            raise ConfigError("intervention levels must be finite")
        if self.x_low == self.x_high:
            warnings.warn("x_low == x_high: every effect is null", stacklevel=2)

    @property
    def delta(self):
        return self.x_high - self.x_low

    def swapped(self):
        return Intervention(self.exposure_index, self.x_high, self.x_low)

    def to_dict(self):
        return {"exposure_index": self.exposure_index, "x_low": self.x_low, "x_high": self.x_high}


def quantile(values, q):
    """Linear interpolation between order statistics.

    Position ``q * (n - 1)`` in the sorted sample (numpy's ``linear`` rule,
    R type 7).
    """
    return np.quantile(np.asarray(values, dtype=float), q, method="linear")


def default_intervention(ds, i, low=0.025, high=0.975):
    """Shift exposure ``i`` from its 2.5th to its 97.5th percentile.

    Two-level exposures (e.g. binary) snap to their two support points.
    """
    col = ds.exposures[:, i]
    levels = np.unique(col)
    if levels.size < 2:
        raise DataError(f"exposure {ds.exposure_names[i]} is constant")
    if levels.size == 2:
        return Intervention(i, float(levels[0]), float(levels[1]))
    lo, hi = quantile(col, [low, high])
    return Intervention(i, float(lo), float(hi))


# --------------------------------------------------------------------- schema


@dataclass
class ColumnRoles:
    """Column name -> role assignment; order within a role is preserved."""

    roles: dict
    outcome_type: str = None
    columns: dict = field(init=False)

    def __post_init__(self):
        cols = {r: [] for r in ROLES}
        for name, role in self.roles.items():
            if role not in ROLES:
                raise ConfigError(f"column {name!r}: unknown role {role!r}; expected one of {ROLES}")
            cols[role].append(name)
        for role in ("outcome_value", "outcome_time", "outcome_event"):
            if len(cols[role]) > 1:
                raise ConfigError(f"more than one {role} column")
        if not cols["exposure"]:
            raise ConfigError("schema has no exposure column")
        if not cols["mediator"]:
            raise ConfigError("schema has no mediator column")
        surv = bool(cols["outcome_time"]) or bool(cols["outcome_event"])
        if surv:
            if not (cols["outcome_time"] and cols["outcome_event"]):
                raise ConfigError("survival outcome needs both outcome_time and outcome_event")
            if cols["outcome_value"]:
                raise ConfigError("schema mixes outcome_value with survival columns")
            kind = self.outcome_type or "survival"
            if kind != "survival":
                raise ConfigError(f"outcome_type {kind!r} conflicts with survival columns")
        else:
            if not cols["outcome_value"]:
                raise ConfigError("schema has no outcome column")
            kind = self.outcome_type or "continuous"
            if kind not in ("continuous", "binary"):
                raise ConfigError(f"outcome_type must be continuous or binary, got {kind!r}")
        self.outcome_type = kind
        self.columns = cols

    @classmethod
    def from_mapping(cls, cfg):
        """Accept ``{"roles": {...}, "outcome_type": ...}`` or a flat name->role map."""
        cfg = dict(cfg)
        if "roles" in cfg:
            return cls(dict(cfg["roles"]), cfg.get("outcome_type"))
        outcome_type = cfg.pop("outcome_type", None)
        return cls(cfg, outcome_type)

    @classmethod
    def load(cls, path):
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"cannot read schema {path}: {e}") from None
        if path.suffix.lower() == ".toml":
            try:
                import tomllib
            except ModuleNotFoundError:  # python < 3.11
                import tomli as tomllib
            try:
                cfg = tomllib.loads(text)
            except tomllib.TOMLDecodeError as e:
                raise ConfigError(f"bad TOML in {path}: {e}") from None
        else:
            try:
                cfg = json.loads(text)
            except json.JSONDecodeError as e:
                raise ConfigError(f"bad JSON in {path}: {e}") from None
        return cls.from_mapping(cfg)

    def to_mapping(self):
        return {"roles": dict(self.roles), "outcome_type": self.outcome_type}


def load_csv(path, schema):
    """Read a headered CSV into a validated :class:`Dataset`."""
    if not isinstance(schema, ColumnRoles):
        schema = ColumnRoles.from_mapping(schema)
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path} is empty") from None
        rows = [row for row in reader if row]
    missing = [name for name in schema.roles if name not in header]
    if missing:
        raise DataError(f"{path}: missing column(s) {missing}")
    pos = {name: header.index(name) for name in schema.roles}

    def column(name):
        j = pos[name]
        out = np.empty(len(rows))
        for i, row in enumerate(rows):
            cell = row[j].strip() if j < len(row) else ""
            try:
                out[i] = float(cell)
            except ValueError:
                raise DataError(f"{path}: row {i + 2}, column {name!r}: non-numeric value {cell!r}") from None
            if not math.isfinite(out[i]):
                raise DataError(f"{path}: row {i + 2}, column {name!r}: non-finite value {cell!r}")
        return out

    def layer(role):
        names = schema.columns[role]
        if not names:
            return np.empty((len(rows), 0)), ()
        return np.column_stack([column(nm) for nm in names]), tuple(names)

    X, xn = layer("exposure")
    M, mn = layer("mediator")
    C, cn = layer("covariate")
    cols = schema.columns
    if schema.outcome_type == "survival":
        outcome = Survival(column(cols["outcome_time"][0]), column(cols["outcome_event"][0]))
    elif schema.outcome_type == "binary":
        outcome = Binary(column(cols["outcome_value"][0]))
    else:
        outcome = Continuous(column(cols["outcome_value"][0]))
    return Dataset(X, M, outcome, C, exposure_names=xn, mediator_names=mn, covariate_names=cn)


def schema_for(ds):
    """The :class:`ColumnRoles` that :func:`write_csv` output reloads with."""
    roles = {}
    for nm in ds.covariate_names:
        roles[nm] = "covariate"
    for nm in ds.exposure_names:
        roles[nm] = "exposure"
    for nm in ds.mediator_names:
        roles[nm] = "mediator"
    if ds.outcome_kind == "survival":
        roles["time"] = "outcome_time"
        roles["event"] = "outcome_event"
    else:
        roles["y"] = "outcome_value"
    return ColumnRoles(roles, ds.outcome_kind)


def write_csv(ds, path):
    """Write ``ds`` with shortest round-trip float formatting."""
    schema = schema_for(ds)
    header = list(schema.roles)
    blocks = [ds.covariates, ds.exposures, ds.mediators]
    blocks += [v[:, None] for v in ds.outcome.columns().values()]
    data = np.hstack(blocks)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in data:
            w.writerow([repr(float(v)) for v in row])
    return schema
