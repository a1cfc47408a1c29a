"""Core model definitions: parameters, warning mechanism, local dynamics.

A news item spreads as unread copies of two kinds: x-copies carry a fake
tag, y-copies carry a real tag.  Each copy wakes at rate ``wake_rate``;
the waking reader sees a warning level that depends on the current
fake-tag fraction ``beta``, decides whether to tag the item fake, and
forwards it to a random number of contacts.  Everything in this module is
an immutable value object or a pure function, so instances can be shared
freely across threads and processes.
"""

from __future__ import annotations

import json
import warnings as _warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConstraintViolation, InputError, RegimeViolation

__all__ = [
    "DegreeModel",
    "ModelParams",
    "WarningPolicy",
    "ScenarioPair",
    "RegimeReport",
    "warning_level",
    "tag_prob",
    "generator_matrix",
    "beta_drift",
    "check_tag_probabilities",
    "validate_regime",
    "load_scenario",
    "parse_overrides",
]


# ---------------------------------------------------------------------------
# parameter containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DegreeModel:
    """Distribution of the number of contacts a forwarded copy reaches.

    Three kinds are supported:

    * ``constant``  -- every share reaches exactly ``m`` contacts;
    * ``binomial``  -- Binomial(``n``, ``p``) contacts per share;
    * ``empirical`` -- degrees drawn from a weighted histogram, e.g. the
      out-degree histogram of an ingested social graph.
    """

    kind: str
    m: int = 0
    n: int = 0
    p: float = 0.0
    values: np.ndarray | None = field(default=None, repr=False)
    cdf: np.ndarray | None = field(default=None, repr=False)
    weights: np.ndarray | None = field(default=None, repr=False)

    @staticmethod
    def constant(m: int) -> "DegreeModel":
        if m < 1:
            raise InputError(f"constant degree must be >= 1, got {m}")
        return DegreeModel(kind="constant", m=int(m))

    @staticmethod
    def binomial(n: int, p: float) -> "DegreeModel":
        if n < 1 or not 0.0 < p <= 1.0:
            raise InputError(f"binomial degree needs n >= 1, 0 < p <= 1; got n={n}, p={p}")
        return DegreeModel(kind="binomial", n=int(n), p=float(p))

    @staticmethod
    def empirical(values, counts) -> "DegreeModel":
        values = np.asarray(values, dtype=np.int64)
        counts = np.asarray(counts, dtype=np.float64)
        if values.size == 0 or values.size != counts.size:
            raise InputError("empirical degree model needs matching nonempty values/counts")
        if np.any(values < 0) or np.any(counts < 0) or counts.sum() <= 0:
            raise InputError("empirical degree model needs nonnegative values and positive mass")
        order = np.argsort(values, kind="stable")
        values = values[order]
        counts = counts[order]
        if np.any(np.diff(values) == 0):
            # merge duplicate degree values
            uniq, inv = np.unique(values, return_inverse=True)
            merged = np.zeros(uniq.size)
            np.add.at(merged, inv, counts)
            values, counts = uniq, merged
        cdf = np.cumsum(counts) / counts.sum()
        cdf[-1] = 1.0  # guard against rounding in the running sum
        for arr in (values, counts, cdf):
            arr.flags.writeable = False
        return DegreeModel(kind="empirical", values=values, cdf=cdf, weights=counts)

    @property
    def mean(self) -> float:
        if self.kind == "constant":
            return float(self.m)
        if self.kind == "binomial":
            return self.n * self.p
        return float(np.dot(self.values, self.weights) / self.weights.sum())

    @property
    def second_moment(self) -> float:
        if self.kind == "constant":
            return float(self.m) ** 2
        if self.kind == "binomial":
            var = self.n * self.p * (1.0 - self.p)
            return var + (self.n * self.p) ** 2
        return float(np.dot(self.values.astype(float) ** 2, self.weights) / self.weights.sum())

    def kernel_encoding(self):
        """Scalar/array form consumed by the simulation kernels."""
        empty_v = np.empty(0, dtype=np.int64)
        empty_c = np.empty(0, dtype=np.float64)
        if self.kind == "constant":
            return 0, self.m, 0.0, empty_v, empty_c
        if self.kind == "binomial":
            return 1, self.n, self.p, empty_v, empty_c
        return 2, 0, 0.0, self.values, self.cdf


@dataclass(frozen=True)
class ModelParams:
    """Per-news-item parameters of the spreading process.

    ``alpha_fake`` / ``alpha_real`` scale the shown warning into a tag
    probability depending on whether the waking copy already carries a
    fake or a real tag.  ``eta`` is the per-contact read probability and
    ``eta_c`` discounts forwarding when the reader just tagged the item
    fake (1.0 means no reluctance).
    """

    wake_rate: float
    alpha_fake: float
    alpha_real: float
    eta: float
    degree_model: DegreeModel
    eta_c: float = 1.0

    def __post_init__(self):
        if not self.wake_rate > 0.0:
            raise InputError(f"wake_rate must be positive, got {self.wake_rate}")
        for name in ("alpha_fake", "alpha_real", "eta", "eta_c"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise InputError(f"{name} must lie in (0, 1], got {v}")

    @property
    def mean_offspring(self) -> float:
        """Expected unread copies created per share before any reluctance."""
        return self.degree_model.mean * self.eta


@dataclass(frozen=True)
class WarningPolicy:
    """Controller parameters of the warning mechanism.

    ``w`` is the warning weight, ``b`` shapes how fast the warning ramps
    up with the fake-tag fraction (small ``b`` = aggressive), ``epsilon``
    is the always-on base warning.
    """

    w: float
    b: float
    epsilon: float

    def __post_init__(self):
        if not 0.0 <= self.w <= 1.0:
            raise InputError(f"w must lie in [0, 1], got {self.w}")
        if self.b < 0.0:
            raise InputError(f"b must be nonnegative, got {self.b}")
        if not self.epsilon > 0.0:
            raise InputError(f"epsilon must be positive, got {self.epsilon}")


@dataclass(frozen=True)
class ScenarioPair:
    """A fake and a real news item governed by one warning policy."""

    fake: ModelParams
    real: ModelParams
    policy: WarningPolicy


@dataclass(frozen=True)
class RegimeReport:
    passed: bool
    failures: tuple[str, ...]


# ---------------------------------------------------------------------------
# warning mechanism and local rates
# ---------------------------------------------------------------------------

def _warning_level_raw(beta: float, policy: WarningPolicy) -> float:
    """``warning_level`` without the degenerate-point flag (internal)."""
    if policy.b == 0.0:
        return (policy.w + policy.epsilon) if beta > 0.0 else policy.epsilon
    return policy.w * beta / (beta + policy.b * (1.0 - beta)) + policy.epsilon


def warning_level(beta: float, policy: WarningPolicy) -> float:
    """Warning shown to a reader when the fake-tag fraction is ``beta``.

    Increasing and concave in ``beta``, ranging from ``epsilon`` at 0 to
    ``w + epsilon`` at 1.  At ``b = 0`` the ramp collapses to a step: the
    pointwise limit is ``epsilon`` at ``beta = 0`` and ``w + epsilon``
    for any positive ``beta``; the 0/0 point itself is flagged.
    """
    if not 0.0 <= beta <= 1.0:
        raise InputError(f"beta must lie in [0, 1], got {beta}")
    if policy.b == 0.0 and beta == 0.0:
        _warnings.warn(
            "warning_level at beta=0 with b=0 is a 0/0 point; "
            "returning the base level epsilon",
            RuntimeWarning,
            stacklevel=2,
        )
        return policy.epsilon
    return _warning_level_raw(beta, policy)


def check_tag_probabilities(params: ModelParams, policy: WarningPolicy) -> None:
    """Reject parameterizations whose tag probability could reach 1.

    The maximal shown warning is ``w + epsilon``; both sensitivities must
    keep the product strictly below 1 so tags stay genuinely random.
    """
    top = policy.w + policy.epsilon
    for name, alpha in (("alpha_fake", params.alpha_fake), ("alpha_real", params.alpha_real)):
        if alpha * top >= 1.0:
            raise ConstraintViolation(
                f"{name} * (w + epsilon) = {alpha * top:.6g} >= 1; "
                f"reduce {name}, w, or epsilon"
            )


def tag_prob(tag: str, beta: float, params: ModelParams, policy: WarningPolicy) -> float:
    """Probability that a waking copy with the given tag is re-tagged fake."""
    check_tag_probabilities(params, policy)
    if tag == "fake":
        alpha = params.alpha_fake
    elif tag == "real":
        alpha = params.alpha_real
    else:
        raise InputError(f"tag must be 'fake' or 'real', got {tag!r}")
    return alpha * warning_level(beta, policy)


def generator_matrix(beta: float, params: ModelParams, policy: WarningPolicy) -> np.ndarray:
    """Mean growth-rate matrix of (x-copies, y-copies) at fixed ``beta``.

    Row u gives the expected net creation rate of (x, y) copies per unit
    time caused by one waking u-copy; both rows sum to
    ``wake_rate * (mean_offspring - 1)``.
    """
    lam = params.wake_rate
    m_eta = params.mean_offspring
    q_f = tag_prob("fake", beta, params, policy)
    q_r = tag_prob("real", beta, params, policy)
    return np.array(
        [
            [lam * (q_f * m_eta - 1.0), lam * (1.0 - q_f) * m_eta],
            [lam * q_r * m_eta, lam * ((1.0 - q_r) * m_eta - 1.0)],
        ]
    )


def _mixed_tag_prob(beta: float, params: ModelParams, policy: WarningPolicy) -> float:
    """Tag probability of a waking copy drawn at fake-tag fraction ``beta``."""
    om = _warning_level_raw(beta, policy)
    return (beta * params.alpha_fake + (1.0 - beta) * params.alpha_real) * om


def beta_drift(beta: float, params: ModelParams, policy: WarningPolicy) -> float:
    """Signed drift of the fake-tag fraction at ``beta``.

    Positive drift pushes the fraction up, negative down; the zero
    crossing on (0, 1) is the limiting fraction.  With tagging reluctance
    (``eta_c < 1``) fake-tagged shares spawn fewer copies, which rescales
    the inflow term by ``eta_c + beta * (1 - eta_c)``.
    """
    check_tag_probabilities(params, policy)
    g = _mixed_tag_prob(beta, params, policy)
    if params.eta_c != 1.0:
        g *= params.eta_c + beta * (1.0 - params.eta_c)
    return g - beta


# ---------------------------------------------------------------------------
# regime validation
# ---------------------------------------------------------------------------

def validate_regime(scenario: ScenarioPair, strict: bool = True) -> RegimeReport:
    """Check the parameter orderings the design layer relies on.

    The fake item must be the more attractive one; within each news item
    the fake-tagged copy must be the more warning-sensitive one; and fake
    news must be more tag-prone than real news
    sensitivity-for-sensitivity.  All four tag products must stay below
    1.  ``strict`` raises on any failure; otherwise each failure is
    emitted as a Python warning and collected in the report.
    """
    failures: list[str] = []
    if not scenario.fake.eta > scenario.real.eta:
        failures.append(
            f"eta: fake news attractiveness ({scenario.fake.eta}) must exceed "
            f"real news attractiveness ({scenario.real.eta})"
        )
    pairs = (("fake news", scenario.fake), ("real news", scenario.real))
    for label, params in pairs:
        if not params.alpha_fake > params.alpha_real:
            failures.append(
                f"{label}: alpha_fake ({params.alpha_fake}) must exceed "
                f"alpha_real ({params.alpha_real})"
            )
        try:
            check_tag_probabilities(params, scenario.policy)
        except ConstraintViolation as exc:
            failures.append(f"{label}: {exc}")
    for attr in ("alpha_fake", "alpha_real"):
        f_v = getattr(scenario.fake, attr)
        r_v = getattr(scenario.real, attr)
        if not f_v > r_v:
            failures.append(
                f"{attr}: fake news value ({f_v}) must exceed real news value ({r_v})"
            )
    report = RegimeReport(passed=not failures, failures=tuple(failures))
    if failures and strict:
        raise RegimeViolation(failures)
    if failures:
        for msg in failures:
            _warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return report


# ---------------------------------------------------------------------------
# scenario files
# ---------------------------------------------------------------------------

_NEWS_KEYS = ("alpha_fake", "alpha_real", "eta")


def _flatten(prefix: str, obj, out: dict):
    for key, value in obj.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            _flatten(name + ".", value, out)
        else:
            out[name] = value
    return out


def _parse_text(path: Path) -> dict:
    table: dict[str, object] = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        table[key.strip()] = value.strip()
    return table


def parse_overrides(pairs: list[str]) -> dict:
    """Turn ``key=value`` strings (e.g. from --set flags) into a table."""
    out: dict[str, object] = {}
    for item in pairs:
        if "=" not in item:
            raise InputError(f"override {item!r} is not of the form key=value")
        key, _, value = item.partition("=")
        out[key.strip()] = value.strip()
    return out


def _get_float(table: dict, key: str, default=None) -> float:
    if key not in table:
        if default is None:
            raise InputError(f"missing required scenario key {key!r}")
        return default
    try:
        return float(table[key])
    except (TypeError, ValueError):
        raise InputError(f"scenario key {key!r} has non-numeric value {table[key]!r}") from None


def _degree_model_from(table: dict) -> DegreeModel:
    kind = str(table.get("degree_model.kind", "constant"))
    if kind == "constant":
        return DegreeModel.constant(int(_get_float(table, "degree_model.mean")))
    if kind == "binomial":
        return DegreeModel.binomial(
            int(_get_float(table, "degree_model.n")),
            _get_float(table, "degree_model.p"),
        )
    if kind == "empirical":
        ref = table.get("degree_model.file")
        if not ref:
            raise InputError("empirical degree model needs degree_model.file "
                             "(a degree-stats JSON with a 'histogram' entry)")
        stats = json.loads(Path(ref).read_text())
        hist = stats.get("histogram")
        if not hist:
            raise InputError(f"{ref}: no 'histogram' entry")
        values = [int(k) for k in hist]
        counts = [hist[k] for k in hist]
        return DegreeModel.empirical(values, counts)
    raise InputError(f"unknown degree_model.kind {kind!r}")


def _news_params(table: dict, prefix: str, shared: dict) -> ModelParams:
    return ModelParams(
        wake_rate=_get_float(table, "lambda"),
        alpha_fake=_get_float(table, prefix + "alpha_fake"),
        alpha_real=_get_float(table, prefix + "alpha_real"),
        eta=_get_float(table, prefix + "eta"),
        eta_c=_get_float(table, "eta_c", 1.0),
        degree_model=shared["degree_model"],
    )


def scenario_from_table(table: dict) -> ScenarioPair | tuple[ModelParams, WarningPolicy]:
    """Build parameter objects from a flat key table.

    Returns a ``ScenarioPair`` when ``fake.*`` / ``real.*`` keys are
    present, otherwise a single ``(ModelParams, WarningPolicy)`` pair.
    """
    policy = WarningPolicy(
        w=_get_float(table, "w"),
        b=_get_float(table, "b"),
        epsilon=_get_float(table, "epsilon"),
    )
    shared = {"degree_model": _degree_model_from(table)}
    has_fake = any(f"fake.{k}" in table for k in _NEWS_KEYS)
    has_real = any(f"real.{k}" in table for k in _NEWS_KEYS)
    if has_fake != has_real:
        raise InputError("scenario defines only one of fake.*/real.*; need both or neither")
    if has_fake:
        return ScenarioPair(
            fake=_news_params(table, "fake.", shared),
            real=_news_params(table, "real.", shared),
            policy=policy,
        )
    return _news_params(table, "", shared), policy


def load_scenario(path, overrides: dict | None = None):
    """Load a scenario file (key=value text or JSON) plus overrides.

    See ``scenario_from_table`` for the return convention.
    """
    path = Path(path)
    if not path.exists():
        raise InputError(f"scenario file not found: {path}")
    if path.suffix == ".json":
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(data, dict):
            raise InputError(f"{path}: top-level JSON value must be an object")
        table = _flatten("", data, {})
    else:
        table = _parse_text(path)
    if overrides:
        table.update(overrides)
    return scenario_from_table(table)
