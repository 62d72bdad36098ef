"""Experiment orchestration: exact tables vs limit laws vs Monte Carlo.

A comparison experiment walks a grid of horizons n, builds the exact
conditional reduced-count table for the regime geometry at each n,
evaluates the matching limit law, optionally runs a conditioned
Monte Carlo batch, and reports total-variation distances, generating
function sup-norms, and acceptance-rate agreement.  Reports are pure
functions of (config, seed): worker counts and output paths never
influence a number, and both are excluded from the config hash.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import re
import time
from dataclasses import dataclass, field

import numpy as np

from .limits import LimitQuery, Regime
from .offspring import OffspringLaw, law_from_name
from .reduced import bounded_survival_prob, conditional_reduced_pmf
from .simulate import run_conditioned_batch

DEFAULT_S_GRID = tuple(round(0.1 * i, 1) for i in range(11))
BOOTSTRAP_RESAMPLES = 200
TV_THRESHOLD_DEFAULT = 0.05

try:
    from importlib.metadata import version as _pkg_version

    VERSION = _pkg_version("gwreduced")
except Exception:  # pragma: no cover - metadata missing in odd installs
    VERSION = "unknown"


def tv_distance(p, q) -> float:
    """Total variation between two pmf tables over j >= 1.

    Mass beyond each table's last entry is lumped into one overflow
    cell per side, so truncation can only increase the reported
    distance, never hide a difference.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    width = max(len(p), len(q))
    pp = np.zeros(width)
    qq = np.zeros(width)
    pp[: len(p)] = p
    qq[: len(q)] = q
    tail_p = max(0.0, 1.0 - float(pp.sum()))
    tail_q = max(0.0, 1.0 - float(qq.sum()))
    return 0.5 * float(np.abs(pp - qq).sum()) + 0.5 * abs(tail_p - tail_q)


def table_gf(pmf):
    """Generating-function evaluator of a table over j = 1..J."""
    pmf = np.asarray(pmf, dtype=float)
    js = np.arange(1, len(pmf) + 1)

    def evaluate(s: float) -> float:
        return float(np.dot(np.power(s, js), pmf))

    return evaluate


def gf_supnorm(exact_gf, limit_gf, s_grid=DEFAULT_S_GRID) -> float:
    """Largest absolute gf deviation over a grid of s values."""
    return float(max(abs(exact_gf(s) - limit_gf(s)) for s in s_grid))


@dataclass(frozen=True)
class PhiSpec:
    """Restricted window-growth expression: sqrt, n^p (0<p<1), or c*n."""

    expression: str
    kind: str
    param: float

    def raw(self, n: int) -> float:
        if self.kind == "power":
            return float(n) ** self.param
        return self.param * n

    def window(self, n: int) -> int:
        """Integer window width, rounded up."""
        return int(math.ceil(self.raw(n)))

    @property
    def sublinear(self) -> bool:
        return self.kind == "power"


def parse_phi(expression: str) -> PhiSpec:
    text = expression.strip().lower().replace(" ", "")
    if text == "sqrt":
        return PhiSpec(expression="sqrt", kind="power", param=0.5)
    m = re.fullmatch(r"n\^([0-9]*\.?[0-9]+)", text)
    if m:
        p = float(m.group(1))
        if not 0.0 < p < 1.0:
            raise ValueError(f"window exponent {p} outside (0, 1)")
        return PhiSpec(expression=text, kind="power", param=p)
    m = re.fullmatch(r"([0-9]*\.?[0-9]+)\*n", text)
    if m:
        c = float(m.group(1))
        if not c > 0.0:
            raise ValueError("window slope must be positive")
        return PhiSpec(expression=text, kind="linear", param=c)
    raise ValueError(
        f"cannot parse window expression {expression!r}; "
        "expected sqrt, n^p with 0<p<1, or c*n"
    )


CONFIG_HASH_EXCLUDE = {"out", "format", "workers", "timestamp"}


def parse_config_file(path) -> dict:
    """Flat key=value file; blank lines and # comments ignored."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            if "=" not in text:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {text!r}")
            key, _, value = text.partition("=")
            out[key.strip()] = value.strip()
    return out


def config_hash(config: dict) -> str:
    """Hash of the semantic config entries, hex digest.

    Output paths, formats, worker counts, and timestamps are excluded:
    they can never change a computed number.
    """
    lines = [
        f"{key}={config[key]}"
        for key in sorted(config)
        if key not in CONFIG_HASH_EXCLUDE and config[key] is not None
    ]
    return hashlib.sha256("\n".join(lines).encode()).hexdigest()


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated comparison-experiment settings."""

    regime: Regime
    law_label: str
    n_grid: tuple
    x: float | None = None
    t: float | None = None
    a: float | None = None
    phi: PhiSpec = field(default_factory=lambda: parse_phi("sqrt"))
    epsilon: float = 1e-9
    seed: int = 0
    replicates: int = 0
    max_replicates: int = 100_000_000
    workers: int = 1
    s_grid: tuple = DEFAULT_S_GRID
    tv_threshold: float = TV_THRESHOLD_DEFAULT

    def __post_init__(self):
        if not self.n_grid:
            raise ValueError("n_grid must be nonempty")
        if any(n < 2 for n in self.n_grid):
            raise ValueError("horizons must be at least 2")
        if self.regime is Regime.SMALL_PHI:
            if self.x is None:
                raise ValueError("sublinear-window regime needs x")
            if not self.phi.sublinear:
                raise ValueError(
                    "sublinear-window regime needs a sublinear window expression"
                )
        else:
            if self.t is None or self.a is None:
                raise ValueError("linear-band regime needs t and a")

    @classmethod
    def from_mapping(cls, raw: dict) -> "ExperimentConfig":
        def get_float(key):
            return float(raw[key]) if raw.get(key) is not None else None

        regime = Regime(str(raw.get("regime", "small_phi")))
        grid_text = str(raw.get("n_grid", "")).strip()
        n_grid = tuple(int(tok) for tok in grid_text.split(",") if tok.strip())
        return cls(
            regime=regime,
            law_label=str(raw.get("law", "linear_fractional")),
            n_grid=n_grid,
            x=get_float("x"),
            t=get_float("t"),
            a=get_float("a"),
            phi=parse_phi(str(raw.get("phi", "sqrt"))),
            epsilon=float(raw.get("epsilon", 1e-9)),
            seed=int(raw.get("seed", 0)),
            replicates=int(raw.get("replicates", 0)),
            max_replicates=int(raw.get("max_replicates", 100_000_000)),
            workers=int(raw.get("workers", 1)),
            tv_threshold=float(raw.get("tv_threshold", TV_THRESHOLD_DEFAULT)),
        )

    def to_mapping(self) -> dict:
        out = {
            "regime": self.regime.value,
            "law": self.law_label,
            "n_grid": ",".join(str(n) for n in self.n_grid),
            "phi": self.phi.expression,
            "epsilon": repr(self.epsilon),
            "seed": str(self.seed),
            "replicates": str(self.replicates),
            "max_replicates": str(self.max_replicates),
            "tv_threshold": repr(self.tv_threshold),
        }
        for key in ("x", "t", "a"):
            value = getattr(self, key)
            if value is not None:
                out[key] = repr(value)
        return out


@dataclass(frozen=True)
class ComparisonReport:
    """Per-horizon comparison rows plus pass/fail verdicts."""

    experiment_id: str
    config_hash: str
    law_id: str
    regime: str
    parameters: dict
    rows: tuple
    verdicts: tuple
    version: str
    timestamp: str

    def to_json_dict(self) -> dict:
        return {
            "experiment_id": self.experiment_id,
            "config_hash": self.config_hash,
            "law": self.law_id,
            "regime": self.regime,
            "parameters": self.parameters,
            "rows": list(self.rows),
            "verdicts": list(self.verdicts),
            "version": self.version,
            "timestamp": self.timestamp,
        }


REPORT_CSV_COLUMNS = (
    "n",
    "m",
    "C",
    "epsilon",
    "mass_accounted",
    "tv_exact_limit",
    "gf_supnorm",
    "mc_replicates",
    "mc_accepted",
    "tv_mc_exact",
    "tv_mc_se",
    "acceptance_rate",
    "acceptance_expected",
)


def write_report_json(report: ComparisonReport, path) -> None:
    with open(path, "w") as fh:
        json.dump(report.to_json_dict(), fh, indent=2)
        fh.write("\n")


def write_report_csv(report: ComparisonReport, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_CSV_COLUMNS)
        for row in report.rows:
            writer.writerow([row.get(col, "") for col in REPORT_CSV_COLUMNS])


def format_report_summary(report: ComparisonReport) -> str:
    lines = [
        f"experiment {report.experiment_id}  law={report.law_id} "
        f"regime={report.regime}  config_hash={report.config_hash[:12]}"
    ]
    for row in report.rows:
        parts = [
            f"n={row['n']}",
            f"m={row['m']}",
            f"C={row['C']}",
            f"tv_exact_limit={row['tv_exact_limit']:.6f}",
            f"gf_supnorm={row['gf_supnorm']:.6f}",
        ]
        if "tv_mc_exact" in row:
            parts.append(
                f"tv_mc_exact={row['tv_mc_exact']:.6f}(se {row['tv_mc_se']:.6f})"
            )
        lines.append("  ".join(parts))
    for verdict in report.verdicts:
        status = "pass" if verdict["passed"] else "FAIL"
        lines.append(
            f"[{status}] {verdict['criterion']}: value={verdict['value']}"
            f" threshold={verdict['threshold']}"
        )
    return "\n".join(lines)


def _row_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence((seed, index)).generate_state(1)[0])


def empirical_pmf(samples: np.ndarray, j_max: int) -> np.ndarray:
    """Relative frequencies of counts 1..j_max; overflow left to tails."""
    counts = np.bincount(samples, minlength=j_max + 1)
    return counts[1 : j_max + 1] / len(samples)


def bootstrap_tv_se(
    samples: np.ndarray,
    exact_pmf: np.ndarray,
    seed: int,
    resamples: int = BOOTSTRAP_RESAMPLES,
) -> float:
    """Bootstrap standard error of the empirical-vs-exact TV distance.

    Resampling N iid replicates with replacement is a multinomial draw
    over the observed cells, which keeps the loop fully vectorized.
    """
    n_samples = len(samples)
    j_max = len(exact_pmf)
    cells = np.bincount(np.minimum(samples, j_max + 1), minlength=j_max + 2)
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xB007)))
    draws = rng.multinomial(n_samples, cells / n_samples, size=resamples)
    exact_cells = np.append(exact_pmf, max(0.0, 1.0 - exact_pmf.sum()))
    emp = draws[:, 1:] / n_samples
    tvs = 0.5 * np.abs(emp - exact_cells).sum(axis=1)
    return float(tvs.std(ddof=1))


def _experiment_geometry(config: ExperimentConfig, law: OffspringLaw, n: int):
    """(m, C) for one horizon under the configured regime."""
    B = law.half_variance
    if config.regime is Regime.SMALL_PHI:
        width = config.phi.window(n)
        C = int(math.floor(B * width))
        m = n - int(math.floor(config.x * width))
    else:
        C = int(math.floor(config.a * B * n))
        m = int(math.floor(config.t * n))
    if C < 1:
        raise ValueError(
            f"bound {C} below 1 at n={n}; the horizon is too small for the window"
        )
    if not 0 <= m < n:
        raise ValueError(f"intermediate generation {m} outside [0, {n})")
    return m, C


def run_experiment(config: ExperimentConfig | dict) -> ComparisonReport:
    """Execute one comparison experiment and assemble its report."""
    if not isinstance(config, ExperimentConfig):
        config = ExperimentConfig.from_mapping(dict(config))
    law = law_from_name(config.law_label)
    if config.regime is Regime.SMALL_PHI:
        query = LimitQuery(regime=Regime.SMALL_PHI, x=config.x)
    else:
        query = LimitQuery(regime=Regime.LINEAR_BAND, t=config.t, a=config.a)
    limit_pmf = query.pmf_values()

    rows = []
    for index, n in enumerate(config.n_grid):
        m, C = _experiment_geometry(config, law, n)
        table = conditional_reduced_pmf(law, m, n, C, epsilon=config.epsilon)
        row = {
            "n": n,
            "m": m,
            "C": C,
            "epsilon": config.epsilon,
            "mass_accounted": float(table.mass_accounted),
            "tv_exact_limit": tv_distance(table.pmf, limit_pmf),
            "gf_supnorm": gf_supnorm(table_gf(table.pmf), query.gf, config.s_grid),
        }
        if config.replicates > 0:
            seed = _row_seed(config.seed, index)
            batch = run_conditioned_batch(
                law,
                n,
                C,
                [m],
                target_accepted=config.replicates,
                max_replicates=config.max_replicates,
                seed=seed,
                workers=config.workers,
            )
            samples = batch.reduced_counts[:, 0]
            expected_rate = bounded_survival_prob(law, n, C)
            row.update(
                mc_replicates=int(batch.replicates),
                mc_accepted=int(batch.accepted),
                mc_seed=seed,
                tv_mc_exact=tv_distance(
                    empirical_pmf(samples, table.j_max), table.pmf
                ),
                tv_mc_se=bootstrap_tv_se(samples, table.pmf, seed),
                acceptance_rate=float(batch.acceptance_rate),
                acceptance_expected=float(expected_rate),
            )
        rows.append(row)

    verdicts = _build_verdicts(config, rows)
    raw = config.to_mapping()
    digest = config_hash(raw)
    report = ComparisonReport(
        experiment_id=(
            f"{config.regime.value}-{config.law_label}-"
            f"n{config.n_grid[0]}to{config.n_grid[-1]}-{digest[:8]}"
        ),
        config_hash=digest,
        law_id=config.law_label,
        regime=config.regime.value,
        parameters=raw,
        rows=tuple(rows),
        verdicts=tuple(verdicts),
        version=VERSION,
        timestamp=time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()),
    )
    return report


def _build_verdicts(config: ExperimentConfig, rows) -> list:
    verdicts = []
    tvs = [row["tv_exact_limit"] for row in rows]
    if len(tvs) > 1:
        verdicts.append(
            {
                "criterion": "tv_exact_vs_limit_decreasing",
                "value": ",".join(f"{v:.6f}" for v in tvs),
                "threshold": "strictly decreasing in n",
                "passed": bool(all(b < a for a, b in zip(tvs, tvs[1:]))),
            }
        )
    verdicts.append(
        {
            "criterion": "tv_exact_vs_limit_final",
            "value": f"{tvs[-1]:.6f}",
            "threshold": config.tv_threshold,
            "passed": bool(tvs[-1] < config.tv_threshold),
        }
    )
    sups = [row["gf_supnorm"] for row in rows]
    verdicts.append(
        {
            "criterion": "gf_supnorm_final",
            "value": f"{sups[-1]:.6f}",
            "threshold": config.tv_threshold,
            "passed": bool(sups[-1] < config.tv_threshold),
        }
    )
    if config.replicates > 0:
        for row in rows:
            margin = 4.0 * row["tv_mc_se"] + 0.01
            verdicts.append(
                {
                    "criterion": f"mc_tv_near_exact_n{row['n']}",
                    "value": f"{row['tv_mc_exact']:.6f}",
                    "threshold": f"{margin:.6f}",
                    "passed": bool(row["tv_mc_exact"] < margin),
                }
            )
            rate = row["acceptance_rate"]
            expected = row["acceptance_expected"]
            se = math.sqrt(max(expected * (1 - expected), 1e-300) / row["mc_replicates"])
            verdicts.append(
                {
                    "criterion": f"acceptance_rate_within_4se_n{row['n']}",
                    "value": f"{rate:.8f} vs {expected:.8f}",
                    "threshold": f"4se={4 * se:.8f}",
                    "passed": bool(abs(rate - expected) < 4 * se),
                }
            )
    return verdicts
