"""Seeded Monte-Carlo experiment engine and CSV emitters.

Per-trial seeds come from ``numpy.random.SeedSequence`` fed with
``(master_seed, grid_hash, trial_index)``, where ``grid_hash`` is the first 8
bytes of a BLAKE2b digest of the grid point's canonical text. A trial's
results therefore depend only on its position, never on execution order.
"""
from __future__ import annotations

import csv
import hashlib
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .coherence import coherence_report, guarantee_sweep, welch_bound
from .errors import ConfigError
from .matrices import MatrixKind, MatrixSpec, build
from .metrics import SupportSet, rho_2, rho_d
from .recovery import (
    coarse_grid_measure,
    coarse_grid_recover,
    coarse_to_fine,
    ds_recover,
    dtomp,
    omp,
    sd_recover,
    top_support,
)
from .signals import NoiseSpec, generate_signal, measure

ALGORITHMS = ("dtomp", "omp", "coarse_grid", "ds", "sd")
METRICS = ("rho_d", "rho_2", "both")
CSV_HEADER = (
    "matrix", "algorithm", "n", "m", "s", "d", "snr_db", "trials",
    "median_rho_d", "median_rho_2", "median_recovered",
)
DEFAULT_TRIALS = 100


@dataclass(frozen=True)
class MatrixEntry:
    label: str
    spec: MatrixSpec


@dataclass(frozen=True)
class ExperimentConfig:
    matrix_specs: tuple
    n: int
    m: int
    s: int
    d_values: tuple
    snr_db_values: tuple
    trials: int = DEFAULT_TRIALS
    master_seed: int = 0
    algorithm: str = "omp"
    spread: object = None
    metric: str = "both"

    def __post_init__(self):
        entries = tuple(MatrixEntry(e.kind.value, e) if isinstance(e, MatrixSpec) else e
                        for e in self.matrix_specs)
        object.__setattr__(self, "matrix_specs", entries)
        object.__setattr__(self, "d_values", tuple(int(d) for d in self.d_values))
        object.__setattr__(self, "snr_db_values", tuple(float(v) for v in self.snr_db_values))
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if any(d < 0 for d in self.d_values):
            raise ConfigError("all d values must be >= 0")
        if not 1 <= self.s <= self.m <= self.n:
            raise ConfigError(f"need 1 <= s <= m <= n, got s={self.s}, m={self.m}, n={self.n}")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}")
        if self.metric not in METRICS:
            raise ConfigError(f"metric must be one of {METRICS}")
        if self.spread is not None and self.spread != "4d+1" and not (isinstance(self.spread, int) and self.spread >= 0):
            raise ConfigError("spread must be a nonnegative integer or '4d+1'")
        labels = [e.label for e in entries]
        if len(set(labels)) != len(labels):
            raise ConfigError(f"matrix labels must be unique, got {labels}")
        for e in entries:
            if (e.spec.n_rows, e.spec.n_cols) != (self.m, self.n):
                raise ConfigError(f"matrix {e.label!r} is {e.spec.n_rows}x{e.spec.n_cols}, expected {self.m}x{self.n}")
            if self.algorithm == "coarse_grid" and e.spec.kind not in (MatrixKind.FConsecBegin, MatrixKind.FRand):
                raise ConfigError("coarse_grid needs FConsecBegin (first rows) or FRand (random rows) matrices")

    def spread_for(self, d):
        if self.spread == "4d+1":
            return 4 * d + 1
        return self.spread


@dataclass(frozen=True)
class GridPoint:
    label: str
    d: int
    snr_db: float

    def canonical(self) -> str:
        return f"{self.label}|{self.d}|{_fmt_float(self.snr_db)}"


@dataclass(frozen=True)
class TrialRecord:
    trial_index: int
    matrix_kind: str
    d: int
    snr_db: float
    rho_d_value: float
    rho_2_value: float
    recovered_count: float
    seed_used: int
    flagged: bool = False
    message: str = ""


@dataclass(frozen=True)
class SweepRow:
    label: str
    algorithm: str
    n: int
    m: int
    s: int
    d: int
    snr_db: float
    trials: int
    median_rho_d: float
    median_rho_2: object
    median_recovered: float


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)
    records: dict = field(default_factory=dict)

    def lookup(self):
        return {(r.label, r.d, r.snr_db): r for r in self.rows}


# ---------------------------------------------------------------- config I/O

def _parse_list(value, conv):
    items = [v.strip() for v in value.split(",")]
    return tuple(conv(v) for v in items if v)


def _parse_int(value):
    try:
        return int(value.strip())
    except ValueError:
        raise ConfigError(f"expected an integer, got {value!r}") from None


def _parse_float(value):
    text = value.strip().lower()
    if text in ("inf", "+inf", "infinity", "+infinity"):
        return math.inf
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"expected a number, got {value!r}") from None


_TOP_KEYS = {"n", "m", "s", "d_values", "snr_db_values", "trials", "master_seed", "algorithm", "spread", "metric"}
_MATRIX_KEYS = {"kind", "m", "n", "seed", "inflation_d", "label"}


def parse_config(text: str, trials_override=None) -> ExperimentConfig:
    """Parse the flat ``key = value`` experiment format.

    Top-level keys come first; each ``[matrix]`` line opens a new matrix
    section. Matrix sections inherit ``m`` and ``n`` from the top level when
    omitted. Lists are comma separated; ``#`` starts a comment.
    """
    top = {}
    sections = []
    current = top
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if line != "[matrix]":
                raise ConfigError(f"line {lineno}: unknown section {line!r}")
            current = {}
            sections.append(current)
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key = key.strip()
        allowed = _TOP_KEYS if current is top else _MATRIX_KEYS
        if key not in allowed:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in current:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        current[key] = value.strip()

    for key in ("n", "m", "s", "d_values", "snr_db_values"):
        if key not in top:
            raise ConfigError(f"missing top-level key {key!r}")
    if not sections:
        raise ConfigError("at least one [matrix] section is required")
    n, m = _parse_int(top["n"]), _parse_int(top["m"])
    entries = []
    for sec in sections:
        sec = dict(sec)
        sec.setdefault("m", str(m))
        sec.setdefault("n", str(n))
        label = sec.pop("label", None)
        if "kind" not in sec:
            raise ConfigError("every [matrix] section needs a 'kind'")
        try:
            spec = MatrixSpec.from_mapping(sec)
        except ValueError as exc:
            raise ConfigError(f"invalid matrix section: {exc}") from None
        entries.append(MatrixEntry(label or spec.kind.value, spec))

    spread = top.get("spread")
    if spread is not None:
        spread = spread.replace(" ", "")
        spread = spread if spread == "4d+1" else _parse_int(spread)
    trials = trials_override if trials_override is not None else _parse_int(top.get("trials", str(DEFAULT_TRIALS)))
    try:
        return ExperimentConfig(
            matrix_specs=tuple(entries),
            n=n,
            m=m,
            s=_parse_int(top["s"]),
            d_values=_parse_list(top["d_values"], _parse_int),
            snr_db_values=_parse_list(top["snr_db_values"], _parse_float),
            trials=trials,
            master_seed=_parse_int(top.get("master_seed", "0")),
            algorithm=top.get("algorithm", "omp"),
            spread=spread,
            metric=top.get("metric", "both"),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path, trials_override=None) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, trials_override)


# ---------------------------------------------------------------- trials

def grid_hash(point: GridPoint) -> int:
    digest = hashlib.blake2b(point.canonical().encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def trial_seed(master_seed: int, point: GridPoint, trial_index: int) -> int:
    ss = np.random.SeedSequence([master_seed, grid_hash(point), trial_index])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _sub_seeds(seed):
    signal_ss, noise_ss = np.random.SeedSequence(seed).spawn(2)
    return (int(signal_ss.generate_state(1, dtype=np.uint64)[0]),
            int(noise_ss.generate_state(1, dtype=np.uint64)[0]))


def _entry(config, label):
    for e in config.matrix_specs:
        if e.label == label:
            return e
    raise KeyError(label)


def grid_points(config: ExperimentConfig):
    return [GridPoint(e.label, d, snr)
            for e in config.matrix_specs for d in config.d_values for snr in config.snr_db_values]


def _recover(config, entry, matrix, signal, noise, d):
    """Return ``(estimate, support)`` for the configured algorithm."""
    alg = config.algorithm
    n, m, s = config.n, config.m, config.s
    if alg in ("dtomp", "omp"):
        y = measure(matrix, signal, noise)
        res = dtomp(matrix, y, s, d) if alg == "dtomp" else omp(matrix, y, s)
        return res.estimate, res.support
    if alg == "coarse_grid":
        factor = max(d, 1)
        rows = "begin" if entry.spec.kind is MatrixKind.FConsecBegin else "random"
        y = coarse_grid_measure(signal, m, factor, rows, entry.spec.seed, noise)
        res = coarse_grid_recover(y, m, n, factor, s, rows, entry.spec.seed)
        fine = coarse_to_fine(res, n)
        return fine, SupportSet.from_mask(fine != 0)
    estimate = ds_recover(signal, m, noise) if alg == "ds" else sd_recover(signal, m, noise)
    return estimate, top_support(estimate, s)


def run_trial(config: ExperimentConfig, point: GridPoint, trial_index: int, matrix=None) -> TrialRecord:
    """One Monte-Carlo trial. Recovery failures become flagged records."""
    entry = _entry(config, point.label)
    if matrix is None:
        matrix = build(entry.spec)
    seed = trial_seed(config.master_seed, point, trial_index)
    sig_seed, noise_seed = _sub_seeds(seed)
    base = dict(trial_index=trial_index, matrix_kind=point.label, d=point.d,
                snr_db=point.snr_db, seed_used=seed)
    signal = generate_signal(config.n, config.s, sig_seed, config.spread_for(point.d))
    noise = NoiseSpec(point.snr_db, noise_seed)
    try:
        estimate, support = _recover(config, entry, matrix, signal, noise, point.d)
    except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        return TrialRecord(rho_d_value=0.0, rho_2_value=-math.inf, recovered_count=0.0,
                           flagged=True, message=f"recovery failed: {exc}", **base)
    r_d = rho_d(signal.support, support, point.d)
    flagged, message = False, ""
    r_2 = math.nan
    if config.metric in ("rho_2", "both"):
        try:
            r_2 = rho_2(signal, estimate, point.d)
        except ValueError as exc:
            r_2, flagged, message = -math.inf, True, str(exc)
    return TrialRecord(rho_d_value=r_d, rho_2_value=r_2, recovered_count=config.s * r_d,
                       flagged=flagged, message=message, **base)


def run_sweep(config: ExperimentConfig, threads: int = 1) -> SweepResult:
    """Evaluate every grid point x trial; medians per grid point.

    Matrices are built once per matrix entry and shared read-only across
    threads. Output is independent of ``threads``.
    """
    points = grid_points(config)
    matrices = {e.label: build(e.spec) for e in config.matrix_specs}
    tasks = [(p, t) for p in points for t in range(config.trials)]

    def work(task):
        p, t = task
        return run_trial(config, p, t, matrices[p.label])

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(work, tasks))
    else:
        records = [work(task) for task in tasks]

    result = SweepResult()
    for i, p in enumerate(points):
        recs = records[i * config.trials:(i + 1) * config.trials]
        result.records[p] = recs
        med_rho_2 = (float(np.median([r.rho_2_value for r in recs]))
                     if config.metric in ("rho_2", "both") else None)
        result.rows.append(SweepRow(
            label=p.label, algorithm=config.algorithm, n=config.n, m=config.m, s=config.s,
            d=p.d, snr_db=p.snr_db, trials=len(recs),
            median_rho_d=float(np.median([r.rho_d_value for r in recs])),
            median_rho_2=med_rho_2,
            median_recovered=float(np.median([r.recovered_count for r in recs])),
        ))
    return result


@dataclass(frozen=True)
class RatioRow:
    d: int
    snr_db: float
    coherent: float
    incoherent: float
    ratio: float
    undefined: bool


def ratio_table(sweep_coherent: SweepResult, sweep_incoherent: SweepResult):
    """Elementwise ratio of median recovered percentages on matching (d, SNR) grids.

    Each sweep must hold exactly one matrix label. Zero denominators give
    ``ratio = nan`` with ``undefined`` set.
    """
    def by_grid(sweep):
        labels = {r.label for r in sweep.rows}
        if len(labels) > 1:
            raise ValueError(f"ratio_table needs single-matrix sweeps, got {sorted(labels)}")
        return {(r.d, r.snr_db): r for r in sweep.rows}

    a, b = by_grid(sweep_coherent), by_grid(sweep_incoherent)
    if set(a) != set(b):
        raise ValueError("sweeps cover different (d, snr_db) grids")
    rows = []
    for key in sorted(a):
        x, y = 100.0 * a[key].median_rho_d, 100.0 * b[key].median_rho_d
        undefined = y == 0
        rows.append(RatioRow(key[0], key[1], x, y, math.nan if undefined else x / y, undefined))
    return rows


# ---------------------------------------------------------------- CSV

def _fmt_float(v) -> str:
    if v is None:
        return ""
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if math.isnan(v):
        return "nan"
    return repr(v)


def _sort_key(row: SweepRow):
    return (row.label, row.algorithm, row.n, row.m, row.s, row.d, row.snr_db, row.trials)


def sweep_csv_text(result: SweepResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in sorted(result.rows, key=_sort_key):
        writer.writerow([r.label, r.algorithm, r.n, r.m, r.s, r.d, _fmt_float(r.snr_db), r.trials,
                         _fmt_float(r.median_rho_d), _fmt_float(r.median_rho_2),
                         _fmt_float(r.median_recovered)])
    return buf.getvalue()


def _write(text: str, destination):
    path = Path(destination)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def emit_csv(result: SweepResult, destination):
    return _write(sweep_csv_text(result), destination)


def read_sweep_csv(source) -> list:
    """Parse a sweep CSV back into :class:`SweepRow` objects."""
    def opt(v):
        return None if v == "" else _parse_float(v)

    with open(source, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ValueError(f"unexpected header {reader.fieldnames}")
        return [SweepRow(label=r["matrix"], algorithm=r["algorithm"], n=int(r["n"]), m=int(r["m"]),
                         s=int(r["s"]), d=int(r["d"]), snr_db=_parse_float(r["snr_db"]),
                         trials=int(r["trials"]), median_rho_d=_parse_float(r["median_rho_d"]),
                         median_rho_2=opt(r["median_rho_2"]),
                         median_recovered=_parse_float(r["median_recovered"]))
                for r in reader]


ANALYZE_HEADER = ("f", "correlation", "mu_d", "coherence", "welch")
GUARANTEE_HEADER = ("d", "mu_d", "welch", "mu_c_d_2s", "thm2", "cor_mu_d", "cor_cum")


def analyze_rows(spec: MatrixSpec, d_max=None):
    """Fig.-1 style data: mu(1, 1+f), the mu_d envelope, coherence and Welch bound."""
    report = coherence_report(build(spec))
    n = spec.n_cols
    last = n - 1 if d_max is None else min(d_max, n - 1)
    rows = []
    for f in range(last + 1):
        mu_d = report.mu_d_profile[f]
        rows.append((f, float(report.correlation_profile[f]),
                     None if np.isnan(mu_d) else float(mu_d), report.mu, report.welch))
    return rows


def analyze_matrix(spec: MatrixSpec, d_max, destination):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(ANALYZE_HEADER)
    for f, corr, mu_d, mu, welch in analyze_rows(spec, d_max):
        writer.writerow([f, _fmt_float(corr), _fmt_float(mu_d), _fmt_float(mu), _fmt_float(welch)])
    return _write(buf.getvalue(), destination)


def guarantee_rows(spec: MatrixSpec, s: int, d_min=0, d_max=None):
    matrix = build(spec)
    m, n = spec.n_rows, spec.n_cols
    welch = welch_bound(m, n) if m < n else math.nan
    return [(d, mu_d, welch, c2, thm2, cor_mu, cor_cum)
            for d, mu_d, c2, _c1, cor_mu, cor_cum, thm2 in guarantee_sweep(matrix, s, d_min, d_max)]


def check_guarantee(spec: MatrixSpec, s: int, destination, d_min=0, d_max=None):
    """Write per-d guarantee rows; return the set of d where a corollary condition holds."""
    rows = guarantee_rows(spec, s, d_min, d_max)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(GUARANTEE_HEADER)
    for d, mu_d, welch, c2, thm2, cor_mu, cor_cum in rows:
        writer.writerow([d, _fmt_float(mu_d), _fmt_float(welch), _fmt_float(c2),
                         int(thm2), int(cor_mu), int(cor_cum)])
    _write(buf.getvalue(), destination)
    return {r[0] for r in rows if r[5] or r[6]}

