"""Monte-Carlo BLER / iteration-count simulation.

An experiment is described by :class:`ExperimentSpec` (loadable from a small
TOML file). Frames are generated from a counter-based seed
``(seed, snr_index, frame_index)``, so every decoder at an SNR point sees the
same frames, and results do not depend on the number of worker processes:
work is cut into fixed-size batches and the stop rule is only evaluated at
batch boundaries, in batch order.
"""

from __future__ import annotations

import csv
import io
import json
import math
import pathlib
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np
from scipy import stats

from . import metrics
from .channel import CHANNEL_KINDS, ChannelConfig, modulate, transmit
from .code import ParityCheckMatrix, SystematicEncoder, generate_regular, load_alist
from .decoder import VARIANTS, MajorityLogicDecoder
from .field import GF2m

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

MODES = ("random_codeword", "all_zero")
DECODER_KEYS = ("variant", "reselection", "max_iter", "lam", "lam_h", "xi1", "xi2", "c1", "c2", "c3",
                "zeta", "eta", "theta", "label")
CSV_COLUMNS = ("variant", "snr_db", "frames", "block_errors", "bler", "avg_iterations", "p1_small",
               "p1_large", "p2_small", "p2_large", "other", "fa", "fm", "ia", "ic", "wall_s")


class ConfigError(ValueError):
    """Invalid experiment description."""


# --------------------------------------------------------------------------
# experiment description

@dataclass
class CodeSource:
    """Either an alist file or parameters for :func:`generate_regular`."""

    alist: str | None = None
    N: int | None = None
    gamma: int | None = None
    rho: int | None = None
    r: int | None = None
    seed: int = 1
    primitive_poly: int | None = None

    def validate(self):
        gen = (self.N, self.gamma, self.rho, self.r)
        if self.alist is None and any(v is None for v in gen):
            raise ConfigError("code needs either 'alist' or all of N, gamma, rho, r")
        if self.alist is not None and any(v is not None for v in gen):
            raise ConfigError("code gives both 'alist' and generator parameters")

    def build(self) -> ParityCheckMatrix:
        if self.alist is not None:
            field = GF2m(self.r, self.primitive_poly) if self.r is not None else None
            return load_alist(self.alist, field)
        gf = GF2m(self.r, self.primitive_poly)
        return generate_regular(self.N, self.gamma, self.rho, gf, seed=self.seed)


@dataclass
class ExperimentSpec:
    code: CodeSource
    decoders: list
    snr_db: list
    channel: str = "awgn"
    omega: int = 6
    delta: float = 0.0625
    noiseless: bool = False
    mode: str = "random_codeword"
    min_block_errors: int = 100
    max_frames: int = 10_000_000
    batch_size: int = 100
    seed: int = 0
    timing: bool = True
    trace_limit: int = 1000

    def __post_init__(self):
        if isinstance(self.code, dict):
            unknown = set(self.code) - {f.name for f in fields(CodeSource)}
            if unknown:
                raise ConfigError(f"unknown code keys: {sorted(unknown)}")
            self.code = CodeSource(**self.code)
        self.decoders = [dict(d) for d in self.decoders]
        self.snr_db = [float(s) for s in self.snr_db]
        self.validate()

    def validate(self):
        self.code.validate()
        if not self.decoders:
            raise ConfigError("at least one decoder is required")
        labels = set()
        for d in self.decoders:
            unknown = set(d) - set(DECODER_KEYS)
            if unknown:
                raise ConfigError(f"unknown decoder keys: {sorted(unknown)}")
            if str(d.get("variant", "")).upper() not in VARIANTS:
                raise ConfigError(f"decoder variant must be one of {VARIANTS}, got {d.get('variant')!r}")
            lab = decoder_label(d)
            if lab in labels:
                raise ConfigError(f"duplicate decoder label {lab!r}; set 'label' to disambiguate")
            labels.add(lab)
        if not self.snr_db:
            raise ConfigError("snr_db must list at least one point")
        if self.channel not in CHANNEL_KINDS:
            raise ConfigError(f"channel must be one of {CHANNEL_KINDS}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        for name in ("min_block_errors", "max_frames", "batch_size", "omega"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.trace_limit < 0:
            raise ConfigError("trace_limit must be >= 0")
        try:
            ChannelConfig(self.channel, 0.0, 1.0, self.omega, self.delta)
        except ValueError as e:
            raise ConfigError(str(e)) from None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["code"] = {k: v for k, v in d["code"].items() if v is not None}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        d = dict(d)
        if "decoder" in d and "decoders" not in d:
            d["decoders"] = d.pop("decoder")
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"unknown keys: {sorted(unknown)}")
        for req in ("code", "decoders", "snr_db"):
            if req not in d:
                raise ConfigError(f"missing required key {req!r}")
        try:
            return cls(**d)
        except TypeError as e:
            raise ConfigError(str(e)) from None

    @classmethod
    def from_toml(cls, path) -> "ExperimentSpec":
        """Load a spec file. Relative alist paths resolve against the file's
        directory. Raises ``OSError`` for unreadable files and
        :class:`ConfigError` for invalid content."""
        path = pathlib.Path(path)
        with open(path, "rb") as fh:
            try:
                d = tomllib.load(fh)
            except tomllib.TOMLDecodeError as e:
                raise ConfigError(f"{path}: {e}") from None
        code = d.get("code")
        if isinstance(code, dict) and code.get("alist"):
            p = pathlib.Path(code["alist"])
            code["alist"] = str(p if p.is_absolute() else (path.parent / p).resolve())
        return cls.from_dict(d)


def decoder_label(d: dict) -> str:
    if d.get("label"):
        return str(d["label"])
    return ("RS-" if d.get("reselection") else "") + str(d["variant"]).upper()


# --------------------------------------------------------------------------
# results

@dataclass
class ResultRow:
    variant: str
    snr_db: float
    frames: int
    block_errors: int
    bler: float
    avg_iterations: float
    p1_small: int = 0
    p1_large: int = 0
    p2_small: int = 0
    p2_large: int = 0
    other: int = 0
    fa: float = 0.0
    fm: float = 0.0
    ia: float = 0.0
    ic: float = 0.0
    wall_s: float = 0.0
    total_iterations: int = 0
    iter_sq_sum: int = 0
    truncated: bool = False


_FAIL_KEYS = {
    (metrics.PERIOD1, metrics.SMALL): "p1_small",
    (metrics.PERIOD1, metrics.LARGE): "p1_large",
    (metrics.PERIOD2, metrics.SMALL): "p2_small",
    (metrics.PERIOD2, metrics.LARGE): "p2_large",
}


@dataclass
class _Tally:
    frames: int = 0
    errors: int = 0
    iters: int = 0
    iter_sq: int = 0
    fails: dict = field(default_factory=lambda: dict.fromkeys(("p1_small", "p1_large", "p2_small", "p2_large", "other"), 0))
    ops: metrics.OpCounts = field(default_factory=metrics.OpCounts)
    op_iters: int = 0
    traces: list = field(default_factory=list)

    def merge(self, o: "_Tally"):
        self.frames += o.frames
        self.errors += o.errors
        self.iters += o.iters
        self.iter_sq += o.iter_sq
        for k in self.fails:
            self.fails[k] += o.fails[k]
        self.ops += o.ops
        self.op_iters += o.op_iters
        self.traces.extend(o.traces)


class _Context:
    """Everything a worker needs, built once per process."""

    def __init__(self, spec: ExperimentSpec):
        self.spec = spec
        self.H = spec.code.build()
        self.field = self.H.field
        self.encoder = SystematicEncoder(self.H)
        self.decoders = [MajorityLogicDecoder(**_estimator_kwargs(d)).fit(self.H) for d in spec.decoders]

    def frame(self, snr_index, frame_index, ebn0):
        rng = np.random.default_rng([self.spec.seed, snr_index, frame_index])
        if self.spec.mode == "all_zero":
            x = np.zeros(self.H.N, dtype=np.int64)
        else:
            x = self.encoder.encode(rng.integers(0, self.field.order, self.encoder.k))
        cfg = ChannelConfig(self.spec.channel, ebn0, self.encoder.rate, self.spec.omega, self.spec.delta,
                            self.spec.noiseless)
        return x, transmit(modulate(x, self.field), cfg, self.field, rng)

    def batch(self, dec_index, snr_index, start, count, want_trace):
        spec = self.spec
        dec = self.decoders[dec_index]
        t = _Tally()
        ebn0 = spec.snr_db[snr_index]
        for f in range(start, start + count):
            x, fr = self.frame(snr_index, f, ebn0)
            counter = metrics.OpCounter()
            out = dec.decode(q=fr.q, z=fr.z, transmitted=x, counter=counter, trace=want_trace)
            t.frames += 1
            t.iters += out.iterations
            t.iter_sq += out.iterations ** 2
            t.ops += counter.iteration_total
            t.op_iters += counter.n_iterations
            wrong = not out.success or not np.array_equal(out.z, x)
            if wrong:
                t.errors += 1
                key = _FAIL_KEYS.get((out.failure_class, out.distance_class), "other")
                t.fails[key] += 1
                if want_trace:
                    t.traces.append({"frame": f, "success": out.success,
                                     "trace": [z.tolist() for z in out.trace]})
        return t


def _estimator_kwargs(d):
    return {k: v for k, v in d.items() if k != "label"}


_WORKER: _Context | None = None


def _init_worker(spec_dict):
    global _WORKER
    _WORKER = _Context(ExperimentSpec.from_dict(spec_dict))


def _run_batch(args):
    return _WORKER.batch(*args)


def run(spec: ExperimentSpec, workers: int = 1, trace: bool = False, progress=None):
    """Simulate every (decoder, SNR) point.

    Returns ``(rows, traces)``: one :class:`ResultRow` per point in spec
    order, and a list of failed-frame trajectories when ``trace`` is set.
    ``progress`` is an optional callable receiving each finished row.
    """
    workers = max(1, int(workers))
    ctx = _Context(spec)
    pool = None
    if workers > 1:
        pool = ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(spec.to_dict(),))
    rows, traces = [], []
    try:
        for si, snr in enumerate(spec.snr_db):
            for di, d in enumerate(spec.decoders):
                t0 = time.perf_counter()
                tally = _run_point(ctx, pool, workers, di, si, trace)
                wall = time.perf_counter() - t0 if spec.timing else 0.0
                row = _make_row(spec, decoder_label(d), snr, tally, wall)
                rows.append(row)
                if trace:
                    for tr in tally.traces[: spec.trace_limit]:
                        traces.append({"variant": row.variant, "snr_db": snr, **tr})
                if progress:
                    progress(row)
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)
    return rows, traces


def _run_point(ctx, pool, workers, di, si, trace):
    spec = ctx.spec
    bs = spec.batch_size
    total = _Tally()

    def batches():
        start = 0
        while start < spec.max_frames:
            yield start, min(bs, spec.max_frames - start)
            start += bs

    def done():
        return total.errors >= spec.min_block_errors or total.frames >= spec.max_frames

    if pool is None:
        for start, n in batches():
            total.merge(ctx.batch(di, si, start, n, trace))
            if done():
                break
        return total

    it = batches()
    pending = []
    while True:
        while len(pending) < 2 * workers:
            nxt = next(it, None)
            if nxt is None:
                break
            pending.append(pool.submit(_run_batch, (di, si, nxt[0], nxt[1], trace)))
        if not pending:
            break
        total.merge(pending.pop(0).result())
        if done():
            for f in pending:
                f.cancel()
            break
    return total


def _make_row(spec, label, snr, t: _Tally, wall) -> ResultRow:
    per_it = (lambda v: v / t.op_iters) if t.op_iters else (lambda v: 0.0)
    return ResultRow(
        variant=label, snr_db=snr, frames=t.frames, block_errors=t.errors,
        bler=t.errors / t.frames if t.frames else 0.0,
        avg_iterations=t.iters / t.frames if t.frames else 0.0,
        **t.fails,
        fa=per_it(t.ops.fa), fm=per_it(t.ops.fm), ia=per_it(t.ops.ia), ic=per_it(t.ops.ic),
        wall_s=wall, total_iterations=t.iters, iter_sq_sum=t.iter_sq,
        truncated=t.errors < spec.min_block_errors,
    )


# --------------------------------------------------------------------------
# output

def _fmt(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return "%.6g" % v
    return str(v)


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def emit(rows, out_dir, fmt: str = "csv", spec: ExperimentSpec | None = None, traces=None) -> list:
    """Write ``results.csv`` (for ``fmt="csv"``) and the ``results.json``
    mirror carrying the experiment spec. Returns the written paths."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"format must be 'csv' or 'json', got {fmt!r}")
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt == "csv":
        p = out / "results.csv"
        p.write_text(rows_to_csv(rows))
        written.append(p)
    doc = {"spec": spec.to_dict() if spec is not None else None, "rows": [asdict(r) for r in rows]}
    p = out / "results.json"
    p.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    written.append(p)
    if traces:
        p = out / "traces.jsonl"
        with open(p, "w") as fh:
            for tr in traces:
                fh.write(json.dumps(tr) + "\n")
        written.append(p)
    return written


def load_results(path):
    """Read rows (and the experiment spec, if present) back from a JSON or CSV result
    file. CSV rows lack the iteration second moment."""
    path = pathlib.Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        doc = json.loads(text)
        spec = ExperimentSpec.from_dict(doc["spec"]) if doc.get("spec") else None
        return [ResultRow(**r) for r in doc["rows"]], spec
    rows = []
    ints = {f.name for f in fields(ResultRow) if f.type == "int"}
    for rec in csv.DictReader(io.StringIO(text)):
        kw = {}
        for k, v in rec.items():
            kw[k] = v if k == "variant" else (int(v) if k in ints else float(v))
        kw["total_iterations"] = round(kw["avg_iterations"] * kw["frames"])
        kw["iter_sq_sum"] = -1
        rows.append(ResultRow(**kw))
    return rows, None


# --------------------------------------------------------------------------
# statistics

def wilson_ci(k: int, n: int, level: float = 0.95) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    ci = stats.binomtest(int(k), int(n)).proportion_ci(confidence_level=level, method="wilson")
    return float(ci.low), float(ci.high)


def mean_ci(total: float, sq_sum: float, n: int, level: float = 0.95) -> tuple[float, float]:
    """Normal-approximation CI for a mean from its first two raw moments."""
    if n < 2 or sq_sum < 0:
        return math.nan, math.nan
    m = total / n
    var = max(sq_sum / n - m * m, 0.0) * n / (n - 1)
    h = stats.norm.ppf(0.5 + level / 2) * math.sqrt(var / n)
    return m - h, m + h


def diff_proportion_ci(k1, n1, k2, n2, level: float = 0.95) -> tuple[float, float]:
    """Newcombe hybrid score interval for ``k1/n1 - k2/n2``."""
    p1, p2 = k1 / n1, k2 / n2
    l1, u1 = wilson_ci(k1, n1, level)
    l2, u2 = wilson_ci(k2, n2, level)
    d = p1 - p2
    return d - math.sqrt((p1 - l1) ** 2 + (u2 - p2) ** 2), d + math.sqrt((u1 - p1) ** 2 + (p2 - l2) ** 2)


@dataclass
class ComparisonRow:
    snr_db: float
    variant_a: str
    variant_b: str
    avg_iter_a: float
    avg_iter_b: float
    iter_delta: float
    iter_delta_lo: float
    iter_delta_hi: float
    bler_a: float
    bler_b: float
    bler_a_lo: float
    bler_a_hi: float
    bler_b_lo: float
    bler_b_hi: float
    bler_ratio: float
    ratio_lo: float
    ratio_hi: float


def compare(rows_a, rows_b, level: float = 0.95) -> list:
    """Per-SNR iteration gain (``a - b``) and BLER ratio (``a / b``).

    Both inputs must hold exactly one row per SNR point, on the same grid.
    The ratio interval is the delta-method interval on the log ratio.
    """
    a = {r.snr_db: r for r in rows_a}
    b = {r.snr_db: r for r in rows_b}
    if len(a) != len(rows_a) or len(b) != len(rows_b):
        raise ValueError("each input must have one row per SNR point")
    if sorted(a) != sorted(b):
        raise ValueError(f"SNR grids differ: {sorted(a)} vs {sorted(b)}")
    z = stats.norm.ppf(0.5 + level / 2)
    out = []
    for snr in sorted(a):
        ra, rb = a[snr], b[snr]
        va = _mean_var(ra)
        vb = _mean_var(rb)
        delta = ra.avg_iterations - rb.avg_iterations
        h = z * math.sqrt(va + vb) if not (math.isnan(va) or math.isnan(vb)) else math.nan
        la, ua = wilson_ci(ra.block_errors, ra.frames, level)
        lb, ub = wilson_ci(rb.block_errors, rb.frames, level)
        if ra.block_errors and rb.block_errors:
            ratio = ra.bler / rb.bler
            se = math.sqrt(1 / ra.block_errors - 1 / ra.frames + 1 / rb.block_errors - 1 / rb.frames)
            rlo, rhi = ratio * math.exp(-z * se), ratio * math.exp(z * se)
        else:
            ratio = rlo = rhi = math.nan
        out.append(ComparisonRow(snr, ra.variant, rb.variant, ra.avg_iterations, rb.avg_iterations,
                                 delta, delta - h, delta + h, ra.bler, rb.bler, la, ua, lb, ub,
                                 ratio, rlo, rhi))
    return out


def _mean_var(r: ResultRow) -> float:
    """Variance of the avg_iterations estimate."""
    n = r.frames
    if n < 2 or r.iter_sq_sum < 0:
        return math.nan
    m = r.total_iterations / n
    return max(r.iter_sq_sum / n - m * m, 0.0) / (n - 1)


def comparison_to_csv(rows) -> str:
    cols = [f.name for f in fields(ComparisonRow)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_fmt(getattr(r, c)) for c in cols])
    return buf.getvalue()
