"""Monte Carlo sweep engine and property-verification suites.

``run_sweep`` produces symbol-error-rate and search-complexity statistics
versus SNR for any code/decoder combination, one shared instance per trial
so decoders are compared on identical inputs. Trials draw from per-trial
Philox streams keyed by (seed, point index, trial index), which makes the
output independent of scheduling: serial and parallel runs emit identical
CSV (wall-time columns excluded from that contract).

``run_verification`` bundles the statistical and structural checks the
library's guarantees rest on (QR block realness, decoder cost equivalence,
sort and node counters, the quasistatic/time-varying structure dichotomy,
coding-gain alphabet independence, and agreement of the two QR routes).

SER is reported per symbol: four information symbols per trial.
"""

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import codes, decoders
from .channel import (
    CHANNEL_MODELS,
    make_rng,
    sample_channel,
    sample_channels,
    sample_noise,
    snr_to_n0,
)
from .constellation import SUPPORTED_QAM_ORDERS, make_qam
from .matrixkit import frobenius_norm, qr_golden_structured, qr_decompose

DECODER_NAMES = ("alamouti", "exhaustive", "fast", "sphere")
ORDERING_MODES = ("none", "blast")

CSV_HEADER = (
    "snr_db,decoder,code,modulation,channel,trials,ser,"
    "nodes_mean,nodes_p95,nodes_max,sorts_mean,time_ns_mean"
)


@dataclass(frozen=True)
class SweepConfig:
    """Configuration of one simulation sweep."""

    code: str = "golden-dv"
    decoders: tuple = ("fast",)
    modulation: int = 4
    channel: str = "quasistatic"
    rho: float = None
    snr_start: float = 0.0
    snr_stop: float = 30.0
    snr_step: float = 2.0
    trials: int = 1000
    seed: int = 0
    ordering: str = "none"
    out: str = None
    noise_free: bool = False

    def validate(self) -> None:
        if self.code not in codes.CODE_VARIANTS:
            raise ValueError(f"unknown code variant: {self.code!r}")
        if not self.decoders:
            raise ValueError("at least one decoder must be selected")
        for name in self.decoders:
            if name not in DECODER_NAMES:
                raise ValueError(f"unknown decoder: {name!r}")
        if self.modulation not in SUPPORTED_QAM_ORDERS:
            raise ValueError(f"unsupported modulation order: {self.modulation!r}")
        if self.channel not in CHANNEL_MODELS:
            raise ValueError(f"unknown channel model: {self.channel!r}")
        if self.channel == "markov" and (
            self.rho is None or not 0.0 <= self.rho <= 1.0
        ):
            raise ValueError("markov channel needs rho in [0, 1]")
        if self.snr_step <= 0:
            raise ValueError("snr step must be positive")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.ordering not in ORDERING_MODES:
            raise ValueError(f"unknown ordering mode: {self.ordering!r}")
        if "fast" in self.decoders and self.code not in codes.GOLDEN_VARIANTS:
            raise ValueError("fast decoder requires a golden code variant")
        if "alamouti" in self.decoders:
            if self.code != "overlaid-alamouti":
                raise ValueError("alamouti decoder requires the overlaid-alamouti code")
            if self.channel != "quasistatic":
                raise ValueError(
                    "alamouti decoder requires a quasistatic channel"
                )
        if "exhaustive" in self.decoders and self.modulation ** 4 > decoders.EXHAUSTIVE_CAP:
            raise ValueError("exhaustive decoder capped at modulation 64")

    def snr_points(self) -> list:
        points = []
        k = 0
        while True:
            snr = self.snr_start + k * self.snr_step
            if snr > self.snr_stop + 1e-9:
                break
            points.append(snr)
            k += 1
        return points

    def channel_label(self) -> str:
        if self.channel == "markov":
            return f"markov:{self.rho:.9g}"
        return self.channel


@dataclass(frozen=True)
class SweepRow:
    """Aggregated statistics for one (SNR point, decoder) cell."""

    snr_db: float
    decoder: str
    trials: int
    ser: float
    nodes_mean: float
    nodes_p95: float
    nodes_max: int
    sorts_mean: float
    time_ns_mean: float
    heavy_tail: bool


@dataclass(frozen=True)
class SweepReport:
    config: SweepConfig
    rows: tuple


def _thread_count() -> int:
    env = os.environ.get("STC_THREADS", "").strip()
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _decode_instance(name, cfg, eff, y, alphabet):
    if name == "fast":
        if cfg.ordering == "blast":
            perm = decoders.blast_ordering(eff, allowed=decoders.FAST_PERMUTATIONS)
        else:
            perm = decoders.IDENTITY_PERMUTATION
        return decoders.decode_fast_golden(eff, y, alphabet, perm=perm)
    if name == "sphere":
        return decoders.decode_sphere_conventional(eff, y, alphabet, ordering=cfg.ordering)
    if name == "exhaustive":
        return decoders.decode_exhaustive(eff, y, alphabet)
    return decoders.decode_alamouti_fast(eff, y, alphabet)


def _run_chunk(cfg: SweepConfig, point_index: int, snr_db: float, lo: int, hi: int):
    """Decode trials [lo, hi) of one SNR point; returns per-decoder partials."""
    alphabet = make_qam(cfg.modulation)
    n0 = snr_to_n0(snr_db)
    acc = {
        name: {"errors": 0, "nodes": [], "sorts": 0, "time_ns": 0}
        for name in cfg.decoders
    }
    for trial in range(lo, hi):
        rng = make_rng(cfg.seed, point_index, trial)
        ch = sample_channel(rng, cfg.channel, cfg.rho)
        idx_true = rng.integers(0, alphabet.size, size=4)
        x = alphabet.symbols[idx_true]
        eff = codes.effective_channel(ch, cfg.code)
        if cfg.noise_free:
            stacked_noise = np.zeros(4, dtype=complex)
        else:
            stacked_noise = eff.stack_noise(sample_noise(rng, n0))
        y = eff.h @ x + stacked_noise
        for name in cfg.decoders:
            start = time.perf_counter_ns()
            result = _decode_instance(name, cfg, eff, y, alphabet)
            elapsed = time.perf_counter_ns() - start
            slot = acc[name]
            slot["errors"] += int(np.sum(np.asarray(result.indices) != idx_true))
            slot["nodes"].append(result.nodes_visited)
            slot["sorts"] += result.full_sorts
            slot["time_ns"] += elapsed
    return acc


def run_sweep(cfg: SweepConfig) -> SweepReport:
    """Run the configured Monte Carlo sweep and aggregate statistics."""
    cfg.validate()
    points = cfg.snr_points()
    threads = _thread_count()
    chunk = max(32, -(-cfg.trials // max(1, threads * 8)))
    tasks = []
    for pi, snr in enumerate(points):
        lo = 0
        while lo < cfg.trials:
            hi = min(cfg.trials, lo + chunk)
            tasks.append((pi, snr, lo, hi))
            lo = hi
    partials = {}
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = {
                pool.submit(_run_chunk, cfg, pi, snr, lo, hi): (pi, lo)
                for pi, snr, lo, hi in tasks
            }
            for future, key in futures.items():
                partials[key] = future.result()
    else:
        for pi, snr, lo, hi in tasks:
            partials[(pi, lo)] = _run_chunk(cfg, pi, snr, lo, hi)

    rows = []
    for pi, snr in enumerate(points):
        merged = {
            name: {"errors": 0, "nodes": [], "sorts": 0, "time_ns": 0}
            for name in cfg.decoders
        }
        for key in sorted(k for k in partials if k[0] == pi):
            part = partials[key]
            for name in cfg.decoders:
                merged[name]["errors"] += part[name]["errors"]
                merged[name]["nodes"].extend(part[name]["nodes"])
                merged[name]["sorts"] += part[name]["sorts"]
                merged[name]["time_ns"] += part[name]["time_ns"]
        for name in sorted(cfg.decoders):
            slot = merged[name]
            nodes = np.asarray(slot["nodes"], dtype=float)
            mean = float(nodes.mean())
            p95 = float(np.percentile(nodes, 95))
            rows.append(
                SweepRow(
                    snr_db=snr,
                    decoder=name,
                    trials=cfg.trials,
                    ser=slot["errors"] / (4.0 * cfg.trials),
                    nodes_mean=mean,
                    nodes_p95=p95,
                    nodes_max=int(nodes.max()),
                    sorts_mean=slot["sorts"] / cfg.trials,
                    time_ns_mean=slot["time_ns"] / cfg.trials,
                    heavy_tail=bool(p95 >= mean),
                )
            )
    return SweepReport(config=cfg, rows=tuple(rows))


def _fmt(value: float) -> str:
    return format(float(value), ".9g")


def emit_csv(report: SweepReport, path: str) -> None:
    """Write a sweep report as CSV with a fixed schema and stable ordering."""
    cfg = report.config
    lines = [CSV_HEADER]
    for row in report.rows:
        lines.append(
            ",".join(
                (
                    _fmt(row.snr_db),
                    row.decoder,
                    cfg.code,
                    str(cfg.modulation),
                    cfg.channel_label(),
                    str(row.trials),
                    _fmt(row.ser),
                    _fmt(row.nodes_mean),
                    _fmt(row.nodes_p95),
                    str(row.nodes_max),
                    _fmt(row.sorts_mean),
                    _fmt(row.time_ns_mean),
                )
            )
        )
    with open(path, "w", newline="") as handle:
        handle.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Verification suites
# ---------------------------------------------------------------------------

VERIFICATION_SUITES = ("theorem1", "mlequiv", "sorts", "alamouti", "mindet", "qr-agree")

_SUITE_DEFAULT_TRIALS = {
    "theorem1": 100_000,
    "mlequiv": 2_000,
    "sorts": 200,
    "alamouti": 100_000,
    "mindet": 0,
    "qr-agree": 10_000,
}


@dataclass(frozen=True)
class VerificationCheck:
    name: str
    measured: float
    threshold: float
    comparison: str  # one of "<=", ">", ">=", "=="
    passed: bool


@dataclass(frozen=True)
class VerificationReport:
    suite: str
    trials: int
    seed: int
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def format_lines(self) -> list:
        lines = [f"suite {self.suite} (trials={self.trials}, seed={self.seed})"]
        for check in self.checks:
            verdict = "PASS" if check.passed else "FAIL"
            lines.append(
                f"  [{verdict}] {check.name}: measured {check.measured:.6g} "
                f"{check.comparison} {check.threshold:.6g}"
            )
        lines.append(f"result: {'PASS' if self.passed else 'FAIL'}")
        return lines


def _check(name, measured, threshold, comparison) -> VerificationCheck:
    measured = float(measured)
    threshold = float(threshold)
    ok = {
        "<=": measured <= threshold,
        ">": measured > threshold,
        ">=": measured >= threshold,
        "==": measured == threshold,
    }[comparison]
    return VerificationCheck(
        name=name, measured=measured, threshold=threshold, comparison=comparison, passed=ok
    )


_MODEL_GRID = (("quasistatic", None), ("rapid", None), ("markov", 0.9))


def _model_name(model: str, rho) -> str:
    return f"{model}:{rho}" if model == "markov" else model


def _batched_channels(seed, branch, model, rho, trials, batch=20_000):
    rng = make_rng(seed, *branch)
    done = 0
    while done < trials:
        n = min(batch, trials - done)
        yield sample_channels(rng, model, n, rho)
        done += n


def _suite_theorem1(trials: int, seed: int) -> list:
    checks = []
    for vi, variant in enumerate(codes.GOLDEN_VARIANTS):
        for mi, (model, rho) in enumerate(_MODEL_GRID):
            worst_general = 0.0
            worst_exact = 0.0
            for h in _batched_channels(seed, (0, vi, mi), model, rho, trials):
                eff = codes.effective_matrix(h, variant)
                scale = frobenius_norm(eff)
                r = qr_decompose(eff).r
                ratio = np.maximum(
                    np.abs(r[..., 0, 1].imag), np.abs(r[..., 2, 3].imag)
                ) / scale
                worst_general = max(worst_general, float(ratio.max()))
                h_bar, psi = codes.golden_parts(h, variant)
                ra = qr_golden_structured(h_bar, psi).r
                exact = max(
                    float(np.abs(ra[..., 0:2, 0:2].imag).max()),
                    float(np.abs(ra[..., 2:4, 2:4].imag).max()),
                )
                worst_exact = max(worst_exact, exact)
            label = f"{variant}/{_model_name(model, rho)}"
            checks.append(
                _check(f"theorem1 {label} max |Im r12|,|Im r34| / ||H||", worst_general, 1e-9, "<=")
            )
            checks.append(
                _check(f"theorem1 {label} structured-QR exact zero", worst_exact, 0.0, "==")
            )
    return checks


def _suite_qr_agree(trials: int, seed: int) -> list:
    checks = []
    per = max(1, trials // (len(codes.GOLDEN_VARIANTS) * 2))
    for vi, variant in enumerate(codes.GOLDEN_VARIANTS):
        for mi, model in enumerate(("quasistatic", "rapid")):
            worst = 0.0
            for h in _batched_channels(seed, (1, vi, mi), model, None, per):
                h_bar, psi = codes.golden_parts(h, variant)
                eff = h_bar @ psi.astype(complex)
                general = qr_decompose(eff)
                structured = qr_golden_structured(h_bar, psi)
                worst = max(
                    worst,
                    float(np.abs(general.r - structured.r).max()),
                    float(np.abs(general.q - structured.q).max()),
                )
            checks.append(
                _check(
                    f"qr-agree {variant}/{model} max entrywise |general - structured|",
                    worst,
                    1e-9,
                    "<=",
                )
            )
    return checks


def _suite_alamouti(trials: int, seed: int) -> list:
    checks = []
    worst_quasi = 0.0
    for h in _batched_channels(seed, (2, 0), "quasistatic", None, trials):
        eff = codes.effective_matrix(h, "overlaid-alamouti")
        r = qr_decompose(eff).r
        scale = frobenius_norm(eff)
        ratio = np.maximum(np.abs(r[..., 0, 1]), np.abs(r[..., 2, 3])) / scale
        worst_quasi = max(worst_quasi, float(ratio.max()))
    checks.append(
        _check("alamouti quasistatic max |r12|,|r34| / ||H||", worst_quasi, 1e-9, "<=")
    )

    ratios = []
    for h in _batched_channels(seed, (2, 1), "rapid", None, trials):
        eff = codes.effective_matrix(h, "overlaid-alamouti")
        r = qr_decompose(eff).r
        scale = frobenius_norm(eff)
        ratios.append(np.abs(r[..., 0, 1]) / scale)
    median = float(np.median(np.concatenate(ratios)))
    checks.append(_check("alamouti rapid median |r12| / ||H||", median, 0.01, ">"))

    alphabet = make_qam(4)
    rng = make_rng(seed, 2, 2)
    raised = 0
    probes = 50
    for _ in range(probes):
        ch = sample_channel(rng, "rapid")
        eff = codes.effective_channel(ch, "overlaid-alamouti")
        y = eff.h @ alphabet.symbols[rng.integers(0, 4, 4)]
        try:
            decoders.decode_alamouti_fast(eff, y, alphabet)
        except ValueError:
            raised += 1
    checks.append(
        _check("alamouti rapid structure-error rate", raised / probes, 1.0, ">=")
    )
    return checks


def _mlequiv_golden_trial(rng, alphabet, model, snr_db, variant="golden-dv"):
    ch = sample_channel(rng, model)
    idx = rng.integers(0, alphabet.size, 4)
    eff = codes.effective_channel(ch, variant)
    noise = eff.stack_noise(sample_noise(rng, snr_to_n0(snr_db)))
    y = eff.h @ alphabet.symbols[idx] + noise
    return eff, y


_MLEQUIV_SNRS = (0.0, 10.0, 20.0)


def _suite_mlequiv(trials: int, seed: int) -> list:
    checks = []
    plans = ((4, trials), (16, max(1, trials // 10)))
    for m, count in plans:
        alphabet = make_qam(m)
        dev_fast = 0.0
        dev_sphere = 0.0
        dev_fast_rapid = 0.0
        dev_alamouti = 0.0
        rng = make_rng(seed, 3, m)
        for trial in range(count):
            snr_db = _MLEQUIV_SNRS[trial % len(_MLEQUIV_SNRS)]
            eff, y = _mlequiv_golden_trial(rng, alphabet, "quasistatic", snr_db)
            reference = decoders.decode_exhaustive(eff, y, alphabet).cost
            fast = decoders.decode_fast_golden(eff, y, alphabet).cost
            sphere = decoders.decode_sphere_conventional(eff, y, alphabet).cost
            dev_fast = max(dev_fast, abs(fast - reference))
            dev_sphere = max(dev_sphere, abs(sphere - reference))

            eff, y = _mlequiv_golden_trial(rng, alphabet, "rapid", snr_db)
            reference = decoders.decode_exhaustive(eff, y, alphabet).cost
            fast = decoders.decode_fast_golden(eff, y, alphabet).cost
            dev_fast_rapid = max(dev_fast_rapid, abs(fast - reference))

            ch = sample_channel(rng, "quasistatic")
            idx = rng.integers(0, alphabet.size, 4)
            eff = codes.effective_channel(ch, "overlaid-alamouti")
            noise = eff.stack_noise(sample_noise(rng, snr_to_n0(snr_db)))
            y = eff.h @ alphabet.symbols[idx] + noise
            reference = decoders.decode_exhaustive(eff, y, alphabet).cost
            fast_al = decoders.decode_alamouti_fast(eff, y, alphabet).cost
            dev_alamouti = max(dev_alamouti, abs(fast_al - reference))
        checks.append(_check(f"mlequiv M={m} fast vs exhaustive", dev_fast, 1e-9, "<="))
        checks.append(_check(f"mlequiv M={m} sphere vs exhaustive", dev_sphere, 1e-9, "<="))
        checks.append(
            _check(f"mlequiv M={m} fast (rapid) vs exhaustive", dev_fast_rapid, 1e-9, "<=")
        )
        checks.append(
            _check(f"mlequiv M={m} alamouti vs exhaustive", dev_alamouti, 1e-9, "<=")
        )
    return checks


_SORTS_SNR = {4: 10.0, 16: 14.0, 64: 20.0, 256: 26.0}


def _suite_sorts(trials: int, seed: int) -> list:
    checks = []
    for m in SUPPORTED_QAM_ORDERS:
        alphabet = make_qam(m)
        rng = make_rng(seed, 4, m)
        always_two = 0
        for _ in range(trials):
            eff, y = _mlequiv_golden_trial(rng, alphabet, "quasistatic", _SORTS_SNR[m])
            result = decoders.decode_fast_golden(eff, y, alphabet)
            always_two += int(result.full_sorts == 2)
        checks.append(
            _check(f"sorts fast M={m} fraction with exactly 2", always_two / trials, 1.0, ">=")
        )
    alphabet = make_qam(64)
    rng = make_rng(seed, 4, 0)
    above = 0
    probes = max(1, trials // 4)
    for _ in range(probes):
        eff, y = _mlequiv_golden_trial(rng, alphabet, "quasistatic", 20.0)
        result = decoders.decode_sphere_conventional(eff, y, alphabet)
        above += int(result.full_sorts > 2)
    checks.append(
        _check("sorts conventional 64-QAM fraction above 2", above / probes, 0.0, ">")
    )
    return checks


def min_determinant_gap(width: int) -> float:
    """Smallest |det(codeword difference)| on the unscaled odd-integer grid.

    Brute force over every nonzero symbol-difference vector for the default
    golden encoder. The encoder is linear, and det(encode(d)) splits into
    independent functions of the diagonal pair (d1, d2) and the off-diagonal
    pair (d3, d4), so the full (2*width - 1)^8 difference grid reduces to all
    cross pairs of one (2*width - 1)^4 product table.
    """
    diffs = 2.0 * np.arange(-(width - 1), width)  # per-axis symbol differences
    delta = (diffs[:, None] + 1j * diffs[None, :]).ravel()
    c = codes.GOLDEN.cos_theta
    s = codes.GOLDEN.sin_theta
    da = delta[:, None]
    db = delta[None, :]
    products = ((c * da + s * db) * (-s * da + c * db)).ravel()
    zero_axis = int(np.flatnonzero(delta == 0)[0])
    zero_product = zero_axis * len(delta) + zero_axis
    dets = np.abs(products[:, None] - 1j * products[None, :])
    dets[zero_product, zero_product] = math.inf  # excludes only the all-zero vector
    return float(dets.min())


def _suite_mindet(trials: int, seed: int) -> list:
    min4 = min_determinant_gap(2)
    min16 = min_determinant_gap(4)
    gap = abs(min4 - min16) / min4
    return [
        _check("mindet relative difference 4-QAM vs 16-QAM", gap, 1e-9, "<="),
        _check("mindet 4-QAM minimum positive", min4, 0.0, ">"),
    ]


_SUITE_RUNNERS = {
    "theorem1": _suite_theorem1,
    "mlequiv": _suite_mlequiv,
    "sorts": _suite_sorts,
    "alamouti": _suite_alamouti,
    "mindet": _suite_mindet,
    "qr-agree": _suite_qr_agree,
}


def run_verification(suite: str, trials: int = None, seed: int = 0) -> VerificationReport:
    """Execute one verification suite and report per-assertion verdicts.

    Failures are report content, not exceptions.
    """
    if suite not in VERIFICATION_SUITES:
        raise ValueError(f"unknown verification suite: {suite!r}")
    if trials is None:
        trials = _SUITE_DEFAULT_TRIALS[suite]
    checks = _SUITE_RUNNERS[suite](trials, seed)
    return VerificationReport(suite=suite, trials=trials, seed=seed, checks=tuple(checks))
