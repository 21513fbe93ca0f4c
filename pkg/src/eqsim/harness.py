"""Seeded Monte-Carlo BER experiments, result files and oracle verification."""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np
from scipy.stats import binomtest

from .channel import (
    PRESETS,
    ChannelSpec,
    TransmissionRecord,
    realize_state_space,
    simulate,
    snr_to_noise_var,
)
from .coded import ConvCode, Interleaver, bcjr_decode, conv_encode, interleave, turbo_equalize
from .conversion import SoftBit, minka_gaussian
from .equalizer import (
    EqualizerConfig,
    UnsupportedChannelError,
    bcjr_equalize,
    ep_equalize,
    hard_decide,
    kalman_extrinsic,
    lmmse_equalize,
)
from .messages import GaussianMessages, make_from_mean_var, mean_var
from .oracles import exhaustive_decode, exhaustive_map_llrs, joint_gaussian_extrinsic, two_point_moments
from .schedules import AlphaSchedule, alpha_at, parse_alpha  # noqa: F401  (re-exported)

log = logging.getLogger(__name__)

SCHEMES = ("lmmse", "minka_A", "minka_B", "bcjr", "coded_std", "coded_minka")
CODED_SCHEMES = ("coded_std", "coded_minka")
CSV_FIELDS = (
    "snr_db", "scheme", "iters", "bits", "errors", "ber",
    "negvar_count", "clamp_count", "wall_time_ms", "seed",
)


@dataclass(frozen=True)
class BerRecord:
    snr_db: float
    scheme: str
    iters: float
    bits: int
    errors: int
    ber: float
    negvar_count: int
    clamp_count: int
    wall_time_ms: float
    seed: int

    def __post_init__(self):
        if self.bits <= 0:
            raise ValueError("a BER record needs at least one bit")

    def confidence_interval(self, level: float = 0.95) -> tuple[float, float]:
        return ber_confidence_interval(self.errors, self.bits, level)


def ber_confidence_interval(errors: int, bits: int, level: float = 0.95) -> tuple[float, float]:
    """Exact (Clopper-Pearson) binomial interval for the error probability."""
    ci = binomtest(int(errors), int(bits)).proportion_ci(confidence_level=level, method="exact")
    return float(ci.low), float(ci.high)


class BerRecords(list):
    """A list of :class:`BerRecord` plus ``skipped`` ``(snr_db, scheme, reason)`` entries."""

    def __init__(self, *args):
        super().__init__(*args)
        self.skipped: list[tuple[float, str, str]] = []

    def get(self, scheme: str, snr_db: float) -> BerRecord:
        for r in self:
            if r.scheme == scheme and r.snr_db == snr_db:
                return r
        raise KeyError((scheme, snr_db))


@dataclass(frozen=True)
class ExperimentConfig:
    channel: ChannelSpec = PRESETS["proakis5"]
    snr_db: tuple[float, ...] = (10.0,)
    block_length: int = 512
    info_block_length: int = 1024
    min_bits: int = 200_000
    min_errors: int = 100
    max_bits: int = 10_000_000
    schemes: tuple[str, ...] = ("lmmse", "minka_B", "bcjr")
    equalizer: EqualizerConfig = field(default_factory=EqualizerConfig)
    code: ConvCode = field(default_factory=ConvCode)
    interleaver_seed: int = 1
    outer_iters: int = 4
    coded_inner_iters: int = 10
    base_seed: int = 42

    def __post_init__(self):
        for scheme in self.schemes:
            if scheme not in SCHEMES:
                raise ValueError(f"unknown scheme {scheme!r}")
        for name in ("block_length", "info_block_length", "min_bits", "max_bits", "outer_iters",
                     "coded_inner_iters"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.min_errors < 0:
            raise ValueError("min_errors must be non-negative")
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))
        object.__setattr__(self, "schemes", tuple(self.schemes))


def block_rng(base_seed: int, snr_index: int, block: int) -> np.random.Generator:
    """Independent stream per (SNR point, block); same data for every scheme."""
    return np.random.default_rng(np.random.SeedSequence(base_seed, spawn_key=(snr_index, block)))


def _uncoded_block(config, model, scheme, nv, rng):
    n = config.block_length
    symbols = rng.choice(np.array([1.0, -1.0]), size=n)
    obs = simulate(model, symbols, nv, rng)
    negvar = clamps = 0
    iters = 1
    if scheme == "lmmse":
        llr = lmmse_equalize(model, obs)
    elif scheme == "bcjr":
        llr = bcjr_equalize(config.channel, obs)
    else:
        eq = replace(config.equalizer, schedule=scheme[-1])
        llr, diag = ep_equalize(model, obs, None, eq)
        negvar, clamps, iters = diag.negvar_count, diag.clamp_count, diag.iterations_run
    errors = int(np.sum(hard_decide(llr) != symbols))
    return n, errors, negvar, clamps, iters


def _coded_block(config, model, scheme, nv, rng, interleaver):
    L = config.info_block_length
    info = rng.integers(0, 2, size=L)
    tx = interleave(conv_encode(info, config.code), interleaver)
    obs = simulate(model, tx, nv, rng)
    eq = None
    if scheme == "coded_minka":
        eq = replace(config.equalizer, max_iters=config.coded_inner_iters)
    decisions, diag = turbo_equalize(obs, model, config.code, interleaver, eq, config.outer_iters)
    errors = int(np.sum(decisions != info))
    return L, errors, diag.negvar_count, diag.clamp_count, sum(diag.inner_iterations)


def _run_point(config, model, scheme, snr_index, snr_db) -> BerRecord:
    coded = scheme in CODED_SCHEMES
    if coded:
        L = config.info_block_length
        rate = L / config.code.coded_length(L)
        interleaver = Interleaver.random(config.code.coded_length(L), config.interleaver_seed)
    else:
        rate = 1.0
    nv = snr_to_noise_var(snr_db, config.channel, rate)
    bits = errors = negvar = clamps = iters = blocks = 0
    start = time.perf_counter()
    while True:
        rng = block_rng(config.base_seed, snr_index, blocks)
        if coded:
            b, e, nvc, cl, it = _coded_block(config, model, scheme, nv, rng, interleaver)
        else:
            b, e, nvc, cl, it = _uncoded_block(config, model, scheme, nv, rng)
        bits += b
        errors += e
        negvar += nvc
        clamps += cl
        iters += it
        blocks += 1
        done = bits >= config.min_bits and errors >= config.min_errors
        if done or bits >= config.max_bits:
            break
    elapsed = 1e3 * (time.perf_counter() - start)
    log.info("%s @ %.2f dB: %d/%d errors in %d blocks", scheme, snr_db, errors, bits, blocks)
    return BerRecord(
        snr_db=snr_db, scheme=scheme, iters=iters / blocks, bits=bits, errors=errors,
        ber=errors / bits, negvar_count=negvar, clamp_count=clamps,
        wall_time_ms=elapsed, seed=config.base_seed,
    )


def run_ber_experiment(config: ExperimentConfig) -> BerRecords:
    """One :class:`BerRecord` per (SNR, scheme), deterministic given ``config``.

    Blocks are drawn until both ``min_bits`` and ``min_errors`` are reached
    or ``max_bits`` is exceeded. Scheme/channel mismatches (BCJR on an IIR
    channel) are listed in ``records.skipped`` instead of raising.
    """
    model = realize_state_space(config.channel)
    records = BerRecords()
    for i, snr in enumerate(config.snr_db):
        for scheme in config.schemes:
            try:
                records.append(_run_point(config, model, scheme, i, snr))
            except UnsupportedChannelError as exc:
                log.warning("skipping %s at %.2f dB: %s", scheme, snr, exc)
                records.skipped.append((snr, scheme, str(exc)))
    return records


def _format(value) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def write_results(records, path, timing: bool = True) -> None:
    """Write records as CSV, or as JSON lines when ``path`` ends in ``.jsonl``.

    With ``timing=False`` the wall-time column is written as 0 so that
    repeated runs produce identical files.
    """
    path = Path(path)
    rows = []
    for r in records:
        row = asdict(r)
        if not timing:
            row["wall_time_ms"] = 0.0
        rows.append({k: row[k] for k in CSV_FIELDS})
    try:
        with path.open("w", newline="") as fh:
            if path.suffix == ".jsonl":
                for row in rows:
                    fh.write(json.dumps({k: float(_format(v)) if isinstance(v, float) else v
                                         for k, v in row.items()}) + "\n")
            else:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(CSV_FIELDS)
                for row in rows:
                    writer.writerow([_format(row[k]) for k in CSV_FIELDS])
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


def read_results(path) -> list[BerRecord]:
    """Parse a file written by :func:`write_results`."""
    path = Path(path)
    types = {f.name: f.type for f in fields(BerRecord)}
    casts = {"float": float, "int": int, "str": str}
    with path.open() as fh:
        if path.suffix == ".jsonl":
            raw = [json.loads(line) for line in fh if line.strip()]
        else:
            raw = list(csv.DictReader(fh))
    return [BerRecord(**{k: casts[types[k]](v) for k, v in row.items()}) for row in raw]


@dataclass
class CheckResult:
    name: str
    max_error: float
    tol: float
    trials: int

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.max_error) and self.max_error <= self.tol)

    def __str__(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<34} max err {self.max_error:.3e}  tol {self.tol:.0e}  ({self.trials} trials)"


def _perturbed(spec: ChannelSpec, eps: float) -> ChannelSpec:
    if eps == 0.0:
        return spec
    return ChannelSpec((spec.b[0] + eps,) + spec.b[1:], spec.a)


def check_kalman(trials: int, rng, perturb: float = 0.0, n: int = 8) -> CheckResult:
    worst = 0.0
    specs = [PRESETS["proakis5"], PRESETS["iir09"]]
    for t in range(trials):
        spec = specs[t % 2]
        truth = realize_state_space(spec)
        model = realize_state_space(_perturbed(spec, perturb))
        nv = rng.uniform(0.05, 1.0)
        obs = simulate(truth, rng.choice([1.0, -1.0], n), nv, rng)
        msgs = GaussianMessages.from_mean_var(rng.uniform(-1, 1, n), rng.uniform(0.2, 2.0, n))
        got_m, got_v = kalman_extrinsic(model, obs, msgs).mean_var()
        w, xi = joint_gaussian_extrinsic(truth, obs, msgs)
        worst = max(worst, np.max(np.abs(got_m - xi / w)), np.max(np.abs(got_v - 1 / w)))
    return CheckResult("kalman vs joint Gaussian", worst, 1e-8, trials)


def check_bcjr(trials: int, rng, perturb: float = 0.0, n: int = 10) -> CheckResult:
    spec = ChannelSpec((0.6, 0.7, 0.4))
    used = _perturbed(spec, perturb)
    model = realize_state_space(spec)
    worst = 0.0
    for _ in range(trials):
        nv = rng.uniform(0.2, 1.0)
        obs = simulate(model, rng.choice([1.0, -1.0], n), nv, rng)
        priors = rng.uniform(-3, 3, n)
        got = bcjr_equalize(used, TransmissionRecord(obs.symbols, obs.observations, nv), priors)
        want = exhaustive_map_llrs(spec, obs, priors)
        worst = max(worst, np.max(np.abs(got - want)))
    return CheckResult("ISI BCJR vs enumeration", worst, 1e-9, trials)


def check_decoder(trials: int, rng, n_info: int = 6) -> CheckResult:
    code = ConvCode()
    worst = 0.0
    for _ in range(trials):
        llr = rng.normal(0, 3, code.coded_length(n_info))
        ext, info = bcjr_decode(llr, code)
        ext_o, info_o = exhaustive_decode(llr, code)
        worst = max(worst, np.max(np.abs(info - info_o)), np.max(np.abs(ext - ext_o)))
    return CheckResult("code BCJR vs enumeration", worst, 1e-8, trials)


def check_moment_match(trials: int, rng) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        fwd = SoftBit(rng.uniform(-8, 8))
        g = make_from_mean_var(rng.uniform(-1.5, 1.5), rng.uniform(0.2, 4.0))
        m, v = mean_var(minka_gaussian(fwd, g) * g)
        p_plus = 1.0 / (1.0 + np.exp(-fwd.llr))
        m_o, v_o = two_point_moments(p_plus, g)
        worst = max(worst, abs(m - m_o), abs(v - v_o))
    return CheckResult("Minka moment match", worst, 1e-10, trials)


def verify(trials: int = 100, perturb: float = 0.0, seed: int = 0, out=print) -> int:
    """Run the oracle-equivalence checks; returns 0 when all pass, 1 otherwise."""
    rng = np.random.default_rng(seed)
    results = [
        check_kalman(trials, rng, perturb),
        check_bcjr(max(1, trials // 2), rng, perturb),
        check_decoder(max(1, trials // 10), rng),
        check_moment_match(100 * trials, rng),
    ]
    for r in results:
        out(str(r))
    return 0 if all(r.passed for r in results) else 1
