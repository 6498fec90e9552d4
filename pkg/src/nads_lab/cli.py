"""Command line front end: system spec files in, CSV/JSON artifacts out.

System spec files are line-based ``key = value`` declarations (values in
JSON syntax; bare words allowed for names), e.g.::

    family = logistic
    params.kind = periodic
    params.list = [2, 3, 4]

Affine systems take ``domain.lo``/``domain.hi`` plus ``slopes.*`` and
``intercepts.*`` groups with the same kind-specific fields. All outputs are
byte-deterministic: JSON field order is fixed, floats are printed in their
shortest round-trip form padded to 17 significant digits, and files are
written atomically.

Exit codes: 0 for completed analyses with a definite verdict (pass,
StronglySensitive, NotDetected, hypotheses pass/sampled); 2 for Undetermined
verdicts, failed hypothesis reports, and unverified certificates; 1 for
errors (parse, domain, hypothesis gate, bad options).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import tempfile
from dataclasses import dataclass

import numpy as np

from . import sensitivity as sens
from . import stability as stab
from .core import (
    BlockDoubling,
    Constant,
    Explicit,
    Interval,
    MapSequence,
    ParamSequence,
    Periodic,
    SeededUniform,
    iterate_orbit,
)
from .errors import ConfigError, NadsLabError, ParseError
from .hypotheses import check_theorem
from .lyapunov import estimate_exponents, finite_time_exponents
from .systems import affine, logistic

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNDETERMINED = 2


# ---------------------------------------------------------------------------
# Deterministic serialization


def fmt_float(x: float) -> str:
    """Shortest round-trip decimal, padded to 17 significant digits."""
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = repr(float(x))
    if "e" in s:
        mant, _, exp = s.partition("e")
        exp = "e" + exp
    else:
        mant, exp = s, ""
    neg = mant.startswith("-")
    if neg:
        mant = mant[1:]
    digits = mant.replace(".", "")
    significant = len(digits.lstrip("0")) or 1
    pad = 17 - significant
    if pad > 0:
        if "." not in mant:
            mant += "."
        mant += "0" * pad
    return ("-" if neg else "") + mant + exp


def _json_scalar(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        x = float(v)
        if math.isfinite(x):
            return fmt_float(x)
        return '"' + fmt_float(x) + '"'  # JSON has no infinities
    if isinstance(v, str):
        import json

        return json.dumps(v)
    raise TypeError(f"cannot serialize {type(v).__name__}")


def dumps_json(obj, indent: int = 0) -> str:
    """Deterministic JSON text: insertion-ordered keys, fixed float format."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        rows = [f'{inner}"{k}": {dumps_json(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(rows) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        rows = [f"{inner}{dumps_json(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(rows) + "\n" + pad + "]"
    return _json_scalar(obj)


def write_text_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: str, obj: dict) -> None:
    write_text_atomic(path, dumps_json(obj) + "\n")


def _csv_cell(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return fmt_float(float(v))


def write_csv(path: str, header, rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_csv_cell(c) for c in row) for row in rows)
    write_text_atomic(path, "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# System spec files


_PARAM_KINDS = {
    "constant": ("c",),
    "periodic": ("list",),
    "seeded-uniform": ("lo", "hi", "seed"),
    "block-doubling": ("v1", "v2"),
    "explicit": ("list", "tail"),
}


def _parse_entries(path: str) -> dict:
    import json

    try:
        with open(path) as handle:
            lines = handle.readlines()
    except OSError as exc:
        raise ParseError(f"cannot read spec file: {exc}") from None
    entries: dict[str, object] = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not key:
            raise ParseError(f"line {lineno}: empty key")
        if key in entries:
            raise ParseError(f"duplicate key '{key}'")
        try:
            entries[key] = json.loads(val)
        except ValueError:
            entries[key] = val  # bare word (family / kind names)
    return entries


def _take_number(entries: dict, key: str) -> float:
    v = entries.pop(key, None)
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ParseError(f"key '{key}' must be a number")
    return float(v)


def _take_list(entries: dict, key: str) -> list[float]:
    v = entries.pop(key, None)
    if not isinstance(v, list) or not v or not all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in v
    ):
        raise ParseError(f"key '{key}' must be a nonempty list of numbers")
    return [float(x) for x in v]


def _build_params(entries: dict, prefix: str) -> ParamSequence:
    kind_key = f"{prefix}.kind"
    kind = entries.pop(kind_key, None)
    if not isinstance(kind, str) or kind not in _PARAM_KINDS:
        raise ParseError(
            f"key '{kind_key}' must be one of {sorted(_PARAM_KINDS)}, got {kind!r}")
    if kind == "constant":
        return Constant(_take_number(entries, f"{prefix}.c"))
    if kind == "periodic":
        return Periodic(_take_list(entries, f"{prefix}.list"))
    if kind == "seeded-uniform":
        lo = _take_number(entries, f"{prefix}.lo")
        hi = _take_number(entries, f"{prefix}.hi")
        seed = entries.pop(f"{prefix}.seed", None)
        if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
            raise ParseError(f"key '{prefix}.seed' must be a nonnegative integer")
        return SeededUniform(lo, hi, seed)
    if kind == "block-doubling":
        return BlockDoubling(_take_number(entries, f"{prefix}.v1"),
                             _take_number(entries, f"{prefix}.v2"))
    return Explicit(_take_list(entries, f"{prefix}.list"),
                    _take_number(entries, f"{prefix}.tail"))


def parse_spec_file(path: str) -> MapSequence:
    """Build the map sequence declared by a system spec file."""
    entries = _parse_entries(path)
    family = entries.pop("family", None)
    if family == "logistic":
        params = _build_params(entries, "params")
        if "domain.lo" in entries or "domain.hi" in entries:
            lo = _take_number(entries, "domain.lo")
            hi = _take_number(entries, "domain.hi")
            if (lo, hi) != (0.0, 1.0):
                raise ParseError("key 'domain.lo': logistic domain is fixed to [0, 1]")
        seq = logistic(params)
    elif family == "affine":
        lo = _take_number(entries, "domain.lo")
        hi = _take_number(entries, "domain.hi")
        try:
            domain = Interval(lo, hi)
        except ValueError as exc:
            raise ParseError(f"key 'domain.lo': {exc}") from None
        slopes = _build_params(entries, "slopes")
        intercepts = _build_params(entries, "intercepts")
        seq = affine(slopes, intercepts, domain)
    else:
        raise ParseError(f"key 'family' must be 'logistic' or 'affine', got {family!r}")
    if entries:
        raise ParseError(f"unknown key '{sorted(entries)[0]}'")
    return seq


# ---------------------------------------------------------------------------
# Commands


@dataclass(frozen=True)
class RunConfig:
    """Validated options of one CLI invocation."""

    command: str
    spec_path: str | None
    x0: float
    horizon: int
    out_dir: str
    delta: float | None = None
    radius: float = 1e-3
    probes: int = 16
    eta: float = 0.01
    samples: int = 1000
    tail_fraction: float = 0.5
    seed: int = 0
    theorem: str = "T31"
    set_lo: float | None = None
    set_hi: float | None = None
    set_samples: tuple[float, ...] = ()
    delta_scan: int = 0

    def validate(self) -> None:
        if self.horizon < 1:
            raise ConfigError(f"--horizon must be >= 1, got {self.horizon}")
        if not 0.0 < self.tail_fraction < 1.0:
            raise ConfigError(f"--tail-fraction must be in (0, 1), got {self.tail_fraction}")
        if self.delta is not None and self.delta <= 0.0:
            raise ConfigError(f"--delta must be positive, got {self.delta}")
        if self.radius <= 0.0:
            raise ConfigError(f"--radius must be positive, got {self.radius}")
        if self.probes < 8:
            raise ConfigError(f"--probes must be >= 8, got {self.probes}")
        if self.eta <= 0.0:
            raise ConfigError(f"--eta must be positive, got {self.eta}")
        if self.samples < 10:
            raise ConfigError(f"--samples must be >= 10, got {self.samples}")
        if self.seed < 0:
            raise ConfigError(f"--seed must be nonnegative, got {self.seed}")
        if self.delta_scan < 0:
            raise ConfigError(f"--delta-scan must be nonnegative, got {self.delta_scan}")


def _out(config: RunConfig, name: str) -> str:
    return os.path.join(config.out_dir, name)


def _cmd_orbit(config: RunConfig) -> int:
    seq = parse_spec_file(config.spec_path)
    orbit = iterate_orbit(seq, config.x0, config.horizon)
    rows = zip(range(config.horizon + 1), orbit.points, orbit.log_deriv_sums)
    write_csv(_out(config, "orbit.csv"), ["n", "x_n", "S_n"], rows)
    return EXIT_OK


def _cmd_lyapunov(config: RunConfig) -> int:
    seq = parse_spec_file(config.spec_path)
    orbit = iterate_orbit(seq, config.x0, config.horizon)
    fts = finite_time_exponents(orbit)
    write_csv(_out(config, "exponents.csv"), ["n", "finite_time_exponent"],
              zip(range(1, config.horizon + 1), fts))
    est = estimate_exponents(orbit, config.tail_fraction)
    print(f"upper={fmt_float(est.upper)} lower={fmt_float(est.lower)} "
          f"converged={est.converged} tail_start={est.tail_start}")
    return EXIT_OK


def _sensitivity_json(report: sens.SensitivityReport, extra: dict | None = None) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "x0": report.x0,
        "delta": report.delta,
        "radius": report.radius,
        "horizon": report.horizon,
        "verdict": report.verdict,
        "probes": [
            {
                "y0": p.y0,
                "initial_gap": p.initial_gap,
                "escape_time": p.escape_time,
                "max_separation": p.max_separation,
            }
            for p in report.probes
        ],
    }
    if extra:
        doc.update(extra)
    return doc


def _write_separations_csv(config: RunConfig, seq: MapSequence,
                           report: sens.SensitivityReport) -> None:
    seps = [sens.probe_separation(seq, report.x0, p.y0, report.horizon)
            for p in report.probes]
    header = ["n"] + [f"sep_probe{i}" for i in range(len(seps))]
    rows = ((n, *(s[n] for s in seps)) for n in range(report.horizon + 1))
    write_csv(_out(config, "separations.csv"), header, rows)


def _cmd_sensitivity(config: RunConfig) -> int:
    seq = parse_spec_file(config.spec_path)
    delta = config.delta if config.delta is not None else sens.default_delta(seq.domain)
    report = sens.strong_sensitivity_test(
        seq, config.x0, delta, config.radius, config.probes, config.horizon)
    extra: dict = {}
    if config.delta_scan:
        scan = []
        for j in range(1, config.delta_scan + 1):
            d = seq.domain.width * 2.0 ** (-j)
            r = sens.strong_sensitivity_test(
                seq, config.x0, d, config.radius, config.probes, config.horizon)
            scan.append({"delta": d, "verdict": r.verdict})
        extra["delta_scan"] = scan
    write_json(_out(config, "sensitivity.json"), _sensitivity_json(report, extra))
    _write_separations_csv(config, seq, report)
    return EXIT_OK if report.verdict != sens.UNDETERMINED else EXIT_UNDETERMINED


def _certificate_json(outcome: stab.CertificationOutcome) -> dict:
    cert, ver, est = outcome.certificate, outcome.verification, outcome.exponents
    return {
        "schema_version": SCHEMA_VERSION,
        "certificate": {
            "lambda_upper": cert.lambda_upper,
            "lambda_lower": cert.lambda_lower,
            "epsilon0": cert.epsilon0,
            "lambda": cert.lam,
            "lambda_tilde": cert.lam_tilde,
            "second_derivative_bound": cert.second_deriv_bound,
            "c0": cert.c0,
            "eta": cert.eta,
            "d_eta": cert.d_eta,
            "delta": cert.delta,
        },
        "exponent_estimate": {
            "upper": est.upper,
            "lower": est.lower,
            "tail_start": est.tail_start,
            "horizon": est.horizon,
            "converged": est.converged,
            "oscillation": est.oscillation,
        },
        "verification": {
            "passed": ver.passed,
            "margin": ver.margin,
            "worst_y0": ver.worst_y0,
            "worst_step": ver.worst_step,
            "sample_count": ver.sample_count,
            "horizon": ver.horizon,
            "seed": ver.seed,
        },
        "retried": outcome.retried,
        "indeterminate": outcome.indeterminate,
    }


def _write_envelope_csv(config: RunConfig, seq: MapSequence,
                        outcome: stab.CertificationOutcome) -> None:
    cert, ver = outcome.certificate, outcome.verification
    base = iterate_orbit(seq, config.x0, ver.horizon)
    worst = iterate_orbit(seq, ver.worst_y0, ver.horizon)
    seps = np.abs(worst.points - base.points)
    steps = np.arange(ver.horizon + 1, dtype=np.float64)
    bounds = cert.eta * np.exp(cert.lam * steps)
    write_csv(_out(config, "envelope.csv"), ["n", "sep", "bound"],
              zip(range(ver.horizon + 1), seps, bounds))


def _cmd_stability(config: RunConfig) -> int:
    seq = parse_spec_file(config.spec_path)
    outcome = stab.certify_exponential_stability(
        seq, config.x0, config.eta,
        estimate_horizon=config.horizon,
        tail_fraction=config.tail_fraction,
        sample_count=config.samples,
        seed=config.seed,
    )
    write_json(_out(config, "certificate.json"), _certificate_json(outcome))
    _write_envelope_csv(config, seq, outcome)
    return EXIT_OK if outcome.verification.passed else EXIT_UNDETERMINED


def _cmd_hypotheses(config: RunConfig) -> int:
    seq = parse_spec_file(config.spec_path)
    kwargs: dict = {"horizon": config.horizon, "tail_fraction": config.tail_fraction}
    if config.theorem == "T32":
        if config.set_lo is None or config.set_hi is None or not config.set_samples:
            raise ConfigError("T32 needs --set-lo, --set-hi and --set-samples")
        report = check_theorem(
            seq, "T32",
            invariant_set=Interval(config.set_lo, config.set_hi),
            sample_points=config.set_samples, **kwargs)
    else:
        report = check_theorem(seq, config.theorem, x0=config.x0, **kwargs)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "theorem": report.theorem,
        "overall": report.overall,
        "checks": [
            {"name": c.name, "status": c.status, "value": c.value}
            for c in report.checks
        ],
    }
    if report.suggested_delta is not None:
        doc["suggested_delta"] = report.suggested_delta
    write_json(_out(config, "hypotheses.json"), doc)
    return EXIT_OK if report.overall != "fail" else EXIT_UNDETERMINED


# The two built-in reproduction scenarios: a periodic schedule with
# parameters in [2, 4] (expanding at the fixed point 0, strongly sensitive)
# and a seeded schedule in [0.5, 0.7] (0.7^2 < 0.5, so the exponent gap
# holds and 0 is exponentially asymptotically stable).
REPRO_SENSITIVE_CYCLE = (2.0, 3.0, 4.0)
REPRO_STABLE_BOUNDS = (0.5, 0.7)
REPRO_DELTA = 0.1
REPRO_RADIUS = 1e-3
REPRO_PROBES = 16
REPRO_SENS_HORIZON = 10_000
REPRO_ETA = 0.01
REPRO_SAMPLES = 1000
REPRO_ESTIMATE_HORIZON = 1 << 14


def _cmd_reproduce(config: RunConfig) -> int:
    sensitive_seq = logistic(Periodic(REPRO_SENSITIVE_CYCLE))
    report = sens.strong_sensitivity_test(
        sensitive_seq, 0.0, REPRO_DELTA, REPRO_RADIUS, REPRO_PROBES,
        REPRO_SENS_HORIZON)
    orbit = iterate_orbit(sensitive_seq, 0.0, REPRO_SENS_HORIZON)
    est = estimate_exponents(orbit)
    expected = (math.log(2.0) + math.log(3.0) + math.log(4.0)) / 3.0
    write_json(_out(config, "sensitivity.json"), _sensitivity_json(report))

    stable_seq = logistic(SeededUniform(*REPRO_STABLE_BOUNDS, seed=config.seed))
    outcome = stab.certify_exponential_stability(
        stable_seq, 0.0, REPRO_ETA,
        estimate_horizon=REPRO_ESTIMATE_HORIZON,
        sample_count=REPRO_SAMPLES,
        seed=config.seed + 1,
    )
    write_json(_out(config, "certificate.json"), _certificate_json(outcome))

    summary = {
        "schema_version": SCHEMA_VERSION,
        "sensitive_regime": {
            "parameter_cycle": list(REPRO_SENSITIVE_CYCLE),
            "x0": 0.0,
            "delta": REPRO_DELTA,
            "horizon": REPRO_SENS_HORIZON,
            "verdict": report.verdict,
            "probes_escaped": sum(p.escape_time is not None for p in report.probes),
            "probe_count": len(report.probes),
            "exponent_upper": est.upper,
            "exponent_expected": expected,
            "exponent_abs_error": abs(est.upper - expected),
        },
        "stable_regime": {
            "parameter_bounds": list(REPRO_STABLE_BOUNDS),
            "parameter_seed": config.seed,
            "x0": 0.0,
            "eta": REPRO_ETA,
            "verdict": "pass" if outcome.verification.passed else "fail",
            "margin": outcome.verification.margin,
            "delta": outcome.certificate.delta,
            "retried": outcome.retried,
        },
    }
    write_json(_out(config, "paper_repro.json"), summary)
    ok = report.verdict == sens.STRONGLY_SENSITIVE and outcome.verification.passed
    return EXIT_OK if ok else EXIT_UNDETERMINED


_COMMANDS = {
    "orbit": _cmd_orbit,
    "lyapunov": _cmd_lyapunov,
    "sensitivity": _cmd_sensitivity,
    "stability": _cmd_stability,
    "hypotheses": _cmd_hypotheses,
    "reproduce-paper": _cmd_reproduce,
}


def _add_common(parser: argparse.ArgumentParser, horizon_default: int,
                needs_spec: bool = True) -> None:
    if needs_spec:
        parser.add_argument("--spec", required=True, help="system spec file")
        parser.add_argument("--x0", type=float, default=0.0, help="initial state")
        parser.add_argument("--horizon", type=int, default=horizon_default,
                            help="number of iteration steps")
    parser.add_argument("--out", default=".", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nads-lab",
        description="Numerical experiments for non-autonomous interval dynamics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("orbit", help="iterate an orbit and write orbit.csv")
    _add_common(p, 1000)

    p = sub.add_parser("lyapunov", help="finite-time exponents to exponents.csv")
    _add_common(p, 10_000)
    p.add_argument("--tail-fraction", type=float, default=0.5)

    p = sub.add_parser("sensitivity", help="strong-sensitivity probe test")
    _add_common(p, 10_000)
    p.add_argument("--delta", type=float, default=None,
                   help="separation threshold (default: domain width / 20)")
    p.add_argument("--radius", type=float, default=1e-3)
    p.add_argument("--probes", type=int, default=16)
    p.add_argument("--delta-scan", type=int, default=0,
                   help="additionally scan thresholds width/2^j for j=1..N")

    p = sub.add_parser("stability", help="build and verify a stability certificate")
    _add_common(p, 1 << 14)
    p.add_argument("--eta", type=float, default=0.01)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--tail-fraction", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0, help="seed for envelope sampling")

    p = sub.add_parser("hypotheses", help="check the assumptions of one theorem")
    _add_common(p, 10_000)
    p.add_argument("--theorem", choices=["T31", "T32", "T41"], default="T31")
    p.add_argument("--set-lo", type=float, default=None)
    p.add_argument("--set-hi", type=float, default=None)
    p.add_argument("--set-samples", type=str, default="",
                   help="comma-separated sample points for T32")
    p.add_argument("--tail-fraction", type=float, default=0.5)

    p = sub.add_parser("reproduce-paper",
                       help="run both built-in scenarios and write paper_repro.json")
    _add_common(p, 0, needs_spec=False)
    p.add_argument("--seed", type=int, default=1,
                   help="seed of the stable regime's parameter schedule")

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    set_samples: tuple[float, ...] = ()
    raw = getattr(args, "set_samples", "")
    if raw:
        try:
            set_samples = tuple(float(v) for v in raw.split(","))
        except ValueError:
            raise ConfigError(f"--set-samples must be comma-separated numbers, got {raw!r}")
    return RunConfig(
        command=args.command,
        spec_path=getattr(args, "spec", None),
        x0=getattr(args, "x0", 0.0),
        horizon=getattr(args, "horizon", 1000),
        out_dir=args.out,
        delta=getattr(args, "delta", None),
        radius=getattr(args, "radius", 1e-3),
        probes=getattr(args, "probes", 16),
        eta=getattr(args, "eta", 0.01),
        samples=getattr(args, "samples", 1000),
        tail_fraction=getattr(args, "tail_fraction", 0.5),
        seed=getattr(args, "seed", 0),
        theorem=getattr(args, "theorem", "T31"),
        set_lo=getattr(args, "set_lo", None),
        set_hi=getattr(args, "set_hi", None),
        set_samples=set_samples,
        delta_scan=getattr(args, "delta_scan", 0),
    )


def run(config: RunConfig) -> int:
    """Execute one validated command; returns the process exit code."""
    config.validate()
    os.makedirs(config.out_dir, exist_ok=True)
    return _COMMANDS[config.command](config)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse rejected the options (or --help)
        return EXIT_OK if exc.code in (0, None) else EXIT_ERROR
    try:
        return run(_config_from_args(args))
    except (NadsLabError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


def console_main() -> None:
    sys.exit(main())
