"""Experiment runner and command line for certified shear-map runs.

One key=value configuration drives everything: the rotation number,
the exponent schedule, the recurrence ladder, the orbit and
derivative sweeps, and the report figures.  Every emitted CSV/JSON
byte is a function of the configuration alone, so identical configs
give identical artifacts; every pass/fail decision routes through a
certified one-sided bound.

Exit codes: 0 all certified checks passed, 1 a certified check
failed, 2 configuration or usage error, 3 precision or search
exhausted.
"""

import argparse
import dataclasses
import hashlib
import json
import os
import random
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import gmpy2
from gmpy2 import mpfr

from . import __version__, config, svg
from .automorphism import Point2, ShearAuto, iterate_closed
from .cfrac import ContinuedFraction, GrowthRule, build_fast_theta
from .constructions import (
    MuCertificate,
    RecurrenceSchedule,
    activation_times,
    build_mu,
    build_recurrence,
    derivative_records,
    verify_mu,
    verify_recurrence,
)
from .errors import (
    CertificationError,
    EnclosureTooWide,
    GapViolation,
    OverflowBudget,
    PrecisionExhausted,
    SearchExhausted,
    StreamExhausted,
    TailNotCertifiable,
)
from .exactarith import (
    CertifiedComplex,
    bump_down,
    bump_up,
    decimal_str,
    fraction_from_mpfr,
)
from .lacunary import (
    CoefficientSeq,
    ExponentSubseq,
    eval_phi,
    eval_phi_prime,
    term_table_csv,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_EXHAUSTED = 3

CONFIG_ENV = "ORBITLAB_CONFIG"

_SIG = 17


class ConfigError(ValueError):
    """A run configuration that cannot be acted on."""


# ---------------------------------------------------------------------------
# run configuration
# ---------------------------------------------------------------------------

def _parse_int(s):
    return int(s)


def _parse_frac(s):
    return Fraction(s)


def _parse_str(s):
    return s


def _parse_ints(s):
    s = s.strip()
    return tuple(int(t) for t in s.split(",")) if s else ()


def _parse_fracs(s):
    s = s.strip()
    return tuple(Fraction(t) for t in s.split(",")) if s else ()


def _parse_groups(s, width):
    s = s.strip()
    if not s:
        return ()
    out = []
    for group in s.split(";"):
        parts = [Fraction(t) for t in group.split(",")]
        if len(parts) != width:
            raise ConfigError(
                f"expected {width} comma-separated rationals per group, "
                f"got {group.strip()!r}")
        out.append(tuple(parts))
    return tuple(out)


def _fmt_scalar(v):
    return str(v)


def _fmt_seq(v):
    return ",".join(str(t) for t in v)


def _fmt_groups(v):
    return ";".join(",".join(str(t) for t in g) for g in v)


@dataclass(frozen=True)
class RunConfig:
    """All knobs of a run; the single source of truth for its artifacts.

    ``points`` are (w_re, w_im, z_re, z_im) rational quadruples with
    |z| inside the declared ``z_band``; ``interior_z`` are real
    rational control points inside the unit disk.  ``quotients``, when
    nonempty, replaces the growth-rule angle with an explicit table.
    """

    precision_bits: int = 240
    growth_table: tuple = ()
    growth_offset: int = 1
    soft_levels: int = 2
    quotients: tuple = ()
    truncation: int = 2
    stages: int = 3
    eps_base: Fraction = Fraction(1)
    eps_factor: Fraction = Fraction(1, 2)
    points: tuple = ((Fraction(1), Fraction(0), Fraction(3, 2), Fraction(0)),
                     (Fraction(0), Fraction(0), Fraction(0), Fraction(7, 4)))
    interior_z: tuple = (Fraction(1, 2),)
    z_band: tuple = (Fraction(1), Fraction(2))
    mu_exponents: tuple = (2, 8, 32)
    sweep_level: int = 2
    sweep_count: int = 20
    probe_cap: int = 64
    series_samples: int = 3
    seed: int = 0
    out_dir: str = "runs/default"

    def validate(self):
        for name in ("precision_bits", "growth_offset", "soft_levels",
                     "truncation", "stages", "sweep_level", "sweep_count",
                     "probe_cap"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.series_samples < 0 or self.seed < 0:
            raise ConfigError("series_samples and seed must be >= 0")
        if self.eps_base <= 0 or not (0 < self.eps_factor < 1):
            raise ConfigError("need eps_base > 0 and 0 < eps_factor < 1")
        lo, hi = self.z_band
        if not (0 < lo < hi):
            raise ConfigError("z_band must satisfy 0 < lo < hi")
        for quad in self.points:
            zsq = quad[2] ** 2 + quad[3] ** 2
            if not (lo ** 2 < zsq <= hi ** 2):
                raise ConfigError(
                    f"point {_fmt_groups([quad])} leaves the |z| band "
                    f"({lo}, {hi}]")
        for z in self.interior_z:
            if not (0 <= z ** 2 < 1):
                raise ConfigError(f"interior point {z} is not inside the "
                                  f"unit disk")
        if self.quotients:
            if self.quotients[0] < 0:
                raise ConfigError("quotient a_0 must be >= 0")
            for i, a in enumerate(self.quotients[1:], 1):
                if a < 1:
                    raise ConfigError(f"quotient a_{i} = {a} must be >= 1")
        for a, b in zip(self.mu_exponents, self.mu_exponents[1:]):
            if b <= a:
                raise ConfigError("mu_exponents must increase strictly")
        if self.mu_exponents and self.mu_exponents[0] < 1:
            raise ConfigError("mu_exponents must be positive")


_FIELDS = {
    "precision_bits": (_parse_int, _fmt_scalar),
    "growth_table": (_parse_fracs, _fmt_seq),
    "growth_offset": (_parse_int, _fmt_scalar),
    "soft_levels": (_parse_int, _fmt_scalar),
    "quotients": (_parse_ints, _fmt_seq),
    "truncation": (_parse_int, _fmt_scalar),
    "stages": (_parse_int, _fmt_scalar),
    "eps_base": (_parse_frac, _fmt_scalar),
    "eps_factor": (_parse_frac, _fmt_scalar),
    "points": (lambda s: _parse_groups(s, 4), _fmt_groups),
    "interior_z": (_parse_fracs, _fmt_seq),
    "z_band": (lambda s: tuple(_parse_fracs(s)), _fmt_seq),
    "mu_exponents": (_parse_ints, _fmt_seq),
    "sweep_level": (_parse_int, _fmt_scalar),
    "sweep_count": (_parse_int, _fmt_scalar),
    "probe_cap": (_parse_int, _fmt_scalar),
    "series_samples": (_parse_int, _fmt_scalar),
    "seed": (_parse_int, _fmt_scalar),
    "out_dir": (_parse_str, _fmt_scalar),
}


def _apply_assignment(values: dict, line: str, where: str):
    if "=" not in line:
        raise ConfigError(f"{where}: expected key=value, got {line!r}")
    key, _, raw = line.partition("=")
    key, raw = key.strip(), raw.strip()
    if key not in _FIELDS:
        raise ConfigError(f"{where}: unknown configuration key {key!r}")
    parse, _ = _FIELDS[key]
    try:
        values[key] = parse(raw)
    except ConfigError:
        raise
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"{where}: bad value for {key}: {exc}")


def load_config(path: Optional[str], sets=()) -> RunConfig:
    """Defaults, then the config file (if any), then --set overrides."""
    values = {}
    if path:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}")
        for i, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            _apply_assignment(values, line, f"{path}:{i}")
    for s in sets:
        _apply_assignment(values, s, "--set")
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


def config_show(cfg: RunConfig) -> str:
    lines = []
    for f in dataclasses.fields(RunConfig):
        _, fmt = _FIELDS[f.name]
        lines.append(f"{f.name} = {fmt(getattr(cfg, f.name))}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# shared assembly
# ---------------------------------------------------------------------------

def build_theta(cfg: RunConfig) -> ContinuedFraction:
    if cfg.quotients:
        return ContinuedFraction(list(cfg.quotients))
    rule = GrowthRule(table=cfg.growth_table,
                      func=lambda n: n + cfg.growth_offset)
    cf = build_fast_theta(rule, n_max=3, seeds=(0, 2))
    cf.extend_soft(cfg.soft_levels)
    return cf


def stage_budgets(cfg: RunConfig):
    return [cfg.eps_base * cfg.eps_factor ** p
            for p in range(1, cfg.stages + 1)]


def build_schedule(cfg: RunConfig, theta: ContinuedFraction):
    return build_recurrence(theta, stage_budgets(cfg), cfg.stages)


def shear_map(cfg: RunConfig, theta, sched) -> ShearAuto:
    seq = sched.qprime
    if cfg.truncation >= len(seq):
        raise ConfigError(
            f"truncation {cfg.truncation} exceeds the {len(seq)} exact "
            f"schedule rows")
    return ShearAuto(theta, seq, CoefficientSeq.ones(), cfg.truncation,
                     precision=cfg.precision_bits)


def _outdir(cfg: RunConfig) -> str:
    os.makedirs(cfg.out_dir, exist_ok=True)
    return cfg.out_dir


def _write_text(cfg: RunConfig, name: str, text: str) -> str:
    path = os.path.join(_outdir(cfg), name)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return path


def _csv_header(columns) -> str:
    return (f"# precision_bits={config.get().precision_bits}"
            f",sig_digits={_SIG}\n" + ",".join(columns) + "\n")


def _record_result(cfg: RunConfig, name: str, summary: dict):
    path = os.path.join(_outdir(cfg), "results.json")
    data = {}
    if os.path.exists(path):
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    data[name] = summary
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(data, sort_keys=True, separators=(",", ":")))
        fh.write("\n")


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _log10e_up() -> mpfr:
    return bump_up(1 / gmpy2.log(mpfr(10)), 2)


# ---------------------------------------------------------------------------
# theta report
# ---------------------------------------------------------------------------

def _growth_check_exact(theta, n: int, rate: Fraction) -> bool:
    """Certified q_{n+1} >= e^(rate * q_n), decided on big integers.

    The generated levels sit within a few parts in 10^170 of the floor,
    so the comparison runs at a locally raised precision and rounds the
    exponential up before the exact integer comparison.
    """
    t = rate * theta.q(n)
    with config.working_precision(max(config.get().precision_bits, 800)):
        e_up = bump_up(gmpy2.exp(bump_up(mpfr(t), 2)), 2)
        return Fraction(theta.q(n + 1)) >= fraction_from_mpfr(e_up)


def cmd_theta(cfg: RunConfig) -> int:
    theta = build_theta(cfg)
    depth = theta.depth_exact
    rule_mode = not cfg.quotients

    rows = [f"{n},{theta.quotient(n)},{theta.p(n)},{theta.q(n)}"
            for n in range(depth + 1)]
    _write_text(cfg, "convergents.csv",
                _csv_header(["n", "quotient", "p_num", "q_den"])
                + "\n".join(rows) + "\n")

    growth = []
    all_ok = True
    for n in range(1, depth):
        rate = (Fraction(n + cfg.growth_offset) if rule_mode
                else Fraction(1))
        ok = _growth_check_exact(theta, n, rate)
        all_ok = all_ok and ok
        growth.append({"level": n, "rate": str(rate), "ok": ok})

    soft = []
    for n in range(depth + 1, depth + 1 + (cfg.soft_levels if rule_mode
                                           else 0)):
        lo, hi = theta.log10_q(n)
        soft.append({
            "level": n,
            "kind": theta.level_kind(n),
            "log10_lo": decimal_str(lo, _SIG),
            "log10_hi": None if hi is None else decimal_str(hi, _SIG),
        })

    br = theta.brjuno_sum(depth - 1)
    report = {
        "kind": "rule" if rule_mode else "table",
        "depth_exact": depth,
        "quotients": [str(theta.quotient(n)) for n in range(depth + 1)],
        "growth": growth,
        "growth_ok": all_ok,
        "soft": soft,
        "brjuno": {
            "n_max": br.n_max,
            "partial_lo": str(br.partial.lo),
            "partial_hi": str(br.partial.hi),
            "diverges": br.diverges,
        },
    }
    _write_text(cfg, "theta.json",
                json.dumps(report, sort_keys=True, separators=(",", ":"))
                + "\n")
    _record_result(cfg, "theta", {"pass": all_ok, "depth_exact": depth})
    print(f"theta: depth_exact={depth} growth_check="
          f"{'pass' if all_ok else 'FAIL'}")
    return EXIT_OK if all_ok else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# recurrence schedule
# ---------------------------------------------------------------------------

def _qprime_cell(sched, n: int) -> str:
    ex = sched.row_exponent(n)
    if ex is not None:
        return str(ex)
    row = sched.virtual_rows[n - len(sched.qprime)]
    return f"virtual:log10>={decimal_str(row.log10_lo, _SIG)}"


def cmd_recurrence(cfg: RunConfig) -> int:
    theta = build_theta(cfg)
    try:
        sched = build_schedule(cfg, theta)
    except SearchExhausted as exc:
        msg = str(exc)
        label = "(ii)" if ("closeness" in msg or "virtual" in msg) else "(iv)"
        print(f"recurrence: search exhausted at condition {label}: {exc}",
              file=sys.stderr)
        return EXIT_EXHAUSTED
    except ValueError as exc:
        if "2N" in str(exc):
            print(f"recurrence: condition (iii) violated: {exc}",
                  file=sys.stderr)
            return EXIT_EXHAUSTED
        raise
    _write_text(cfg, "schedule.json", sched.to_json() + "\n")

    lines = []
    all_pass = True
    for M in (cfg.truncation, cfg.truncation + 2):
        for p in range(cfg.stages + 1):
            chk = verify_recurrence(theta, sched, p, M)
            all_pass = all_pass and chk.passes
            eps_cell = "" if chk.eps is None else str(chk.eps)
            lines.append(
                f"{p},{M},{sched.Ns[p]},{_qprime_cell(sched, p)},"
                f"{eps_cell},{decimal_str(mpfr(chk.bound), _SIG)},"
                f"{'true' if chk.passes else 'false'}")
    _write_text(cfg, "verification.csv",
                _csv_header(["p", "M", "N", "qprime", "eps", "bound",
                             "passes"]) + "\n".join(lines) + "\n")
    _record_result(cfg, "recurrence",
                   {"pass": all_pass, "stages": cfg.stages})
    print(f"recurrence: stages=0..{cfg.stages} "
          f"{'pass' if all_pass else 'FAIL'}")
    return EXIT_OK if all_pass else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# orbit sweep
# ---------------------------------------------------------------------------

def _point_dist_upper(a: Point2, b: Point2) -> mpfr:
    return max((a.w - b.w).abs_upper(), (a.z - b.z).abs_upper())


def _recurrence_rhs_down(quad, eps: Fraction) -> mpfr:
    """Lower bound on (max(|w|,|z|) + |z| sup|u|) eps for a rational point."""
    wsq = quad[0] ** 2 + quad[1] ** 2
    zsq = quad[2] ** 2 + quad[3] ** 2
    norm = bump_down(gmpy2.sqrt(mpfr(max(wsq, zsq))), 2)
    zabs = bump_down(gmpy2.sqrt(mpfr(zsq)), 2)
    return bump_down((norm + zabs) * mpfr(eps), 2)


def cmd_orbit(cfg: RunConfig) -> int:
    theta = build_theta(cfg)
    sched = build_schedule(cfg, theta)
    A = shear_map(cfg, theta, sched)
    budgets = stage_budgets(cfg)
    stage_of = {int(N): p for p, N in enumerate(sched.Ns) if p >= 1}
    n_list = sorted(set(range(1, 6)) | set(stage_of))

    lines = []
    all_ok = True

    def sweep(label, quad, Ns, check_recurrence):
        nonlocal all_ok
        start = Point2.from_rationals(*quad)
        sup = start.max_norm_upper()
        for step, N in enumerate(Ns):
            try:
                out = iterate_closed(A, start, N)
            except TailNotCertifiable:
                lines.append(",".join([label, str(step), str(N)]
                                      + [""] * 9 + ["tail-not-certifiable"]))
                continue
            sup = max(sup, out.max_norm_upper())
            dist = _point_dist_upper(out, start)
            err = max(out.w.err, out.z.err)
            eps_cell, ok_cell = "", ""
            if check_recurrence and N in stage_of:
                p = stage_of[N]
                rhs = _recurrence_rhs_down(quad, budgets[p - 1])
                ok = dist <= rhs
                all_ok = all_ok and ok
                eps_cell, ok_cell = str(p), "true" if ok else "false"
            if label == "origin":
                # fixed point: the enclosure must keep containing it
                ok = out.contains_exact(*quad)
                all_ok = all_ok and ok
                ok_cell = "true" if ok else "false"
            lines.append(
                f"{label},{step},{N},"
                f"{decimal_str(out.w.mid.real, _SIG)},"
                f"{decimal_str(out.w.mid.imag, _SIG)},"
                f"{decimal_str(out.z.mid.real, _SIG)},"
                f"{decimal_str(out.z.mid.imag, _SIG)},"
                f"{decimal_str(err, _SIG)},{decimal_str(dist, _SIG)},"
                f"{decimal_str(sup, _SIG)},{eps_cell},{ok_cell},ok")

    sweep("origin", (Fraction(0),) * 4, range(1, 6), False)
    for i, z in enumerate(cfg.interior_z):
        sweep(f"interior{i}", (Fraction(0), Fraction(0), z, Fraction(0)),
              range(1, 6), False)
    for i, quad in enumerate(cfg.points):
        sweep(f"outer{i}", quad, n_list, True)

    _write_text(cfg, "trajectory.csv",
                _csv_header(["point", "step", "N", "re_w", "im_w", "re_z",
                             "im_z", "err", "dist_to_start", "sup_so_far",
                             "eps_stage", "recur_ok", "status"])
                + "\n".join(lines) + "\n")
    _record_result(cfg, "orbit", {"pass": all_ok, "rows": len(lines)})
    print(f"orbit: {len(lines)} rows {'pass' if all_ok else 'FAIL'}")
    return EXIT_OK if all_ok else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# derivative growth probe
# ---------------------------------------------------------------------------

def cmd_derivative_probe(cfg: RunConfig) -> int:
    theta = build_theta(cfg)
    sched = build_schedule(cfg, theta)
    seq = sched.qprime
    ones = CoefficientSeq.ones()
    M = cfg.truncation
    if M >= len(seq):
        raise ConfigError("truncation exceeds the exact schedule rows")
    times = activation_times(theta, cfg.sweep_level,
                             min(cfg.sweep_count, cfg.probe_cap))

    lines = []
    targets = {}
    all_ok = True
    with config.working_precision(cfg.precision_bits):
        controls = [("origin", CertifiedComplex.zero())]
        controls += [(f"interior{i}",
                      CertifiedComplex.from_rationals(z))
                     for i, z in enumerate(cfg.interior_z)]
        for label, z in controls:
            for N in range(1, 6):
                v = eval_phi_prime(theta, seq, ones, z, M, N=N).value
                lines.append(f"{label},{N},"
                             f"{decimal_str(v.abs_lower(), _SIG)},"
                             f"{decimal_str(v.abs_upper(), _SIG)},false")
        for i, quad in enumerate(cfg.points):
            label = f"outer{i}"
            z = CertifiedComplex.from_rationals(quad[2], quad[3])
            base_up = eval_phi_prime(theta, seq, ones, z, M,
                                     N=1).value.abs_upper()
            samples, records = derivative_records(theta, seq, ones, z, M,
                                                  times)
            record_ns = {N for N, _ in records}
            for N, lo, hi in samples:
                flag = "true" if N in record_ns else "false"
                lines.append(f"{label},{N},{decimal_str(lo, _SIG)},"
                             f"{decimal_str(hi, _SIG)},{flag}")
            best_n, best_lo = records[-1] if records else (None, mpfr(0))
            ok = (len(records) >= 5
                  and bool(best_lo >= 1000 * base_up))
            all_ok = all_ok and ok
            targets[label] = {
                "growth_certified": ok,
                "records": len(records),
                "max_lower": decimal_str(best_lo, _SIG),
                "argmax_N": str(best_n),
                "baseline_upper": decimal_str(base_up, _SIG),
            }

    _write_text(cfg, "derivative.csv",
                _csv_header(["point", "N", "lower", "upper", "is_record"])
                + "\n".join(lines) + "\n")
    _record_result(cfg, "derivative", {"pass": all_ok, "targets": targets})
    print(f"derivative-probe: {len(cfg.points)} outer points "
          f"{'target reached' if all_ok else 'target not reached'}")
    return EXIT_OK if all_ok else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# angle pinning
# ---------------------------------------------------------------------------

def cmd_mu(cfg: RunConfig) -> int:
    try:
        seq = ExponentSubseq.detached(list(cfg.mu_exponents))
        cert = build_mu(seq)
    except GapViolation as exc:
        raise ConfigError(f"mu_exponents growth too slow: {exc}")
    _write_text(cfg, "mu.json", cert.to_json() + "\n")

    boundary = set(cert.boundary_levels())
    lines = []
    all_ok = True
    for n, q in enumerate(cert.qpp.exponents()):
        enc = verify_mu(cert, n)
        ok = enc.lo ** 2 >= 2
        all_ok = all_ok and ok
        lines.append(f"{n},{q},{decimal_str(mpfr(enc.lo), _SIG)},"
                     f"{'true' if ok else 'false'},"
                     f"{'true' if n in boundary else 'false'}")
    _write_text(cfg, "mu_verification.csv",
                _csv_header(["level", "exponent", "divisor_lower",
                             "lower_sq_ge_2", "boundary"])
                + "\n".join(lines) + "\n")
    _record_result(cfg, "mu", {"pass": all_ok,
                               "boundary_levels": sorted(boundary)})
    print(f"mu: {len(lines)} levels {'pass' if all_ok else 'FAIL'}")
    return EXIT_OK if all_ok else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# series table
# ---------------------------------------------------------------------------

def cmd_series(cfg: RunConfig) -> int:
    theta = build_theta(cfg)
    sched = build_schedule(cfg, theta)
    seq = sched.qprime
    ones = CoefficientSeq.ones()
    M = cfg.truncation
    if M >= len(seq):
        raise ConfigError("truncation exceeds the exact schedule rows")

    samples = [("outer", quad[2], quad[3]) for quad in cfg.points]
    samples += [("interior", z, Fraction(0)) for z in cfg.interior_z]
    rng = random.Random(cfg.seed)
    for _ in range(cfg.series_samples):
        samples.append(("random",
                        Fraction(rng.randint(-45, 45), 100),
                        Fraction(rng.randint(-45, 45), 100)))

    lines = []
    with config.working_precision(cfg.precision_bits):
        for kind, re, im in samples:
            z = CertifiedComplex.from_rationals(re, im)
            sv = eval_phi(theta, seq, ones, z, M, N=1)
            v = sv.value
            lines.append(
                f"{kind},{re},{im},{M},"
                f"{decimal_str(v.mid.real, _SIG)},"
                f"{decimal_str(v.mid.imag, _SIG)},"
                f"{decimal_str(v.err, _SIG)},{sv.truncation_index},"
                f"{decimal_str(sv.tail_bound, _SIG)}")
        terms = term_table_csv(theta, seq, ones, cfg.z_band[0], M)

    _write_text(cfg, "series.csv",
                _csv_header(["kind", "z_re", "z_im", "M", "phi_re",
                             "phi_im", "err", "trunc_index", "tail_bound"])
                + "\n".join(lines) + "\n")
    _write_text(cfg, "terms.csv", terms)
    _record_result(cfg, "series", {"pass": True, "rows": len(lines)})
    print(f"series: {len(lines)} certified evaluations")
    return EXIT_OK


# ---------------------------------------------------------------------------
# report and manifest
# ---------------------------------------------------------------------------

def _read_csv(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        rows = [ln.rstrip("\n") for ln in fh if not ln.startswith("#")]
    header = rows[0].split(",")
    return [dict(zip(header, r.split(","))) for r in rows[1:]]


def _log10_or_none(cell: str):
    try:
        v = mpfr(cell)
    except ValueError:
        return None
    if not v > 0:
        return None
    return float(gmpy2.log10(v))


def cmd_report(cfg: RunConfig, check_only: bool = False) -> int:
    out = _outdir(cfg)
    manifest_path = os.path.join(out, "manifest.json")

    if check_only:
        if not os.path.exists(manifest_path):
            print("report: no manifest to check", file=sys.stderr)
            return EXIT_USAGE
        with open(manifest_path, "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
        bad = []
        for name, digest in manifest.get("files", {}).items():
            path = os.path.join(out, name)
            if not os.path.exists(path) or _sha256(path) != digest:
                bad.append(name)
        if bad:
            print("report: digest mismatch: " + ", ".join(sorted(bad)))
            return EXIT_CHECK_FAILED
        print(f"report: {len(manifest.get('files', {}))} digests ok")
        return EXIT_OK

    needed = ["trajectory.csv", "verification.csv", "derivative.csv",
              "results.json"]
    missing = [n for n in needed if not os.path.exists(os.path.join(out, n))]
    if missing:
        print("report: missing input: " + ", ".join(missing),
              file=sys.stderr)
        return EXIT_USAGE

    traj = _read_csv(os.path.join(out, "trajectory.csv"))
    deriv = _read_csv(os.path.join(out, "derivative.csv"))

    fig = svg.Figure("orbit of the w coordinate", "Re w", "Im w")
    fig.scatter([(float(r["re_w"]), float(r["im_w"]))
                 for r in traj if r["status"] == "ok"])
    _write_text(cfg, "orbit_w.svg", fig.render())

    fig = svg.Figure("certified return distance per stage", "stage p",
                     "log10(dist to start)")
    pts, eps_line = [], []
    for r in traj:
        if r.get("eps_stage"):
            d = _log10_or_none(r["dist_to_start"])
            if d is not None:
                pts.append((int(r["eps_stage"]), d))
    for p, eps in enumerate(stage_budgets(cfg), 1):
        eps_line.append((p, float(gmpy2.log10(mpfr(eps)))))
    fig.scatter(pts)
    fig.line(eps_line)
    _write_text(cfg, "recurrence_dist.svg", fig.render())

    fig = svg.Figure("derivative record growth", "iterate N",
                     "certified lower bound", log_x=True, log_y=True)
    grow = [(float(r["N"]), float(r["lower"])) for r in deriv
            if r["point"].startswith("outer") and float(r["lower"]) > 0]
    recs = [(float(r["N"]), float(r["lower"])) for r in deriv
            if r["is_record"] == "true" and float(r["lower"]) > 0]
    fig.scatter(grow)
    fig.line(sorted(recs))
    _write_text(cfg, "derivative_growth.svg", fig.render())

    with open(os.path.join(out, "results.json"), "r",
              encoding="utf-8") as fh:
        results = json.load(fh)

    files = {}
    for name in sorted(os.listdir(out)):
        if name == "manifest.json" or not name.endswith(
                (".csv", ".json", ".svg")):
            continue
        files[name] = _sha256(os.path.join(out, name))
    manifest = {
        "version": __version__,
        "config": {f.name: _FIELDS[f.name][1](getattr(cfg, f.name))
                   for f in dataclasses.fields(RunConfig)},
        "experiments": results,
        "files": files,
    }
    with open(manifest_path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(manifest, sort_keys=True,
                            separators=(",", ":")))
        fh.write("\n")

    all_pass = all(v.get("pass", False) for v in results.values())
    for name in sorted(results):
        print(f"{name}: {'pass' if results[name].get('pass') else 'FAIL'}")
    print(f"report: manifest covers {len(files)} files")
    return EXIT_OK if all_pass else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="orbitlab",
        description="certified experiments on shear automorphisms of C^2")
    ap.add_argument("--config", metavar="PATH",
                    help=f"configuration file (default: ${CONFIG_ENV})")
    ap.add_argument("--set", metavar="KEY=VALUE", action="append",
                    default=[], help="override one configuration key")
    ap.add_argument("--out", metavar="DIR",
                    help="override the output directory")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("theta", help="rotation-number report")
    sub.add_parser("orbit", help="certified trajectory sweep")
    sub.add_parser("recurrence", help="build and verify the return schedule")
    sub.add_parser("mu", help="off-resonance angle certificate")
    sub.add_parser("derivative-probe", help="derivative growth sweep")
    sub.add_parser("series", help="certified twist-series table")
    rep = sub.add_parser("report", help="figures and digest manifest")
    rep.add_argument("--check", action="store_true",
                     help="verify digests of an existing manifest")
    cfgp = sub.add_parser("config", help="configuration tools")
    cfgp.add_argument("action", choices=["show"])
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config or os.environ.get(CONFIG_ENV),
                          args.set)
        if args.out:
            cfg = dataclasses.replace(cfg, out_dir=args.out)

        if args.command == "config":
            sys.stdout.write(config_show(cfg))
            return EXIT_OK
        with config.working_precision(cfg.precision_bits):
            if args.command == "theta":
                return cmd_theta(cfg)
            if args.command == "recurrence":
                return cmd_recurrence(cfg)
            if args.command == "orbit":
                return cmd_orbit(cfg)
            if args.command == "derivative-probe":
                return cmd_derivative_probe(cfg)
            if args.command == "mu":
                return cmd_mu(cfg)
            if args.command == "series":
                return cmd_series(cfg)
            if args.command == "report":
                return cmd_report(cfg, check_only=args.check)
        raise AssertionError(f"unhandled command {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SearchExhausted, PrecisionExhausted, StreamExhausted,
            OverflowBudget, EnclosureTooWide, TailNotCertifiable,
            CertificationError) as exc:
        print(f"exhausted: {exc}", file=sys.stderr)
        return EXIT_EXHAUSTED


if __name__ == "__main__":
    sys.exit(main())
