"""Command-line front end.

Subcommands: ``certify``, ``sequences``, ``identities`` and ``converge``.
Options may come from a ``key=value`` config file (``--config``); flags
given on the command line override it. Exit status is 0 when every check
passes, 1 when any check fails and 2 on configuration errors.
"""
from __future__ import annotations

import argparse
import dataclasses
import datetime as _dt
import os
import sys
import tempfile
import time
from dataclasses import dataclass

from .assembly import COMPLIANCE_FORMULAS, Material

__all__ = ["RunConfig", "ConfigError", "main", "run", "parse_config_text"]

COMMANDS = ("certify", "sequences", "identities", "converge")
FORMATS = ("pretty", "csv")
CONVERGE_FAMILIES = ("2d-bdm", "2d-simplified", "3d")
RATE_BANDS = {"2d-bdm": (0.85, 1.15), "2d-simplified": (0.85, 1.15), "3d": (0.7, 1.3)}
GATED_RATES = ("rate_sigma_hdiv", "rate_u_l2", "rate_gamma_l2")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    family: str = None
    dim: int = None
    levels: int = None
    mu: float = 1.0
    lam: float = 1.0
    compliance: str = "planar"
    out: str = None
    format: str = "pretty"
    timestamp: bool = True

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.dim is not None and self.dim not in (2, 3):
            raise ConfigError("dim must be 2 or 3")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        if self.compliance not in COMPLIANCE_FORMULAS:
            raise ConfigError(f"compliance must be one of {COMPLIANCE_FORMULAS}")
        if self.levels is not None and self.levels < 3:
            raise ConfigError("levels must be at least 3")
        if self.command == "converge":
            if self.family not in CONVERGE_FAMILIES:
                raise ConfigError(f"converge needs --family in {CONVERGE_FAMILIES}")
            want = 3 if self.family == "3d" else 2
            if self.dim not in (None, want):
                raise ConfigError(f"family {self.family} is {want}D")
        try:
            Material(self.mu, self.lam, self.compliance)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def material(self):
        return Material(self.mu, self.lam, self.compliance)

    def to_text(self):
        lines = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if v is not None:
                lines.append(f"{f.name}={_format_value(v)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        return cls(**parse_config_text(text))


def _format_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    return repr(v) if isinstance(v, float) else str(v)


_TYPES = {"dim": int, "levels": int, "mu": float, "lam": float, "timestamp": "bool"}
_ALIASES = {"lambda": "lam"}


def parse_config_text(text):
    """Parse ``key=value`` lines; ``#`` starts a comment."""
    names = {f.name for f in dataclasses.fields(RunConfig)}
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = _ALIASES.get(key, key).replace("-", "_")
        if key not in names:
            raise ConfigError(f"line {n}: unknown key {key!r}")
        kind = _TYPES.get(key)
        try:
            if kind == "bool":
                if value.lower() not in ("true", "false"):
                    raise ValueError(value)
                out[key] = value.lower() == "true"
            elif kind is not None:
                out[key] = kind(value)
            else:
                out[key] = value
        except ValueError:
            raise ConfigError(f"line {n}: bad value for {key}: {value!r}") from None
    return out


# -- reports --------------------------------------------------------------------------

def _table(header, rows, fmt):
    rows = [[_cell(v) for v in row] for row in rows]
    if fmt == "csv":
        import csv
        import io

        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return buf.getvalue()
    widths = [max(len(str(h)), *(len(r[i]) for r in rows)) if rows else len(str(h))
              for i, h in enumerate(header)]
    lines = ["  ".join(str(h).ljust(w) for h, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in rows]
    return "\n".join(lines) + "\n"


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _certify(cfg):
    from .elements import ElementFamily, _DIMS, certify, make_element

    rows, ok = [], True
    t0 = time.perf_counter()
    for fam in ElementFamily:
        for dim in _DIMS[fam.value]:
            if cfg.dim is not None and dim != cfg.dim:
                continue
            if cfg.family is not None and fam.value != cfg.family.upper():
                continue
            orders = (1, 2) if fam.value in ("SIGMA_HIGHER", "THETA_HIGHER") else (None,)
            for k in orders:
                r = certify(make_element(fam, dim, k))
                ok &= r["unisolvent"]
                det = r["det"]
                rows.append([fam.value, dim, k, r["space_dim"], r["n_dofs"],
                             f"{float(det):.6g}", r["cond"], r["unisolvent"]])
    if not rows:
        raise ConfigError("no element family matches the selection")
    head = ["family", "dim", "k", "space_dim", "n_dofs", "det", "cond", "unisolvent"]
    footer = f"# {len(rows)} elements certified in {time.perf_counter() - t0:.2f} s\n" \
        if cfg.format == "pretty" else ""
    failures = [f"{r[0]} dim={r[1]} k={r[2]}: singular" for r in rows if not r[-1]]
    return _table(head, rows, cfg.format) + footer, ok, failures


def _sequences(cfg):
    from .elements import exact_sequence_check, standard_sequences

    rows, ok, failures = [], True, []
    for label, steps in standard_sequences().items():
        dim = 3 if label.startswith("3d") else 2
        if cfg.dim is not None and dim != cfg.dim:
            continue
        rep = exact_sequence_check(steps)
        ok &= rep.exact
        if not rep.exact:
            failures.append(f"{label}: defects {rep.defects}")
        rows.append([label, " ".join(map(str, rep.dims)), " ".join(map(str, rep.ranks)),
                     " ".join(map(str, rep.defects)), rep.alternating_sum, all(rep.inclusions)])
    head = ["sequence", "dims", "ranks", "defects", "alternating_sum", "inclusions"]
    return _table(head, rows, cfg.format), ok, failures


def _identities(cfg):
    from .checks import identity_checks

    rows, failures = [], []
    for dim in ((cfg.dim,) if cfg.dim else (2, 3)):
        for r in identity_checks(dim, cfg.material()):
            rows.append([dim, r.name, f"{r.value:.3e}", f"{r.tol:.0e}", r.passed])
            if not r.passed:
                failures.append(f"{dim}D {r.name}: {r.value:.3e} > {r.tol:.0e}")
    head = ["dim", "check", "value", "tolerance", "passed"]
    return _table(head, rows, cfg.format), not failures, failures


def _converge(cfg):
    from .verification import convergence_study, default_case

    dim = 3 if cfg.family == "3d" else 2
    levels = cfg.levels or (3 if dim == 3 else 4)
    first = 2 if dim == 3 else 4
    h = [1.0 / (first * 2 ** k) for k in range(levels)]
    report = convergence_study(default_case(dim, cfg.material()), cfg.family, h)
    lo, hi = RATE_BANDS[cfg.family]
    rates = report.final_rates()
    failures = [f"{k[5:]} rate {rates['err_' + k[5:]]:.3f} outside [{lo}, {hi}]"
                for k in GATED_RATES if not lo <= rates["err_" + k[5:]] <= hi]
    if cfg.format == "csv":
        return report.to_csv(timings=cfg.timestamp), not failures, failures
    rows = [[r[c] for c in ("h", "err_sigma_l2", "err_sigma_hdiv", "err_u_l2", "err_gamma_l2",
                            "rate_sigma_hdiv", "rate_u_l2", "rate_gamma_l2")]
            + [r["solve_seconds"]] for r in report.rows(cfg.timestamp)]
    head = ["h", "sigma_l2", "sigma_hdiv", "u_l2", "gamma_l2",
            "rate_hdiv", "rate_u", "rate_gamma", "seconds"]
    return _table(head, rows, "pretty"), not failures, failures


_RUNNERS = {"certify": _certify, "sequences": _sequences,
            "identities": _identities, "converge": _converge}


def _write_atomic(path, text):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run(cfg, stdout=None, stderr=None):
    """Execute a configuration; returns the process exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    text, ok, failures = _RUNNERS[cfg.command](cfg)
    if cfg.timestamp:
        stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        text = f"# generated {stamp}\n" + text
    if cfg.out:
        _write_atomic(cfg.out, text)
    else:
        stdout.write(text)
    if failures:
        stderr.write(_table(["failed check"], [[f] for f in failures], "pretty"))
    return 0 if ok else 1


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; flags override it")
    common.add_argument("--dim", type=int, choices=(2, 3))
    common.add_argument("--family")
    common.add_argument("--levels", type=int)
    common.add_argument("--mu", type=float)
    common.add_argument("--lambda", dest="lam", type=float)
    common.add_argument("--compliance", choices=COMPLIANCE_FORMULAS)
    common.add_argument("--out")
    common.add_argument("--format", choices=FORMATS)
    common.add_argument("--no-timestamp", dest="timestamp", action="store_false", default=None,
                        help="omit the timestamp header and timing columns")
    parser = argparse.ArgumentParser(prog="weaksym", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {"certify": "unisolvency table for every element family",
             "sequences": "exactness of the polynomial sequences",
             "identities": "commuting diagrams, refined and algebraic identities",
             "converge": "manufactured-solution convergence study"}
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def config_from_args(argv):
    args = _parser().parse_args(argv)
    values = {}
    if args.config:
        try:
            with open(args.config) as fh:
                values.update(parse_config_text(fh.read()))
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
    values.pop("command", None)
    for key in ("dim", "family", "levels", "mu", "lam", "compliance", "out", "format", "timestamp"):
        v = getattr(args, key)
        if v is not None:
            values[key] = v
    return RunConfig(command=args.command, **values)


def main(argv=None):
    try:
        cfg = config_from_args(sys.argv[1:] if argv is None else argv)
    except ConfigError as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return 2
    try:
        return run(cfg)
    except ConfigError as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
