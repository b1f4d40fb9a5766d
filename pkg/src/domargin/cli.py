"""Command-line front end: ``domargin <command> FILE [options]``.

System files are line oriented::

    # comment
    [system]
    num = 1            # ascending coefficients, space separated
    den = 1 5 1
    integrator = true  # optional extra 1/s factor
    actuator_tau = 0.1 # optional first-order actuator 1/(tau s + 1)

    [nonlinearity]
    type = tanh        # tanh | cubic | sine | linear | saturation
    gain = -2
    limit = 1          # saturation only

    [analysis]
    lambda = 2
    k1 = -2
    k2 = 0
    k = 6
    p = 1
    phi = 0.1

Command-line flags override the ``[analysis]`` values.  Exit codes are 0 on
success, 2 for parse or validation errors, 3 for analysis failures and 4
when a dominance certificate cannot match the requested degree.
"""

import argparse
import hashlib
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._format import fmt
from .dominance import certify_lti
from .exceptions import DomarginError, InertiaMismatch
from .lure import LureSystem, StaticNonlinearity, classify, simulate
from .margins import (Disk, circle_criterion, disk_margin_check, gain_margins,
                      hinf_lambda_norm, margin_vs_rate_sweep, phase_margins)
from .nyquist import sample_curve
from .rational import ss_from_tf, tf

EXIT_OK, EXIT_PARSE, EXIT_ANALYSIS, EXIT_MISMATCH = 0, 2, 3, 4

SECTIONS = {
    'system': {'num', 'den', 'integrator', 'actuator_tau'},
    'nonlinearity': {'type', 'gain', 'limit'},
    'analysis': {'lambda', 'k1', 'k2', 'k', 'p', 'phi'},
}


class ParseError(ValueError):
    """Malformed system file or command-line value."""


def _number(text, where):
    try:
        x = float(text)
    except ValueError:
        raise ParseError(f"{where}: not a number: {text!r}") from None
    if math.isnan(x):
        raise ParseError(f"{where}: nan is not allowed")
    return x


def _boolean(text, where):
    low = text.lower()
    if low in ('true', 'yes', '1'):
        return True
    if low in ('false', 'no', '0'):
        return False
    raise ParseError(f"{where}: expected true or false, got {text!r}")


@dataclass
class SystemSpec:
    """Parsed contents of a system file."""
    num: list
    den: list
    integrator: bool = False
    actuator_tau: float = None
    nonlinearity: StaticNonlinearity = None
    analysis: dict = field(default_factory=dict)
    digest: str = ''

    def transfer_function(self, den=None):
        """Loop transfer function, with `den` overriding the plant denominator."""
        W = tf(self.num, self.den if den is None else den)
        if self.integrator:
            W = W * tf([1.0], [0.0, 1.0])
        if self.actuator_tau is not None:
            W = W * tf([1.0], [1.0, self.actuator_tau])
        return W


def parse_system(text, digest=''):
    """Parse system-file text into a :class:`SystemSpec`.

    Raises
    ------
    ParseError
        On unknown sections or keys, malformed numbers or missing entries;
        the message names the offending line.
    """
    values = {name: {} for name in SECTIONS}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        where = f"line {lineno}"
        if line.startswith('['):
            if not line.endswith(']'):
                raise ParseError(f"{where}: malformed section header {line!r}")
            section = line[1:-1].strip()
            if section not in SECTIONS:
                raise ParseError(f"{where}: unknown section [{section}]")
            continue
        key, eq, val = line.partition('=')
        key, val = key.strip(), val.strip()
        if not eq or not key:
            raise ParseError(f"{where}: expected 'key = value'")
        if section is None:
            raise ParseError(f"{where}: key {key!r} outside any section")
        if key not in SECTIONS[section]:
            raise ParseError(f"{where}: unknown key {key!r} in [{section}]")
        if key in values[section]:
            raise ParseError(f"{where}: duplicate key {key!r}")
        values[section][key] = (val, where)

    sysv = values['system']
    for key in ('num', 'den'):
        if key not in sysv:
            raise ParseError(f"[system] is missing {key!r}")

    def coeffs(key):
        val, where = sysv[key]
        parts = val.split()
        if not parts:
            raise ParseError(f"{where}: {key} needs at least one coefficient")
        return [_number(p, where) for p in parts]

    num, den = coeffs('num'), coeffs('den')
    if not any(den):
        raise ParseError(f"{sysv['den'][1]}: denominator is identically zero")
    spec = SystemSpec(num, den, digest=digest)
    if 'integrator' in sysv:
        spec.integrator = _boolean(*sysv['integrator'])
    if 'actuator_tau' in sysv:
        tau = _number(*sysv['actuator_tau'])
        if not tau > 0:
            raise ParseError(f"{sysv['actuator_tau'][1]}: actuator_tau must be positive")
        spec.actuator_tau = tau

    nlv = values['nonlinearity']
    if nlv:
        if 'type' not in nlv or 'gain' not in nlv:
            raise ParseError("[nonlinearity] needs 'type' and 'gain'")
        limit = _number(*nlv['limit']) if 'limit' in nlv else 1.0
        try:
            spec.nonlinearity = StaticNonlinearity(
                nlv['type'][0], _number(*nlv['gain']), limit)
        except ValueError as err:
            raise ParseError(f"{nlv['type'][1]}: {err}") from None

    for key, (val, where) in values['analysis'].items():
        x = _number(val, where)
        if key == 'p':
            if x != int(x) or x < 0:
                raise ParseError(f"{where}: p must be a non-negative integer")
            x = int(x)
        spec.analysis[key] = x
    try:
        spec.transfer_function()
    except ValueError as err:
        raise ParseError(str(err)) from None
    return spec


def load_system(path):
    data = Path(path).read_bytes()
    try:
        text = data.decode('utf-8')
    except UnicodeDecodeError:
        raise ParseError(f"{path}: not a UTF-8 text file") from None
    return parse_system(text, hashlib.sha256(data).hexdigest())


def write_atomic(path, text):
    """Write `text` to `path` via a temporary file and a rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='\n') as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class RunReport:
    """Command echo, input digest, results and warnings of one run."""

    def __init__(self, argv, digest):
        self.argv = list(argv)
        self.digest = digest
        self.results = []
        self.warnings = []

    def add(self, text):
        self.results.append(text.rstrip('\n'))

    def warn(self, text):
        self.warnings.append(text)

    def render(self):
        lines = ['# command: domargin ' + ' '.join(self.argv),
                 f"# input sha256: {self.digest}"]
        lines += self.results
        lines += [f"# warning: {w}" for w in self.warnings]
        return '\n'.join(lines) + '\n'


def _setting(args, spec, name, required=False, what=None):
    val = getattr(args, name if name != 'lambda' else 'lam', None)
    if val is None:
        val = spec.analysis.get(name)
    if val is None and required:
        raise ParseError(f"{what or 'this command'} needs --{name} "
                         f"(or '{name}' in [analysis])")
    return val


def _lam(args, spec):
    lam = _setting(args, spec, 'lambda')
    lam = 0.0 if lam is None else float(lam)
    if lam < 0:
        raise ParseError("lambda must be non-negative")
    return lam


def _system(args):
    spec = load_system(args.file)
    if getattr(args, 'tau', None) is not None:
        if not args.tau > 0:
            raise ParseError("--tau must be positive")
        spec.actuator_tau = args.tau
    return spec


def _emit(args, report, csv_text=None):
    if args.format == 'csv' and csv_text is not None:
        out = csv_text
        for w in report.warnings:
            print(f"warning: {w}", file=sys.stderr)
    else:
        out = report.render()
    if args.out:
        write_atomic(args.out, out)
    else:
        sys.stdout.write(out)


# ---------------------------------------------------------------- svg

def _svg(curve, disk=None, width=800, height=600, pad=40):
    z = curve.closed_polygon()
    xs, ys = [z.real.min(), z.real.max(), 0.0], [z.imag.min(), z.imag.max(), 0.0]
    if disk is not None and disk.kind != 'half_plane':
        xs += [disk.center - disk.radius, disk.center + disk.radius]
        ys += [-disk.radius, disk.radius]
    elif disk is not None:
        xs.append(disk.line)
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    span = max(x1 - x0, y1 - y0, 1e-12)
    x0, x1 = x0 - 0.05 * span, x1 + 0.05 * span
    y0, y1 = y0 - 0.05 * span, y1 + 0.05 * span
    s = min((width - 2 * pad) / (x1 - x0), (height - 2 * pad) / (y1 - y0))
    cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)

    def px(x):
        return width / 2 + s * (x - cx)

    def py(y):
        return height / 2 - s * (y - cy)

    def num(v):
        return f"{v:.3f}"

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
           f'height="{height}" viewBox="0 0 {width} {height}">',
           f'<rect width="{width}" height="{height}" fill="white"/>']
    if disk is not None:
        style = 'fill="steelblue" fill-opacity="0.3" stroke="none"'
        if disk.kind == 'bounded_disk':
            out.append(f'<circle cx="{num(px(disk.center))}" cy="{num(py(0))}" '
                       f'r="{num(s * disk.radius)}" {style}/>')
        elif disk.kind == 'complement_of_disk':
            r = s * disk.radius
            c = px(disk.center)
            out.append(f'<path fill-rule="evenodd" {style} d="M0 0H{width}V{height}H0Z '
                       f'M{num(c - r)} {num(py(0))}a{num(r)} {num(r)} 0 1 0 '
                       f'{num(2 * r)} 0a{num(r)} {num(r)} 0 1 0 {num(-2 * r)} 0Z"/>')
        else:
            xl = min(max(px(disk.line), 0.0), float(width))
            if disk.side > 0:
                out.append(f'<rect x="{num(xl)}" y="0" width="{num(width - xl)}" '
                           f'height="{height}" {style}/>')
            else:
                out.append(f'<rect x="0" y="0" width="{num(xl)}" '
                           f'height="{height}" {style}/>')
    out.append(f'<line x1="0" y1="{num(py(0))}" x2="{width}" y2="{num(py(0))}" '
               'stroke="gray" stroke-width="1"/>')
    out.append(f'<line x1="{num(px(0))}" y1="0" x2="{num(px(0))}" y2="{height}" '
               'stroke="gray" stroke-width="1"/>')
    # thin the polyline: consecutive points closer than a pixel add nothing
    pts = [(px(v.real), py(v.imag)) for v in np.append(z, z[0])]
    kept = [pts[0]]
    for p in pts[1:]:
        if abs(p[0] - kept[-1][0]) + abs(p[1] - kept[-1][1]) >= 0.5:
            kept.append(p)
    path = ' '.join(f"{num(a)},{num(b)}" for a, b in kept)
    out.append(f'<polyline points="{path}" fill="none" stroke="black" '
               'stroke-width="1.5"/>')
    out.append('</svg>')
    return '\n'.join(out) + '\n'


# ---------------------------------------------------------------- commands

def cmd_nyquist(args, argv):
    spec = _system(args)
    lam = _lam(args, spec)
    curve = sample_curve(spec.transfer_function(), lam)
    report = RunReport(argv, spec.digest)
    csv_text = curve.to_csv()
    if args.out:
        write_atomic(args.out, csv_text)
        report.add(f"wrote {len(curve.omegas)} points to {args.out}")
    else:
        sys.stdout.write(csv_text)
    if args.svg:
        k1, k2 = _setting(args, spec, 'k1'), _setting(args, spec, 'k2')
        disk = Disk(k1, k2) if k1 is not None and k2 is not None else None
        write_atomic(args.svg, _svg(curve, disk))
        report.add(f"wrote plot to {args.svg}")
    if report.results:
        sys.stderr.write(report.render())
    return EXIT_OK


def cmd_margins(args, argv):
    spec = _system(args)
    lam = _lam(args, spec)
    W = spec.transfer_function()
    report = RunReport(argv, spec.digest)
    mode = args.mode
    if mode == 'gain':
        res = gain_margins(W, lam)
        if res.degenerate:
            report.warn("curve runs along the real axis; some gains place a "
                        "closed-loop pole on the rate line")
    elif mode == 'phase':
        k = _setting(args, spec, 'k', True, 'phase margins')
        p = _setting(args, spec, 'p', True, 'phase margins')
        res = phase_margins(W, lam, k, int(p))
        phi = _setting(args, spec, 'phi')
        if phi is not None:
            verdict = 'inside' if res.contains(phi) else 'outside'
            report.add(f"phi = {fmt(phi)}: {verdict}")
    else:
        k1 = _setting(args, spec, 'k1', True, f"{mode} mode")
        k2 = _setting(args, spec, 'k2', True, f"{mode} mode")
        if not k1 < k2:
            raise ParseError(f"need k1 < k2, got ({fmt(k1)}, {fmt(k2)})")
        if mode == 'disk':
            p = _setting(args, spec, 'p', True, 'disk mode')
            res = disk_margin_check(W, lam, Disk(k1, k2), int(p))
        else:
            res = circle_criterion(W, lam, k1, k2, mode=args.disk_mode)
            if spec.nonlinearity is not None:
                from .lure import verify_sector
                ok = verify_sector(spec.nonlinearity, k1, k2)
                report.add(f"sector [{fmt(k1)},{fmt(k2)}] of nonlinearity: "
                           f"{'verified' if ok else 'violated'}")
                if not ok:
                    report.warn("nonlinearity violates the sector; the "
                                "criterion says nothing about this loop")
        if k1 * k2 < 0:
            report.warn(f"{args.disk_mode if mode == 'circle' else 'literal'} "
                        "disk mode in use for a complement-of-disk set")
    report.add(res.to_text())
    _emit(args, report, res.to_csv() if hasattr(res, 'to_csv') else None)
    return EXIT_OK


def _parse_x0(text, n):
    parts = [p for p in text.replace(',', ' ').split() if p]
    vals = [_number(p, '--x0') for p in parts]
    if len(vals) == 1 and n > 1:
        vals += [0.0] * (n - 1)
    if len(vals) != n:
        raise ParseError(f"--x0 {text!r}: expected {n} values")
    return vals


def _trace_path(out, i, count):
    if count == 1:
        return Path(out)
    p = Path(out)
    return p.with_name(f"{p.stem}_{i}{p.suffix or '.csv'}")


def cmd_simulate(args, argv):
    spec = _system(args)
    if spec.nonlinearity is None:
        raise ParseError("simulate needs a [nonlinearity] section")
    try:
        lure = LureSystem.from_tf(spec.transfer_function(), spec.nonlinearity)
    except ValueError as err:
        raise ParseError(str(err)) from None
    if not args.dt > 0 or not args.T >= args.dt:
        raise ParseError("need dt > 0 and T >= dt")
    x0s = [_parse_x0(x, lure.n) for x in (args.x0 or ['0.1'])]
    report = RunReport(argv, spec.digest)
    for i, x0 in enumerate(x0s):
        trace = simulate(lure, x0, T=args.T, dt=args.dt)
        verdict = classify(trace) if trace.times[-1] >= 10.0 or trace.halted \
            else 'undetermined (trace shorter than 10 s)'
        label = ','.join(fmt(v) for v in x0)
        report.add(f"x0 = ({label}): {verdict}")
        if args.out:
            path = _trace_path(args.out, i, len(x0s))
            write_atomic(path, trace.to_csv(include_states=args.states))
            report.add(f"  trace written to {path}")
    sys.stdout.write(report.render())
    return EXIT_OK


def _grid(text, name):
    parts = text.split(':')
    if len(parts) != 3:
        raise ParseError(f"--{name} expects start:stop:step, got {text!r}")
    a, b, h = (_number(p, f"--{name}") for p in parts)
    if not h > 0 or b < a:
        raise ParseError(f"--{name}: need stop >= start and step > 0")
    n = int(math.floor((b - a) / h + 1e-9)) + 1
    return np.round(a + h * np.arange(n), 12)


def cmd_sweep(args, argv):
    spec = _system(args)
    if len(spec.den) < 2:
        raise ParseError("sweep varies the s coefficient of den; den needs degree >= 1")
    lams = _grid(args.lambda_range, 'lambda-range')
    ds = _grid(args.d_range, 'd-range')

    def family(d):
        den = list(spec.den)
        den[1] = d
        return spec.transfer_function(den)

    res = margin_vs_rate_sweep(family, lams, ds)
    report = RunReport(argv, spec.digest)
    gaps = sum(1 for r in res.rows if math.isnan(r[2]))
    if gaps:
        report.warn(f"{gaps} grid point(s) without a finite 1-gain margin end "
                    "point (pole on the rate line or no 1-gain margin)")
    for d, (lam, ku) in sorted(res.optimal.items()):
        report.add(f"d = {fmt(d)}: optimal lambda = {fmt(lam)}, "
                   f"k_upper = {fmt(ku)}")
    if args.out:
        write_atomic(args.out, res.to_csv())
        report.add(f"wrote {len(res.rows)} rows to {args.out}")
        sys.stdout.write(report.render())
    else:
        sys.stdout.write(res.to_csv())
        for w in report.warnings:
            print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK


def cmd_certify(args, argv):
    spec = _system(args)
    lam = _lam(args, spec)
    p = _setting(args, spec, 'p', True, 'certify')
    S = ss_from_tf(spec.transfer_function())
    if S.D != 0:
        raise ParseError("certify needs a strictly proper transfer function")
    report = RunReport(argv, spec.digest)
    if args.k is not None:
        gain, source = args.k, f"linear feedback K = {fmt(args.k)}"
    elif spec.nonlinearity is not None:
        gain = float(spec.nonlinearity.derivative(0.0))
        source = f"linearization at the origin, phi'(0) = {fmt(gain)}"
    else:
        gain, source = 0.0, "open loop"
    A = S.A - gain * (S.B @ S.C)
    cert = certify_lti(A, lam, int(p))
    report.add(f"# closed loop: {source}")
    report.add(cert.to_text())
    report.add(f"residual = {cert.residual!r}")
    report.add(f"inertia = {tuple(cert.inertia)}")
    if args.out:
        write_atomic(args.out, cert.to_text())
    sys.stdout.write(report.render())
    return EXIT_OK


def cmd_norm(args, argv):
    spec = _system(args)
    lam = _lam(args, spec)
    value = hinf_lambda_norm(spec.transfer_function(), lam)
    if args.out:
        write_atomic(args.out, fmt(value) + '\n')
    sys.stdout.write(fmt(round(value, 12)) + '\n')
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser():
    parser = argparse.ArgumentParser(
        prog='domargin',
        description="Dominance margins of rate-shifted Nyquist curves.")
    sub = parser.add_subparsers(dest='command', required=True)

    def common(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument('file', help="system definition file")
        p.add_argument('--lambda', dest='lam', type=float, default=None,
                       help="rate lambda >= 0 (default from file, else 0)")
        p.add_argument('--tau', type=float, default=None,
                       help="actuator time constant (overrides the file)")
        p.add_argument('--out', default=None, help="output file")
        return p

    p = common('nyquist', "sample the shifted Nyquist curve to CSV")
    p.add_argument('--svg', default=None, help="also write an SVG plot")
    p.add_argument('--k1', type=float, default=None)
    p.add_argument('--k2', type=float, default=None)
    p.set_defaults(func=cmd_nyquist)

    p = common('margins', "gain, phase or disk margins and the circle criterion")
    p.add_argument('--mode', choices=('gain', 'phase', 'disk', 'circle'),
                   default='gain')
    p.add_argument('--k', type=float, default=None)
    p.add_argument('--k1', type=float, default=None)
    p.add_argument('--k2', type=float, default=None)
    p.add_argument('--p', type=int, default=None)
    p.add_argument('--phi', type=float, default=None)
    p.add_argument('--disk-mode', choices=('literal', 'classical'),
                   default='literal',
                   help="circle criterion reading when k1 k2 < 0")
    p.add_argument('--format', choices=('text', 'csv'), default='text')
    p.set_defaults(func=cmd_margins)

    p = common('simulate', "simulate the Lure loop and classify each trace")
    p.add_argument('--x0', action='append', default=None,
                   help="initial state, comma separated; repeatable")
    # 200 s: the bistable loop's slow mode (about -0.22) needs this long to
    # settle inside the equilibrium tolerance of `classify`
    p.add_argument('--T', type=float, default=200.0, help="horizon in s")
    p.add_argument('--dt', type=float, default=1e-3, help="RK4 step in s")
    p.add_argument('--states', action='store_true',
                   help="include the state columns in trace CSVs")
    p.set_defaults(func=cmd_simulate)

    p = common('sweep', "1-gain margin end point over a (lambda, d) grid")
    p.add_argument('--lambda-range', default='0.1:9.9:0.1')
    p.add_argument('--d-range', default='1:10:0.5')
    p.set_defaults(func=cmd_sweep)

    p = common('certify', "dominance certificate for the linearized loop")
    p.add_argument('--p', type=int, default=None)
    p.add_argument('--k', type=float, default=None,
                   help="close the loop with linear gain K instead")
    p.set_defaults(func=cmd_certify)

    p = common('norm', "H-infinity norm of the shifted transfer function")
    p.set_defaults(func=cmd_norm)
    return parser


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_PARSE
    try:
        return args.func(args, argv)
    except BrokenPipeError:
        return EXIT_OK
    except (ParseError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PARSE
    except InertiaMismatch as err:
        print(f"certification failed: {err}", file=sys.stderr)
        return EXIT_MISMATCH
    except (DomarginError, ValueError, ArithmeticError,
            np.linalg.LinAlgError) as err:
        print(f"analysis failed: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_ANALYSIS


if __name__ == '__main__':
    sys.exit(main())
