"""Command-line front end.

    qpjacobi [--seed S] [--threads K] [--out-dir DIR] [--config FILE] <subcommand> ...

Subcommands: freq, model, cocycle, bounds, spectral, growth, transport.
Every output starts with '#' header lines holding the resolved settings and
the seed; the body (CSV or JSON) depends only on those settings.

Config files are INI: a [run] section for the global flags, a [model]
section for the operator, and one section per subcommand.  Keys are the long
option names with '-' or '_'.  Command-line values win over the file.
"""
import argparse
import configparser
import csv
import datetime
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import mpmath
import numpy as np

from . import __version__, cocycle, fourier, lattice, numberkit, periodicity, spectral, transport
from .errors import ConfigInvalid, QPError

SPECTRUM_BOX = 1000


# ---------------------------------------------------------------- options

def _floats(s):
    return [float(x) for x in str(s).split(",") if x.strip()]


def _bool(s):
    if isinstance(s, bool):
        return s
    v = str(s).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _triple(s):
    vals = _floats(s)
    if len(vals) != 3 or min(vals) < 0:
        raise ValueError("expected three nonnegative numbers l1,l2,l3")
    return tuple(vals)


GLOBAL = [("seed", int, 0), ("threads", int, 1), ("out-dir", str, None)]
MODEL = [("ehm", _triple, None), ("schrodinger-cos", float, None), ("custom", str, None),
         ("custom-v", str, None), ("alpha", str, "golden"), ("theta", float, 0.0),
         ("depth", int, 40)]
COMMANDS = {
    "freq": [("json", _bool, False)],
    "model": [("spectrum", int, 0)],
    "cocycle": [("op", str, "lyapunov"), ("E", str, "0"), ("n", int, 100_000),
                ("q", int, 34), ("m-window", int, 1000), ("phases", int, 8),
                ("beta", float, None), ("lam", float, None)],
    "bounds": [("check", str, "ap"), ("q", int, 34), ("beta", float, 0.1),
               ("delta", float, 0.5), ("window-cap", int, None), ("lam", float, None)],
    "spectral": [("op", str, "M"), ("E", str, "0"), ("eps-decades", str, "1:4"),
                 ("eps-points", int, 13), ("gamma-grid", str, "0.2,0.5,0.8,1.0"),
                 ("phi", float, 0.0), ("probes", int, 8)],
    "growth": [("op", str, "decompose"), ("n", int, 100), ("E", str, "0"), ("a", float, 1.0),
               ("q", int, 89), ("windows", int, 20), ("ell", int, 1000),
               ("poly", str, "1,0,-1"), ("levels", str, "0,0.5"), ("dump-grid", _bool, False)],
    "transport": [("p", float, 2.0), ("T-decades", str, "1.5:3"), ("box", str, "auto"),
                  ("dt", float, None)],
}
CHOICES = {("cocycle", "op"): ("lyapunov", "trace-scan", "regularity"),
           ("bounds", "check"): ("ap", "lb", "aj09", "certify"),
           ("spectral", "op"): ("m", "M", "gamma-scan", "jl", "powerlaw"),
           ("growth", "op"): ("decompose", "interval", "density", "sums", "sublevel")}


def _dest(name):
    return name.replace("-", "_")


def build_parser():
    p = argparse.ArgumentParser(prog="qpjacobi", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--config", default=None)
    for name, typ, _ in GLOBAL:
        p.add_argument("--" + name, dest=_dest(name), default=None)
    sub = p.add_subparsers(dest="command", required=True)
    for cmd, opts in COMMANDS.items():
        sp = sub.add_parser(cmd)
        # global flags are accepted after the subcommand too
        sp.add_argument("--config", default=argparse.SUPPRESS)
        for name, typ, _ in GLOBAL:
            sp.add_argument("--" + name, dest=_dest(name), default=argparse.SUPPRESS)
        for name, typ, _ in MODEL + opts:
            if typ is _bool:
                sp.add_argument("--" + name, dest=_dest(name), action="store_const",
                                const=True, default=None)
            else:
                sp.add_argument("--" + name, dest=_dest(name), default=None)
    return p


def _config_line(path, section, key):
    """1-based line of ``key`` inside ``[section]`` (None if not found)."""
    try:
        lines = open(path).read().splitlines()
    except OSError:
        return None
    cur = None
    for i, raw in enumerate(lines, 1):
        s = raw.strip()
        if s.startswith("[") and s.endswith("]"):
            cur = s[1:-1].strip()
            if cur == section and not key:
                return i
        elif cur == section and "=" in s:
            k = s.split("=", 1)[0].strip()
            if _dest(k).lower() == _dest(key).lower():
                return i
    return None


def read_config(path):
    cp = configparser.ConfigParser()
    cp.optionxform = str
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except configparser.Error as e:
        raise ConfigInvalid(f"{path}: {e}", field=None, line=getattr(e, "lineno", None))
    known = dict(COMMANDS)
    known["run"] = GLOBAL
    known["model"] = MODEL + COMMANDS["model"]
    for sec in cp.sections():
        if sec not in known:
            raise ConfigInvalid(f"unknown section [{sec}]", field=sec,
                                line=_config_line(path, sec, "") or None)
        names = {_dest(n).lower() for n, _, _ in known[sec]}
        for k in cp[sec]:
            if _dest(k).lower() not in names:
                raise ConfigInvalid(f"unknown key {k!r} in [{sec}]", field=f"{sec}.{k}",
                                    line=_config_line(path, sec, k))
    return cp


def resolve(args):
    """Merge command line, config file and defaults into a flat settings dict."""
    cp = read_config(args.config) if args.config else None
    out = {"command": args.command}

    def pick(section, name, typ, default):
        raw, line = getattr(args, _dest(name), None), None
        if raw is None and cp is not None and cp.has_section(section):
            for k in cp[section]:
                if _dest(k).lower() == _dest(name).lower():
                    raw, line = cp[section][k], _config_line(args.config, section, k)
        if raw is None:
            return default
        try:
            val = typ(raw)
        except (TypeError, ValueError) as e:
            raise ConfigInvalid(f"bad value for {name}: {raw!r} ({e})", field=name, line=line)
        choices = CHOICES.get((args.command, name))
        if choices and val not in choices:
            raise ConfigInvalid(f"{name} must be one of {', '.join(choices)}", field=name,
                                line=line)
        return val

    for name, typ, default in GLOBAL:
        out[_dest(name)] = pick("run", name, typ, default)
    for name, typ, default in MODEL + COMMANDS[args.command]:
        sec = "model" if (name, typ, default) in MODEL else args.command
        out[_dest(name)] = pick(sec, name, typ, default)
    if out["threads"] < 1:
        raise ConfigInvalid("threads must be >= 1", field="threads")
    picked = [k for k in ("ehm", "schrodinger_cos", "custom") if out[k] is not None]
    if len(picked) > 1:
        raise ConfigInvalid("choose one of --ehm, --schrodinger-cos, --custom", field=picked[1])
    return out


# ---------------------------------------------------------------- inputs

def parse_alpha(spec, depth):
    """(mp value or CFExpansion source, float) for golden, sqrt2m1, rule:<r> or a decimal."""
    if spec == "golden":
        a = numberkit.golden()
        return a, float(a)
    if spec == "sqrt2m1":
        a = numberkit.sqrt2m1()
        return a, float(a)
    if spec.startswith("rule:"):
        cf, value = numberkit.alpha_from_quotients(spec[5:], depth, log_domain=True)
        return cf, float(value)
    try:
        with mpmath.workprec(numberkit.DEFAULT_PREC):
            a = mpmath.mpf(spec)
    except (ValueError, TypeError):
        raise ConfigInvalid(f"cannot read alpha {spec!r}", field="alpha")
    return a, float(a)


def build_model(s):
    try:
        _, alpha = parse_alpha(s["alpha"], s["depth"])
    except QPError as e:
        raise ConfigInvalid(str(e), field="alpha")
    theta = s["theta"]
    if s["ehm"] is not None:
        return lattice.ehm(*s["ehm"], alpha, theta)
    if s["schrodinger_cos"] is not None:
        return lattice.schrodinger_cos(s["schrodinger_cos"], alpha, theta)
    if s["custom"] is not None:
        try:
            c = lattice.read_coefficients(s["custom"])
            v = lattice.read_coefficients(s["custom_v"]) if s["custom_v"] else {1: 1.0, -1: 1.0}
        except QPError as e:
            raise ConfigInvalid(str(e), field="custom")
        return lattice.trig_model(c, v, alpha, theta)
    return lattice.ehm(0.0, 0.5, 0.0, alpha, theta)


def parse_energies(spec, model, rng):
    """'x', 'x,y,..', 'a:b:k' (k evenly spaced) or 'spectrum:k' (k draws from a box spectrum)."""
    spec = str(spec)
    try:
        if spec.startswith("spectrum:"):
            k = int(spec.split(":", 1)[1])
            ev = lattice.finite_box_spectrum(model, SPECTRUM_BOX)
            return [float(x) for x in np.sort(rng.choice(ev, size=k, replace=False))]
        if spec.count(":") == 2:
            a, b, k = spec.split(":")
            return [float(x) for x in np.linspace(float(a), float(b), int(k))]
        return _floats(spec)
    except ValueError as e:
        raise ConfigInvalid(f"bad energy spec {spec!r} ({e})", field="E")


def _span(spec, field):
    try:
        a, b = (float(x) for x in str(spec).split(":"))
    except ValueError:
        raise ConfigInvalid(f"expected a:b, got {spec!r}", field=field)
    if not a < b:
        raise ConfigInvalid(f"{field} needs a < b", field=field)
    return a, b


# ---------------------------------------------------------------- output

def clean(x):
    """Plain JSON-ready values; non-finite floats become strings."""
    if isinstance(x, dict):
        return {str(k): clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return [clean(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [clean(float(x.real)), clean(float(x.imag))]
    if isinstance(x, (float, np.floating, mpmath.mpf)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, Fraction):
        return str(x)
    return x


def _cell(x):
    x = clean(x)
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


class Report:
    def __init__(self, kind, name, header):
        self.kind = kind
        self.name = name
        self.header = header
        self.rows = []
        self.columns = None
        self.obj = None

    def body(self):
        if self.kind == "json":
            return json.dumps(clean(self.obj), sort_keys=True, indent=1) + "\n"
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(self.columns)
        for r in self.rows:
            wr.writerow([_cell(v) for v in r])
        return buf.getvalue()

    def text(self):
        head = "".join(f"# {k}: {json.dumps(clean(v), sort_keys=True)}\n"
                       for k, v in self.header.items())
        return head + self.body()


def split_output(text):
    """(header lines, body) of an emitted report."""
    lines = text.splitlines(keepends=True)
    k = 0
    while k < len(lines) and lines[k].startswith("#"):
        k += 1
    return lines[:k], "".join(lines[k:])


def _pmap(fn, items, threads):
    """Apply ``fn`` to each item; failures become the exception object. Order is kept."""
    def safe(x):
        try:
            return fn(x)
        except QPError as e:
            return e
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(safe, items))
    return [safe(x) for x in items]


def _err(e):
    return f"error:{type(e).__name__}"


# ---------------------------------------------------------------- subcommands

def cmd_freq(s, rng, rep):
    src, _ = parse_alpha(s["alpha"], s["depth"])
    cf = src if isinstance(src, numberkit.CFExpansion) else \
        numberkit.cf_expand(src, s["depth"], strict=False)
    est = numberkit.beta_estimate(cf)
    levels = [v for _, v in est.levels]
    if s["json"]:
        rep.kind = "json"
        rep.obj = {"quotients": list(cf.quotients),
                   "convergents": [[int(p), int(q)] for p, q in cf.convergents],
                   "beta_levels": levels, "verdict": est.verdict_at_depth,
                   "truncated": cf.truncated}
    else:
        rep.columns = ["n", "a_n", "p_n", "q_n", "beta_level"]
        for n, (p, q) in enumerate(cf.convergents):
            a = cf.quotients[n - 1] if n >= 1 else ""
            rep.rows.append([n, a, int(p), int(q), levels[n] if n < len(levels) else ""])


def cmd_model(s, rng, rep, model):
    rep.kind = "json"
    d = {"model": model.describe(), "norm_bound": model.norm_bound(),
         "c_zeros": model.c.zeros(), "mean_log_c": model.c.mean_log_abs()}
    if s["ehm"] is not None:
        reg = lattice.ehm_classify(s["ehm"])
        d["region"] = {"r_label": reg.r_label, "geo_label": reg.geo_label, "note": reg.note}
        d["lyapunov_formula"] = lattice.ehm_lyapunov_formula(s["ehm"])
    if s["spectrum"]:
        ev = lattice.finite_box_spectrum(model, s["spectrum"])
        d["box_spectrum"] = {"L": s["spectrum"], "min": float(ev[0]), "max": float(ev[-1]),
                             "count": len(ev)}
    rep.obj = d


def cmd_cocycle(s, rng, rep, model):
    op = s["op"]
    Es = parse_energies(s["E"], model, rng)
    if op == "lyapunov":
        thetas = tuple(float(x) for x in rng.random(s["phases"]))
        rep.header["phases"] = thetas
        formula = lattice.ehm_lyapunov_formula(s["ehm"]) if s["ehm"] is not None else None
        res = _pmap(lambda E: cocycle.lyapunov_birkhoff(model, E, s["n"], thetas), Es,
                    s["threads"])
        rep.columns = ["E", "mean", "stderr", "n", "method", "formula"]
        for E, r in zip(Es, res):
            if isinstance(r, Exception):
                rep.rows.append([E, "", "", s["n"], _err(r), formula])
            else:
                rep.rows.append([E, r.mean, r.stderr, r.n, r.method, formula])
    elif op == "trace-scan":
        lam = s["lam"]
        if lam is None:
            lam = cocycle.measure_lambda(model, s["q"], s["m_window"])["Lambda"]
        rep.header["Lambda"] = lam
        rep.columns = ["E", "trace_abs", "gap_to_2", "label", "trace_tilde_abs"]
        for r in cocycle.trace_classify(model, s["q"], Es, lam):
            rep.rows.append([r.E, r.trace_abs, r.gap_to_2, r.label, r.trace_tilde_abs])
    else:
        rep.kind = "json"
        q, M = s["q"], s["m_window"]
        beta = s["beta"]
        if beta is None:
            raise ConfigInvalid("regularity needs --beta", field="beta")
        out = []
        for E in Es:
            try:
                lam = s["lam"]
                if lam is None:
                    lam = cocycle.measure_lambda(model, q, M, E)["Lambda"]
                out.append(cocycle.regularity_bounds_check(model, q, M, beta, lam, E))
            except QPError as e:
                out.append({"E": E, "error": _err(e), "message": str(e)})
        rep.obj = {"results": out}


def cmd_bounds(s, rng, rep, model):
    rep.kind = "json"
    chk, q, beta, delta = s["check"], s["q"], s["beta"], s["delta"]
    if chk == "ap":
        params = periodicity.PeriodicityParams(beta, q, delta, window_cap=s["window_cap"])
        rep.obj = periodicity.check_beta_almost_periodic(
            periodicity.model_sequence(model, "w"), params).as_dict()
    elif chk == "lb":
        lam = s["lam"]
        if lam is None:
            lam = cocycle.measure_lambda(model, q, 1000)["Lambda"]
        params = periodicity.PeriodicityParams(beta, q, delta, Lambda=lam,
                                               window_cap=s["window_cap"])
        rep.obj = periodicity.check_lambda_beta_bound(
            periodicity.model_sequence(model, "w"), params).as_dict()
    elif chk == "aj09":
        src, _ = parse_alpha(s["alpha"], s["depth"])
        dev = periodicity.sine_product_deviation(model.theta, src, q)
        rep.obj = {"pass": dev.C_eff <= 20, "worst_margin": 20 - dev.C_eff,
                   "worst_index": dev.j0, "effective_window": q, "deviation": dev.deviation,
                   "C_eff": dev.C_eff}
    else:
        src, _ = parse_alpha(s["alpha"], s["depth"])
        prof = periodicity.profile_from_sampling(model.c)
        cert = periodicity.lambda_certificate(prof, src, beta, delta, strict=False)
        d = cert.as_dict()
        tt = cert.theta_test(model.theta)
        d.update({"pass": not cert.violations and tt.admissible,
                  "worst_margin": min(tt.gammas) if tt.gammas else None,
                  "worst_index": tt.worst_n[0] if tt.worst_n else None,
                  "effective_window": tt.search_range})
        rep.obj = d


def cmd_spectral(s, rng, rep, model):
    op = s["op"]
    Es = parse_energies(s["E"], model, rng)
    lo, hi = _span(s["eps_decades"], "eps-decades")
    eps = list(np.logspace(-lo, -hi, s["eps_points"]))
    gammas = _floats(s["gamma_grid"])
    rep.columns = ["E", "eps", "gamma", "value_re", "value_im", "indicator", "verdict"]
    if op in ("m", "M"):
        jobs = [(E, e) for E in Es for e in eps]
        if op == "m":
            fn = lambda je: spectral.half_line_m(model, s["phi"], complex(je[0], je[1]))
        else:
            fn = lambda je: spectral.whole_line_M(model, complex(je[0], je[1]))
        for (E, e), r in zip(jobs, _pmap(fn, jobs, s["threads"])):
            if isinstance(r, Exception):
                rep.rows.append([E, e, "", "", "", "", _err(r)])
            else:
                rep.rows.append([E, e, "", r.real, r.imag, abs(r), "ok"])
    elif op == "gamma-scan":
        rows, brackets = spectral.gamma_scan(model, Es, gammas, eps)
        rep.header["brackets"] = {str(k): v for k, v in brackets.items()}
        for r in rows:
            rep.rows.append([r.E, eps[-1], r.gamma, r.min_value, 0.0, r.slope, r.verdict])
    elif op == "jl":
        phis = list(rng.uniform(-math.pi / 2, math.pi / 2, s["probes"]))
        rep.header["phis"] = phis
        for E in Es:
            for e in eps:
                try:
                    for r in spectral.jl_sandwich_check(model, E, e, phis):
                        rep.rows.append([E, e, r.phi, r.m.real, r.m.imag, r.ratio,
                                         "pass" if r.passed else "fail"])
                except QPError as ex:
                    rep.rows.append([E, e, "", "", "", "", _err(ex)])
    else:
        for E in Es:
            for g in gammas:
                try:
                    rows, frac = spectral.power_law_check(model, E, g, eps)
                except QPError as ex:
                    rep.rows.append([E, "", g, "", "", "", _err(ex)])
                    continue
                for r in rows:
                    rep.rows.append([E, r.epsilon, g, r.v_norm_sq, 0.0, r.L,
                                     "pass" if r.passed else (r.note or "fail")])


def cmd_growth(s, rng, rep, model):
    op = s["op"]
    rep.kind = "json"
    Es = parse_energies(s["E"], model, rng)
    E = Es[0]
    if op in ("decompose", "interval"):
        dec = fourier.decompose_F(model, E, s["n"])
        if s["dump_grid"]:
            rep.kind = "csv"
            rep.header["scale"] = dec.scale
            rep.columns = ["theta", "log_F", "log_f", "log_g", "P_scaled", "R_scaled"]
            for i in range(dec.grid):
                rep.rows.append([dec.theta[i], dec.log_F[i], dec.log_f[i], dec.log_g[i],
                                 dec.P[i], dec.R[i]])
            return
        out = dec.summary()
        if op == "interval":
            out["interval"] = fourier.find_large_norm_interval(dec, s["a"]).as_dict()
        rep.obj = out
    elif op == "density":
        cert = fourier.localization_density(model, E, s["q"], s["a"], s["windows"])
        rep.obj = cert.as_dict()
    elif op == "sums":
        g = fourier.sum_norm_growth(model, E, s["ell"])
        rep.obj = {"ell": g.ell, "log_sum": g.log_sum, "exponent_fit": g.exponent_fit,
                   "log_sum_reversed": g.log_sum_reversed,
                   "exponent_fit_reversed": g.exponent_fit_reversed}
    else:
        lv = _floats(s["levels"])
        if len(lv) != 2:
            raise ConfigInvalid("levels must be a,b", field="levels")
        r = fourier.sublevel_measure_bound(_floats(s["poly"]), lv[0], lv[1])
        rep.obj = {"measure": r.measure, "bound": r.bound, "zeta": r.zeta, "diam": r.diam,
                   "holds": r.holds, "vacuous": r.vacuous}


def cmd_transport(s, rng, rep, model):
    lo, hi = _span(s["T_decades"], "T-decades")
    box = s["box"]
    if box != "auto":
        try:
            box = int(box)
        except ValueError:
            raise ConfigInvalid(f"box must be 'auto' or an integer, got {box!r}", field="box")
    run = transport.run_transport(model, s["p"], 10 ** lo, 10 ** hi, box=box, dt=s["dt"])
    rep.header.update({"L": run.L, "dt": run.dt, "beta_minus": run.fit.beta_minus,
                       "beta_plus": run.fit.beta_plus,
                       "norm_error": run.snaps.max_norm_error,
                       "energy_drift": run.snaps.energy_drift})
    rep.columns = ["T", "moment", "window_slope_min", "window_slope_max", "leakage"]
    for T, m in zip(run.series.T, run.series.values):
        sl = [w["slope"] for w in run.fit.windows if w["T_lo"] <= T * (1 + 1e-12)
              and T <= w["T_hi"] * (1 + 1e-12)]
        rep.rows.append([T, m, min(sl) if sl else "", max(sl) if sl else "",
                         run.series.leakage])


HANDLERS = {"freq": cmd_freq, "model": cmd_model, "cocycle": cmd_cocycle,
            "bounds": cmd_bounds, "spectral": cmd_spectral, "growth": cmd_growth,
            "transport": cmd_transport}


def run(settings):
    """Execute one resolved run; returns the Report."""
    cmd = settings["command"]
    rng = np.random.default_rng(settings["seed"])
    header = {"qpjacobi": __version__, "command": cmd, "seed": settings["seed"],
              "settings": {k: v for k, v in settings.items() if k != "command"},
              "created": datetime.datetime.now(datetime.timezone.utc).isoformat()}
    op = settings.get("op") or settings.get("check") or ""
    rep = Report("csv", f"{cmd}-{op}" if op else cmd, header)
    try:
        if cmd == "freq":
            cmd_freq(settings, rng, rep)
        else:
            HANDLERS[cmd](settings, rng, rep, build_model(settings))
    except ConfigInvalid:
        raise
    except QPError as e:
        rep.kind = "json"
        rep.obj = {"error": type(e).__name__, "message": str(e)}
    return rep


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv[:1] == ["run"]:
        argv = argv[1:]
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = resolve(args)
        rep = run(settings)
    except ConfigInvalid as e:
        where = f" (field {e.field}" + (f", line {e.line})" if e.line else ")") if e.field else ""
        print(f"qpjacobi: configuration error: {e}{where}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"qpjacobi: I/O error: {e}", file=sys.stderr)
        return 3
    text = rep.text()
    if settings["out_dir"]:
        try:
            os.makedirs(settings["out_dir"], exist_ok=True)
            ext = "json" if rep.kind == "json" else "csv"
            path = os.path.join(settings["out_dir"], f"{rep.name}.{ext}")
            with open(path, "w") as fh:
                fh.write(text)
        except OSError as e:
            print(f"qpjacobi: I/O error: {e}", file=sys.stderr)
            return 3
        print(path)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
