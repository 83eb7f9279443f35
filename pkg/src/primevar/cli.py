"""Command-line front end.

    primevar variance --x 10000 --q 5 --weight exp_linear
    primevar violate --Q 3 --target 0.1 --mode single --d-eta 40

Options may also come from a key=value file given with --config; flags on
the command line win. JSON goes out pretty-printed with sorted keys, CSV
with a header row and RFC-4180 quoting.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from typing import Dict, List, Optional

from . import __version__
from .characters import character, character_group, dump_csv, euler_phi
from .errors import CountMismatch, PrimevarError
from .explicit import psi_eta_explicit, weil_sum
from .lfunctions import (bundled_table, calibrate, compute_table, count_zeros, find_zeros,
                         ingest_zeros, rvm_predict, rvm_slack, write_zero_text)
from .primesums import X_MAX, psi_eta_direct, residue_sums
from .sync import violation_experiment
from .variance import variance_report
from .weights import constants, get_weight

log = logging.getLogger("primevar")

# per subcommand: options that must be present after merging flags and config
REQUIRED = {
    "zeros compute": ["q"],
    "zeros verify": ["zeros"],
    "characters dump": ["q"],
    "psum": ["x", "q"],
    "variance": ["x", "q"],
    "explicit": ["q", "label"],
    "weil": ["q"],
    "violate": ["Q"],
    "calibrate": [],
    "report": ["inputs"],
}


class UsageError(Exception):
    pass


# -- config ------------------------------------------------------------------

def read_config(path: str) -> Dict[str, str]:
    """key=value lines; '#' starts a comment; keys may use - or _."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key=value")
            k, v = line.split("=", 1)
            out[k.strip().replace("-", "_")] = v.strip()
    return out


def _truthy(v: str) -> bool:
    if v.lower() in ("1", "true", "yes", "on"):
        return True
    if v.lower() in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {v!r}")


def apply_config(parser: argparse.ArgumentParser, cfg: Dict[str, str]) -> None:
    """Install config values as parser defaults so explicit flags override them."""
    known = {}
    for a in parser._actions:
        if a.dest in cfg:
            raw = cfg[a.dest]
            if isinstance(a, argparse._StoreTrueAction):
                val = _truthy(raw)
            elif a.nargs in ("+", "*"):
                val = [a.type(x) if a.type else x for x in raw.replace(",", " ").split()]
            else:
                try:
                    val = a.type(raw) if a.type else raw
                except (TypeError, ValueError) as exc:
                    raise UsageError(f"config key {a.dest}: {exc}")
                if a.choices is not None and val not in a.choices:
                    raise UsageError(f"config key {a.dest}: {val!r} not in {list(a.choices)}")
            known[a.dest] = val
    parser.set_defaults(**known)


# -- output ------------------------------------------------------------------

def _clean(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return obj.item()
    return obj


def dumps_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def dumps_csv(rows: List[dict], fields: Optional[List[str]] = None) -> str:
    if fields is None:
        fields = []
        for r in rows:
            fields += [k for k in r if k not in fields]
    buf = io.StringIO()
    wr = csv.DictWriter(buf, fieldnames=fields, quoting=csv.QUOTE_MINIMAL,
                        lineterminator="\r\n")
    wr.writeheader()
    for r in rows:
        wr.writerow({k: _fmt(r.get(k, "")) for k in fields})
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return " ".join(_fmt(x) for x in v)
    return v


def _emit(text: str, path: Optional[str]) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def dataset_hashes(args) -> Dict[str, str]:
    if getattr(args, "zeros", None):
        with open(args.zeros, "rb") as fh:
            return {args.zeros: _sha256(fh.read())}
    d = resources.files("primevar") / "data"
    return {f"bundled/{p.name}": _sha256(p.read_bytes())
            for p in sorted(d.iterdir(), key=lambda p: p.name) if p.name.endswith(".txt")}


def _config_of(args) -> dict:
    skip = {"func", "config", "command", "out", "csv"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def envelope(args, result, weight: Optional[str] = None) -> dict:
    out = dict(command=args.command_name, version=__version__, config=_config_of(args),
               datasets=dataset_hashes(args), result=result)
    if weight is not None:
        c = constants(get_weight(weight), c_abs=args.c_abs).as_dict()
        c.pop("grid", None)
        out["weight_constants"] = c
    return out


def _table(args):
    if getattr(args, "zeros", None):
        return ingest_zeros(args.zeros, args.mode)
    return bundled_table()


# -- commands ----------------------------------------------------------------

def _zeros_for(q: int, T: float):
    tab = compute_table(q, T)
    buf = io.StringIO()
    write_zero_text(tab, buf)
    return buf.getvalue()


def cmd_zeros_compute(args) -> int:
    qs = args.q
    if args.jobs > 1 and len(qs) > 1:
        with ProcessPoolExecutor(args.jobs) as ex:
            parts = list(ex.map(_zeros_for, qs, [args.T] * len(qs)))
    else:
        parts = [_zeros_for(q, args.T) for q in qs]
    _emit("".join(parts), args.out)
    return 0


def cmd_zeros_verify(args) -> int:
    tab = ingest_zeros(args.zeros, args.mode)
    rows, bad = [], 0
    for (q, lab) in tab.keys():
        chi = character(q, lab)
        H = tab.complete_height(chi)
        n = count_zeros(tab, chi, H)
        pred, slack = rvm_predict(chi, H), rvm_slack(chi, H)
        ok = abs(n - pred) <= slack
        row = dict(q=q, label=lab, height=H, count=n, rvm=pred, slack=slack, ok=ok)
        if args.recompute:
            ref = sorted(z.gamma for z in find_zeros(chi, H))
            mine = sorted(tab.zeros(chi, H).imag.tolist())
            row["max_gamma_diff"] = (max(abs(a - b) for a, b in zip(ref, mine))
                                     if len(ref) == len(mine) and ref else None)
            row["ok"] = ok = ok and len(ref) == len(mine) and \
                (not ref or row["max_gamma_diff"] <= 1e-8)
        bad += not ok
        rows.append(row)
    _emit(dumps_json(envelope(args, dict(characters=rows, failures=bad))), args.out)
    if bad:
        raise CountMismatch(f"{bad} character(s) failed verification")
    return 0


def cmd_characters_dump(args) -> int:
    buf = io.StringIO()
    for q in args.q:
        dump_csv(q, buf)
    text = buf.getvalue()
    if len(args.q) > 1:  # keep a single header row
        lines = text.splitlines(keepends=True)
        head = lines[0]
        text = head + "".join(l for l in lines if l != head)
    _emit(text, args.out)
    return 0


def cmd_psum(args) -> int:
    w = get_weight(args.weight)
    rows = []
    for q in args.q:
        rs = residue_sums(w, args.x, q)
        chis = character_group(q) if args.label is None else [character(q, args.label)]
        for chi in chis:
            v = rs.psi_chi(chi) if args.kind == "psi" else rs.theta_chi(chi)
            rows.append(dict(x=float(args.x), q=q, label=chi.label, conductor=chi.conductor,
                             kind=args.kind, weight=w.name, re=v.real, im=v.imag,
                             truncation_bound=rs.truncation_bound))
    _emit(dumps_csv(rows), args.out)
    return 0


def cmd_variance(args) -> int:
    w = get_weight(args.weight)
    rows = []
    for q in args.q:
        r = variance_report(w, args.x, q, classical=args.classical)
        d = r.as_dict()
        d["v_rel_diff"] = abs(r.v_eta_residue - r.v_eta_parseval) / max(abs(r.v_eta_residue), 1e-300)
        d["g_rel_diff"] = abs(r.g_eta_residue - r.g_eta_parseval) / max(abs(r.g_eta_residue), 1e-300)
        rows.append(d)
    _emit(dumps_csv(rows), args.out)
    return 0


def cmd_explicit(args) -> int:
    w = get_weight(args.weight)
    tab = _table(args)
    chi = character(args.q, args.label)
    ts = list(args.log_x or []) + [math.log(x) for x in (args.x or [])]
    if not ts:
        raise UsageError("explicit needs --log-x or --x")
    T = args.T if args.T is not None else tab.complete_height(chi)
    rows = []
    for t in ts:
        ev = psi_eta_explicit(w, t, chi, tab, T, mode=args.mode, c_abs=args.c_abs)
        row = dict(log_x=t, q=args.q, label=args.label, weight=w.name, T=T,
                   re=ev.normalized.real, im=ev.normalized.imag,
                   tail_certificate=ev.tail_certificate, error_interval=ev.error_interval,
                   n_zeros=ev.n_zeros)
        if args.direct and t <= math.log(X_MAX):
            d = psi_eta_direct(w, math.exp(t), chi).value / math.exp(t / 2)
            row.update(direct_re=d.real, direct_im=d.imag,
                       gap=abs(d - ev.normalized) * math.exp(t / 2))
        rows.append(row)
    _emit(dumps_csv(rows), args.out)
    return 0


def cmd_weil(args) -> int:
    w = get_weight(args.weight)
    tab = _table(args)
    rows = []
    for q in args.q:
        for chi in character_group(q):
            if chi.is_principal or not chi.is_primitive:
                continue
            T = args.T if args.T is not None else tab.complete_height(chi)
            s = weil_sum(w, chi, tab, T)
            ref = w.at_one * math.log(chi.conductor)
            rows.append(dict(q=q, label=chi.label, T=T, weight=w.name, re=s.real, im=s.imag,
                             eta1_log_q=ref, deviation=abs(s - ref)))
    _emit(dumps_csv(rows), args.out)
    return 0


def cmd_violate(args) -> int:
    if args.mode != "strict":
        raise UsageError("violate runs in strict mode only")
    w = get_weight(args.weight)
    code = 0
    try:
        rep = violation_experiment(w, args.Q, args.target, _table(args),
                                   mode=args.family_mode, D_eta=args.d_eta,
                                   search=args.search, seed=args.seed, c_abs=args.c_abs,
                                   c_err=args.c_err)
        result = rep.as_dict()
    except PrimevarError as exc:
        rep = getattr(exc, "report", None)
        if rep is None:
            raise
        result = rep.as_dict()
        result["failure"] = f"{type(exc).__name__}: {exc}"
        code = exc.exit_code
    _emit(dumps_json(envelope(args, result, args.weight)), args.out)
    if args.csv:
        _emit(dumps_csv(result["per_character"]), args.csv)
    return code


def measure_c_err(w, moduli, xs, tab) -> dict:
    """max |direct - explicit| / log(q + 1) after removing the zero-tail certificate."""
    worst, where = 0.0, None
    for q in moduli:
        for chi in character_group(q):
            if chi.is_principal:
                continue
            H = tab.complete_height(chi)
            rs = None
            for x in xs:
                rs = residue_sums(w, x, q)
                d = rs.psi_chi(chi)
                ev = psi_eta_explicit(w, math.log(x), chi, tab, H)
                gap = abs(d - ev.value) - ev.tail_certificate * math.sqrt(x)
                r = max(gap, 0.0) / math.log(q + 1)
                if r > worst:
                    worst, where = r, [q, chi.label, x]
    return dict(c_err_observed=worst, worst_case=where)


def cmd_calibrate(args) -> int:
    tab = _table(args)
    w = get_weight(args.weight)
    moduli = args.q or [q for q in range(3, 11)]
    rep = calibrate(tab, moduli, c_abs=args.c_abs).as_dict()
    rep.update(measure_c_err(w, moduli, args.x or [1e3, 1e4, 1e5], tab))
    rep["c_err_configured"] = args.c_err
    rep["c_err_admissible"] = rep["c_err_observed"] <= args.c_err
    _emit(dumps_json(envelope(args, rep, args.weight)), args.out)
    return 0


def cmd_report(args) -> int:
    rows, fields = [], []
    for path in args.inputs:
        with open(path, encoding="utf-8", newline="") as fh:
            rd = csv.DictReader(fh)
            for f in rd.fieldnames or []:
                if f not in fields:
                    fields.append(f)
            for r in rd:
                r["source"] = path
                rows.append(r)
    _emit(dumps_csv(rows, ["source"] + fields), args.out)
    return 0


# -- parser ------------------------------------------------------------------

def _common(p, weight=True, zeros=True):
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=("strict", "exploratory"), default="strict")
    p.add_argument("--c-abs", type=float, default=1.0)
    p.add_argument("--c-err", type=float, default=10.0)
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    if weight:
        p.add_argument("--weight", default="exp_linear")
    if zeros:
        p.add_argument("--zeros", default=None, help="zero table (default: bundled)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="primevar", description=__doc__.split("\n")[0])
    ap.add_argument("--config", default=None, help="key=value file; flags override it")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command")

    z = sub.add_parser("zeros", help="compute or verify zero tables")
    zs = z.add_subparsers(dest="action")
    p = zs.add_parser("compute")
    _common(p, weight=False, zeros=False)
    p.add_argument("--q", type=int, nargs="+")
    p.add_argument("--T", type=float, default=100.0)
    p.set_defaults(func=cmd_zeros_compute, command_name="zeros compute")
    p = zs.add_parser("verify")
    _common(p, weight=False)
    p.add_argument("--recompute", action="store_true")
    p.set_defaults(func=cmd_zeros_verify, command_name="zeros verify")

    c = sub.add_parser("characters", help="character tables")
    cs = c.add_subparsers(dest="action")
    p = cs.add_parser("dump")
    _common(p, weight=False, zeros=False)
    p.add_argument("--q", type=int, nargs="+")
    p.set_defaults(func=cmd_characters_dump, command_name="characters dump")

    p = sub.add_parser("psum", help="direct weighted prime sums")
    _common(p, zeros=False)
    p.add_argument("--x", type=float)
    p.add_argument("--q", type=int, nargs="+")
    p.add_argument("--label", type=int, default=None)
    p.add_argument("--kind", choices=("psi", "theta"), default="psi")
    p.set_defaults(func=cmd_psum, command_name="psum")

    p = sub.add_parser("variance", help="V_eta and G_eta on both sides")
    _common(p, zeros=False)
    p.add_argument("--x", type=float)
    p.add_argument("--q", type=int, nargs="+")
    p.add_argument("--classical", action="store_true")
    p.set_defaults(func=cmd_variance, command_name="variance")

    p = sub.add_parser("explicit", help="psi_eta from the zeros")
    _common(p)
    p.add_argument("--q", type=int)
    p.add_argument("--label", type=int)
    p.add_argument("--log-x", type=float, nargs="+")
    p.add_argument("--x", type=float, nargs="+")
    p.add_argument("--T", type=float, default=None)
    p.add_argument("--direct", action="store_true", help="also sum over primes")
    p.set_defaults(func=cmd_explicit, command_name="explicit")

    p = sub.add_parser("weil", help="sums of M eta over zeros")
    _common(p)
    p.add_argument("--q", type=int, nargs="+")
    p.add_argument("--T", type=float, default=None)
    p.set_defaults(func=cmd_weil, command_name="weil")

    p = sub.add_parser("violate", help="synchronisation experiment")
    _common(p)
    p.add_argument("--Q", type=int)
    p.add_argument("--target", type=float, default=0.1)
    p.add_argument("--family-mode", choices=("single", "averaged"), default="single",
                   help="single modulus or the range (Q, 2Q]")
    p.add_argument("--d-eta", type=float, default=40.0)
    p.add_argument("--search", choices=("auto", "brute", "lattice"), default="auto")
    p.add_argument("--csv", default=None, help="per-character trace")
    p.set_defaults(func=cmd_violate, command_name="violate")

    p = sub.add_parser("calibrate", help="measure c_abs and c_err")
    _common(p)
    p.add_argument("--q", type=int, nargs="+")
    p.add_argument("--x", type=float, nargs="+")
    p.set_defaults(func=cmd_calibrate, command_name="calibrate")

    p = sub.add_parser("report", help="merge CSV files")
    p.add_argument("--inputs", nargs="+")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_report, command_name="report")
    return ap


def _leaf(ap: argparse.ArgumentParser, argv: List[str]) -> Optional[argparse.ArgumentParser]:
    """The subparser that argv selects (for installing config defaults)."""
    node = ap
    skip = False
    for tok in argv:
        if skip or tok.startswith("-"):
            skip = tok == "--config"
            continue
        subs = [a for a in node._actions if isinstance(a, argparse._SubParsersAction)]
        if not subs or tok not in subs[0].choices:
            break
        node = subs[0].choices[tok]
    return node


def _fix_violate_mode(argv: List[str]) -> List[str]:
    # "violate --mode single|averaged" selects the family; --mode elsewhere is strict/exploratory
    if "violate" not in argv:
        return argv
    out = list(argv)
    for i, tok in enumerate(out[:-1]):
        if tok == "--mode" and out[i + 1] in ("single", "averaged"):
            out[i] = "--family-mode"
        elif tok.startswith("--mode=") and tok.split("=", 1)[1] in ("single", "averaged"):
            out[i] = "--family-mode=" + tok.split("=", 1)[1]
    return out


def main(argv: Optional[List[str]] = None) -> int:
    argv = _fix_violate_mode(list(sys.argv[1:] if argv is None else argv))
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    ap = build_parser()
    cfg_path = None
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            cfg_path = argv[i + 1]
        elif tok.startswith("--config="):
            cfg_path = tok.split("=", 1)[1]
    leaf = _leaf(ap, argv)
    try:
        if cfg_path:
            cfg = read_config(cfg_path)
            if "mode" in cfg and cfg["mode"] in ("single", "averaged"):
                cfg["family_mode"] = cfg.pop("mode")
            apply_config(leaf, cfg)
    except (UsageError, OSError) as exc:
        print(f"primevar: error: {exc}", file=sys.stderr)
        return 2
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not hasattr(args, "func"):
        (leaf or ap).print_usage(sys.stderr)
        return 2
    missing = [d for d in REQUIRED[args.command_name] if getattr(args, d, None) is None]
    if missing:
        leaf.print_usage(sys.stderr)
        flags = ", ".join("--" + m.replace("_", "-") for m in missing)
        print(f"primevar {args.command_name}: error: missing required option {flags}",
              file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except UsageError as exc:
        leaf.print_usage(sys.stderr)
        print(f"primevar {args.command_name}: error: {exc}", file=sys.stderr)
        return 2
    except PrimevarError as exc:
        print(f"primevar {args.command_name}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OverflowError as exc:
        print(f"primevar {args.command_name}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
