"""``lab`` command line: one subcommand per experiment, exact CSV/JSON output.

Settings are merged as defaults < ``--config`` file (flat ``key=value``) < flags.
Exit codes: 0 all checks pass, 1 some check failed, 2 budget exhausted or unknown.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import averaging, covering, groups
from .dynamics import hopf, tower

EXIT_PASS, EXIT_FAIL, EXIT_UNKNOWN = 0, 1, 2

DEFAULTS = {
    "group": "heis",
    "rank": 2,
    "format": "csv",
    "seed": 0,
    "budget": groups.DEFAULT_BUDGET,
    "stages": 3,
    "horizon": 24,
    "n_max": 16,
    "slope_lo": 8,
    "slope_hi": 16,
    "r_min": 0,
    "r_max": 6,
    "k": 3,
    "radius": 2,
    "search_budget": 200000,
    "i_max": 16,
    "trials": 20,
    "support": 6,
    "spread": 20,
    "snapshot_dir": "",
    "thresholds": "0,1/2,1,3/2,2,3,4,6,8",
}

HELP = {
    "group": "group kind: zd | heis | free | zinf",
    "rank": "rank for zd / free / zinf",
    "n_max": "largest ball radius (balls)",
    "slope_lo": "slope window start (balls)",
    "slope_hi": "slope window end (balls)",
    "r_min": "smallest r (mset)",
    "r_max": "largest r (mset)",
    "k": "target multiplicity (incremental)",
    "radius": "common radius for non-Heisenberg search (incremental)",
    "search_budget": "node budget for witness search",
    "i_max": "largest index i (avgseq); hopf and maximal use --horizon",
    "trials": "random systems (hopf, maximal)",
    "support": "max support size of random functions",
    "spread": "support points drawn from [-spread, spread]",
    "snapshot_dir": "write per-stage JSON snapshots here (stack)",
    "thresholds": "comma separated rational grid (maximal)",
}


@dataclass
class ExperimentConfig:
    command: str
    settings: dict

    def __getitem__(self, key):
        return self.settings[key]

    def int(self, key) -> int:
        return int(self.settings[key])

    @property
    def ctx(self) -> groups.GroupContext:
        return groups.from_kind(self["group"], self.int("rank"), budget=self.int("budget"))


@dataclass
class ExperimentReport:
    columns: list
    rows: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    status: int = EXIT_PASS

    def check(self, name: str, ok: bool) -> None:
        self.summary[name] = "pass" if ok else "fail"
        if not ok and self.status == EXIT_PASS:
            self.status = EXIT_FAIL


def read_config(path: Optional[str]) -> dict:
    out = {}
    if not path:
        return out
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"bad config line: {line!r}")
        key, val = line.split("=", 1)
        out[key.strip()] = val.strip()
    return out


# -- value rendering --------------------------------------------------------------


def _csv_cell(x) -> str:
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    if x is None:
        return ""
    if isinstance(x, (tuple, list)):
        return " ".join(_csv_cell(y) for y in x)
    return str(x)


def _json_value(x):
    if isinstance(x, Fraction):
        return [x.numerator, x.denominator]
    if isinstance(x, (tuple, list)):
        return [_json_value(y) for y in x]
    if isinstance(x, dict):
        return {str(k): _json_value(v) for k, v in x.items()}
    return x


def render(report: ExperimentReport, fmt: str) -> str:
    if fmt == "json":
        doc = {
            "columns": report.columns,
            "rows": [[_json_value(r.get(c)) for c in report.columns] for r in report.rows],
            "summary": _json_value(report.summary),
        }
        return json.dumps(doc, sort_keys=True, indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(report.columns)
    for r in report.rows:
        w.writerow([_csv_cell(r.get(c)) for c in report.columns])
    return buf.getvalue()


# -- commands -----------------------------------------------------------------------


def cmd_balls(cfg: ExperimentConfig) -> ExperimentReport:
    ctx = cfg.ctx
    n_max = cfg.int("n_max")
    sizes = groups.ball_sizes(ctx, n_max)
    rep = ExperimentReport(["n", "size"])
    for n, s in enumerate(sizes):
        rep.rows.append({"n": n, "size": s})
    rep.check("nested_strict", all(a < b for a, b in zip(sizes, sizes[1:])))
    if ctx.kind == "zd" and ctx.rank == 2:
        rep.check("diamond_closed_form", all(s == 2 * n * n + 2 * n + 1 for n, s in enumerate(sizes)))
    lo, hi = cfg.int("slope_lo"), min(cfg.int("slope_hi"), n_max)
    if 1 <= lo < hi:
        slope = groups.loglog_slope(sizes, lo, hi)
        rep.summary["loglog_slope_fit"] = round(slope, 6)
        if ctx.kind == "heis":
            rep.check("heis_slope_in_[3.5,4.5]", 3.5 <= slope <= 4.5)
    return rep


def cmd_mset(cfg: ExperimentConfig) -> ExperimentReport:
    rep = ExperimentReport(["r", "size", "min", "max", "gap_s", "gap_t", "gap", "symmetric"])
    gaps = []
    for r in range(cfg.int("r_min"), cfg.int("r_max") + 1):
        M = groups.central_powers_in_ball(r)
        gap = covering.maximal_gap(M)
        sym = all(-m in M for m in M)
        rep.rows.append(
            {
                "r": r,
                "size": len(M),
                "min": min(M),
                "max": max(M),
                "gap_s": gap[0] if gap else None,
                "gap_t": gap[1] if gap else None,
                "gap": gap[1] - gap[0] if gap else None,
                "symmetric": sym,
            }
        )
        rep.check(f"symmetric_r{r}", sym)
        if gap:
            gaps.append(gap[1] - gap[0])
    rep.check("gap_positive", all(g > 0 for g in gaps))
    rep.check("gap_weakly_increasing", all(a <= b for a, b in zip(gaps, gaps[1:])))
    rep.summary["max_gap_sequence"] = gaps
    return rep


def cmd_incremental(cfg: ExperimentConfig) -> ExperimentReport:
    ctx = cfg.ctx
    k = cfg.int("k")
    rep = ExperimentReport(["index", "radius", "center", "contains_identity"])
    try:
        if ctx.kind == "heis":
            seq = covering.heisenberg_incremental(k, ctx, budget=cfg.int("search_budget"))
        else:
            res = covering.incremental_witness_search(ctx, [cfg.int("radius")] * k, k, budget=cfg.int("search_budget"))
            if not res.found:
                rep.rows.append({"index": "unknown", "radius": cfg.int("radius"), "center": res.status})
                rep.summary["status"] = "unknown"
                rep.summary["nodes"] = res.nodes
                rep.status = EXIT_UNKNOWN
                return rep
            seq = res.sequence
    except groups.BudgetExceeded as exc:
        rep.rows.append({"index": "unknown", "center": str(exc)})
        rep.summary["status"] = "unknown"
        rep.status = EXIT_UNKNOWN
        return rep
    fam = seq.family
    for i, (n, g) in enumerate(fam.members, start=1):
        rep.rows.append({"index": i, "radius": n, "center": list(g), "contains_identity": fam.contains(i - 1, ctx.identity)})
    doc = covering.family_to_dict(seq)
    rep.summary["certificate"] = doc["certificate"]
    rep.check("incremental", doc["certificate"]["incremental"])
    rep.check("multiplicity_at_identity", covering.multiplicity_at(fam, ctx.identity) == k)
    return rep


def cmd_avgseq(cfg: ExperimentConfig) -> ExperimentReport:
    rows = averaging.avgseq_rows(cfg.int("i_max"))
    rep = ExperimentReport(list(rows[0]), rows)
    rep.check("nesting", all(r["nesting"] for r in rows))
    rep.check("strictly_increasing", all(a["n"] < b["n"] for a, b in zip(rows, rows[1:])))
    return rep


def _random_function(rng: random.Random, size: int, spread: int, positive: bool) -> dict:
    f = {}
    for _ in range(rng.randint(1, size)):
        s = rng.randint(-spread, spread)
        v = Fraction(rng.randint(1, 9), rng.randint(1, 4))
        if not positive and rng.random() < 0.3:
            v = -v
        f[s] = f.get(s, Fraction(0)) + v
    return f


def _random_hopf(rng, cfg, positive_psi: bool = False) -> hopf.HopfSystem:
    while True:
        phi = _random_function(rng, cfg.int("support"), cfg.int("spread"), True)
        psi = _random_function(rng, cfg.int("support"), cfg.int("spread"), positive_psi)
        try:
            return hopf.hopf_system(phi, psi)
        except averaging.ZeroDenominator:
            continue


def cmd_hopf(cfg: ExperimentConfig) -> ExperimentReport:
    rng = random.Random(cfg.int("seed"))
    seq = averaging.DEFAULT_INDEX
    rep = ExperimentReport(["trial", "x", "i", "n", "R", "limit", "phi_i", "absorbed"])
    all_ok, stat_ok = True, True
    for t in range(cfg.int("trials")):
        sys_ = _random_hopf(rng, cfg)
        x = rng.randint(-cfg.int("spread"), cfg.int("spread"))
        thr = sys_.absorption_radius(x)
        for i in range(1, cfg.int("horizon") + 1):
            n = seq.n(i)
            try:
                R = sys_.R(n, x)
            except averaging.ZeroDenominator:
                R = None
            phi_i = None
            if i >= 2:
                try:
                    phi_i = averaging.boundary_ratio_phi_i(sys_.ball_sum("phi", x), i)
                except averaging.ZeroDenominator:
                    phi_i = None
            absorbed = n >= thr
            if absorbed and R != sys_.limit:
                all_ok = False
            # once F_{i-1}^+ holds the support the annulus sits outside it
            if i >= 2 and averaging.averaging_sets(i - 1).F_plus >= thr and phi_i != 0:
                stat_ok = False
            rep.rows.append({"trial": t, "x": x, "i": i, "n": n, "R": R, "limit": sys_.limit, "phi_i": phi_i, "absorbed": absorbed})
    rep.check("ratio_equals_limit_past_threshold", all_ok)
    rep.check("boundary_statistic_zero_past_threshold", stat_ok)
    return rep


def cmd_stack(cfg: ExperimentConfig) -> ExperimentReport:
    if cfg["group"] != "heis":
        rep = ExperimentReport(["stage"])
        rep.summary["status"] = "only the Heisenberg provider is available"
        rep.status = EXIT_UNKNOWN
        return rep
    history, plans = tower.build_tower(cfg.int("stages"), ctx=groups.heisenberg(budget=cfg.int("budget")))
    rep = ExperimentReport(["stage", "N", "v", "H", "pieces", "phi_l1", "psi_l1", "alternation", "index_growth", "compatible"])
    snap_dir = cfg["snapshot_dir"]
    for idx, st in enumerate(history):
        plan = plans[idx - 1] if idx else None
        upto = history[: idx + 1]
        viol = tower.verify_alternation(upto)
        alt = not any("R=" in v and f"stage {st.n}:" in v for v in viol)
        grow = not any("index" in v and f"stage {st.n}:" in v for v in viol)
        compat = True if idx == 0 else not tower.check_compatibility(history[idx - 1], st, seed=cfg.int("seed"))
        rep.rows.append(
            {
                "stage": st.n,
                "N": plan.N if plan else None,
                "v": plan.v if plan else None,
                "H": len(plan.H) if plan else None,
                "pieces": len(st.pieces),
                "phi_l1": st.norm("phi"),
                "psi_l1": st.norm("psi"),
                "alternation": alt,
                "index_growth": grow,
                "compatible": compat,
            }
        )
        rep.check(f"stage{st.n}_alternation", alt)
        rep.check(f"stage{st.n}_index_growth", grow)
        rep.check(f"stage{st.n}_compatible", compat)
        rep.check(f"stage{st.n}_norms", st.norm("phi") < 2 and st.norm("psi") < 2)
        rep.check(f"stage{st.n}_disjoint", not st.check_invariants())
        if snap_dir:
            Path(snap_dir).mkdir(parents=True, exist_ok=True)
            (Path(snap_dir) / f"stage{st.n}.json").write_text(st.to_json() + "\n")
    return rep


def cmd_maximal(cfg: ExperimentConfig) -> ExperimentReport:
    """Superlevel mass of a finite-horizon dls proxy of the ratios, per threshold."""
    rng = random.Random(cfg.int("seed"))
    grid = [Fraction(t) for t in cfg["thresholds"].split(",")]
    seq = averaging.DEFAULT_INDEX
    I = cfg.int("horizon")
    rep = ExperimentReport(["trial", "t", "nu_mass", "bound", "ratio"])
    worst = Fraction(0)
    monotone = True
    for trial in range(cfg.int("trials")):
        sys_ = _random_hopf(rng, cfg, positive_psi=True)
        total_phi = sum(sys_.phi.values(), Fraction(0))
        proxy = {}
        for x in sorted(sys_.psi):
            vals = [sys_.R(seq.n(i), x) for i in range(1, I + 1)]
            proxy[x] = averaging.dls(vals, I, sorted(set(vals))).value
        prev = None
        for t in grid:
            mass = sum((sys_.psi[x] for x in proxy if proxy[x] > t), Fraction(0))
            bound = total_phi / t if t > 0 else None
            ratio = mass * t / total_phi if t > 0 else None
            if ratio is not None:
                worst = max(worst, ratio)
            if prev is not None and mass > prev:
                monotone = False
            prev = mass
            rep.rows.append({"trial": trial, "t": t, "nu_mass": mass, "bound": bound, "ratio": ratio})
    rep.summary["empirical_constant"] = worst
    rep.check("mass_non_increasing_in_t", monotone)
    return rep


COMMANDS = {
    "balls": cmd_balls,
    "mset": cmd_mset,
    "incremental": cmd_incremental,
    "avgseq": cmd_avgseq,
    "hopf": cmd_hopf,
    "stack": cmd_stack,
    "maximal": cmd_maximal,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lab", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--group", choices=groups.KINDS, help=f"default {DEFAULTS['group']}")
    p.add_argument("--config", help="flat key=value file; any key below is accepted")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), help="default csv")
    p.add_argument("--seed", type=int, help="default 0")
    p.add_argument("--budget", type=int, help=f"element budget, default {DEFAULTS['budget']}")
    p.add_argument("--stages", type=int, help=f"tower stages, default {DEFAULTS['stages']}")
    p.add_argument("--horizon", type=int, help=f"density horizon, default {DEFAULTS['horizon']}")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
    keys = "\n".join(f"  {k} (default {DEFAULTS[k]!r}): {v}" for k, v in HELP.items())
    p.epilog = "config keys:\n" + keys
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    settings = dict(DEFAULTS)
    settings.update(read_config(args.config))
    for item in args.set:
        key, val = item.split("=", 1)
        settings[key] = val
    for key in ("group", "format", "seed", "budget", "stages", "horizon"):
        val = getattr(args, key)
        if val is not None:
            settings[key] = val
    for key in ("seed", "budget", "stages", "horizon"):
        if int(settings[key]) <= 0 and key != "seed":
            print(f"{key} must be positive", file=sys.stderr)
            return EXIT_UNKNOWN
    cfg = ExperimentConfig(args.command, settings)
    try:
        report = COMMANDS[args.command](cfg)
    except groups.BudgetExceeded as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN
    text = render(report, settings["format"])
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    for k, v in report.summary.items():
        print(f"{k}={_csv_cell(v) if not isinstance(v, dict) else json.dumps(_json_value(v), sort_keys=True)}", file=sys.stderr)
    return report.status


if __name__ == "__main__":
    sys.exit(main())
