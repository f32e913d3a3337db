"""Command-line front end: ``python3 -m phinmod <command> [scenario] [options]``.

Exit status: 0 pass / agreement, 1 mathematical rejection, 2 input error.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor

from . import __version__
from .admissibility import AdmissibilityError, check_closed_form, check_general, oracle_compare
from .builder import BuildError, build_module, enumerate_admissible_partitions, instance_params
from .classify import ClassifyError, classify
from .coeff import CoeffError, format_coeff
from .module import ModuleError, validate
from .scenario import Scenario, ScenarioError, load
from .tower import CASES, TowerError, build_tower, verify_group_relations

HEADER = f"# phinmod-report v1 (phinmod {__version__})"
COMMANDS = ("validate", "build", "check", "classify", "oracle", "enumerate", "batch")

EXIT_OK, EXIT_REJECT, EXIT_INPUT = 0, 1, 2


class InvalidModule(Exception):
    """An explicit module that parses but fails an axiom."""


class Report:
    def __init__(self):
        self.lines = [HEADER]

    def section(self, name: str) -> None:
        self.lines.append(f"[{name}]")

    def add(self, line: str) -> None:
        self.lines.append(line)

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def _tower_section(rep: Report, sc: Scenario) -> None:
    P = sc.params
    rep.section("scenario")
    rep.add(f"case={P.case} p={P.p} m0={P.m0} e_K={P.e_K} m1={P.m1} n1={P.n1} d={P.d} m={P.m} e={P.e}")


def _module(sc: Scenario, check: bool = True):
    """The scenario's module: the explicit ``[module]`` section or the canonical build."""
    if sc.module is None:
        return build_module(sc.params, check=check)
    if check:
        vr = validate(*sc.module)
        if not vr.passed:
            raise InvalidModule(f"[module] fails: {vr.failures()[0].label}")
    return sc.module


def _params_only(sc: Scenario, command: str) -> None:
    if sc.module is not None:
        raise ScenarioError(f"{sc.path}: {command} needs a [params] section, not [module]")


def cmd_validate(sc: Scenario, rep: Report) -> int:
    P = sc.params
    _tower_section(rep, sc)
    _, _, G = build_tower(P.case, P.p, P.m0, P.e_K, P.m1, P.n1, P.d, verify=False)
    rel = verify_group_relations(G)
    rep.section("group")
    for line in rel.lines():
        rep.add(line)
    D, fil = _module(sc, check=False)
    vr = validate(D, fil)
    rep.section("module")
    for line in vr.lines():
        rep.add(line)
    return EXIT_OK if vr.passed else EXIT_REJECT


def cmd_build(sc: Scenario, rep: Report) -> int:
    D, fil = _module(sc)
    _tower_section(rep, sc)
    rep.section("phi")
    for i, X in enumerate(D.A):
        rep.add(f"A[{i}]={_mat(X)}")
    rep.section("monodromy")
    for i, X in enumerate(D.N):
        rep.add(f"N[{i}]={_mat(X)}")
    rep.section("galois")
    for name in sorted(D.galois):
        rep.add(f"{name} shift={D.shift(name)} G[0]={_mat(D.galois[name][0])}")
    rep.section("filtration")
    for j, (k1, k2) in sorted(fil.weights.items()):
        rep.add(f"j={j} weights=({k1},{k2})")
    for jf in sorted(fil.lines, key=repr):
        u, v = fil.lines[jf]
        rep.add(f"j_F={jf} line=({format_coeff(u)} : {format_coeff(v)})")
    return EXIT_OK


def _mat(X) -> str:
    return "[[" + ", ".join(format_coeff(x) for x in X[0]) + "], [" + ", ".join(format_coeff(x) for x in X[1]) + "]]"


def cmd_check(sc: Scenario, rep: Report) -> int:
    D, fil = _module(sc)
    ar = check_general(D, fil)
    if sc.module is None:
        ar.closed_form = check_closed_form(sc.params)
    _tower_section(rep, sc)
    rep.section("admissibility")
    rep.add(f"t_H={ar.t_H} t_N={ar.t_N} lines={ar.tag}{' conditional' if ar.conditional else ''}")
    for line in ar.records():
        rep.add(line)
    if sc.module is not None:
        # no parameters to evaluate the closed forms on
        rep.add(f"general={_verdict(ar.general)} closed_form=n/a")
        return EXIT_OK if ar.general else EXIT_REJECT
    rep.add(f"general={_verdict(ar.general)} closed_form={_verdict(ar.closed_form.admissible)} "
            f"agree={'yes' if ar.agree else 'no'}")
    return EXIT_OK if ar.general and ar.agree else EXIT_REJECT


def _verdict(ok: bool) -> str:
    return "admissible" if ok else "not-admissible"


def cmd_classify(sc: Scenario, rep: Report) -> int:
    D, _ = _module(sc)
    c = classify(D)
    _tower_section(rep, sc)
    rep.section("classification")
    for line in c.records():
        rep.add(line)
    return EXIT_OK if c.case == sc.params.case else EXIT_REJECT


def cmd_enumerate(sc: Scenario, rep: Report) -> int:
    _params_only(sc, "enumerate")
    parts = enumerate_admissible_partitions(sc.params)
    _tower_section(rep, sc)
    rep.section("partitions")
    rep.add(f"count={len(parts)}")
    for part in parts:
        rep.add(" ".join(f"{j}:{lab}" for j, lab in sorted(part.items())) or "(empty)")
    return EXIT_OK if parts else EXIT_REJECT


def _instance(args):
    case, seed, k = args
    params = instance_params(case, seed, k)
    ar = oracle_compare(params)
    tmax = max(ar.closed_form.t_values, default=0)
    return k, bool(ar.agree), bool(ar.general), ar.t_H == ar.t_N, tmax


def run_oracle_batch(case: str, n: int, seed: int, jobs: int = 1) -> tuple[int, list[tuple]]:
    """Seeded instances of the oracle comparison; results ordered by index."""
    tasks = [(case, seed, k) for k in range(n)]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as ex:
            results = list(ex.map(_instance, tasks, chunksize=max(1, n // (4 * jobs))))
    else:
        results = [_instance(t) for t in tasks]
    results.sort()
    return sum(1 for r in results if r[1]), results


def _batch_report(rep: Report, case: str, n: int, seed: int, jobs: int, verbose: bool) -> bool:
    agree, results = run_oracle_batch(case, n, seed, jobs)
    rep.section(f"batch {case}")
    rep.add(f"seed={seed} n={n}")
    if verbose:
        for k, ok, adm, eq, tmax in results:
            rep.add(f"instance={k} agree={'yes' if ok else 'no'} admissible={'yes' if adm else 'no'} "
                    f"t_H=t_N={'yes' if eq else 'no'} t_max={tmax}")
    adm = sum(1 for r in results if r[2])
    tmax = max((r[4] for r in results), default=0)
    rep.add(f"admissible={adm}/{n} t_max={tmax}")
    rep.add(f"{agree}/{n} agree")
    return agree == n


def cmd_oracle(sc: Scenario | None, rep: Report, args) -> int:
    if args.case or sc is None:
        cases = [args.case] if args.case else list(CASES)
        ok = all(_batch_report(rep, c, args.n, args.seed, args.jobs, args.verbose) for c in cases)
        return EXIT_OK if ok else EXIT_REJECT
    _params_only(sc, "oracle")
    ar = oracle_compare(sc.params)
    _tower_section(rep, sc)
    rep.section("oracle")
    for line in ar.records():
        rep.add(line)
    rep.add(f"general={_verdict(ar.general)} closed_form={_verdict(ar.closed_form.admissible)}")
    rep.add("1/1 agree" if ar.agree else "0/1 agree")
    return EXIT_OK if ar.agree else EXIT_REJECT


def cmd_batch(sc: Scenario | None, rep: Report, args) -> int:
    cases = [args.case] if args.case else (sc.run.cases if sc and sc.run.cases else list(CASES))
    n = args.n if args.n_given or sc is None else sc.run.n
    seed = args.seed if args.seed_given or sc is None else sc.run.seed
    results = [_batch_report(rep, c, n, seed, args.jobs, args.verbose) for c in cases]
    return EXIT_OK if all(results) else EXIT_REJECT


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="phinmod", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("scenario", nargs="?", help="INI scenario file")
    ap.add_argument("--seed", type=int, default=None, help="random seed for oracle/batch (default 0)")
    ap.add_argument("--n", type=int, default=None, help="instances per case (default 500)")
    ap.add_argument("--case", choices=CASES, help="restrict oracle/batch to one case")
    ap.add_argument("--jobs", type=int, default=1, help="worker processes for batches")
    ap.add_argument("--out", help="also write the report to this file")
    ap.add_argument("--verbose", action="store_true", help="one line per batch instance")
    ap.add_argument("--version", action="version", version=f"phinmod {__version__}")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    args.n_given, args.seed_given = args.n is not None, args.seed is not None
    args.n = 500 if args.n is None else args.n
    args.seed = 0 if args.seed is None else args.seed
    rep = Report()
    rep.add(f"command={args.command}")
    needs_scenario = args.command in ("validate", "build", "check", "classify", "enumerate")
    try:
        sc = load(args.scenario) if args.scenario else None
        if needs_scenario and sc is None:
            raise ScenarioError(f"{args.command} needs a scenario file")
        if args.n < 1:
            raise ScenarioError("--n must be positive")
        if args.command == "oracle":
            code = cmd_oracle(sc, rep, args)
        elif args.command == "batch":
            code = cmd_batch(sc, rep, args)
        else:
            code = globals()[f"cmd_{args.command}"](sc, rep)
    except (ScenarioError, TowerError, BuildError, CoeffError, AdmissibilityError, ModuleError) as exc:
        rep.add(f"error: {exc}")
        code = EXIT_INPUT
    except (ClassifyError, InvalidModule) as exc:
        rep.add(f"rejected: {exc}")
        code = EXIT_REJECT
    rep.add(f"exit={code}")
    text = rep.text()
    sys.stdout.write(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return code
