"""Scenario runner and verification suite.

``unitint run scenario.json`` integrates one or more scenario files along the
requested solver paths (factorized, hierarchical, bloch, oracle), writes a
trajectory CSV and a JSON report per scenario, and exits nonzero when a
named tolerance fails.  ``unitint verify`` runs the seeded invariant suite
across random instances and prints worst-case residuals.

Exit codes: 0 all verdicts pass, 1 tolerance failure, 2 parse error,
3 solver error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import bloch as bloch_mod
from .factorization import (
    UnsupportedConfigurationError,
    effective_hamiltonian_hermitian,
    gamma1_inv_sqrt_closed,
    gamma1_sqrt_closed,
    hierarchical_solve,
    recursion_hamiltonian,
    solve_factored,
    unitarity_closure,
)
from .hamiltonian import ModelError, from_config, so5_coefficients, trig_random
from .linalg import (
    SingularMatrixError,
    dagger,
    frobenius,
    inv_sqrt_hpd,
    random_traceless_hermitian,
    sqrt_hpd,
    unitarity_defect,
)
from .oracle import compare, propagate
from .riccati import StiffnessError, riccati_rhs


class ScenarioError(ValueError):
    """Scenario file fails schema validation."""


def _matrix_to_pairs(M: np.ndarray):
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(M, complex)]


def load_scenario(path: Path) -> dict:
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON at line {exc.lineno}, col {exc.colno}: {exc.msg}")
    for key in ("id", "family", "t_end", "steps"):
        if key not in raw:
            raise ScenarioError(f"{path}: missing required field {key!r}")
    raw.setdefault("N", 2)
    raw.setdefault("n", 1)
    raw.setdefault("Z_max", 10.0)
    raw.setdefault("paths", ["factorized", "oracle"])
    raw.setdefault("tolerances", {})
    N, n = int(raw["N"]), int(raw["n"])
    if N < 2 or not (1 <= n <= N // 2):
        raise ScenarioError(f"{path}: need N >= 2 and 1 <= n <= N/2, got N={N}, n={n}")
    if float(raw["t_end"]) <= 0 or int(raw["steps"]) < 1:
        raise ScenarioError(f"{path}: need t_end > 0 and steps >= 1")
    unknown = set(raw["paths"]) - {"factorized", "hierarchical", "bloch", "oracle"}
    if unknown:
        raise ScenarioError(f"{path}: unknown paths {sorted(unknown)}")
    return raw


def run_scenario(scenario: dict, out_dir: Path) -> dict:
    """Execute one scenario; returns the report dict (also written to disk)."""
    h = from_config(scenario)
    t_end = float(scenario["t_end"])
    steps = int(scenario["steps"])
    z_max = float(scenario.get("Z_max", 10.0))
    paths = scenario.get("paths", ["factorized", "oracle"])

    endpoint_U: dict[str, np.ndarray] = {}
    unitarity: dict[str, float] = {}
    restart_log = []
    phases = {}
    bloch_report = None
    factored = None
    hier = None

    # the factorized solve always runs: it provides the trajectory CSV
    factored = solve_factored(h, t_end, steps, Z_max=z_max)
    restart_log = [{"path": "factorized", "t": float(t)} for t, _ in factored.restarts]
    if "factorized" in paths:
        endpoint_U["factorized"] = factored.U_samples[-1]
        unitarity["factorized"] = max(
            unitarity_defect(U) for U in factored.U_samples[:: max(1, steps // 50)]
        )
        if factored.mu_total is not None:
            phases["factorized"] = {
                "mu_total": float(factored.mu_total[-1]),
                "geometric": float(factored.phase_geometric[-1]),
                "dynamical": float(factored.phase_dynamical[-1]),
            }
    if "hierarchical" in paths:
        hier = hierarchical_solve(h, t_end, steps, Z_max=z_max)
        endpoint_U["hierarchical"] = hier.U_samples[-1]
        unitarity["hierarchical"] = max(
            unitarity_defect(U) for U in hier.U_samples[:: max(1, steps // 50)]
        )
        restart_log += [
            {"path": "hierarchical", "t": float(t)} for t, _ in hier.restarts
        ]
        phases["hierarchical"] = [
            {
                "level": int(lvl),
                "mu_total": float(hier.level_mu[-1, lvl]),
                "geometric": float(hier.level_geo[-1, lvl]),
                "dynamical": float(hier.level_dyn[-1, lvl]),
            }
            for lvl in range(h.N - 1)
        ]
    if "oracle" in paths:
        oracle_res = propagate(h, t_end, steps)
        endpoint_U["oracle"] = oracle_res.U_final
        unitarity["oracle"] = max(
            unitarity_defect(U) for U in oracle_res.U_samples[:: max(1, steps // 50)]
        )
    if "bloch" in paths:
        bloch_report = bloch_mod.crosscheck_pictures(scenario, t_end, steps, Z_max=z_max)

    distances = {}
    names = sorted(endpoint_U)
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            cmp = compare(endpoint_U[a], endpoint_U[b])
            distances[f"{a}_vs_{b}"] = {
                "plain": cmp.plain,
                "phase_insensitive": cmp.phase_insensitive,
            }

    # verdicts for every named tolerance
    verdicts = {}
    for name, tol in scenario.get("tolerances", {}).items():
        tol = float(tol)
        if name == "oracle_distance":
            measured = max(
                (d["phase_insensitive"] for key, d in distances.items() if "oracle" in key),
                default=0.0,
            )
        elif name == "unitarity":
            measured = max(unitarity.values(), default=0.0)
        elif name == "bloch_deviation":
            measured = bloch_report.max_deviation if bloch_report else 0.0
        elif name == "est_error":
            measured = factored.est_error if factored else 0.0
        else:
            raise ScenarioError(f"unknown tolerance name {name!r}")
        verdicts[name] = {"tolerance": tol, "measured": float(measured), "pass": bool(measured <= tol)}

    report = {
        "id": scenario["id"],
        "endpoint_U": {k: _matrix_to_pairs(v) for k, v in endpoint_U.items()},
        "distances": distances,
        "unitarity": {k: float(v) for k, v in unitarity.items()},
        "phases": phases,
        "restarts": restart_log,
        "verdicts": verdicts,
    }
    if bloch_report is not None:
        report["bloch"] = {
            "max_deviation": bloch_report.max_deviation,
            "norm_drift": bloch_report.norm_drift,
            "restarts": bloch_report.restarts,
            "kappa": bloch_report.kappa,
            "fd_residual": bloch_report.fd_residual,
        }

    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / f"{scenario['id']}_report.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n"
    )
    _write_trajectory_csv(out_dir / f"{scenario['id']}_trajectory.csv", h, factored, bloch_report)
    return report


def _write_trajectory_csv(path: Path, h, factored, bloch_report) -> None:
    m, n = h.N - h.n, h.n
    header = ["t"]
    for i in range(m):
        for j in range(n):
            header += [f"z{i}{j}_re", f"z{i}{j}_im"]
    if factored.mu_total is not None:
        header += ["mu_total", "phase_geometric", "phase_dynamical"]
    if bloch_report is not None:
        header += [f"m{k + 1}" for k in range(bloch_report.m_riccati.shape[1])]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for idx, t in enumerate(factored.times):
            row = [repr(float(t))]
            z = factored.z_samples[idx]
            for i in range(m):
                for j in range(n):
                    row += [repr(float(z[i, j].real)), repr(float(z[i, j].imag))]
            if factored.mu_total is not None:
                row += [
                    repr(float(factored.mu_total[idx])),
                    repr(float(factored.phase_geometric[idx])),
                    repr(float(factored.phase_dynamical[idx])),
                ]
            if bloch_report is not None:
                row += [repr(float(v)) for v in bloch_report.m_riccati[idx]]
            writer.writerow(row)


# ---------------------------------------------------------------------------
# invariant suite
# ---------------------------------------------------------------------------


def _random_z(rng, m, n):
    return rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))


def run_property_suite(seed: int = 42, count: int = 50, max_dim: int = 6) -> dict:
    """Seeded invariant sweep; returns {check name: (worst residual, tolerance, failing seeds)}."""
    checks: dict[str, list] = {
        "closure_z_eq_minus_gamma1_w": [0.0, 1e-10, []],
        "gamma1_sqrt_closed_form": [0.0, 1e-12, []],
        "gamma1_sqrt_squares": [0.0, 1e-12, []],
        "hermitian_effective_blocks": [0.0, 1e-9, []],
        "recursion_trace_identity": [0.0, 1e-10, []],
        "gamma_dot_identity": [0.0, 1e-7, []],
        "phase_split": [0.0, 1e-7, []],
        "picture_crosscheck": [0.0, 1e-6, []],
    }

    def record(name, value, inst_seed):
        entry = checks[name]
        entry[0] = max(entry[0], value)
        if value > entry[1]:
            entry[2].append(inst_seed)

    for i in range(count):
        inst_seed = seed + i
        rng = np.random.default_rng(inst_seed)
        N = int(rng.integers(2, max_dim + 1))
        n = int(rng.integers(1, N // 2 + 1))
        m = N - n

        z = _random_z(rng, m, n)
        w, g1, g2 = unitarity_closure(z)
        record("closure_z_eq_minus_gamma1_w", frobenius(z + g1 @ w), inst_seed)

        zc = _random_z(rng, m, 1)
        record(
            "gamma1_sqrt_closed_form",
            max(
                frobenius(gamma1_sqrt_closed(zc) - sqrt_hpd(np.eye(m) + zc @ dagger(zc))),
                frobenius(
                    gamma1_inv_sqrt_closed(zc) - inv_sqrt_hpd(np.eye(m) + zc @ dagger(zc))
                ),
            ),
            inst_seed,
        )
        s = gamma1_sqrt_closed(zc)
        record(
            "gamma1_sqrt_squares",
            frobenius(s @ s - (np.eye(m) + zc @ dagger(zc))),
            inst_seed,
        )

        H = random_traceless_hermitian(rng, N)
        blocks = (H[:m, :m], H[:m, m:], H[m:, m:])
        z_dot = riccati_rhs(blocks, z)
        upper, lower = effective_hamiltonian_hermitian(blocks, z, z_dot)
        record(
            "hermitian_effective_blocks",
            max(frobenius(upper - dagger(upper)), frobenius(lower - dagger(lower))),
            inst_seed,
        )

        blocks1 = (H[: N - 1, : N - 1], H[: N - 1, N - 1 :], H[N - 1 :, N - 1 :])
        z1 = _random_z(rng, N - 1, 1)
        Hrec = recursion_hamiltonian(blocks1, z1)
        bracket = H[N - 1, N - 1].real + (dagger(blocks1[1]) @ z1)[0, 0].real
        record(
            "recursion_trace_identity",
            abs(np.trace(Hrec).real + bracket) + abs(np.trace(Hrec).imag),
            inst_seed,
        )

    # trajectory-level checks on a few instances only (they integrate ODEs)
    for i in range(min(count, 5)):
        inst_seed = seed + 1000 + i
        h = trig_random(3, n=1, seed=inst_seed, scale=0.5)
        res = solve_factored(h, 1.0, 2000)
        traj = res.trajectory
        worst = 0.0
        for k in range(1, len(traj.times) - 1, 11):
            z0, z1_, z2 = traj.z_samples[k - 1], traj.z_samples[k], traj.z_samples[k + 1]
            g = lambda zz: 1.0 + (dagger(zz) @ zz)[0, 0].real
            fd = (g(z2) - g(z0)) / (traj.times[k + 1] - traj.times[k - 1])
            _, V, _ = h.blocks_at(traj.times[k])
            an = (1j * g(z1_) * ((dagger(V) @ z1_) - (dagger(z1_) @ V)))[0, 0].real
            worst = max(worst, abs(fd - an))
        record("gamma_dot_identity", worst, inst_seed)
        record(
            "phase_split",
            float(
                np.max(
                    np.abs(res.mu_total - res.phase_geometric - res.phase_dynamical)
                )
            ),
            inst_seed,
        )

    rep = bloch_mod.crosscheck_su2(np.array([1.0, 0.0, 0.5]), 2.0, 2000)
    record("picture_crosscheck", rep.max_deviation, seed)
    F = np.zeros((5, 5))
    F[4, 3], F[3, 4] = 1.0, -1.0
    rep5 = bloch_mod.crosscheck_so5(so5_coefficients(F), 2.0, 2000)
    record("picture_crosscheck", rep5.max_deviation, seed)

    return {name: tuple(entry) for name, entry in checks.items()}


def _cmd_run(args) -> int:
    exit_code = 0
    for file_path in args.files:
        try:
            scenario = load_scenario(Path(file_path))
            if args.steps is not None:
                scenario["steps"] = args.steps
            if args.paths is not None:
                scenario["paths"] = args.paths.split(",")
        except ScenarioError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        try:
            report = run_scenario(scenario, Path(args.out))
        except (StiffnessError, SingularMatrixError, ModelError, UnsupportedConfigurationError) as exc:
            print(f"solver error in {scenario['id']}: {exc}", file=sys.stderr)
            return 3
        failed = [k for k, v in report["verdicts"].items() if not v["pass"]]
        status = "FAIL" if failed else "ok"
        print(f"{scenario['id']}: {status}" + (f" ({', '.join(failed)})" if failed else ""))
        if failed:
            exit_code = 1
    return exit_code


def _cmd_verify(args) -> int:
    results = run_property_suite(seed=args.seed, count=args.count, max_dim=args.max_dim)
    width = max(len(k) for k in results)
    failed = False
    print(f"{'check':<{width}}  {'worst':>12}  {'tolerance':>10}  verdict")
    for name, (worst, tol, bad_seeds) in results.items():
        verdict = "ok" if not bad_seeds else f"FAIL (seeds {sorted(set(bad_seeds))})"
        failed = failed or bool(bad_seeds)
        print(f"{name:<{width}}  {worst:>12.3e}  {tol:>10.1e}  {verdict}")
    return 1 if failed else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="unitint",
        description="Riccati-factorized evolution operators: scenario runner and verifier.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run scenario JSON files")
    p_run.add_argument("files", nargs="+", help="scenario JSON files")
    p_run.add_argument("--out", default=".", help="output directory")
    p_run.add_argument("--steps", type=int, default=None, help="override step count")
    p_run.add_argument("--paths", default=None, help="comma-separated solver paths")
    p_run.set_defaults(func=_cmd_run)

    p_verify = sub.add_parser("verify", help="run the seeded invariant suite")
    p_verify.add_argument("--seed", type=int, default=42)
    p_verify.add_argument("--count", type=int, default=50)
    p_verify.add_argument("--max-dim", type=int, default=6, dest="max_dim")
    p_verify.set_defaults(func=_cmd_verify)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
