"""Command-line front end.

Subcommands: ``simulate`` runs the full measurement pipeline and writes a
JSON report plus a histogram CSV (and companion PNG figures); ``decohere``
sweeps the dephasing diagnostics over interaction time; ``equivalence``
tests the global-phase equivalence of two gauge events on a meter state.

Exit codes: 0 success, 2 validation/usage error, 3 statistics-check
failure. Every source of randomness is the scenario's base_seed; ``--seed``
overrides it, and the GM_SEED environment variable sits between the two in
precedence.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .composite import evolve, offdiagonal_suppression, prepare_product_state
from .decoherence import decoherence_verdict, generator_basis
from .ensemble import chi_square_counts, run_pipeline
from .errors import GoldmeterError, ScenarioError
from .eventreading import GaugeEvent, equivalence_test
from .scenario import load_scenario, resolved_dict
from .sectors import GaussianProfile, build_grid
from .serialize import save_state_snapshot, write_csv, write_json
from .statespace import MeterBasis, MeterState


def _resolve_seed(cli_seed: Optional[int]) -> Optional[int]:
    if cli_seed is not None:
        return cli_seed
    env = os.environ.get("GM_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ScenarioError(f"GM_SEED must be an integer, got {env!r}") from None
    return None


def _out_path(scenario_path: Path, out_dir: Optional[str], filename: str) -> Path:
    base = Path(out_dir) if out_dir else scenario_path.parent
    return base / filename


def _figure_path(csv_path: Path) -> Path:
    return csv_path.with_suffix(".png")


def cmd_simulate(args: argparse.Namespace) -> int:
    scenario_path = Path(args.scenario)
    sc = load_scenario(scenario_path, seed_override=_resolve_seed(args.seed))
    spec = sc.ensemble
    report = run_pipeline(spec, keep_outcomes=sc.output.outcomes is not None)

    checks = []
    all_passed = True
    for check in sc.checks:
        chi2, ok = chi_square_counts(
            np.array([report.counts[n] for n in sorted(report.counts)], dtype=float),
            np.array(check.targets, dtype=float),
        )
        checks.append(
            {"kind": "born", "targets": list(check.targets), "chi_square": chi2, "passed": ok}
        )
        all_passed = all_passed and ok

    doc = {
        "schema": 1,
        "scenario": resolved_dict(sc),
        "results": {
            "stage": report.stage.value,
            "stage_sequence": [s.value for s in report.stage_sequence],
            "counts": report.counts,
            "frequencies": report.frequencies,
            "born_targets": report.born_targets,
            "chi_square": report.chi_square,
            "chi_square_pass": report.chi_square_pass,
            "refused": report.refused,
            "n_copies": report.n_copies,
            "decoherence_verdicts": {
                "n_observables": report.decoherence_verdicts.n_observables,
                "n_passed": report.decoherence_verdicts.n_passed,
                "min_ratio": report.decoherence_verdicts.min_ratio,
                "all_passed": report.decoherence_verdicts.all_passed,
            },
            "checks": checks,
        },
    }
    report_path = _out_path(scenario_path, args.out, sc.output.report)
    write_json(report_path, doc)

    hist_path = _out_path(scenario_path, args.out, sc.output.histogram)
    rows = [
        [n, report.counts[n], report.frequencies.get(n, 0.0), report.born_targets[n]]
        for n in sorted(report.counts)
    ]
    write_csv(hist_path, ["meter_index", "count", "frequency", "born_target"], rows)

    if sc.output.snapshot is not None:
        grid = build_grid(spec.compartments, spec.grid_profile)
        evolved = evolve(prepare_product_state(spec.psi0, grid), spec.t_decohere, spec.interaction)
        save_state_snapshot(evolved, _out_path(scenario_path, args.out, sc.output.snapshot))

    if sc.output.outcomes is not None and report.outcomes is not None:
        outcome_rows = [
            [i, o.event.iv, o.event.delta_xi, o.equivalence_passed,
             "" if o.collapsed_index is None else o.collapsed_index]
            for i, o in enumerate(report.outcomes)
        ]
        write_csv(
            _out_path(scenario_path, args.out, sc.output.outcomes),
            ["copy_id", "iv", "delta_xi", "equivalence_passed", "collapsed_index"],
            outcome_rows,
        )

    if not args.no_figures:
        from .figures import save_histogram_figure

        save_histogram_figure(
            report,
            _figure_path(hist_path),
            labels=spec.psi0.basis.labels,
            title=f"{sc.name}: meter outcome statistics",
        )

    print(f"report: {report_path}")
    print(f"histogram: {hist_path}")
    print(
        f"stage: {report.stage.value}, refused: {report.refused}/{report.n_copies}, "
        f"chi_square: {report.chi_square}"
    )
    return 0 if all_passed else 3


def cmd_decohere(args: argparse.Namespace) -> int:
    scenario_path = Path(args.scenario)
    sc = load_scenario(scenario_path, seed_override=_resolve_seed(args.seed))
    spec = sc.ensemble
    grid = build_grid(spec.compartments, spec.grid_profile)
    state0 = prepare_product_state(spec.psi0, grid)
    observables = generator_basis(spec.psi0.basis)
    dim = spec.psi0.dim
    pairs = [(m, n) for m in range(dim) for n in range(m + 1, dim)]

    ts = np.linspace(0.0, sc.sweep.t_max, sc.sweep.n_steps + 1)
    header = ["t"] + [f"offdiag_{m}_{n}" for m, n in pairs] + ["min_ratio", "decohered"]
    rows = []
    columns: dict[str, list[float]] = {f"offdiag_{m}_{n}": [] for m, n in pairs}
    for t in ts:
        st = evolve(state0, float(t), spec.interaction)
        sups = [abs(offdiagonal_suppression(st, m, n)) for m, n in pairs]
        verdicts = [decoherence_verdict(st, o, spec.R) for o in observables]
        min_ratio = min(v.ratio for v in verdicts)
        decohered = all(v.decohered for v in verdicts)
        rows.append([float(t)] + sups + [min_ratio, decohered])
        for (m, n), s in zip(pairs, sups):
            columns[f"offdiag_{m}_{n}"].append(s)

    sweep_path = _out_path(scenario_path, args.out, sc.output.sweep)
    write_csv(sweep_path, header, rows)

    if not args.no_figures:
        from .figures import save_dephasing_figure

        envelope = None
        if isinstance(spec.grid_profile, GaussianProfile):
            sigma = spec.grid_profile.sigma_v
            scale = spec.interaction.coupling / spec.interaction.hbar
            eig = spec.psi0.basis.eigenvalue_array
            envelope = {
                f"offdiag_{m}_{n}": np.exp(
                    -(sigma**2) * (scale * ts) ** 2 * (eig[m] - eig[n]) ** 2 / 2.0
                ).tolist()
                for m, n in pairs
            }
        save_dephasing_figure(
            ts.tolist(), columns, _figure_path(sweep_path), envelope=envelope,
            title=f"{sc.name}: off-diagonal suppression",
        )

    print(f"sweep: {sweep_path}")
    return 0


def _parse_complex_list(text: str) -> list[complex]:
    try:
        return [complex(tok.strip().replace("i", "j")) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ScenarioError(f"cannot parse amplitude list {text!r}: {exc}") from exc


def cmd_equivalence(args: argparse.Namespace) -> int:
    amps = _parse_complex_list(args.psi)
    if not amps:
        raise ScenarioError("--psi needs at least one amplitude")
    if args.meter is not None:
        eig = tuple(float(tok) for tok in args.meter.split(",") if tok.strip())
    else:
        eig = tuple(float(k) for k in range(len(amps)))
    basis = MeterBasis(eig)
    psi = MeterState(np.array(amps, dtype=complex), basis)
    if not psi.is_normalized(1e-6):
        raise ScenarioError("--psi must be normalized (|sum of squares - 1| < 1e-6)")
    psi = psi.normalized()

    # Events are specified by their coordinate increment directly; the
    # compartment index is a placeholder for externally supplied events.
    e1 = GaugeEvent.from_velocity(iv=-1, xi_dot=args.e1, mu=1.0)
    e2 = GaugeEvent.from_velocity(iv=-1, xi_dot=args.e2, mu=1.0)
    equivalent, discrepancy = equivalence_test(psi, e1, e2, tol=args.tol)
    print(
        f"equivalent: {'true' if equivalent else 'false'}, "
        f"discrepancy: ({discrepancy.real:.6g}, {discrepancy.imag:.6g})"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="goldmeter",
        description="two-stage projective measurement simulator (dephasing + event reading)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, func, doc in (
        ("simulate", cmd_simulate, "run the pipeline; write report, histogram, figures"),
        ("decohere", cmd_decohere, "sweep dephasing diagnostics over interaction time"),
    ):
        p = sub.add_parser(name, help=doc)
        p.add_argument("scenario", help="scenario JSON file")
        p.add_argument("--seed", type=int, default=None, help="override base_seed")
        p.add_argument("--out", default=None, help="output directory (default: scenario dir)")
        p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
        p.set_defaults(func=func)

    p = sub.add_parser("equivalence", help="global-phase equivalence of two gauge events")
    p.add_argument("--psi", required=True, help="comma-separated complex amplitudes")
    p.add_argument("--meter", default=None, help="comma-separated meter eigenvalues")
    p.add_argument("--e1", type=float, required=True, help="coordinate increment of event 1")
    p.add_argument("--e2", type=float, required=True, help="coordinate increment of event 2")
    p.add_argument("--tol", type=float, default=1e-9, help="discrepancy tolerance")
    p.set_defaults(func=cmd_equivalence)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (GoldmeterError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
