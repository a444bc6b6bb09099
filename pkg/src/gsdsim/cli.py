"""Command-line front end: configure a run, execute pipeline stages, emit data files.

Subcommands: spectrum | ipea | distill | compile | report.  Options come from
an optional JSON config file plus flag overrides (flags win).  The default
output directory is $GSD_OUT_DIR or ./gsdsim-out.  All commands are
deterministic for a given config and seed.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import distill, ipea, model, noise, pea, pulsec, tomo
from .qcore import DensityMatrix, OperatorMatrix, StateVector, expm_hermitian


@dataclass
class RunConfig:
    J: float = 1.0
    h_cases: list[tuple[str, float]] = field(default_factory=lambda: [("h0", 0.0)])
    points: int = 128
    dt: float | None = None            # defaults to 0.8/J
    iterations: int = 5
    seed: int = 0
    trial: str = "optimized"           # or one of the level labels S, T0, T+1, T-1
    exact_energies: bool = False
    noise: noise.NoiseConfig | None = None
    out_dir: Path = field(default_factory=lambda: Path(os.environ.get("GSD_OUT_DIR", "gsdsim-out")))

    @property
    def params_cases(self) -> list[tuple[str, model.HeisenbergParams]]:
        return [(tag, model.HeisenbergParams(self.J, h)) for tag, h in self.h_cases]

    def grid(self) -> ipea.SampleGrid:
        return ipea.SampleGrid(self.points, self.dt)


def _case_tag(value: float, over_hc: bool) -> str:
    text = f"{value:g}".replace("-", "m").replace(".", "p")
    return f"h{text}hc" if over_hc else f"h{text}"


def _h_cases(J: float, h_values, over_hc: bool) -> list[tuple[str, float]]:
    values = h_values if isinstance(h_values, (list, tuple)) else [h_values]
    hc = J  # crossing field
    return [
        (_case_tag(v, over_hc), float(v) * hc if over_hc else float(v))
        for v in values
    ]


def load_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    raw: dict = {}
    if args.config:
        raw = json.loads(Path(args.config).read_text())
    cfg.J = float(raw.get("J", cfg.J))
    if args.J is not None:
        cfg.J = args.J
    if args.h_over_hc is not None:
        cfg.h_cases = _h_cases(cfg.J, args.h_over_hc, True)
    elif args.h is not None:
        cfg.h_cases = _h_cases(cfg.J, args.h, False)
    elif "h_over_hc" in raw:
        cfg.h_cases = _h_cases(cfg.J, raw["h_over_hc"], True)
    elif "h" in raw:
        cfg.h_cases = _h_cases(cfg.J, raw["h"], False)
    grid = raw.get("grid", {})
    cfg.points = int(args.points if args.points is not None else grid.get("points", cfg.points))
    dt = args.dt if args.dt is not None else grid.get("dt")
    cfg.dt = float(dt) if dt is not None else None
    cfg.iterations = int(
        args.iterations if args.iterations is not None else raw.get("ipea", {}).get("iterations", cfg.iterations)
    )
    cfg.seed = int(args.seed if args.seed is not None else raw.get("seed", cfg.seed))
    cfg.trial = raw.get("trial", cfg.trial)
    if getattr(args, "trial", None):
        cfg.trial = args.trial
    cfg.exact_energies = bool(raw.get("exact_energies", False) or getattr(args, "exact_energies", False))

    noise_raw = raw.get("noise")
    t2_ms = getattr(args, "noise_t2_ms", None)
    delta = getattr(args, "delta_j_rel", None)
    if noise_raw is not None or t2_ms is not None or delta is not None:
        t2_map = dict((noise_raw or {}).get("t2_s", {"a": 1.0, "b": 1.0, "c": 1.0}))
        if t2_ms is not None:
            t2_map = {q: t2_ms * 1e-3 for q in ("a", "b", "c")}
        cfg.noise = noise.NoiseConfig(
            t2_s=t2_map,
            delta_j_rel=float(delta if delta is not None else (noise_raw or {}).get("delta_j_rel", 1e-4)),
            tomo_scale=float((noise_raw or {}).get("tomo_scale", 0.0)),
            seed=cfg.seed,
        )
    if args.out is not None:
        cfg.out_dir = Path(args.out)
    elif "out_dir" in raw:
        cfg.out_dir = Path(raw["out_dir"])

    # validate against module preconditions before running anything
    model.HeisenbergParams(cfg.J, cfg.h_cases[0][1])
    cfg.grid().resolve(model.HeisenbergParams(cfg.J, 0.0))
    if cfg.iterations < 1:
        raise ValueError("iterations must be >= 1")
    if cfg.trial not in ("optimized",) + model.LABELS:
        raise ValueError(f"unknown trial {cfg.trial!r}")
    return cfg


def _trial_state(cfg: RunConfig, p: model.HeisenbergParams) -> StateVector:
    if cfg.trial == "optimized":
        return model.optimized_trial_state(p)
    return model.diagonalize(p).level(cfg.trial).eigenvector


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    print(f"wrote {path}")


def _matrix_json(rho: DensityMatrix) -> dict:
    return {
        "dim": rho.dim,
        "re": [[float(x) for x in row] for row in rho.entries.real],
        "im": [[float(x) for x in row] for row in rho.entries.imag],
    }


def cmd_spectrum(cfg: RunConfig) -> int:
    for tag, p in cfg.params_cases:
        trial = _trial_state(cfg, p)
        hamiltonian = model.build_hamiltonian(p)
        points, dt = cfg.grid().resolve(p)
        records = pea.sample_series(trial, hamiltonian, dt, points)
        spectrum = pea.compute_spectrum(records, p.J)
        _write(cfg.out_dir / f"spectrum_{tag}.csv", pea.spectrum_csv(spectrum))
        _write(cfg.out_dir / f"peaks_{tag}.json", pea.peaks_json(spectrum))
        ground = min(spectrum.peaks, key=lambda pk: pk.energy)
        rel = pea.peak_uncertainty(spectrum)
        print(
            f"{tag}: ground peak {ground.energy:+.6f} (2piJ) = {ground.energy * 2 * np.pi * p.J:+.6f} (J), "
            f"weight {ground.weight:.3f}, relative uncertainty {rel:.1%}"
        )
    return 0


def _thread_json(th: ipea.IpeaThread, p: model.HeisenbergParams) -> dict:
    d = th.digits
    return {
        "sign": d.sign,
        "digits": list(d.digits),
        "value_2piJ": d.value,
        "refined_value_2piJ": th.refined_value,
        "energy_J": d.energy(p.J),
        "uncertainty_2piJ": d.uncertainty,
        "per_iteration_values": [r.value for r in th.reports],
    }


def cmd_ipea(cfg: RunConfig) -> int:
    for tag, p in cfg.params_cases:
        trial = _trial_state(cfg, p)
        threads = ipea.run_ipea_detailed(trial, p, cfg.iterations, cfg.grid())
        lines = []
        for i, th in enumerate(threads):
            for r in th.reports:
                lines.append(json.dumps({
                    "thread": i,
                    "iteration": r.iteration,
                    "scale": r.scale,
                    "digit": r.digit,
                    "value_2piJ": r.value,
                    "corrected": r.corrected,
                    "residual_reading": r.residual_reading,
                }, sort_keys=True))
        _write(cfg.out_dir / f"ipea_{tag}.jsonl", "\n".join(lines) + "\n")
        final = [_thread_json(th, p) for th in threads]
        _write(cfg.out_dir / f"ipea_{tag}_final.json", json.dumps(final, indent=2, sort_keys=True) + "\n")
        for th in threads:
            d = th.digits
            print(
                f"{tag}: eigenvalue {d.value:+.5f} +/- {d.uncertainty:g} (2piJ) "
                f"= {d.energy(p.J):+.6f} (J)"
            )
    return 0


def cmd_distill(cfg: RunConfig) -> int:
    for tag, p in cfg.params_cases:
        trial = _trial_state(cfg, p)
        table = model.diagonalize(p)
        if cfg.noise is not None:
            rho8, rho4, prob = noise.noisy_final_states(
                trial, p, cfg.noise, cfg.iterations, cfg.grid(), cfg.exact_energies
            )
        else:
            if cfg.exact_energies:
                plan = distill.plan_from_spectrum(table)
            else:
                plan = distill.measure_plan(trial, p, cfg.iterations, cfg.grid())
            tagged = distill.build_final_state(trial, p, plan)
            rho8 = tagged.density()
            rho4, prob = distill.project_probe(tagged, 0)
        report = tomo.state_report(rho4, table)
        _write(cfg.out_dir / f"rho8_{tag}.json", json.dumps(_matrix_json(rho8), sort_keys=True) + "\n")
        _write(cfg.out_dir / f"rho4_{tag}.json", json.dumps(_matrix_json(rho4), sort_keys=True) + "\n")
        _write(cfg.out_dir / f"report_{tag}.json", report.to_json())
        weights_csv = "label,weight\n" + "\n".join(
            f"{label},{weight!r}" for label, weight in sorted(report.weights.items())
        ) + "\n"
        _write(cfg.out_dir / f"weights_{tag}.csv", weights_csv)
        print(
            f"{tag}: probe-0 probability {prob:.4f}, ground fidelity {report.fidelity:.6f}, "
            f"projection {report.projection:.6f}"
        )
    return 0


def _controlled_oracle(u4: np.ndarray) -> OperatorMatrix:
    cu = np.zeros((8, 8), dtype=complex)
    cu[0::2, 0::2] = np.eye(4)
    cu[1::2, 1::2] = u4
    return OperatorMatrix(8, cu, "unitary")


def _exact_block(block: str, t: float, p: model.HeisenbergParams) -> OperatorMatrix:
    from .qcore import IDENTITY_2, SPIN_X, SPIN_Y, SPIN_Z

    if block == "controlled_vx":
        gen = OperatorMatrix.hermitian(p.J * np.kron(SPIN_X, SPIN_X))
        return _controlled_oracle(expm_hermitian(gen, t).entries)
    if block == "controlled_vyz":
        gen = OperatorMatrix.hermitian(p.J * (np.kron(SPIN_Y, SPIN_Y) + np.kron(SPIN_Z, SPIN_Z)))
        return _controlled_oracle(expm_hermitian(gen, t).entries)
    if block == "local_field":
        gen = OperatorMatrix.hermitian(p.h * (np.kron(SPIN_Z, IDENTITY_2) + np.kron(IDENTITY_2, SPIN_Z)))
        u4 = expm_hermitian(gen, t).entries
        return OperatorMatrix(8, np.kron(u4, IDENTITY_2), "unitary")
    if block == "controlled_u":
        gen = model.build_hamiltonian(p)
        return _controlled_oracle(expm_hermitian(gen, t).entries)
    raise ValueError(block)


def cmd_compile(cfg: RunConfig) -> int:
    p = cfg.params_cases[0][1]
    t = 0.8 / p.J
    blocks: dict[str, pulsec.PulseProgram] = {
        "state_prep": pulsec.compile_state_prep(),
        "controlled_vx": pulsec.compile_controlled_v("XX", t, p.J),
        "controlled_vyz": pulsec.compile_controlled_v("YZ", t, p.J),
        "local_field": pulsec.compile_local_field(t, p),
        "controlled_u": pulsec.compile_controlled_u(t, p),
    }
    verification: dict[str, dict] = {}
    ok = True
    for name, prog in blocks.items():
        emitted = pulsec.emit(prog)
        _write(cfg.out_dir / f"{name}.pulse", emitted)
        roundtrip = pulsec.parse(emitted) == prog
        entry: dict = {
            "duration_s": prog.duration_s,
            "primitives": len(prog.steps),
            "roundtrip_exact": roundtrip,
        }
        if name == "state_prep":
            unit = pulsec.program_unitary(prog)
            prepared = unit.entries[:, 0]
            target = np.kron(
                model.optimized_trial_state(p).amplitudes,
                np.array([1.0, 1.0]) / np.sqrt(2.0),
            )
            fid = float(abs(np.vdot(target, prepared)) ** 2)
            entry["fidelity"] = fid
            entry["ok"] = bool(fid >= 0.999 and roundtrip)
        else:
            _, dev = pulsec.verify_equivalence(pulsec.program_unitary(prog), _exact_block(name, t, p))
            entry["max_deviation"] = dev
            entry["ok"] = bool(dev < 1e-8 and roundtrip)
        verification[name] = entry
        ok = ok and entry["ok"]
        print(f"{name}: {'ok' if entry['ok'] else 'FAILED'} ({entry})")
    _write(cfg.out_dir / "verification.json", json.dumps(verification, indent=2, sort_keys=True) + "\n")
    return 0 if ok else 1


def cmd_report(cfg: RunConfig) -> int:
    summary: dict[str, dict] = {}
    for tag, p in cfg.params_cases:
        trial = _trial_state(cfg, p)
        hamiltonian = model.build_hamiltonian(p)
        points, dt = cfg.grid().resolve(p)
        spectrum = pea.compute_spectrum(pea.sample_series(trial, hamiltonian, dt, points), p.J)
        threads = ipea.run_ipea_detailed(trial, p, cfg.iterations, cfg.grid())
        table = model.diagonalize(p)
        if cfg.noise is not None:
            report = noise.noisy_pipeline(trial, p, cfg.noise, cfg.iterations, cfg.grid(), cfg.exact_energies)
        else:
            plan = distill.plan_from_spectrum(table) if cfg.exact_energies else distill.measure_plan(
                trial, p, cfg.iterations, cfg.grid()
            )
            rho4, _ = distill.project_probe(distill.build_final_state(trial, p, plan), 0)
            report = tomo.state_report(rho4, table)
        summary[tag] = {
            "J": p.J,
            "h": p.h,
            "coarse_peaks": [
                {"energy_2piJ": pk.energy, "weight": pk.weight} for pk in spectrum.peaks
            ],
            "coarse_relative_uncertainty": pea.peak_uncertainty(spectrum),
            "eigenvalues": [_thread_json(th, p) for th in threads],
            "distilled": report.as_dict(),
        }
        print(f"{tag}: distilled ground fidelity {report.fidelity:.6f}")
    _write(cfg.out_dir / "report.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gsdsim",
        description="Ground-state solver simulator: spectra, digit refinement, distillation, pulse compilation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (
        ("spectrum", cmd_spectrum),
        ("ipea", cmd_ipea),
        ("distill", cmd_distill),
        ("compile", cmd_compile),
        ("report", cmd_report),
    ):
        sp = sub.add_parser(name)
        sp.set_defaults(func=fn)
        sp.add_argument("--config", help="JSON config file; flags override its fields")
        sp.add_argument("--J", type=float, help="exchange coupling (energy units)")
        sp.add_argument("--h", type=float, help="external field (energy units)")
        sp.add_argument("--h-over-hc", dest="h_over_hc", type=float,
                        help="external field as a multiple of the crossing field h_c = J")
        sp.add_argument("--iterations", type=int, help="digit-refinement rounds (default 5)")
        sp.add_argument("--points", type=int, help="samples per spectrum (default 128)")
        sp.add_argument("--dt", type=float, help="sample spacing (default 0.8/J)")
        sp.add_argument("--seed", type=int, help="seed for noise draws")
        sp.add_argument("--noise-t2-ms", dest="noise_t2_ms", type=float,
                        help="uniform per-qubit T2 in milliseconds; enables the noise model")
        sp.add_argument("--delta-j-rel", dest="delta_j_rel", type=float,
                        help="relative coupling jitter; enables the noise model")
        sp.add_argument("--trial", choices=("optimized",) + model.LABELS,
                        help="input state: optimized trial or an exact eigenstate")
        sp.add_argument("--exact-energies", dest="exact_energies", action="store_true",
                        help="feed exact spectrum energies to the distillation plan")
        sp.add_argument("--out", help="output directory (default $GSD_OUT_DIR or ./gsdsim-out)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        return args.func(cfg)
    except (ValueError, RuntimeError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
