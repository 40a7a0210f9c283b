"""``phsym`` command line: verification suites with JSON reports."""

from __future__ import annotations

import argparse
import json
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

SCHEMA_VERSION = 1

XI_ORACLE_CAP = 11
XI_FAST_CAP = 20
CLASSIFY_CAP = 5
HALDANE_ORBITAL_CAP = 20
LLL_CAP = 8


class UsageError(Exception):
    """Invalid flags, configs or parameters outside a documented cap."""


@dataclass
class Report:
    command: str
    config: dict
    checks: list = field(default_factory=list)
    data: dict = field(default_factory=dict)
    started: float = field(default_factory=time.perf_counter)

    def add(self, name: str, residual: float, tolerance: float) -> None:
        residual = float(residual)
        ok = bool(np.isfinite(residual) and residual <= tolerance)
        self.checks.append({"check_name": name, "status": "pass" if ok else "fail",
                            "residual": residual, "tolerance": float(tolerance)})

    @property
    def passed(self) -> bool:
        return all(c["status"] == "pass" for c in self.checks)

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "config": self.config,
            "checks": self.checks,
            "data": self.data,
            "wall_time": time.perf_counter() - self.started,
        }

    def to_table(self) -> str:
        width = max([len(c["check_name"]) for c in self.checks] + [10])
        lines = [f"{'check':<{width}}  status  {'residual':>10}  {'tolerance':>10}"]
        for c in self.checks:
            lines.append(f"{c['check_name']:<{width}}  {c['status']:<6}  "
                         f"{c['residual']:>10.3e}  {c['tolerance']:>10.3e}")
        lines.append(f"{'overall':<{width}}  {'pass' if self.passed else 'fail'}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# config parsing

_BARE_KEY = re.compile(r'([{,]\s*)([A-Za-z_][A-Za-z0-9_]*)\s*:')
_BARE_VALUE = re.compile(r':\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?=[,}])')


def parse_config(text: str | None) -> dict:
    """JSON object from a file path or inline text; bare keys and words are accepted."""
    if text is None:
        return {}
    stripped = text.strip()
    if not stripped.startswith("{"):
        try:
            with open(stripped, encoding="utf-8") as fh:
                stripped = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read config {text!r}: {exc}") from exc
    try:
        return _loads_object(stripped)
    except json.JSONDecodeError:
        pass
    quoted = _BARE_KEY.sub(r'\1"\2":', stripped)

    def word(m):
        w = m.group(1)
        return ":" + (w if w in ("true", "false", "null") else f'"{w}"')

    quoted = _BARE_VALUE.sub(word, quoted)
    try:
        return _loads_object(quoted)
    except json.JSONDecodeError as exc:
        raise UsageError(f"config does not parse: {exc}") from exc


def _loads_object(text: str) -> dict:
    value = json.loads(text)
    if not isinstance(value, dict):
        raise UsageError("config must be a JSON object")
    return value


_SCHEMAS = {
    "ssh": {"L": int, "t": float, "delta": float, "boundary": str},
    "cosine": {"L": int, "t0": float},
    "kitaev": {"L": int, "t": float},
    "hubbard": {"L": int, "t": float, "U": float, "delta": float, "boundary": str},
    "heisenberg": {"L": int, "J": float, "S": float, "boundary": str},
    "twochain": {"L": int, "t": float, "delta": float, "U": float, "V": float, "boundary": str},
}

_DEFAULTS = {
    "ssh": {"L": 8, "t": 1.0, "delta": 0.5, "boundary": "open"},
    "cosine": {"L": 8, "t0": 1.0},
    "kitaev": {"L": 6, "t": 1.0},
    "hubbard": {"L": 3, "t": 1.0, "U": 2.0, "delta": 0.0, "boundary": "open"},
    "heisenberg": {"L": 6, "J": 1.0, "S": 0.5, "boundary": "periodic"},
    "twochain": {"L": 2, "t": 1.0, "delta": 0.5, "U": 2.0, "V": 1.0, "boundary": "periodic"},
}


def validate_config(model: str, raw: dict) -> dict:
    schema = _SCHEMAS[model]
    unknown = set(raw) - set(schema)
    if unknown:
        raise UsageError(f"unknown config keys for {model}: {sorted(unknown)}")
    cfg = dict(_DEFAULTS[model])
    for key, value in raw.items():
        kind = schema[key]
        if kind is int:
            if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
                raise UsageError(f"{key} must be an integer")
            value = int(value)
        elif kind is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise UsageError(f"{key} must be a number")
            value = float(value)
        elif not isinstance(value, str):
            raise UsageError(f"{key} must be a string")
        cfg[key] = value
    if "boundary" in cfg and cfg["boundary"] not in ("open", "periodic"):
        raise UsageError("boundary must be 'open' or 'periodic'")
    return cfg


def _threads() -> int:
    from .haldane import _threads as haldane_threads

    return haldane_threads()


# ---------------------------------------------------------------------------
# subcommands


def cmd_xi(args, report: Report) -> None:
    from .fock import max_abs
    from .phc import conjugation_law_residual, xi_fast, xi_oracle, xi_square_sign

    N, mode = args.orbitals, args.mode
    if N < 1:
        raise UsageError("--orbitals must be positive")
    if mode in ("oracle", "both") and N > XI_ORACLE_CAP:
        raise UsageError(f"the oracle is capped at {XI_ORACLE_CAP} orbitals")
    if N > XI_FAST_CAP:
        raise UsageError(f"Xi is capped at {XI_FAST_CAP} orbitals")
    sign = xi_square_sign(N)
    report.data["xi_square_sign"] = sign
    if mode in ("fast", "both"):
        U = xi_fast(N).unitary_part
        report.add("xi_square_sign", max_abs(U @ U.conj() - sign * _eye(U.shape[0])), 0.0)
        if N == 2:
            report.add("example_1", _example_one_residual(U), 0.0)
        if N <= 6:
            report.add("conjugation_law", conjugation_law_residual(N), 1e-12)
    if mode in ("oracle", "both"):
        V = xi_oracle(N).unitary_part
        report.add("oracle_square_sign", max_abs(V @ V.conj() - sign * _eye(V.shape[0])), 1e-12)
        if mode == "both":
            report.add("fast_equals_oracle", max_abs(xi_fast(N).unitary_part - V), 1e-12)


def _eye(n: int):
    import scipy.sparse as sp

    return sp.identity(n, format="csr")


def _example_one_residual(U) -> float:
    # basis order: vacuum, e0, e1, e0∧e1
    expected = np.array([[0, 0, 0, -1], [0, 0, -1, 0], [0, 1, 0, 0], [1, 0, 0, 0]], dtype=complex)
    return float(np.abs(U.toarray() - expected).max())


def cmd_verify(args, report: Report) -> None:
    cfg = validate_config(args.model, parse_config(args.config))
    report.config.update(cfg)
    try:
        suite = _VERIFY[args.model]
        suite(cfg, report)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _spectral_symmetry(h) -> float:
    E = np.linalg.eigvalsh(h)
    return float(np.abs(E + E[::-1]).max())


def _one_body_suite(h, g, report: Report) -> None:
    from .phc import check_chiral, k_symmetry_of_one_body
    from .topo import chiral_invariant

    report.add("chiral_anticommutation", check_chiral(g, h), 1e-12)
    report.add("spectral_symmetry", _spectral_symmetry(h.matrix), 1e-10)
    if h.size <= 12:
        report.add("k_symmetry", k_symmetry_of_one_body(g, h), 1e-12)
    report.data["chiral_invariant"] = chiral_invariant(h, g)


def _verify_ssh(cfg, report):
    from .models import ChainSpec, ssh_single_particle

    h, g = ssh_single_particle(ChainSpec(cfg["L"], cfg["t"], cfg["delta"], cfg["boundary"]))
    _one_body_suite(h, g, report)


def _verify_cosine(cfg, report):
    from .models import cosine_band_ring

    h, g = cosine_band_ring(cfg["L"], cfg["t0"])
    _one_body_suite(h, g, report)


def _verify_kitaev(cfg, report):
    from .fock import FockSpace, second_quantize_bdg
    from .models import kitaev_chain, kitaev_quasiparticle_check, staggered_K
    from .phc import check_symmetry

    L = cfg["L"]
    if L > 12:
        raise UsageError("kitaev verification is capped at L = 12")
    space = FockSpace(L)
    H = second_quantize_bdg(kitaev_chain(L, cfg["t"]), space)
    report.add("k_symmetry", check_symmetry(staggered_K(space, np.arange(L)), H), 1e-12)
    res = kitaev_quasiparticle_check(L, cfg["t"])
    report.add("quasiparticle_commutator", max(r[0] for r in res.values()), 1e-10)
    report.add("quasiparticle_k_pairing", max(r[1] for r in res.values()), 1e-10)


def _verify_hubbard(cfg, report):
    from .fock import FockSpace, max_abs, realize_expression
    from .models import HubbardSpec, hubbard_hamiltonian, number_expression, staggered_K
    from .phc import check_symmetry

    spec = HubbardSpec(cfg["L"], cfg["t"], cfg["U"], delta=cfg["delta"], boundary=cfg["boundary"])
    if spec.num_orbitals > 14:
        raise UsageError("hubbard verification is capped at 14 orbitals")
    space = FockSpace(spec.num_orbitals)
    H = realize_expression(hubbard_hamiltonian(spec), space)
    report.add("k_symmetry", check_symmetry(staggered_K(space, spec.layout()), H), 1e-12)
    Q = realize_expression(number_expression(spec.num_orbitals), space).matrix
    report.add("charge_conservation", max_abs(H.matrix @ Q - Q @ H.matrix), 1e-12)
    report.add("hermiticity", max_abs(H.matrix - H.matrix.conj().T), 1e-12)


def _verify_heisenberg(cfg, report):
    from .fock import max_abs
    from .models import SpinChainSpec, heisenberg_spin_chain, total_spin_operators

    spec = SpinChainSpec(cfg["L"], cfg["J"], cfg["S"], cfg["boundary"])
    if (2 * spec.S + 1) ** spec.L > 4096:
        raise UsageError("heisenberg verification is capped at dimension 4096")
    H = heisenberg_spin_chain(spec).matrix
    report.add("hermiticity", max_abs(H - H.conj().T), 1e-12)
    for name, S in zip("xyz", total_spin_operators(spec.L, spec.S)):
        report.add(f"total_spin_{name}_conserved", max_abs(H @ S - S @ H), 1e-12)


def _verify_twochain(cfg, report):
    from .haldane import TwoChainSystem, conserved_quantity_residuals

    L = cfg["L"]
    if 4 * L > HALDANE_ORBITAL_CAP:
        raise UsageError(f"4L = {4 * L} exceeds the {HALDANE_ORBITAL_CAP}-orbital cap")
    if cfg["boundary"] == "periodic" and L % 2:
        raise UsageError("periodic staggered chains need an even number of sites")
    if not 0 <= cfg["delta"] <= 1:
        raise UsageError("delta must lie in [0, 1]")
    system = TwoChainSystem(L, cfg["boundary"])
    H = system.hamiltonian(cfg["t"], cfg["delta"], cfg["U"], cfg["V"])
    report.add("k_symmetry_half_filling", system.k_residual(H), 1e-12)
    if 4 * L <= 12:
        params = (cfg["t"], cfg["delta"], cfg["U"], cfg["V"])
        for name, r in conserved_quantity_residuals(L, cfg["boundary"], params).items():
            report.add(f"{name}_conserved", r, 1e-12)


_VERIFY = {
    "ssh": _verify_ssh,
    "cosine": _verify_cosine,
    "kitaev": _verify_kitaev,
    "hubbard": _verify_hubbard,
    "heisenberg": _verify_heisenberg,
    "twochain": _verify_twochain,
}


def cmd_classify(args, report: Report) -> None:
    from .topo import decoupled_chain_classification

    n = args.chains
    if not 0 <= n <= CLASSIFY_CAP:
        raise UsageError(f"--chains must lie in 0..{CLASSIFY_CAP}")
    result = decoupled_chain_classification(n)
    report.data.update(result.to_json())
    expected_sign = (-1) ** (n * (n - 1) // 2)
    report.add("k_square_sign", abs(result.k_square_sign - expected_sign), 0.0)
    for name, value in result.residuals.items():
        report.add(name, value, 1e-8)


def cmd_haldane(args, report: Report) -> None:
    from .haldane import (
        compare_effective,
        default_path,
        effective_couplings,
        endpoint_comparison,
        recoupling_table,
        run_deformation,
    )

    L, steps = args.length, args.steps
    if 4 * L > HALDANE_ORBITAL_CAP:
        raise UsageError(f"4L = {4 * L} exceeds the {HALDANE_ORBITAL_CAP}-orbital cap")
    if L < 2 or L % 2:
        raise UsageError("--length must be even and at least 2 for periodic chains")
    if steps < 2:
        raise UsageError("--steps must be at least 2")
    profile = run_deformation(default_path(steps), L, "periodic")
    report.data["profile"] = profile.to_json()
    samples = profile.samples
    report.add("k_symmetry_all_samples", max(s.k_residual for s in samples), 1e-10)
    report.add("unique_ground_state", max(s.ground_degeneracy for s in samples) - 1, 0)
    report.add("gap_open", max(0.0, 1e-6 - min(s.gap for s in samples)), 0.0)
    report.add("ground_state_k_invariant", max(abs(1 - s.ground_k_overlap) for s in samples), 1e-8)

    table = recoupling_table()
    couplings = effective_couplings()
    report.data["recoupling"] = {
        "rows": {str(J): {f"{S},{Sp}": v for (S, Sp), v in row.items()} for J, row in table.items()},
        "h_J": [couplings[J][0] for J in (0, 1, 2)],
        "degeneracies": [couplings[J][1] for J in (0, 1, 2)],
    }
    h_expected = (-0.75, -0.5, 0.0)
    report.add("h_J", max(abs(couplings[J][0] - h_expected[J]) for J in (0, 1, 2)), 1e-12)
    report.add("two_site_projection", compare_effective(2), 1e-12)
    end = endpoint_comparison(L, boundary="periodic")
    report.data["endpoint"] = end
    report.add("endpoint_spin_one_spectrum", end["discrepancy"], end["tolerance"])


def _parse_complex(text: str) -> complex:
    parts = text.split(",")
    try:
        values = [float(p) for p in parts]
    except ValueError as exc:
        raise UsageError(f"--z0 expects re,im: {exc}") from exc
    if len(values) == 1:
        return complex(values[0])
    if len(values) != 2:
        raise UsageError("--z0 expects re,im")
    return complex(values[0], values[1])


def cmd_lll(args, report: Report) -> None:
    from .lll import (
        antivortex_map,
        composite_maps,
        girvin_residual,
        kramers_check,
        occupation_table,
        vortex_map,
    )

    N, n = args.flux, args.particles
    z0 = _parse_complex(args.z0)
    if not 1 <= N <= LLL_CAP:
        raise UsageError(f"--flux must lie in 1..{LLL_CAP}")
    if not 0 <= n <= N:
        raise UsageError("--particles must lie in 0..flux")
    report.config.update({"z0": [z0.real, z0.imag]})
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        girvin = list(pool.map(lambda k: girvin_residual(N, k), range(N + 1)))
    report.add("girvin_equals_xi", max(girvin), 1e-10)
    report.add("kramers", kramers_check(N, n, z0), 1e-10)
    U = vortex_map(N, n, z0)
    rank = np.linalg.matrix_rank(U.toarray()) if U.matrix.shape[1] else 0
    report.add("vortex_injective", U.matrix.shape[1] - rank, 0)
    C, C_flat = composite_maps(N, n, z0)
    report.data["vortex"] = occupation_table(U)
    report.data["composite"] = occupation_table(C)
    report.data["composite_flat"] = occupation_table(C_flat)
    if z0 == 0:
        V = antivortex_map(N, n, z0)
        report.add("vortex_empties_orbital_0", _orbital_zero_violations(U, 0), 0)
        report.add("antivortex_fills_orbital_0", _orbital_zero_violations(V, 1), 0)
        report.add("composite_occupation_action", _composite_action_violations(C, C_flat), 0)


def _orbital_zero_violations(m, occupied: int) -> int:
    return sum(1 for row in _images(m) for pat in row if pat[0] != occupied)


def _images(m):
    dom = m.domain
    return [m.image(dom.occupations(i)) for i in range(dom.dim)]


def _composite_action_violations(C, C_flat) -> int:
    bad = 0
    dom = C.domain
    for i in range(dom.dim):
        occ = dom.occupations(i)
        if set(C.image(occ)) != {(1, 0) + occ}:
            bad += 1
        if set(C_flat.image(occ)) != {(0, 1) + occ}:
            bad += 1
    return bad


def cmd_dirac(args, report: Report) -> None:
    from .dirac import Grid2D, relation_trials, verify_em_c_relation

    try:
        nx, ny = (int(v) for v in args.grid.split(","))
    except ValueError as exc:
        raise UsageError("--grid expects nx,ny") from exc
    if nx < 2 or ny < 2:
        raise UsageError("--grid needs nx, ny >= 2")
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    grid = Grid2D(nx, ny)
    worst = relation_trials(grid, args.trials, args.seed)
    for name, value in worst.items():
        report.add(f"{name}_relation" if name != "hermiticity" else name, value, 1e-12)
    rng = np.random.default_rng(args.seed + 1)
    em = 0.0
    for _ in range(args.trials):
        A0 = rng.standard_normal(grid.shape)
        A = rng.standard_normal((2, *grid.shape))
        em = max(em, verify_em_c_relation(grid, A0, A, float(rng.normal())))
    report.add("em_charge_conjugation", em, 1e-12)


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--table", action="store_true", help="print a text table instead of JSON")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized suites")
    common.add_argument("--output", help="write the JSON report to this path")

    parser = argparse.ArgumentParser(prog="phsym", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("xi", parents=[common], help="particle-hole conjugation checks")
    p.add_argument("--orbitals", type=int, required=True)
    p.add_argument("--mode", choices=("oracle", "fast", "both"), default="both")
    p.set_defaults(func=cmd_xi)

    p = sub.add_parser("verify", parents=[common], help="model symmetry suites")
    p.add_argument("--model", choices=sorted(_VERIFY), required=True)
    p.add_argument("--config", help="JSON object or path to a JSON file")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("classify", parents=[common], help="Z/4Z ground-space classification")
    p.add_argument("--chains", type=int, required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("haldane", parents=[common], help="two-chain deformation path")
    p.add_argument("--length", type=int, default=4)
    p.add_argument("--steps", type=int, default=8)
    p.set_defaults(func=cmd_haldane)

    p = sub.add_parser("lll", parents=[common], help="lowest-Landau-level operators")
    p.add_argument("--flux", type=int, required=True)
    p.add_argument("--particles", type=int, required=True)
    p.add_argument("--z0", default="0,0")
    p.set_defaults(func=cmd_lll)

    p = sub.add_parser("dirac", parents=[common], help="Dirac C, T, CT relations")
    p.add_argument("--grid", default="4,4")
    p.add_argument("--trials", type=int, default=50)
    p.set_defaults(func=cmd_dirac)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = {k: v for k, v in vars(args).items() if k not in ("func", "command", "table", "output")}
    report = Report(args.command, config)
    try:
        args.func(args, report)
    except UsageError as exc:
        print(f"phsym {args.command}: error: {exc}", file=sys.stderr)
        return 2
    payload = report.to_json()
    text = report.to_table() if args.table else json.dumps(payload, indent=2)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    print(text)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
