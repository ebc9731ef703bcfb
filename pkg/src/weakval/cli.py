"""Command-line front end.

Every command prints CSV (default) or JSON. On stdout the run manifest is a
leading ``# manifest: {...}`` line (CSV) or a ``"manifest"`` key (JSON);
with ``--out PATH`` the data goes to ``PATH`` and the manifest to
``PATH.manifest.json``.

Exit codes: 0 success, 2 usage or spec parse error, 3 math-domain error,
4 internal invariant violation.

Operator specs
    JSON matrix of ``[re, im]`` pairs (or plain numbers), or a builder:
    ``lowering:s=4``, ``raising:s=4``, ``pt:r=1,s=2,t=3,theta=0.785``,
    ``amp-damp:p=0.5,k=1``, ``pauli:x``, ``identity:d=2``.
State specs
    JSON vector of ``[re, im]`` pairs (or plain numbers, unit norm), or a
    builder: ``bloch:eta,xi``, ``phase-state:s,m,theta0``, ``number:n``,
    ``equal:s,nu``, ``basis:k``. ``number`` and ``basis`` take their
    dimension from the operator unless ``d=`` is given.
Builder arguments are positional or ``key=value``.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .channels import KrausChannel, amplitude_damping, channel_fidelity, fig2_sweep, two_kraus_bounds
from .dirac import computational_basis, dirac_distribution_full, fourier_basis
from .errors import DomainError, InvariantViolation
from .linalg import as_state, basis_state
from .phase import PhaseSpaceConfig, equal_superposition, lowering, phase_state, ramanujan_verify
from .pointer import PointerConfig, reconstruct_expectation_stochastic
from .pt import BlochState, PTParams, pt_eigensystem, pt_expectation, pt_hamiltonian
from .uncertainty import creation_annihilation_bound_sweep
from .weak import expectation_via_right_polar


class SpecError(ValueError):
    pass


# -- spec parsing --------------------------------------------------------------


def _parse_builder(spec: str, order: list[str]) -> tuple[str, dict[str, str]]:
    name, _, rest = spec.partition(":")
    params: dict[str, str] = {}
    if rest:
        for pos, item in enumerate(rest.split(",")):
            key, eq, value = item.partition("=")
            if eq:
                params[key.strip()] = value.strip()
            elif pos < len(order):
                params[order[pos]] = key.strip()
            else:
                raise SpecError(f"too many positional arguments in {spec!r}")
    unknown = set(params) - set(order)
    if unknown:
        raise SpecError(f"unknown parameter(s) {sorted(unknown)} in {spec!r}")
    return name.strip(), params


def _num(params: dict, key: str, default=None, kind=float):
    if key not in params:
        if default is None:
            raise SpecError(f"missing parameter {key!r}")
        return default
    try:
        return kind(params[key])
    except ValueError as exc:
        raise SpecError(f"bad value for {key!r}: {params[key]!r}") from exc


def _complex_array(text: str) -> np.ndarray:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"not valid JSON: {exc}") from exc

    def conv(x):
        if isinstance(x, (int, float)):
            return complex(x)
        if isinstance(x, list) and len(x) == 2 and all(isinstance(v, (int, float)) for v in x):
            return complex(x[0], x[1])
        if isinstance(x, list):
            return [conv(v) for v in x]
        raise SpecError(f"cannot read {x!r} as a number or [re, im] pair")

    if not isinstance(raw, list):
        raise SpecError("expected a JSON array")
    try:
        return np.array([conv(v) for v in raw], dtype=complex)
    except ValueError as exc:
        raise SpecError(f"ragged array: {exc}") from exc


_PAULI = {
    "x": [[0, 1], [1, 0]],
    "y": [[0, -1j], [1j, 0]],
    "z": [[1, 0], [0, -1]],
}

_OPERATOR_ORDER = {
    "lowering": ["s"],
    "raising": ["s"],
    "pt": ["r", "s", "t", "theta"],
    "amp-damp": ["p", "k"],
    "pauli": ["axis"],
    "identity": ["d"],
}


def parse_operator(spec: str) -> np.ndarray:
    spec = spec.strip()
    if spec.startswith("["):
        m = _complex_array(spec)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise SpecError(f"operator must be a square matrix, got shape {m.shape}")
        return m
    name = spec.partition(":")[0]
    if name not in _OPERATOR_ORDER:
        raise SpecError(f"unknown operator builder {name!r}")
    name, params = _parse_builder(spec, _OPERATOR_ORDER[name])
    if name in ("lowering", "raising"):
        low = lowering(_num(params, "s", kind=int))
        return low if name == "lowering" else low.conj().T
    if name == "pt":
        p = PTParams(*(_num(params, k) for k in ("r", "s", "t", "theta")))
        return pt_hamiltonian(p)
    if name == "amp-damp":
        k = _num(params, "k", 1, int)
        if k not in (1, 2):
            raise SpecError("amp-damp Kraus index k must be 1 or 2")
        return amplitude_damping(_num(params, "p")).kraus[k - 1]
    if name == "pauli":
        axis = params.get("axis", "").lower()
        if axis not in _PAULI:
            raise SpecError(f"pauli axis must be x, y or z, got {axis!r}")
        return np.array(_PAULI[axis], dtype=complex)
    return np.eye(_num(params, "d", 2, int), dtype=complex)


_STATE_ORDER = {
    "bloch": ["eta", "xi"],
    "phase-state": ["s", "m", "theta0"],
    "number": ["n", "d"],
    "equal": ["s", "nu"],
    "basis": ["k", "d"],
}


def parse_state(spec: str, dim: int | None = None) -> np.ndarray:
    spec = spec.strip()
    if spec.startswith("["):
        v = _complex_array(spec)
        if v.ndim != 1:
            raise SpecError("state must be a flat vector")
        return as_state(v)
    name = spec.partition(":")[0]
    if name not in _STATE_ORDER:
        raise SpecError(f"unknown state builder {name!r}")
    name, params = _parse_builder(spec, _STATE_ORDER[name])
    if name == "bloch":
        return BlochState(_num(params, "eta"), _num(params, "xi", 0.0)).vector()
    if name == "phase-state":
        cfg = PhaseSpaceConfig(_num(params, "s", kind=int), _num(params, "theta0", 0.0))
        return phase_state(cfg, _num(params, "m", 0, int))
    if name == "equal":
        return equal_superposition(_num(params, "s", kind=int), _num(params, "nu", 0.0))
    key = "n" if name == "number" else "k"
    d = _num(params, "d", dim or 0, int)
    k = _num(params, key, kind=int)
    if d <= 0:
        raise SpecError(f"{name} state needs a dimension (d=...)")
    if not 0 <= k < d:
        raise SpecError(f"{key}={k} outside 0..{d - 1}")
    return basis_state(d, k)


# -- output --------------------------------------------------------------------


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def _jsonable(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, str):
        return x
    x = float(x)
    return None if math.isnan(x) else x


class Table:
    def __init__(self, columns: list[str], rows: list[list]):
        self.columns = columns
        self.rows = rows

    def csv(self) -> str:
        out = io.StringIO()
        out.write(",".join(self.columns) + "\n")
        for row in self.rows:
            out.write(",".join(fmt(v) for v in row) + "\n")
        return out.getvalue()

    def json_payload(self):
        return [dict(zip(self.columns, (_jsonable(v) for v in row))) for row in self.rows]


def _record(**fields) -> Table:
    return Table(list(fields), [list(fields.values())])


def _manifest(args, seed: int) -> dict:
    skip = {"func", "format", "out", "command"}
    params = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    return {
        "command": args.command,
        "parameters": params,
        "seed": seed,
        "tool_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def _emit(table: Table, args, manifest: dict, stdout) -> None:
    if args.format == "csv":
        body = table.csv()
    else:
        payload = {"columns": table.columns, "rows": table.json_payload()}
        if not args.out:
            payload = {"manifest": manifest, **payload}
        body = json.dumps(payload, indent=2, sort_keys=False) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(body)
        with open(args.out + ".manifest.json", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(json.dumps(manifest, indent=2) + "\n")
    else:
        if args.format == "csv":
            stdout.write("# manifest: " + json.dumps(manifest, sort_keys=True) + "\n")
        stdout.write(body)


# -- commands ------------------------------------------------------------------


def cmd_expectation(args) -> Table:
    op = parse_operator(args.operator)
    psi = parse_state(args.state, op.shape[0])
    if psi.shape[0] != op.shape[0]:
        raise SpecError(f"state dimension {psi.shape[0]} does not match operator {op.shape[0]}")
    direct = complex(np.vdot(psi, op @ psi))
    if args.method == "exact":
        res = expectation_via_right_polar(op, psi)
        return _record(
            re=res.reconstructed_expectation.real,
            im=res.reconstructed_expectation.imag,
            weak_value_re=res.weak_value.real,
            weak_value_im=res.weak_value.imag,
            overlap_re=res.overlap.real,
            overlap_im=res.overlap.imag,
            direct_re=direct.real,
            direct_im=direct.imag,
            fallback=res.fallback,
        )
    cfg = PointerConfig(
        grid_points=args.grid_points,
        grid_halfwidth=args.halfwidth,
        sigma=args.sigma,
        g=args.g,
        seed=args.seed,
    )
    res = reconstruct_expectation_stochastic(op, psi, cfg, n_trials=args.trials, workers=args.workers)
    rec = res.record
    return _record(
        re=res.value.real,
        im=res.value.imag,
        stderr_re=res.stderr.real,
        stderr_im=res.stderr.imag,
        weak_value_re=rec.wv_estimate.real,
        weak_value_im=rec.wv_estimate.imag,
        overlap_re=res.overlap.real,
        overlap_im=res.overlap.imag,
        n_trials=rec.n_trials,
        n_postselected=rec.n_postselected,
        direct_re=direct.real,
        direct_im=direct.imag,
    )


def cmd_fig1(args) -> Table:
    rows = creation_annihilation_bound_sweep(args.smax, args.theta0, args.m)
    return Table(["s", "lhs", "rhs", "slack"], [[r.s, r.lhs, r.rhs, r.slack] for r in rows])


def cmd_fig2(args) -> Table:
    if args.steps < 2:
        raise SpecError("--steps must be at least 2")
    if not 0.0 < args.pmax <= 1.0:
        raise SpecError("--pmax must lie in (0, 1]")
    rows = fig2_sweep(args.theta, args.phi, np.linspace(0.0, args.pmax, args.steps))
    return Table(
        ["p", "lower", "product", "upper", "lower_published"],
        [[r.p, r.lower, r.product, r.upper, r.lower_printed] for r in rows],
    )


def cmd_ramanujan(args) -> Table:
    if args.smax < 1:
        raise SpecError("--smax must be at least 1")
    rows = []
    for s in range(1, args.smax + 1):
        rep = ramanujan_verify(s, args.nu)
        rows.append([s, rep.direct_sum, rep.formula_value_minus_phi, rep.phi_s_2, rep.imag_residue])
    return Table(["s", "direct_sum", "formula_minus_phi", "phi", "imag_residue"], rows)


def _parse_basis(spec: str, d: int) -> np.ndarray:
    if spec == "computational":
        return computational_basis(d)
    if spec == "fourier":
        return fourier_basis(d)
    m = _complex_array(spec)
    if m.shape != (d, d):
        raise SpecError(f"basis must be a {d}x{d} matrix of column vectors")
    return m


def cmd_dirac(args) -> Table:
    d = args.dim
    if d < 2:
        raise SpecError("--dim must be at least 2")
    psi = parse_state(args.state, d)
    table = dirac_distribution_full(_parse_basis(args.basis_b, d), _parse_basis(args.basis_c, d), psi)
    columns = ["i"] + [f"{part}_{j}" for j in range(d) for part in ("re", "im")]
    rows = []
    for i in range(d):
        row: list = [i]
        for j in range(d):
            row += [table.values[i, j].real, table.values[i, j].imag]
        rows.append(row)
    return Table(columns, rows)


def cmd_pt(args) -> Table:
    p = PTParams(args.r, args.s, args.t, args.theta)
    eig = pt_eigensystem(p)
    ex = pt_expectation(p, BlochState(args.eta, args.xi))
    weak = ex.weak.reconstructed_expectation
    return _record(
        eps_plus_re=eig.eps_plus.real,
        eps_plus_im=eig.eps_plus.imag,
        eps_minus_re=eig.eps_minus.real,
        eps_minus_im=eig.eps_minus.imag,
        broken=eig.broken,
        closed_re=ex.closed_form.real,
        closed_im=ex.closed_form.imag,
        weak_re=weak.real,
        weak_im=weak.imag,
        direct_re=ex.direct.real,
        direct_im=ex.direct.imag,
        residual_closed=abs(ex.closed_form - ex.direct),
        residual_weak=abs(weak - ex.direct),
        fallback=ex.weak.fallback,
        polar_branch=ex.polar_branch,
    )


def _parse_channel(spec: str) -> KrausChannel:
    spec = spec.strip()
    if spec.startswith("amp-damp"):
        _, params = _parse_builder(spec, ["p"])
        return amplitude_damping(_num(params, "p"))
    ops = _complex_array(spec)
    if ops.ndim != 3:
        raise SpecError("channel must be amp-damp:p=... or a JSON list of Kraus matrices")
    return KrausChannel(tuple(ops))


def cmd_channel(args) -> Table:
    ch = _parse_channel(args.kraus)
    psi = parse_state(args.state, ch.dim)
    rep = channel_fidelity(ch, psi)
    fields = {
        "fidelity": rep.fidelity,
        "fidelity_weak_route": rep.fidelity_weak_route,
        "variance_sum": rep.variance_sum,
        "identity_residual": rep.fidelity + rep.variance_sum - 1.0,
    }
    for k, v in enumerate(rep.per_kraus_variance, start=1):
        fields[f"variance_{k}"] = v
    if len(ch.kraus) == 2:
        b = two_kraus_bounds(ch, psi)
        fields.update(lower=b.lower, product=b.middle, upper=b.upper)
    return _record(**fields)


# -- argument parser -----------------------------------------------------------


def default_seed() -> int:
    raw = os.environ.get("WEAKVAL_SEED")
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError as exc:
        raise SpecError(f"WEAKVAL_SEED must be an integer, got {raw!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--out", help="write data to this path and the manifest to PATH.manifest.json")
    common.add_argument("--seed", type=int, default=None, help="RNG seed (default: $WEAKVAL_SEED or 0)")

    parser = argparse.ArgumentParser(prog="weakval", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "expectation",
        parents=[common],
        help="<psi|A|psi> through the polar weak-value protocol",
        description="Columns: re, im, weak_value_re/im, overlap_re/im, direct_re/im, then fallback "
        "(exact) or stderr_re/im, n_trials, n_postselected (stochastic).",
    )
    p.add_argument("--operator", required=True)
    p.add_argument("--state", required=True)
    p.add_argument("--method", choices=["exact", "stochastic"], default="exact")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--g", type=float, default=0.05)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--grid-points", type=int, default=1024)
    p.add_argument("--halfwidth", type=float, default=16.0)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_expectation)

    p = sub.add_parser(
        "fig1",
        parents=[common],
        help="creation/annihilation uncertainty product and bound in phase states",
        description="Columns: s, lhs (product of uncertainties), rhs (lower bound), slack = lhs - rhs.",
    )
    p.add_argument("--smax", type=int, default=100)
    p.add_argument("--theta0", type=float, default=0.0)
    p.add_argument("--m", type=int, default=0)
    p.set_defaults(func=cmd_fig1)

    p = sub.add_parser(
        "fig2",
        parents=[common],
        help="amplitude-damping bounds versus p",
        description="Columns: p, lower (weak-value bound), product (dE1 dE2), upper ((1-F)/2), "
        "lower_published (closed form as published).",
    )
    p.add_argument("--theta", type=float, default=math.pi / 2)
    p.add_argument("--phi", type=float, default=math.pi / 4)
    p.add_argument("--pmax", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=101)
    p.set_defaults(func=cmd_fig2)

    p = sub.add_parser(
        "ramanujan",
        parents=[common],
        help="sum of sqrt(m) recovered from <a^dagger>, and the remainder Phi_s(2)",
        description="Columns: s, direct_sum (sum of sqrt(m) recovered from <a^dagger>), formula_minus_phi "
        "(closed formula without the remainder), phi = formula_minus_phi - direct_sum, imag_residue.",
    )
    p.add_argument("--smax", type=int, default=500)
    p.add_argument("--nu", type=float, default=0.0)
    p.set_defaults(func=cmd_ramanujan)

    p = sub.add_parser(
        "dirac",
        parents=[common],
        help="discrete Dirac distribution over two bases",
        description="One row per i; columns re_j, im_j hold <psi|Pi_i(B) Pi_j(C)|psi>. Bases are "
        "'computational', 'fourier' or a JSON matrix whose columns are the basis vectors.",
    )
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--state", "--state-spec", dest="state", required=True)
    p.add_argument("--basis-b", default="computational")
    p.add_argument("--basis-c", default="fourier")
    p.set_defaults(func=cmd_dirac)

    p = sub.add_parser(
        "pt",
        parents=[common],
        help="2x2 PT-symmetric Hamiltonian: eigenvalues and <H>",
        description="Columns: eps_plus_re/im, eps_minus_re/im, broken, closed_re/im, weak_re/im, "
        "direct_re/im, residual_closed, residual_weak, fallback, polar_branch.",
    )
    for name in ("r", "s", "t", "theta", "eta", "xi"):
        p.add_argument(f"--{name}", type=float, required=name in ("r", "s", "t"), default=0.0)
    p.set_defaults(func=cmd_pt)

    p = sub.add_parser(
        "channel",
        parents=[common],
        help="fidelity, Kraus variances and two-Kraus bounds",
        description="Columns: fidelity, fidelity_weak_route, variance_sum, identity_residual, "
        "variance_k, and for two Kraus operators lower, product, upper.",
    )
    p.add_argument("--kraus", required=True, help="amp-damp:p=... or JSON list of matrices")
    p.add_argument("--state", required=True)
    p.set_defaults(func=cmd_channel)
    return parser


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        seed = args.seed if args.seed is not None else default_seed()
        args.seed = seed
        table = args.func(args)
        _emit(table, args, _manifest(args, seed), stdout)
    except SpecError as exc:
        print(f"weakval: error: {exc}", file=stderr)
        return 2
    except InvariantViolation as exc:
        print(f"weakval: invariant violated: {exc.name}: {exc}", file=stderr)
        return 4
    except (DomainError, ValueError, ZeroDivisionError) as exc:
        print(f"weakval: domain error: {exc}", file=stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
