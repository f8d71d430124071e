"""Command-line entry point.

Exit codes: 0 ok, 1 verification failed, 2 unreadable input or bad arguments,
3 inadmissible potential, 4 solver failure or infeasible configuration.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .energy import mabuchi_energy, mabuchi_entropy, scalar_curvature
from .errors import AdmissibilityError, FormatError, GridMismatchError, SolverError
from .geometry import format_path, read_path, sectional_curvature
from .grid import GridSpec, KahlerPotential, format_field, read_field
from .hcma import SolverConfig, solve_geodesic
from .metric import distance, energy_csv, triangle_check
from .potentials import mode_field
from .verify import run_verify

EXIT_OK, EXIT_VERIFY, EXIT_PARSE, EXIT_INADMISSIBLE, EXIT_SOLVER = 0, 1, 2, 3, 4


def _g(x) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class RunConfig:
    command: str
    N: int = 16
    M: int = 8
    eps: float = 1e-3
    tau_factor: float = 0.5
    newton_tol: float = 1e-10
    seed: int = 7
    out: str | None = None
    csv: bool = False
    threads: int = 1

    def solver(self) -> SolverConfig:
        return SolverConfig(M=self.M, eps_target=self.eps, tau_factor=self.tau_factor,
                            newton_tol=self.newton_tol)

    def echo(self) -> str:
        keys = ("command", "N", "M", "eps", "tau_factor", "newton_tol", "seed")
        return "".join(f"{k} = {_g(v) if isinstance(v, float) else v}\n" for k, v in
                       ((k, getattr(self, k)) for k in keys))


# config-file keys and the RunConfig field each one sets
_CONFIG_KEYS = {
    "grid": ("N", int), "tslices": ("M", int), "eps": ("eps", float),
    "tau_factor": ("tau_factor", float), "tau-factor": ("tau_factor", float),
    "newton_tol": ("newton_tol", float), "newton-tol": ("newton_tol", float),
    "seed": ("seed", int), "out": ("out", str), "threads": ("threads", int),
    "csv": ("csv", lambda s: s.strip().lower() in ("1", "true", "yes", "on")),
}


def read_config(path) -> dict:
    out = {}
    for n, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key = key.strip()
        if not sep or key not in _CONFIG_KEYS:
            raise FormatError(f"{path}:{n}: expected 'key = value' with a known key, got {raw!r}")
        name, conv = _CONFIG_KEYS[key]
        try:
            out[name] = conv(val.strip())
        except ValueError as exc:
            raise FormatError(f"{path}:{n}: bad value for {key}") from exc
    return out


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid", type=int, dest="N", help="grid points per axis")
    p.add_argument("--tslices", type=int, dest="M", help="time intervals")
    p.add_argument("--eps", type=float, help="final continuation parameter")
    p.add_argument("--tau-factor", type=float, dest="tau_factor")
    p.add_argument("--newton-tol", type=float, dest="newton_tol")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output file (make-potential) or directory (other commands)")
    p.add_argument("--csv", action="store_true", default=None, help="also write CSV profiles")
    p.add_argument("--threads", type=int, help="worker cap; results never depend on it")
    p.add_argument("--config", help="file of 'key = value' lines; flags override it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kahler-torus", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("make-potential", help="write a sum of cosine modes as a torus-field file")
    p.add_argument("--mode", action="append", default=[], metavar="KX,KY,A,THETA")
    _common(p)

    for name, nargs, hlp in (("geodesic", 2, "solve for the eps-geodesic between two potentials"),
                             ("distance", 2, "length of the eps-geodesic"),
                             ("triangle", 3, "triangle slack d(a,b) + d(b,c) - d(a,c)")):
        p = sub.add_parser(name, help=hlp)
        p.add_argument("fields", nargs=nargs, metavar="FIELD",
                       help="torus-field file or a numeric constant")
        _common(p)

    p = sub.add_parser("energy", help="Mabuchi energy of a potential or along a torus-path file")
    p.add_argument("field", metavar="FIELD")
    p.add_argument("--steps", type=int, default=12, help="Gauss-Legendre nodes")
    _common(p)

    p = sub.add_parser("curvature", help="scalar curvature and a sectional curvature")
    p.add_argument("field", metavar="FIELD")
    p.add_argument("--dirs", nargs=2, metavar="FIELD", help="tangent directions (default cos 2 pi x, cos 2 pi y)")
    _common(p)

    p = sub.add_parser("verify", help="run the acceptance suite")
    p.add_argument("--level", choices=("quick", "full"), default="quick")
    _common(p)
    return parser


def _run_config(args) -> RunConfig:
    values = read_config(args.config) if args.config else {}
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if f.name != "command" and v is not None:
            values[f.name] = v
    cfg = RunConfig(command=args.command, **values)
    if cfg.threads < 1:
        raise SolverError(f"threads must be >= 1, got {cfg.threads}")
    GridSpec(cfg.N)
    return cfg


def _load_fields(specs, N: int) -> list[np.ndarray]:
    """Each spec is a torus-field path or a constant; constants take the files' grid."""
    loaded: list[np.ndarray | float] = []
    for s in specs:
        if Path(s).is_file():
            loaded.append(read_field(s))
            continue
        try:
            c = float(s)
        except ValueError:
            raise FormatError(f"{s!r} is neither a readable file nor a number") from None
        if not math.isfinite(c):
            raise FormatError(f"constant {s!r} is not finite")
        loaded.append(c)
    sizes = {f.shape[0] for f in loaded if isinstance(f, np.ndarray)}
    if len(sizes) > 1:
        raise GridMismatchError(f"input fields have different grids: {sorted(sizes)}")
    n = sizes.pop() if sizes else N
    out = [f if isinstance(f, np.ndarray) else np.full((n, n), f) for f in loaded]
    for f in out:
        KahlerPotential.from_values(f)
    return out


def _outdir(cfg: RunConfig) -> Path | None:
    if cfg.out is None:
        return None
    d = Path(cfg.out)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _parse_mode(text: str):
    parts = text.split(",")
    if len(parts) != 4:
        raise FormatError(f"mode {text!r} needs KX,KY,A,THETA")
    try:
        return int(parts[0]), int(parts[1]), float(parts[2]), float(parts[3])
    except ValueError as exc:
        raise FormatError(f"bad mode {text!r}") from exc


def cmd_make_potential(args, cfg: RunConfig, out) -> int:
    modes = [_parse_mode(m) for m in args.mode]
    pot = KahlerPotential.from_values(mode_field(modes, cfg.N))
    text = format_field(pot.values)
    if cfg.out:
        Path(cfg.out).write_text(text)
        out.write(f"wrote {cfg.out}\nmin_rho = {_g(pot.min_rho)}\n")
    else:
        out.write(text)
    return EXIT_OK


def cmd_geodesic(args, cfg: RunConfig, out) -> int:
    a, b = _load_fields(args.fields, cfg.N)
    rep = distance(a, b, cfg.solver())
    text = cfg.echo() + rep.solve.to_text() + rep.to_text(include_config=False)
    d = _outdir(cfg)
    if d is not None:
        (d / "geodesic.path").write_text(format_path(rep.path))
        (d / "report.txt").write_text(text)
        if cfg.csv:
            (d / "energy.csv").write_text(energy_csv(rep))
    out.write(text)
    return EXIT_OK


def cmd_distance(args, cfg: RunConfig, out) -> int:
    a, b = _load_fields(args.fields, cfg.N)
    rep = distance(a, b, cfg.solver())
    text = cfg.echo() + rep.to_text(include_config=False)
    d = _outdir(cfg)
    if d is not None:
        (d / "distance.txt").write_text(text)
        if cfg.csv:
            (d / "energy.csv").write_text(energy_csv(rep))
    out.write(text)
    return EXIT_OK


def cmd_triangle(args, cfg: RunConfig, out) -> int:
    a, b, c = _load_fields(args.fields, cfg.N)
    rep = triangle_check(a, b, c, cfg.solver())
    text = cfg.echo() + "".join(
        f"{k} = {_g(getattr(rep, k))}\n" for k in ("d_ab", "d_bc", "d_ac", "slack", "tol")
    ) + f"passed = {rep.passed}\n"
    d = _outdir(cfg)
    if d is not None:
        (d / "triangle.txt").write_text(text)
    out.write(text)
    return EXIT_OK


def cmd_energy(args, cfg: RunConfig, out) -> int:
    src = Path(args.field)
    d = _outdir(cfg)
    if src.is_file() and src.read_text().startswith("torus-path"):
        path = read_path(src)
        vals = [mabuchi_energy(s, args.steps).value for s in path.slices]
        text = cfg.echo() + "".join(f"E[{j}] = {_g(v)}\n" for j, v in enumerate(vals))
        csv = "t,E_mab\n" + "".join(f"{_g(j / path.M)},{_g(v)}\n" for j, v in enumerate(vals))
    else:
        (phi,) = _load_fields([args.field], cfg.N)
        val = mabuchi_energy(phi, args.steps)
        text = cfg.echo() + (f"energy = {_g(val.value)}\nentropy_form = {_g(mabuchi_entropy(phi))}\n"
                             f"quadrature_steps = {val.quadrature_steps}\n")
        s = np.linspace(0.0, 1.0, 11)
        csv = "s,E\n" + "".join(f"{_g(si)},{_g(mabuchi_energy(si * phi, args.steps).value)}\n" for si in s)
    if d is not None:
        (d / "energy.txt").write_text(text)
        if cfg.csv:
            (d / "energy_profile.csv").write_text(csv)
    out.write(text)
    return EXIT_OK


def cmd_curvature(args, cfg: RunConfig, out) -> int:
    (phi,) = _load_fields([args.field], cfg.N)
    n = phi.shape[0]
    if args.dirs:
        d1, d2 = _load_fields_raw(args.dirs, n)
    else:
        d1, d2 = mode_field([(1, 0, 1.0, 0.0)], n), mode_field([(0, 1, 1.0, 0.0)], n)
    cd = scalar_curvature(phi)
    K = sectional_curvature(d1, d2, phi)
    text = cfg.echo() + (f"Rbar = {_g(cd.Rbar)}\nR_min = {_g(cd.R.min())}\nR_max = {_g(cd.R.max())}\n"
                         f"sectional = {_g(K)}\n")
    d = _outdir(cfg)
    if d is not None:
        (d / "curvature.txt").write_text(text)
    out.write(text)
    return EXIT_OK


def _load_fields_raw(specs, n: int):
    # tangent directions need not be admissible potentials
    res = []
    for s in specs:
        if Path(s).is_file():
            f = read_field(s)
            if f.shape[0] != n:
                raise GridMismatchError(f"{s} is on N={f.shape[0]}, expected N={n}")
            res.append(f)
        else:
            try:
                res.append(np.full((n, n), float(s)))
            except ValueError:
                raise FormatError(f"{s!r} is neither a readable file nor a number") from None
    return res


def cmd_verify(args, cfg: RunConfig, out) -> int:
    rep = run_verify(args.level, cfg.seed)
    text = rep.to_text()
    d = _outdir(cfg)
    if d is not None:
        (d / "verify.txt").write_text(text)
    out.write(text)
    return EXIT_OK if rep.passed else EXIT_VERIFY


COMMANDS = {
    "make-potential": cmd_make_potential,
    "geodesic": cmd_geodesic,
    "distance": cmd_distance,
    "triangle": cmd_triangle,
    "energy": cmd_energy,
    "curvature": cmd_curvature,
    "verify": cmd_verify,
}


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        cfg = _run_config(args)
        return COMMANDS[args.command](args, cfg, out)
    except AdmissibilityError as exc:
        err.write(f"inadmissible: {exc}\n")
        return EXIT_INADMISSIBLE
    except SolverError as exc:
        err.write(f"solver: {exc}\n")
        return EXIT_SOLVER
    except (FormatError, GridMismatchError, OSError, ValueError) as exc:
        err.write(f"input: {exc}\n")
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
