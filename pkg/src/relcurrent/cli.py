"""Command-line front end.

    relcurrent check           invariant suites
    relcurrent nogo            trace test for the candidate current, spins x widths
    relcurrent dirac-control   commutator matrix of the Dirac current
    relcurrent density         position densities on a line, plane or volume

Every command writes ``report.txt`` (key = value manifest), ``results.csv``
and ``timings.txt`` under ``--out``; figures go next to them unless
``--no-plots``. Exit codes: 0 pass, 1 failure, 2 inconclusive numerics,
64 bad usage.
"""
from __future__ import annotations

import argparse
import csv
import os
import platform
import sys
import time
from fractions import Fraction

import numpy as np

from . import __version__
from . import lorentz as lz
from .config import ConfigError, build_config, parse_value, read_config_file
from .spin import spin_dim

EXIT_OK, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 64
MAX_GRID_POINTS = 10**7


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


FLAGS = [
    ("--spin", "spin s (0, 1/2, 1, 3/2, ...)"),
    ("--sweep", "comma list of spins, overrides --spin for nogo"),
    ("--sigma", "comma list of isotropic momentum widths"),
    ("--sigma-axes", "anisotropic width sx,sy,sz (replaces --sigma)"),
    ("--p0", "packet mean momentum px,py,pz"),
    ("--x0", "packet position offset x,y,z"),
    ("--weights", "spin weights, complex, m descending (e.g. 1,0 or 1,1j)"),
    ("--nodes", "Gauss-Hermite nodes per axis (>= 8)"),
    ("--levels", "refinement levels for the error bar"),
    ("--threads", "worker threads for direct contractions"),
    ("--seed", "seed for sampled checks"),
    ("--out", "output directory"),
    ("--boost", "boost velocity bx,by,bz applied to the packet"),
    ("--rotation", "rotation nx,ny,nz,angle applied to the packet"),
    ("--grid", "density grid: line, plane or volume"),
    ("--extent", "half-width of the density grid"),
    ("--points", "density grid points per axis"),
    ("--time", "time at which densities are evaluated"),
    ("--samples", "random samples per check suite"),
]


def build_parser():
    parser = _Parser(prog="relcurrent", description="Boost-covariance audit of relativistic probability currents.")
    parser.add_argument("--version", action="version", version=f"relcurrent {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name, text in (
        ("check", "run the invariant suites"),
        ("nogo", "trace test for the candidate current"),
        ("dirac-control", "commutator matrix of the Dirac current"),
        ("density", "position-space densities"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", default=None, help="flat key = value config file")
        for flag, h in FLAGS:
            p.add_argument(flag, default=argparse.SUPPRESS, help=h)
        p.add_argument("--compare-analytic", dest="compare_analytic", action="store_const", const="true", default=argparse.SUPPRESS)
        p.add_argument("--no-plots", dest="plots", action="store_const", const="false", default=argparse.SUPPRESS)
    return parser


def config_from_args(args):
    raw = dict(vars(args))
    command = raw.pop("command")
    path = raw.pop("config", None)
    file_values = read_config_file(path) if path else {}
    overrides = dict(parse_value(k, v) for k, v in raw.items())
    overrides["command"] = command
    return build_config(file_values, overrides)


# --- output ----------------------------------------------------------------


def _fmt(v):
    if v is None:
        return "none"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.16e}"
    if isinstance(v, (complex, np.complexfloating)):
        return f"{v.real:.16e}{v.imag:+.16e}j"
    return str(v)


def versions():
    import matplotlib
    import scipy

    return {
        "relcurrent": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "matplotlib": matplotlib.__version__,
    }


class Run:
    """Collects manifest records, table rows and timings for one command."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.records = []
        self.timings = []
        self.files = []
        os.makedirs(cfg.out, exist_ok=True)

    def path(self, name):
        return os.path.join(self.cfg.out, name)

    def record(self, key, value):
        self.records.append((key, _fmt(value)))

    def section(self, prefix, mapping):
        for k, v in mapping.items():
            self.record(f"{prefix}.{k}" if prefix else k, v)

    def timed(self, label, fn, *a, **kw):
        t0 = time.perf_counter()
        out = fn(*a, **kw)
        self.timings.append((label, time.perf_counter() - t0))
        return out

    def write_csv(self, name, header, rows, footer=()):
        path = self.path(name)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
            for line in footer:
                fh.write(f"# {line}\n")
        self.files.append(name)

    def figure(self, name, fn, *a, **kw):
        if self.cfg.plots:
            fn(*a, self.path(name), **kw)
            self.files.append(name)

    def finish(self, status, code):
        lines = ["# relcurrent run manifest"]
        lines += [f"command = {self.cfg.command}", f"status = {status}", f"exit_code = {code}"]
        lines += [f"config.{k} = {v}" for k, v in self.cfg.items().items()]
        lines += [f"version.{k} = {v}" for k, v in versions().items()]
        lines += [f"{k} = {v}" for k, v in self.records]
        lines += [f"file = {f}" for f in self.files + ["timings.txt"]]
        with open(self.path("report.txt"), "w") as fh:
            fh.write("\n".join(lines) + "\n")
        # wall times vary run to run, so they live outside the byte-stable manifest
        with open(self.path("timings.txt"), "w") as fh:
            fh.write(f"threads = {self.cfg.threads}\n")
            for label, t in self.timings:
                fh.write(f"{label} = {t:.3f}\n")
        return code


# --- packets ---------------------------------------------------------------


def make_packet(cfg, s=None, sigma=None):
    from .wavepacket import GaussianPacket

    s = cfg.spin if s is None else s
    if sigma is None:
        sigma = cfg.sigma_axes if cfg.sigma_axes else cfg.sigma[0]
    weights = cfg.weights if cfg.weights is not None and len(cfg.weights) == spin_dim(s) else None
    return GaussianPacket(s, cfg.p0, sigma, weights, cfg.x0)


def transformed_setup(cfg, packet):
    """Packet after the configured rotation then boost, with its pushed-forward rule."""
    from .quadrature import QuadratureRule
    from .wavepacket import boost, rotate

    rule = QuadratureRule.for_packet(packet, cfg.nodes)
    psi = packet
    axis, angle = np.asarray(cfg.rotation[:3]), cfg.rotation[3]
    if angle != 0:
        if np.linalg.norm(axis) == 0:
            raise ConfigError("rotation axis must be nonzero")
        U = lz.spinor_rotation(axis, angle)
        psi, rule = rotate(psi, U), rule.transformed(lz.covering_to_lorentz(U))
    if np.any(np.asarray(cfg.boost) != 0):
        L = lz.boost_from_velocity(cfg.boost)
        psi, rule = boost(psi, L), rule.transformed(L)
    return psi, rule


# --- commands --------------------------------------------------------------


def cmd_check(cfg):
    from .checks import SUITES, _run

    run = Run(cfg)
    results = []
    for name in SUITES:
        res = run.timed(name, _run, name, cfg)
        print(res.line())
        results.append(res)
        run.record(f"suite.{name}.defect", res.defect)
        run.record(f"suite.{name}.passed", res.passed)
    run.write_csv("results.csv", ["suite", "defect", "tol", "passed"], [(r.name, r.defect, r.tol, r.passed) for r in results])
    failed = [r.name for r in results if not r.passed]
    run.record("suites", len(results))
    run.record("failed", ",".join(failed) or "none")
    print(f"{len(results) - len(failed)}/{len(results)} suites passed")
    if failed:
        print("failing suites: " + ", ".join(failed), file=sys.stderr)
        return run.finish("fail", EXIT_FAIL)
    return run.finish("pass", EXIT_OK)


def cmd_nogo(cfg):
    from .audit import HALF, reduced_deficit_oracle, run_nogo
    from .plotting import plot_deficits

    run = Run(cfg)
    spins = cfg.sweep if cfg.sweep else [cfg.spin]
    widths = [cfg.sigma_axes] if cfg.sigma_axes else cfg.sigma
    header = ["spin", "sigma", "lhs", "rhs", "deficit", "analytic_deficit", "errbar", "rel_agreement", "separation", "conclusive"]
    if cfg.compare_analytic:
        header += ["reduced_oracle", "oracle_rel_agreement"]
    rows, table = [], []
    status = []
    for s in spins:
        for sig in widths:
            packet = make_packet(cfg, s, sig)
            rep = run.timed(
                f"nogo.s={s}.sigma={_label(sig)}",
                run_nogo,
                s,
                packet,
                nodes=cfg.nodes,
                levels=max(2, cfg.levels),
                agreement_tol=cfg.agreement_tol,
                gate_tol=cfg.gate_tol,
                threads=cfg.threads,
            )
            tag = f"s={s}.sigma={_label(sig)}"
            run.section(tag, rep.records())
            analytic = None if rep.analytic_deficit is None else rep.analytic_deficit + rep.spin_orbit
            row = [str(s), _label(sig), rep.lhs, rep.rhs, rep.deficit, analytic, rep.errbar, rep.relative_agreement, rep.separation, rep.conclusive]
            if cfg.compare_analytic:
                oracle = agree = None
                isotropic = np.ndim(sig) == 0 and not np.any(cfg.p0) and not np.any(cfg.x0)
                if s in (0, HALF) and isotropic and np.isfinite(rep.deficit):
                    oracle = reduced_deficit_oracle(s, float(sig))
                    agree = abs(rep.deficit - oracle) / abs(oracle)
                    run.record(f"{tag}.reduced_oracle", oracle)
                row += [oracle, agree]
                if agree is not None and agree > cfg.agreement_tol:
                    status.append("fail")
            rows.append(row)
            table.append({"spin": str(s), "sigma": float(np.mean(sig)), "deficit": rep.deficit, "rhs": rep.rhs})
            if not np.isfinite(rep.deficit):
                status.append("inconclusive")
            elif not rep.passed:
                status.append("fail")
            line = f"s={str(s):<4} sigma={_label(sig):<10} deficit={rep.deficit:+.10e}  errbar={rep.errbar:.2e}  "
            line += "separated" if rep.conclusive else "NOT separated"
            if rep.relative_agreement is not None:
                line += f"  agreement={rep.relative_agreement:.2e}"
            print(line)
            for note in rep.notes:
                print(f"  {note}", file=sys.stderr)
    run.write_csv("results.csv", header, rows)
    if len(spins) > 1:
        for sig in widths:
            sel = [r for r in rows if r[1] == _label(sig)]
            d = [r[4] for r in sel]
            # reported only: deficits non-increasing along the sweep order
            mono = all(b <= a for a, b in zip(d, d[1:])) if np.all(np.isfinite(d)) else None
            run.record(f"monotone_in_spin.sigma={_label(sig)}", mono)
    if len(table) > 0:
        run.figure("deficits.png", plot_deficits, table)
    if "inconclusive" in status:
        return run.finish("inconclusive", EXIT_INCONCLUSIVE)
    if "fail" in status:
        return run.finish("fail", EXIT_FAIL)
    return run.finish("pass", EXIT_OK)


def _label(sig):
    if np.ndim(sig) == 0:
        return f"{float(sig):g}"
    return ";".join(f"{float(v):g}" for v in sig)


def cmd_dirac_control(cfg):
    from .audit import HALF, run_dirac_control
    from .plotting import plot_commutator_matrix

    if cfg.spin != HALF:
        raise ConfigError("dirac-control needs --spin 1/2")
    run = Run(cfg)
    psi, rule = transformed_setup(cfg, make_packet(cfg))
    rep = run.timed(
        "dirac-control",
        run_dirac_control,
        psi,
        rule=rule,
        levels=max(1, cfg.levels),
        tol=cfg.dirac_tol,
        gate_tol=cfg.gate_tol,
        threads=cfg.threads,
    )
    run.section("", rep.records())
    rows = []
    for i in range(3):
        rows.append([f"K{i + 1}", "J0", rep.first_set[i], rep.spatial[i]])
        for j in range(3):
            rows.append([f"K{i + 1}", f"J{j + 1}", rep.matrix[i, j], rep.j0 * (i == j)])
    run.write_csv("results.csv", ["generator", "component", "commutator", "expected"], rows)
    print(f"<J0_D> = {rep.j0:.12e}  charge = {rep.charge:.12e}")
    for i in range(3):
        print("  " + "  ".join(f"{rep.matrix[i, j]:+.10e}" for j in range(3)))
    print(f"max relative deviation: second set {rep.second_deviation:.3e}, first set {rep.first_deviation:.3e} (tol {rep.tol:g})")
    if not rep.conclusive:
        for note in rep.notes:
            print(note, file=sys.stderr)
        return run.finish("inconclusive", EXIT_INCONCLUSIVE)
    run.figure("commutator_matrix.png", plot_commutator_matrix, rep.matrix, rep.j0)
    return run.finish("pass" if rep.passed else "fail", EXIT_OK if rep.passed else EXIT_FAIL)


def density_grid(cfg):
    n = {"line": 1, "plane": 2, "volume": 3}[cfg.grid]
    if cfg.points**n > MAX_GRID_POINTS:
        raise ConfigError(f"grid of {cfg.points}^{n} points exceeds the limit of {MAX_GRID_POINTS}")
    g = np.linspace(-cfg.extent, cfg.extent, cfg.points)
    z = np.zeros_like(g)
    if n == 1:
        # line along z through the origin
        return g, np.stack([z, z, g], -1)
    if n == 2:
        X, Z = np.meshgrid(g, g, indexing="ij")
        return g, np.stack([X, np.zeros_like(X), Z], -1)
    return g, np.stack(np.meshgrid(g, g, g, indexing="ij"), -1)


def cmd_density(cfg):
    from .quadrature import QuadratureRule
    from .spin import m_values
    from .wavepacket import amplitude_at_events, boost, position_amplitude
    from .plotting import plot_density_line, plot_density_plane

    run = Run(cfg)
    g, x = density_grid(cfg)
    packet = make_packet(cfg)
    rule = QuadratureRule.for_packet(packet, cfg.nodes)
    ms = m_values(packet.s)
    fields = {"original": run.timed("density.original", lambda: np.abs(position_amplitude(packet, cfg.time, rule)(x)) ** 2)}
    boosted = np.any(np.asarray(cfg.boost) != 0)
    if boosted:
        L = lz.boost_from_velocity(cfg.boost)
        fields["boosted"] = run.timed(
            "density.boosted", lambda: np.abs(position_amplitude(boost(packet, L), cfg.time, rule.transformed(L))(x)) ** 2
        )
        events = np.concatenate([np.full(x.shape[:-1] + (1,), cfg.time), x], axis=-1)
        # original packet read off at the events that the boost maps onto the grid
        fields["mapped"] = run.timed(
            "density.mapped", lambda: np.abs(amplitude_at_events(packet, lz.apply(np.linalg.inv(L), events), rule)) ** 2
        )

    cell = (g[1] - g[0]) ** {"line": 1, "plane": 2, "volume": 3}[cfg.grid]
    code, status = EXIT_OK, "pass"
    for name, dens in fields.items():
        flat_x = x.reshape(-1, 3)
        flat_d = dens.reshape(len(flat_x), -1)
        rows = ([*flat_x[i], str(Fraction(m).limit_denominator()), flat_d[i, k]] for i in range(len(flat_x)) for k, m in enumerate(ms))
        footer = []
        total = float(flat_d.sum() * cell)
        if cfg.grid == "volume":
            footer.append(f"integrated_density = {total:.10f}")
            run.record(f"{name}.integrated_density", total)
            if name != "mapped" and abs(total - 1) > 1e-4:
                code, status = EXIT_INCONCLUSIVE, "inconclusive"
                print(f"{name}: integrated density {total:.6f} is not 1 within 1e-4; enlarge --extent or --points", file=sys.stderr)
        fname = "results.csv" if name == "original" else f"density_{name}.csv"
        run.write_csv(fname, ["x", "y", "z", "m", "density"], rows, footer)
        print(f"{name}: {len(flat_x)} points, peak {flat_d.sum(-1).max():.6e}" + (f", integral {total:.8f}" if cfg.grid == "volume" else ""))

    if boosted:
        b = fields["boosted"].sum(-1)
        m = fields["mapped"].sum(-1)
        b, m = b / b.sum(), m / m.sum()
        rel = float(np.sqrt(np.sum((b - m) ** 2) / np.sum(b**2)))
        run.record("nonlocality.relative_l2", rel)
        print(f"boosted vs point-mapped density: relative L2 difference {rel:.4e}")

    totals = {k: v.sum(-1) for k, v in fields.items()}
    if cfg.grid == "line":
        run.figure("density.png", plot_density_line, g, totals, xlabel="z")
    elif cfg.grid == "plane":
        run.figure("density.png", plot_density_plane, g, totals)
    else:
        mid = len(g) // 2
        run.figure("density.png", plot_density_plane, g, {k: v[:, mid, :] for k, v in totals.items()})
    return run.finish(status, code)


COMMANDS = {"check": cmd_check, "nogo": cmd_nogo, "dirac-control": cmd_dirac_control, "density": cmd_density}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        cfg = config_from_args(args)
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, lz.DomainError, OSError) as exc:
        print(f"relcurrent: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
