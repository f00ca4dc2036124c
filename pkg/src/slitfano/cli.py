"""Command-line front end: reproducible runs with deterministic CSV output."""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import ConfigError, SlitFanoError

FORMAT_VERSION = 1

# key -> (type, default)
SCHEMA = {
    "geometry.d": (float, 1.0),
    "geometry.d0": (float, 0.4),
    "geometry.eps": (float, 0.05),
    "spectral.kappa": (float, 0.1),
    "spectral.k": (float, 2.0),
    "spectral.k_min": (float, 2.5),
    "spectral.k_max": (float, 3.1),
    "spectral.n_k": (int, 61),
    "numerics.N": (int, 48),
    "numerics.N_root": (int, 32),
    "numerics.threads": (int, 0),
    "resonances.m_max": (int, 1),
    "resonances.use_full": (bool, False),
    "resonances.include_asymptotic": (bool, True),
    "spectrum.source": (str, "direct"),
    "spectrum.adaptive": (bool, True),
    "spectrum.detect_fano": (bool, True),
    "enhance.family": (str, "Embedded"),
    "enhance.kappas": (list, [0.1, 0.05, 0.025]),
    "enhance.eps_list": (list, [0.05, 0.035, 0.025]),
    "selfcheck.tol_scale": (float, 1.0),
}


def _parse_value(key: str, raw: str, line: int | None):
    typ = SCHEMA[key][0]
    try:
        if typ is bool:
            low = raw.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if typ is list:
            return [float(x) for x in raw.replace(",", " ").split()]
        return typ(raw.strip())
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}", line) from exc


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.17g}"
    if isinstance(v, list):
        return ", ".join(f"{x:.17g}" for x in v)
    return str(v)


@dataclass
class RunConfig:
    """Flat dotted-key configuration with schema defaults."""

    values: dict = field(default_factory=lambda: {k: v[1] for k, v in SCHEMA.items()})

    def __getitem__(self, key):
        return self.values[key]

    def set(self, key: str, raw: str, line: int | None = None) -> None:
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key!r}", line)
        self.values[key] = _parse_value(key, raw, line)

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        cfg = cls()
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
            key, val = (s.strip() for s in line.split("=", 1))
            cfg.set(key, val, lineno)
        return cfg

    def to_text(self) -> str:
        return "".join(f"{k} = {_format_value(self.values[k])}\n" for k in SCHEMA)

    def physical(self):
        from .greens import PhysicalConfig

        return PhysicalConfig(self["geometry.d"], self["geometry.d0"], self["geometry.eps"])

    def threads(self) -> int:
        env = os.environ.get("SLITFANO_THREADS")
        if env:
            return max(1, int(env))
        n = self["numerics.threads"]
        return n if n > 0 else (os.cpu_count() or 1)


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, complex):
        raise TypeError("complex values must be split into re/im columns")
    return f"{float(x):.17g}"


class CsvWriter:
    """Commented config echo, format-version line, fixed columns."""

    def __init__(self, command: str, cfg: RunConfig, columns):
        self.lines = [f"# slitfano {command} format-version {FORMAT_VERSION}"]
        self.lines += [f"# {ln}" for ln in cfg.to_text().splitlines()]
        self.columns = list(columns)
        self.lines.append(",".join(self.columns))

    def row(self, values) -> None:
        self.lines.append(",".join(fmt(v) for v in values))

    def comment(self, text: str) -> None:
        self.lines.append(f"# {text}")

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def _kgrid(cfg: RunConfig) -> np.ndarray:
    return np.linspace(cfg["spectral.k_min"], cfg["spectral.k_max"], cfg["spectral.n_k"])


def cmd_betas(cfg: RunConfig) -> tuple:
    from .greens import BetaSet, SpectralPoint, beta_constants

    phys = cfg.physical()
    names = list(BetaSet.__dataclass_fields__)
    cols = ["k"] + [f"{n}_{p}" for n in names for p in ("re", "im")] + ["error_flag"]
    w = CsvWriter("betas", cfg, cols)
    status = 0
    for k in _kgrid(cfg):
        try:
            b = beta_constants(SpectralPoint(float(k), cfg["spectral.kappa"]), phys)
            vals = [p for n in names for p in (getattr(b, n).real, getattr(b, n).imag)]
            w.row([k] + vals + [""])
        except SlitFanoError as exc:
            w.row([k] + [math.nan] * (2 * len(names)) + [type(exc).__name__])
            status = 1
    return w, status


def cmd_solve(cfg: RunConfig) -> tuple:
    from .bie import solve_scattering
    from .greens import SpectralPoint

    cols = ["k", "kappa", "R_re", "R_im", "T_re", "T_im", "energy_residual", "condition", "flagged"]
    names = ("phi1_minus", "phi1_plus", "phi2_minus", "phi2_plus")
    cols += [f"avg_{n}_{p}" for n in names for p in ("re", "im")]
    w = CsvWriter("solve", cfg, cols)
    pt = SpectralPoint(cfg["spectral.k"], cfg["spectral.kappa"])
    dens, c = solve_scattering(pt, cfg.physical(), cfg["numerics.N"])
    avgs = [p for n in names for p in (dens.averages[n].real, dens.averages[n].imag)]
    w.row([pt.k.real, pt.kappa, c.R.real, c.R.imag, c.T.real, c.T.imag, c.energy_residual, c.condition, c.flagged] + avgs)
    return w, 0


RES_COLUMNS = ["m", "family", "parity", "re_k", "im_k", "kappa", "eps", "method", "residual"]


def cmd_resonances(cfg: RunConfig) -> tuple:
    from .resonance import find_resonances

    w = CsvWriter("resonances", cfg, RES_COLUMNS)
    brs = find_resonances(
        cfg.physical(),
        cfg["spectral.kappa"],
        cfg["resonances.m_max"],
        cfg["resonances.use_full"],
        N=cfg["numerics.N_root"],
        include_asymptotic=cfg["resonances.include_asymptotic"],
        threads=cfg.threads(),
    )
    for b in brs:
        w.row([b.m, b.family, b.parity, b.k.real, b.k.imag, b.kappa, b.eps, b.method, b.residual])
    return w, 0


SPEC_COLUMNS = ["k", "T_abs", "R_abs", "T_arg", "energy_residual", "max_slit_amp", "source", "error_flag"]


def cmd_spectrum(cfg: RunConfig) -> tuple:
    from .resonance import EMBEDDED, find_resonances
    from .spectra import adaptive_grid, detect_fano, sweep

    phys = cfg.physical()
    kappa = cfg["spectral.kappa"]
    N = cfg["numerics.N"]
    threads = cfg.threads()
    branch = None
    if cfg["spectrum.adaptive"] or cfg["spectrum.detect_fano"]:
        brs = find_resonances(phys, kappa, 1, True, N=N, verify=False)
        branch = next(b for b in brs if b.family == EMBEDDED)
    if cfg["spectrum.adaptive"]:
        grid = adaptive_grid(phys, kappa, cfg["spectral.k_min"], cfg["spectral.k_max"], branches=[branch])
    else:
        grid = _kgrid(cfg)
    rows = sweep(phys, kappa, grid, cfg["spectrum.source"], N=N, threads=threads)
    w = CsvWriter("spectrum", cfg, SPEC_COLUMNS)
    status = 0
    for r in rows:
        w.row([r.k, r.T_abs, r.R_abs, r.T_arg, r.energy_residual, r.max_slit_amp, r.source, r.error])
        if r.error and r.error != "flagged_condition":
            status = 1
    if cfg["spectrum.detect_fano"] and kappa != 0.0:
        try:
            ff = detect_fano(phys, kappa, branch, N=N, threads=threads)
            for name in ("k_star", "k_dip", "k_peak", "T_dip", "T_peak", "window_c"):
                w.comment(f"fano.{name} = {fmt(getattr(ff, name))}")
        except SlitFanoError as exc:
            w.comment(f"fano.error = {type(exc).__name__}: {exc}")
            status = 1
    return w, status


def cmd_enhance(cfg: RunConfig) -> tuple:
    from .spectra import enhancement_scan

    rep = enhancement_scan(cfg.physical(), cfg["enhance.kappas"], cfg["enhance.eps_list"], cfg["enhance.family"], N=cfg["numerics.N"], threads=cfg.threads())
    w = CsvWriter("enhance", cfg, ["scan", "kappa", "eps", "re_k", "max_slit_amp"])
    for kp, amp, k in rep.kappa_points:
        w.row(["kappa", kp, cfg["geometry.eps"], k, amp])
    for e, amp, k in rep.eps_points:
        w.row(["eps", cfg["enhance.kappas"][0], e, k, amp])
    w.comment(f"slope_kappa = {fmt(rep.slope_kappa)}  r2 = {fmt(rep.r2_kappa)}")
    w.comment(f"slope_eps = {fmt(rep.slope_eps)}  r2 = {fmt(rep.r2_eps)}")
    return w, 0


def selfcheck_invariants(cfg: RunConfig) -> list:
    """(name, error, tolerance) for the fast structural invariants."""
    from .asymptotics import alpha_constant, alpha_nystrom, inner_products, mu_lambda_coeffs, rho_kernel, LambdaSet
    from .bie import assemble_pieces, solve_even_odd, solve_scattering
    from .greens import PhysicalConfig, SpectralPoint, beta_constants, beta_i

    phys = cfg.physical()
    out = []
    out.append(("rho(1/2,-1/2) = 0", abs(float(rho_kernel(0.5, -0.5))), 1e-14))
    out.append(("beta_i(pi/2) = 2ln2/pi", abs(beta_i(math.pi / 2, phys.eps) - 2 * math.log(2) / math.pi), 1e-14))
    b0 = beta_constants(SpectralPoint(2.0, 0.0), phys)
    out.append(("kappa=0 beta_plus = beta_minus", abs(b0.beta_plus - b0.beta_minus), 1e-14))
    pcs = assemble_pieces(SpectralPoint(2.0, 0.0), phys, 32)
    out.append(("S symmetric", float(np.max(np.abs(pcs.S - pcs.S.T))), 1e-12))
    out.append(("kappa=0 reality of S + Sinf", float(np.max(np.abs((pcs.S + pcs.Sinf).imag))), 1e-12))
    G = inner_products(pcs, 1)
    out.append(("kappa=0 <L^-1 e1,e1> = <L^-1 e2,e2>", abs(G[0, 0] - G[1, 1]), 1e-10))
    out.append(("kappa=0 <L^-1 e1,e2> = <L^-1 e2,e1>", abs(G[0, 1] - G[1, 0]), 1e-10))
    lam = LambdaSet(np.array([0.1, 0.2, 0.3, 0.4], complex), np.zeros(4, complex), "hat", 0.0)
    c = mu_lambda_coeffs(SpectralPoint(2.0, 0.0), phys, lam)
    out.append(("mu_plus(0) = 2, mu_minus(0) = 0", abs(c.mu_plus - 2) + abs(c.mu_minus), 1e-15))
    pt = SpectralPoint(2.0, 0.1)
    dens, co = solve_scattering(pt, phys, 32)
    out.append(("energy conservation at k=2", co.energy_residual, 1e-6))
    dens2, _ = solve_even_odd(pt, phys, 32)
    out.append(("even/odd recombination", float(np.max(np.abs(dens.stacked() - dens2.stacked()))), 1e-10))
    dm, _ = solve_scattering(SpectralPoint(2.0, 0.0), phys, 32)
    flip = (-1.0) ** np.arange(dm.phi1_minus.size)
    out.append(("kappa=0 mirror symmetry", float(np.max(np.abs(dm.phi1_plus - flip * dm.phi1_minus))), 1e-10))
    a = alpha_constant()
    an = alpha_nystrom()
    out.append(("alpha Galerkin vs Nystrom (relative)", abs(a.value - an.value) / abs(an.value), 5e-5))
    return out


def cmd_selfcheck(cfg: RunConfig) -> tuple:
    scale = cfg["selfcheck.tol_scale"]
    w = CsvWriter("selfcheck", cfg, ["invariant", "error", "tolerance", "status"])
    t0 = time.perf_counter()
    status = 0
    for name, err, tol in selfcheck_invariants(cfg):
        ok = err <= tol * scale
        status |= 0 if ok else 1
        w.row([name, err, tol * scale, "PASS" if ok else "FAIL"])
    w.comment(f"elapsed_s = {time.perf_counter() - t0:.1f}")
    return w, status


COMMANDS = {
    "betas": cmd_betas,
    "solve": cmd_solve,
    "resonances": cmd_resonances,
    "spectrum": cmd_spectrum,
    "enhance": cmd_enhance,
    "selfcheck": cmd_selfcheck,
}

PLOT_COLUMNS = {"spectrum": (1, 2), "betas": (1, 2), "enhance": (2, 5)}


def plot_script(csv_path: str, command: str) -> str:
    x, y = PLOT_COLUMNS.get(command, (1, 2))
    return f"set datafile separator ','\nset key autotitle columnhead\nplot '{csv_path}' using {x}:{y} with linespoints\npause -1\n"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="slitfano", description="Two-slit periodic grating scattering, resonances and Fano anomalies.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
    p.add_argument("--emit-plot-script", action="store_true", help="write a gnuplot script next to the CSV")
    p.add_argument("--version", action="version", version=f"slitfano {__version__}")
    return p


def load_config(path: str | None, overrides) -> RunConfig:
    cfg = RunConfig()
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                cfg = RunConfig.from_text(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, val = item.split("=", 1)
        cfg.set(key.strip(), val.strip())
    cfg.physical()
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.set)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        writer, status = COMMANDS[args.command](cfg)
    except SlitFanoError as exc:
        print(f"computation error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    text = writer.text()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        if args.emit_plot_script:
            with open(os.path.splitext(args.out)[0] + ".gp", "w", encoding="utf-8") as fh:
                fh.write(plot_script(args.out, args.command))
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
