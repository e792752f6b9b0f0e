"""Experiment harness: configuration, vector cache, CSV artifacts.

Subcommands: cbc, points, prior, posterior, fem-study, trunc-study.
Settings come from an optional plain-text config file (key = value per
line, # comments) overridden by command-line flags. Every artifact
starts with comment lines holding the fully resolved configuration, so
a run can be reproduced from its output alone. CSV files are written
atomically; a failed run leaves no partial artifact behind.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
import time
from dataclasses import dataclass, fields, replace

import numpy as np

from hoqmc import bayes, cbc, forward, lattice, quadrature
from hoqmc.weights import WeightSpec

EXPERIMENTS = ("cbc", "points", "prior", "posterior", "fem-study", "trunc-study")

CSV_COLUMNS = "m,N,estimate,reference,abs_error,seconds"


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "prior"
    basis: str = "kl"
    s: int = 32
    alpha: int = 2
    zeta: float = 2.0
    theta: float = 0.2
    c: float = 0.1
    weights: str = "spod"
    hybrid_j: int = 0
    kernel: str = "truncated"
    m: int = 10
    m_range: str = "3..10"
    ref_m: int = 0  # 0: max of m_range plus 4
    nominal: float = 0.0  # 0: basis default (kl 4.0, indicator 1.0)
    fem_level: int = 12
    fem_degree: int = 0  # 0: basis default (kl 1, indicator 2)
    level_range: str = "4..10"
    grading: float = 0.2
    estimator: str = "qmc"
    reps: int = 10
    mc_seed: int = 20260809
    noise_seed: int = 2026
    y_star: str = ""  # comma floats; empty: three-coordinate default
    no_noise: bool = False
    qoi_point: float = 0.25
    obs_points: str = "0.2,0.5,0.7"
    target: str = "prior"
    trunc_lo: int = 2
    trunc_m: int = 10
    out: str = ""
    gv_cache: str = "gv-cache"

    def resolved(self) -> "ExperimentConfig":
        updates = {}
        if self.nominal == 0.0:
            updates["nominal"] = 4.0 if self.basis == "kl" else 1.0
        if self.fem_degree == 0:
            updates["fem_degree"] = 1 if self.basis == "kl" else 2
        if self.weights == "":
            updates["weights"] = "spod" if self.basis == "kl" else "product"
        return replace(self, **updates) if updates else self


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _coerce(key: str, value: str):
    if key not in _FIELD_TYPES:
        raise ValueError(f"unknown configuration key: {key!r}")
    ftype = _FIELD_TYPES[key]
    if ftype == "bool":
        return value.strip().lower() in ("1", "true", "yes", "on")
    if ftype == "int":
        return int(value)
    if ftype == "float":
        return float(value)
    return value.strip()


def read_config_file(path) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"malformed config line: {line!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            out[key] = _coerce(key, value)
    return out


def parse_range(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in text.split(",") if x.strip()]


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


def decimal_of_scaled_int(value: int, precision: int) -> str:
    """Exact decimal expansion of value / 2^precision."""
    if value == 0:
        return "0." + "0" * precision if precision else "0"
    digits = str(value * 5**precision).rjust(precision + 1, "0")
    return digits[:-precision] + "." + digits[-precision:]


# ---------------------------------------------------------------------------
# model / weights plumbing


def weight_spec(cfg: ExperimentConfig) -> WeightSpec:
    return WeightSpec(
        kind=cfg.weights,
        theta=cfg.theta,
        zeta=cfg.zeta,
        alpha=cfg.alpha,
        walsh_constant=cfg.c,
        hybrid_cutoff=cfg.hybrid_j,
    )


def build_model(cfg: ExperimentConfig, s: int | None = None) -> forward.UncertaintyModel:
    return forward.UncertaintyModel(
        nominal=cfg.nominal,
        basis=cfg.basis,
        s=cfg.s if s is None else s,
        zeta=cfg.zeta,
        theta=cfg.theta,
        grading=cfg.grading,
    )


def cached_vector(cfg: ExperimentConfig, m: int, s: int | None = None) -> lattice.GeneratingVector:
    """Load a matching generating vector from the cache or build it."""
    s = cfg.s if s is None else s
    w = weight_spec(cfg)
    tag = f"{w.fingerprint()},kernel={cfg.kernel}"
    digest = hashlib.sha256(tag.encode()).hexdigest()[:10]
    os.makedirs(cfg.gv_cache, exist_ok=True)
    path = os.path.join(cfg.gv_cache, f"gv_m{m}_a{cfg.alpha}_s{s}_{digest}.txt")
    if os.path.exists(path):
        gv = lattice.read_generating_vector(path)
        if (gv.m, gv.alpha, gv.s) == (m, cfg.alpha, s) and gv.weight_fingerprint == w.fingerprint():
            return gv
    result = cbc.cbc_construct(s, m, w, kernel=cfg.kernel)
    lattice.write_generating_vector(path, result.vector)
    return result.vector


def _metadata_lines(cfg: ExperimentConfig, extra: dict | None = None) -> list[str]:
    lines = [f"# {f.name} = {getattr(cfg, f.name)}" for f in fields(ExperimentConfig)]
    for key, value in (extra or {}).items():
        lines.append(f"# {key} = {value}")
    return lines


def write_csv(path, cfg: ExperimentConfig, record: quadrature.ConvergenceRecord):
    tmp = str(path) + ".tmp"
    try:
        with open(tmp, "w") as fh:
            for line in _metadata_lines(cfg, record.metadata):
                fh.write(line + "\n")
            fh.write(CSV_COLUMNS + "\n")
            for row in record.rows:
                fh.write(
                    f"{row[0]},{row[1]},{row[2]:.16e},{row[3]:.16e},"
                    f"{row[4]:.16e},{row[5]:.3f}\n"
                )
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


# ---------------------------------------------------------------------------
# experiments


def _default_out(cfg: ExperimentConfig) -> str:
    if cfg.out:
        return cfg.out
    stem = f"{cfg.experiment.replace('-', '_')}_{cfg.basis}_s{cfg.s}_a{cfg.alpha}"
    ext = {"cbc": ".txt", "points": ".txt"}.get(cfg.experiment, ".csv")
    return stem + ext


def run_cbc(cfg: ExperimentConfig) -> int:
    w = weight_spec(cfg)
    result = cbc.cbc_construct(cfg.s, cfg.m, w, kernel=cfg.kernel)
    out = _default_out(cfg)
    lattice.write_generating_vector(out, result.vector)
    print(
        f"wrote {out}: criterion {result.criterion_trace[-1]:.6e}, "
        f"{result.elapsed:.2f}s"
    )
    return 0


def run_points(cfg: ExperimentConfig) -> int:
    gv = cached_vector(cfg, cfg.m)
    ps = lattice.generate_points(gv)
    out = _default_out(cfg)
    tmp = out + ".tmp"
    try:
        with open(tmp, "w") as fh:
            for line in _metadata_lines(cfg, {"precision_bits": ps.precision}):
                fh.write(line + "\n")
            for n in range(ps.n_points):
                fh.write(
                    ",".join(
                        decimal_of_scaled_int(int(v), ps.precision)
                        for v in ps.coords[n]
                    )
                    + "\n"
                )
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise
    print(f"wrote {out}: {ps.n_points} points, dimension {ps.s}")
    return 0


def _observation_setup(cfg: ExperimentConfig, model, level=None) -> bayes.ObservationSetup:
    template = bayes.ObservationSetup(
        obs_points=_parse_floats(cfg.obs_points), noise_seed=cfg.noise_seed
    )
    if cfg.y_star:
        y_star = np.array(_parse_floats(cfg.y_star))
        if len(y_star) != model.s:
            raise ValueError("y_star must have one entry per dimension")
    else:
        y_star = bayes.default_y_star(model.s)
    return bayes.synthesize_data(
        model,
        y_star,
        template,
        level=cfg.fem_level if level is None else level,
        degree=cfg.fem_degree,
        no_noise=cfg.no_noise,
    )


def _prior_reference(cfg: ExperimentConfig, op, ms) -> tuple[float, int]:
    ref_m = cfg.ref_m or (max(ms) + 4)
    gv = cached_vector(cfg, ref_m)
    pts = lattice.generate_points(gv)
    qoi, _ = op.solve_batch(2.0 * pts.as_floats() - 1.0)
    return float(np.sum(qoi) / pts.n_points), ref_m


def run_prior(cfg: ExperimentConfig) -> int:
    ms = parse_range(cfg.m_range)
    model = build_model(cfg)
    op = forward.ForwardOperator(
        model, level=cfg.fem_level, degree=cfg.fem_degree, qoi_point=cfg.qoi_point
    )
    reference, ref_m = _prior_reference(cfg, op, ms)
    record = quadrature.ConvergenceRecord(
        metadata={"reference_m": ref_m, "estimator": cfg.estimator}
    )
    for m in ms:
        t0 = time.perf_counter()
        if cfg.estimator == "mc":
            est, err = quadrature.mc_estimate(
                1 << m,
                cfg.s,
                cfg.reps,
                cfg.mc_seed,
                lambda T: op.solve_batch(2.0 * T - 1.0)[0],
                reference,
                vectorized=True,
            )
        else:
            gv = cached_vector(cfg, m)
            pts = lattice.generate_points(gv)
            qoi, _ = op.solve_batch(2.0 * pts.as_floats() - 1.0)
            est = float(np.sum(qoi) / pts.n_points)
            err = abs(est - reference)
        record.add_row(m, 1 << m, est, reference, err, time.perf_counter() - t0)
    write_csv(_default_out(cfg), cfg, record)
    print(f"wrote {_default_out(cfg)}")
    return 0


def run_posterior(cfg: ExperimentConfig) -> int:
    ms = parse_range(cfg.m_range)
    model = build_model(cfg)
    op = forward.ForwardOperator(
        model, level=cfg.fem_level, degree=cfg.fem_degree, qoi_point=cfg.qoi_point
    )
    setup = _observation_setup(cfg, model)
    ref_m = cfg.ref_m or (max(ms) + 4)

    def posterior_at(m):
        pts = lattice.generate_points(cached_vector(cfg, m))
        est = bayes.ratio_estimate(
            model, setup, pts, level=cfg.fem_level, degree=cfg.fem_degree,
            qoi_point=cfg.qoi_point, operator=op,
        )
        return est.posterior_mean

    reference = posterior_at(ref_m)
    y_star = _parse_floats(cfg.y_star) if cfg.y_star else tuple(
        bayes.default_y_star(model.s)[:3]
    )
    record = quadrature.ConvergenceRecord(
        metadata={
            "reference_m": ref_m,
            "data": ",".join(repr(float(d)) for d in setup.data),
            "y_star_head": ",".join(repr(float(v)) for v in y_star[:8]),
            "covariance": "identity",
            "noise_seed": cfg.noise_seed,
        }
    )
    for m in ms:
        t0 = time.perf_counter()
        est = posterior_at(m)
        record.add_row(
            m, 1 << m, est, reference, abs(est - reference), time.perf_counter() - t0
        )
    write_csv(_default_out(cfg), cfg, record)
    print(f"wrote {_default_out(cfg)}")
    return 0


def _target_estimate(cfg, model, setup, pts, level):
    op = forward.ForwardOperator(
        model, level=level, degree=cfg.fem_degree, qoi_point=cfg.qoi_point
    )
    if cfg.target == "prior":
        qoi, _ = op.solve_batch(2.0 * pts.as_floats() - 1.0)
        return float(np.sum(qoi) / pts.n_points)
    est = bayes.ratio_estimate(
        model, setup, pts, level=level, degree=cfg.fem_degree,
        qoi_point=cfg.qoi_point, operator=op,
    )
    return est.posterior_mean


def run_fem_study(cfg: ExperimentConfig) -> int:
    levels = parse_range(cfg.level_range)
    ref_level = max(levels) + 3
    model = build_model(cfg)
    setup = _observation_setup(cfg, model, level=ref_level) if cfg.target == "posterior" else None
    pts = lattice.generate_points(cached_vector(cfg, cfg.m))
    reference = _target_estimate(cfg, model, setup, pts, ref_level)
    record = quadrature.ConvergenceRecord(
        metadata={"reference_level": ref_level, "target": cfg.target, "qmc_m": cfg.m}
    )
    for level in levels:
        t0 = time.perf_counter()
        est = _target_estimate(cfg, model, setup, pts, level)
        record.add_row(
            level, pts.n_points, est, reference, abs(est - reference),
            time.perf_counter() - t0,
        )
    write_csv(_default_out(cfg), cfg, record)
    print(f"wrote {_default_out(cfg)}")
    return 0


def run_trunc_study(cfg: ExperimentConfig) -> int:
    """Truncation sweep s' = 2, 4, ..., s/2 against the full dimension.

    One generating vector at the full dimension serves every s': the
    truncated integrand simply ignores the trailing coordinates. The
    CSV m column holds s'.
    """
    model = build_model(cfg)
    setup = _observation_setup(cfg, model) if cfg.target == "posterior" else None
    pts = lattice.generate_points(cached_vector(cfg, cfg.trunc_m))
    op = forward.ForwardOperator(
        model, level=cfg.fem_level, degree=cfg.fem_degree, qoi_point=cfg.qoi_point
    )
    Y_full = 2.0 * pts.as_floats() - 1.0

    def estimate(s_prime):
        Y = forward.truncate(Y_full, s_prime)
        qoi, obs = op.solve_batch(Y)
        if cfg.target == "prior":
            return float(np.sum(qoi) / pts.n_points)
        phi = bayes._potential_batch(obs, setup)
        theta = np.where(phi > 700.0, 0.0, np.exp(-np.minimum(phi, 700.0)))
        return float(np.sum(theta * qoi) / np.sum(theta))

    reference = estimate(cfg.s)
    sweep = []
    sp = max(2, cfg.trunc_lo)
    while sp <= cfg.s // 2:
        sweep.append(sp)
        sp *= 2
    record = quadrature.ConvergenceRecord(
        metadata={"reference_s": cfg.s, "target": cfg.target, "qmc_m": cfg.trunc_m,
                  "column_m_holds": "truncation dimension"}
    )
    for s_prime in sweep:
        t0 = time.perf_counter()
        est = estimate(s_prime)
        record.add_row(
            s_prime, pts.n_points, est, reference, abs(est - reference),
            time.perf_counter() - t0,
        )
    write_csv(_default_out(cfg), cfg, record)
    print(f"wrote {_default_out(cfg)}")
    return 0


_RUNNERS = {
    "cbc": run_cbc,
    "points": run_points,
    "prior": run_prior,
    "posterior": run_posterior,
    "fem-study": run_fem_study,
    "trunc-study": run_trunc_study,
}


def build_config(argv) -> ExperimentConfig:
    parser = argparse.ArgumentParser(
        prog="hoqmc",
        description="Higher-order QMC experiments for the parametric diffusion problem",
    )
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", help="key = value configuration file")
    for f in fields(ExperimentConfig):
        if f.name == "experiment":
            continue
        flag = "--" + f.name.replace("_", "-")
        if f.type == "bool":
            parser.add_argument(flag, action="store_true", default=None)
        else:
            parser.add_argument(flag, type=str, default=None)
    ns = parser.parse_args(argv)
    settings: dict = {"experiment": ns.experiment}
    if ns.config:
        settings.update(read_config_file(ns.config))
    for f in fields(ExperimentConfig):
        if f.name == "experiment":
            continue
        value = getattr(ns, f.name)
        if value is None:
            continue
        # range syntax straight on the scalar flags: --m 3..12 sweeps m,
        # --s 2..256 sweeps truncation dimensions against 2*256
        if f.name == "m" and ".." in str(value):
            settings["m_range"] = str(value)
            continue
        if f.name == "s" and ".." in str(value):
            lo, hi = (int(x) for x in str(value).split("..", 1))
            settings["trunc_lo"] = lo
            settings["s"] = 2 * hi
            continue
        settings[f.name] = value if f.type == "bool" else _coerce(f.name, str(value))
    cfg = ExperimentConfig(**settings).resolved()
    if cfg.basis not in ("kl", "indicator"):
        raise ValueError(f"invalid value for key 'basis': {cfg.basis!r}")
    if cfg.estimator not in ("qmc", "mc"):
        raise ValueError(f"invalid value for key 'estimator': {cfg.estimator!r}")
    if cfg.target not in ("prior", "posterior"):
        raise ValueError(f"invalid value for key 'target': {cfg.target!r}")
    return cfg


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = build_config(argv)
        return _RUNNERS[cfg.experiment](cfg)
    except (ValueError, OSError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
