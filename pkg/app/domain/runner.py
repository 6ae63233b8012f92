"""
Experiment runner.

Turns one JSON experiment description into module calls and recorded
outputs: certificate checks, asymptotic profiles, contact indices, decay
experiments, model oscillatory integrals and dispersive kernels.
"""

import json
import logging
import math
import os
from typing import Callable, Optional

import numpy as np

from app.asymint.levinson import eps_decay_constant, extract_profile, integrate_z, profile_rows, reverse_check
from app.cauchy.experiments import decay_experiment, small_time_check
from app.cauchy.grid import CauchyData, SpectralGrid, profile_radius
from app.coeffs.moments import PsiFunction, moment_check
from app.config.settings import LabConfig
from app.errors import ConfigError, DivergentMoment
from app.geometry.contact import graph_chart, sugimoto_indices
from app.geometry.limits import limiting_geometry
from app.geometry.phase import HomogeneousPhase, linear_shift
from app.oscillatory.cutoff import AnnulusWindow
from app.oscillatory.envelope import fit_envelope
from app.oscillatory.kernel import DispersiveKernel
from app.oscillatory.model import CUTOFFS, ModelIntegral, check_phase_conditions, eval_model, self_convergence
from app.parallel import parallel_map
from app.spectral.companion import build_companion, build_diagonalizer
from app.spectral.coupling import dump_frame, energy_check
from app.spectral.phases import PhaseAccumulator
from app.storage.recorder import RunManifest, RunRecorder
from app.symbol import catalog
from app.symbol.operator import OperatorSpec, load_operator, operator_from_dict
from app.symbol.roots import (
    default_certificate,
    hyperbolicity_certificate,
    limiting_roots,
    root_derivatives,
    roots_batch,
    sphere_directions,
)

logger = logging.getLogger(__name__)

COMMANDS = ("roots", "asymint", "sugimoto", "decay", "vdc", "kernel", "dump")

_CATALOG = {
    "wave": catalog.wave,
    "anisotropic_wave": catalog.anisotropic_wave,
    "triple": catalog.triple,
    "bi_wave": catalog.bi_wave,
    "double_root": catalog.double_root,
}


def load_experiment(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as f:
            spec = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"Cannot read experiment file {path}: {e}") from e
    if not isinstance(spec, dict):
        raise ConfigError(f"Experiment file {path} must hold a JSON object")
    return spec


def resolve_operator(entry, base_dir: str = ".") -> OperatorSpec:
    """Operator from a file path, an inline description or {"catalog": name, "args": {...}}."""
    if isinstance(entry, str):
        path = entry if os.path.isabs(entry) else os.path.join(base_dir, entry)
        return load_operator(path, name=entry)
    if isinstance(entry, dict) and "catalog" in entry:
        builder = _CATALOG.get(entry["catalog"])
        if builder is None:
            raise ConfigError(f"Unknown catalog operator '{entry['catalog']}'")
        args = entry.get("args", {})
        if "speeds_squared" in args:
            args = dict(args, speeds_squared=tuple(args["speeds_squared"]))
        try:
            return builder(**args)
        except TypeError as e:
            raise ConfigError(f"Bad arguments for catalog operator '{entry['catalog']}': {e}") from e
    if isinstance(entry, dict):
        return operator_from_dict(entry, name=entry.get("name", "inline"))
    raise ConfigError("Experiment needs an 'operator' entry")


def _time_list(entry, default=None) -> np.ndarray:
    """Explicit list, or {"start", "stop", "count", "spacing": "linear"|"geometric"}."""
    if entry is None:
        if default is None:
            raise ConfigError("Experiment needs a time list")
        return np.asarray(default, dtype=float)
    if isinstance(entry, dict):
        try:
            start, stop, count = float(entry["start"]), float(entry["stop"]), int(entry["count"])
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"Malformed range {entry!r}: {e}") from e
        if entry.get("spacing", "linear") == "geometric":
            if start <= 0 or stop <= 0:
                raise ConfigError("Geometric ranges need positive endpoints")
            return np.geomspace(start, stop, count)
        return np.linspace(start, stop, count)
    return np.atleast_1d(np.asarray(entry, dtype=float))


class ExperimentRunner:
    def __init__(self, config: LabConfig):
        self._config = config
        self._handlers: dict[str, Callable[[dict, str, RunRecorder], dict]] = {
            "roots": self.run_roots,
            "asymint": self.run_asymint,
            "sugimoto": self.run_sugimoto,
            "decay": self.run_decay,
            "vdc": self.run_vdc,
            "kernel": self.run_kernel,
            "dump": self.run_dump,
        }

    @property
    def config(self) -> LabConfig:
        return self._config

    def run(self, command: str, spec: dict, base_dir: str = ".") -> RunManifest:
        handler = self._handlers.get(command)
        if handler is None:
            raise ConfigError(f"Unknown command '{command}', expected one of {', '.join(COMMANDS)}")
        run = self._config.run
        payload = {"command": command, "experiment": spec, "settings": self._config.tolerances()}
        recorder = RunRecorder(run.out_dir, command, payload, self._config.tolerances(), run.seed)
        logger.info("Running %s into %s", command, run.out_dir)
        summary = handler(spec, base_dir, recorder)
        recorder.write_json(f"{command}.json", summary)
        recorder.finalize()
        return recorder.manifest

    # ─── Roots ───

    def run_roots(self, spec: dict, base_dir: str, recorder: RunRecorder) -> dict:
        op = resolve_operator(spec.get("operator"), base_dir)
        symbol = self._config.symbol
        t_grid = _time_list(spec.get("t"), np.linspace(symbol.t_grid_min, symbol.t_grid_max, symbol.t_grid_points))
        samples = int(spec.get("directions", symbol.sphere_samples))
        certificate = hyperbolicity_certificate(op, t_grid, samples, symbol)

        directions = sphere_directions(op.n, samples)
        roots = roots_batch(op, t_grid[:, None], directions[None, :, :], symbol)
        derivative = root_derivatives(op, t_grid[:, None], directions[None, :, :], roots=roots)
        step = 1e-5
        difference = (roots_batch(op, t_grid[:, None] + step, directions[None, :, :], symbol)
                      - roots_batch(op, t_grid[:, None] - step, directions[None, :, :], symbol)) / (2 * step)
        scale = np.maximum(np.abs(derivative), 1.0)
        derivative_error = float(np.max(np.abs(derivative - difference) / scale))

        rows = []
        for i, t in enumerate(t_grid):
            for d, omega in enumerate(directions):
                row = {"t": float(t)}
                for axis, value in enumerate(omega):
                    row[f"omega{axis + 1}"] = float(value)
                for k in range(op.m):
                    row[f"phi{k}"] = float(roots[i, d, k])
                for k in range(op.m):
                    row[f"dphi{k}"] = float(derivative[i, d, k])
                    row[f"dphi{k}_fd"] = float(difference[i, d, k])
                row["separation"] = float(np.min(roots[i, d, :-1] - roots[i, d, 1:]))
                rows.append(row)
        recorder.write_csv("roots.csv", rows)

        moments = []
        for (nu, j), expr in sorted(op.coeffs.items()):
            if expr.is_constant:
                continue
            for r in (0, 1, 2):
                report = moment_check(expr, r, self._config.coeffs.moment_tol, self._config.coeffs)
                moments.append(dict(report.to_dict(), nu=list(nu), j=j))
        try:
            limits = limiting_roots(op, symbol, self._config.coeffs).to_dict()
        except DivergentMoment as e:
            logger.warning("No limiting operators: %s", e)
            limits = None
        return {
            "operator": op.to_dict(),
            "certificate": certificate.to_dict(),
            "verdict": "strictly hyperbolic on samples",
            "derivative_error": derivative_error,
            "moments": moments,
            "limits": limits,
        }

    # ─── Asymptotic profiles ───

    def run_asymint(self, spec: dict, base_dir: str, recorder: RunRecorder) -> dict:
        op = resolve_operator(spec.get("operator"), base_dir)
        asymint = self._config.asymint
        t_max = float(spec.get("t_max", asymint.t_max))
        tol = float(spec.get("tol", asymint.ode_tol))
        xi_list = np.atleast_2d(np.asarray(spec.get("xi", [[1.0] + [0.0] * (op.n - 1)]), dtype=float))
        times = _time_list(spec.get("times"), np.linspace(-t_max, t_max, 81))

        roots = default_certificate(op, self._config.symbol)
        diag = build_diagonalizer(build_companion(op, roots.config), roots)
        ph = PhaseAccumulator(roots, self._config.spectral)
        psi = PsiFunction.from_operator(op)

        profiles = []
        for index, xi in enumerate(xi_list):
            if xi.shape != (op.n,):
                raise ConfigError(f"Frequency {xi.tolist()} must have {op.n} components")
            trajectory = integrate_z(diag, ph, xi, t_max, tol)
            profile = extract_profile(trajectory, psi, asymint.tail_tol)
            rows = profile_rows(profile, times)
            for row in rows:
                size = float(np.max(np.abs(profile.eps(row["t"]))))
                tail = psi.tail_integral(row["t"])
                row["eps_over_tail"] = size / tail if tail > 0 else 0.0
            recorder.write_csv(f"profile_{index}.csv", rows)
            profiles.append(dict(
                profile.to_dict(),
                eps_decay_constant=eps_decay_constant(profile, psi, times),
                reverse_deviation=reverse_check(trajectory, ph, tol),
            ))
        return {"operator": op.to_dict(), "t_max": t_max, "tol": tol, "profiles": profiles}

    # ─── Contact indices ───

    def _phase(self, spec: dict, base_dir: str) -> Optional[HomogeneousPhase]:
        geometry = self._config.geometry
        source = spec.get("phase")
        if source is not None:
            try:
                expression, n = str(source["expression"]), int(source["n"])
            except (KeyError, TypeError, ValueError) as e:
                raise ConfigError(f"Malformed phase entry {source!r}: {e}") from e
            return HomogeneousPhase.from_polynomial(expression, n, geometry)
        if "branch" not in spec:
            return None
        op = resolve_operator(spec.get("operator"), base_dir)
        limits = limiting_roots(op, self._config.symbol, self._config.coeffs)
        return linear_shift(limits, int(spec["branch"]), spec.get("side", "plus"), geometry)

    def run_sugimoto(self, spec: dict, base_dir: str, recorder: RunRecorder) -> dict:
        geometry = self._config.geometry
        phase = self._phase(spec, base_dir)
        if phase is None:
            op = resolve_operator(spec.get("operator"), base_dir)
            limits = limiting_roots(op, self._config.symbol, self._config.coeffs)
            return limiting_geometry(limits, geometry).to_dict()
        report = sugimoto_indices(
            phase, geometry,
            sphere_samples=spec.get("sphere_samples"),
            plane_samples=spec.get("plane_samples"),
            gamma_max=spec.get("gamma_max"),
        )
        return report.to_dict()

    # ─── Decay experiments ───

    def run_decay(self, spec: dict, base_dir: str, recorder: RunRecorder) -> dict:
        op = resolve_operator(spec.get("operator"), base_dir)
        cauchy = self._config.cauchy
        times = _time_list(spec.get("times"), np.geomspace(cauchy.slope_window_min, cauchy.slope_window_max, 12))
        data_specs = spec.get("data", [{"k": 0, "kind": "gaussian"}])
        roots = default_certificate(op, self._config.symbol)

        grid_entry = spec.get("grid", {})
        box = grid_entry.get("box", "auto")
        if box == "auto":
            grid = SpectralGrid.auto(op.n, roots.bound_constant, float(np.max(np.abs(times))),
                                     profile_radius(data_specs, op.n), cauchy)
            if "points" in grid_entry:
                grid = SpectralGrid(op.n, int(grid_entry["points"]), grid.box)
        else:
            grid = SpectralGrid(op.n, int(grid_entry.get("points", 256)), float(box))
        data = CauchyData.from_specs(grid, op.m, data_specs)

        p = float(spec.get("p", 1.0))
        q = float(spec["q"]) if "q" in spec else None
        l = int(spec.get("l", 0))
        method = spec.get("method", "asymptotic")
        threads = self._config.run.threads
        report = decay_experiment(op, grid, data, times, p, q, roots=roots, l=l, alpha=spec.get("alpha"),
                                  method=method, config=self._config, threads=threads)
        fields = ["t", "total", "u1", "u2", "u3"] if spec.get("zones", True) else ["t", "total"]
        recorder.write_csv("decay.csv", report.rows, fields)
        summary = dict(report.to_dict(), grid=grid.to_dict(), certificate=roots.to_dict())

        if "small_times" in spec:
            small = small_time_check(op, grid, data, _time_list(spec["small_times"]), p, q, roots=roots, l=l,
                                     method=method, config=self._config, threads=threads)
            recorder.write_csv("small_time.csv", small.rows)
            summary["small_time"] = {key: value for key, value in small.to_dict().items() if key != "rows"}
        return summary

    # ─── Model oscillatory integrals ───

    def _model(self, spec: dict, base_dir: str) -> ModelIntegral:
        family = spec.get("family", "power")
        gamma = int(spec.get("gamma", 2))
        cutoff = spec.get("cutoff", "bump")
        if cutoff not in CUTOFFS:
            raise ConfigError(f"Unknown cutoff '{cutoff}', expected one of {', '.join(CUTOFFS)}")
        if family == "power":
            return ModelIntegral.power_phase(gamma, int(spec.get("N", 1)), cutoff, float(spec.get("delta", 2.0)))
        if family == "chart":
            phase = self._phase(spec, base_dir)
            if phase is None:
                raise ConfigError("Chart models need a 'phase' or an operator 'branch'")
            sigma = np.asarray(spec.get("sigma", [1.0] + [0.0] * (phase.n - 1)), dtype=float)
            chart = graph_chart(phase, sigma, self._config.geometry)
            return ModelIntegral.from_chart(chart, gamma, spec.get("z"), spec.get("delta"), cutoff)
        raise ConfigError(f"Unknown model family '{family}', expected 'power' or 'chart'")

    def run_vdc(self, spec: dict, base_dir: str, recorder: RunRecorder) -> dict:
        oscillatory = self._config.oscillatory
        model = self._model(spec, base_dir)
        lambdas = _time_list(spec.get("lambdas"), np.geomspace(10.0, 1e4, 16))
        predicted = float(spec.get("predicted_power", model.N / model.gamma))

        values = parallel_map(lambda lam: eval_model(model, float(lam), config=oscillatory), lambdas,
                              self._config.run.threads)
        rows = [
            {"lambda": float(lam), "abs_I": abs(value), "arg_I": math.atan2(value.imag, value.real)}
            for lam, value in zip(lambdas, values)
        ]
        recorder.write_csv("vdc.csv", rows)
        window = tuple(spec["window"]) if "window" in spec else None
        fit = fit_envelope(lambdas, np.abs(values), predicted, window, oscillatory.min_window_points)
        conditions = check_phase_conditions(model, fit_points=self._config.geometry.fit_points,
                                            fit_degree=self._config.geometry.fit_degree)
        drift = self_convergence(model, float(lambdas[-1]), config=oscillatory)
        if drift > oscillatory.self_convergence_tol:
            logger.warning("Model integral at lambda=%g changes by %.3g under refinement", lambdas[-1], drift)
        return dict(fit.to_dict(), label=model.label, gamma=model.gamma, N=model.N,
                    phase_conditions=conditions.to_dict(), self_convergence=drift)

    # ─── Dispersive kernels ───

    def run_kernel(self, spec: dict, base_dir: str, recorder: RunRecorder) -> dict:
        op = resolve_operator(spec.get("operator"), base_dir)
        times = _time_list(spec.get("times"))
        points = np.atleast_2d(np.asarray(spec.get("points", [[0.0] * op.n]), dtype=float))
        if points.shape[1] != op.n:
            raise ConfigError(f"Kernel points must have {op.n} components")
        window_entry = spec.get("window", {})
        window = AnnulusWindow(float(window_entry.get("inner", 0.5)), float(window_entry.get("outer", 2.0)),
                               float(window_entry.get("ramp", 0.25)))
        split = spec.get("split_radius")
        branch = spec.get("branch")

        roots = default_certificate(op, self._config.symbol)
        diag = build_diagonalizer(build_companion(op, roots.config), roots)
        ph = PhaseAccumulator(roots, self._config.spectral)
        psi = PsiFunction.from_operator(op)
        reach = float(np.max(np.linalg.norm(points, axis=-1)))
        kernel = DispersiveKernel(
            diag, ph, psi, window, times, reach, int(spec.get("l", 0)), int(spec.get("k", 0)),
            None if branch is None else int(branch), spec.get("method", "asymptotic"),
            self._config.oscillatory, self._config.asymint, self._config.run.threads,
        )

        rows, sup = [], []
        for i in range(len(times)):
            values = [kernel.evaluate(i, x, split) for x in points]
            rows.extend(value.to_row() for value in values)
            sup.append(max(abs(value.total) for value in values))
        recorder.write_csv("kernel.csv", rows)

        geometry = limiting_geometry(limiting_roots(op, self._config.symbol, self._config.coeffs),
                                     self._config.geometry)
        predicted = 0.0 if op.n == 1 or geometry.gamma is None else (op.n - 1) / geometry.gamma
        summary = {"operator": op.to_dict(), "geometry": geometry.to_dict(), "sup_abs_I": sup, "envelope": None}
        positive = times > 0
        if np.count_nonzero(positive) >= self._config.oscillatory.min_window_points:
            fit = fit_envelope(times[positive], np.asarray(sup)[positive], predicted,
                               min_points=self._config.oscillatory.min_window_points)
            summary["envelope"] = fit.to_dict()
        else:
            logger.warning("Too few positive times (%d) for an envelope fit", int(np.count_nonzero(positive)))
        return summary

    # ─── Diagonalizer dumps ───

    def run_dump(self, spec: dict, base_dir: str, recorder: RunRecorder) -> dict:
        op = resolve_operator(spec.get("operator"), base_dir)
        xi = np.asarray(spec.get("xi", [1.0] + [0.0] * (op.n - 1)), dtype=float)
        times = _time_list(spec.get("times"), np.linspace(-10.0, 10.0, 41))
        roots = default_certificate(op, self._config.symbol)
        cs = build_companion(op, roots.config)
        diag = build_diagonalizer(cs, roots)
        ph = PhaseAccumulator(roots, self._config.spectral)
        recorder.write_csv("frames.csv", dump_frame(diag, ph, times, xi))
        t_max = float(spec.get("t_max", np.max(np.abs(times))))
        energy = energy_check(cs, diag, xi, t_max, self._config.spectral.energy_samples,
                              seed=self._config.run.seed, tol=self._config.asymint.ode_tol)
        return {"operator": op.to_dict(), "det_lower_bound": diag.det_lower_bound, "energy": energy.to_dict()}
