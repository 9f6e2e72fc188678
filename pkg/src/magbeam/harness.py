"""Experiment harness: single solves, beta0 sweeps and deliverable-power limits.

Every function returns plain data (text, dicts, CSV strings) plus an exit
code, so the CLI stays a thin argparse shell and tests can call these
directly.  Output is deterministic: solvers are deterministic, the oracle is
seeded, rows are ordered, and wall-clock timing is only recorded on request.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import baseline, closedform, sdp
from .errors import (InfeasibleProblem, MagbeamError, MaxIterationsReached, NoFeasiblePointFound,
                     RankDeficiencyUnexpected)
from .model import Status, SystemModel, align_phase, infeasible_solution, tx_voltages
from .scenario import MODES, Scenario

log = logging.getLogger(__name__)

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2


@dataclass
class SweepRecord:
    beta0: float
    mode: str
    status: str
    total_power: float
    efficiency: float
    load_power: float
    currents: Optional[np.ndarray]
    binding: tuple
    violated: tuple = ()
    rank_ratio: Optional[float] = None
    kkt_residual: Optional[float] = None
    wall_ms: Optional[float] = None
    note: str = ""
    certificate: Optional[dict] = None
    per_tx_power: Optional[np.ndarray] = None
    voltages: Optional[np.ndarray] = None
    extra: dict = field(default_factory=dict)

    @property
    def i_mag(self):
        return [] if self.currents is None else np.abs(self.currents).tolist()

    @property
    def i_phase(self):
        return [] if self.currents is None else clean_phase(self.currents).tolist()


PHASE_SNAP = 1e-12


def clean_phase(i) -> np.ndarray:
    """Phases in (-pi, pi] with round-off at 0 and pi snapped away.

    Real-valued optima come back with imaginary parts of order 1e-20, which
    would otherwise print as phases of +-pi or +-1e-23 at random.
    """
    ph = np.angle(i)
    ph[np.abs(ph) <= PHASE_SNAP] = 0.0
    ph[np.abs(ph) >= np.pi - PHASE_SNAP] = np.pi
    return ph


def _num(x):
    """JSON-safe float (NaN and None both become null)."""
    if x is None:
        return None
    x = float(x)
    return None if math.isnan(x) else x


def solve_mode(model: SystemModel, beta0: float, mode: str, tol: float = sdp.DEFAULT_TOL,
               seed: int = 0, restarts: int = 50, timing: bool = False) -> SweepRecord:
    """Run one solver at one load power and package the outcome."""
    t0 = time.perf_counter()
    note, cert = "", None
    rank = kkt = None
    try:
        if mode == "closedform":
            sol = closedform.solve_unconstrained(model, beta0).solution
            if sol.violated:
                note = "voltage/current limits ignored by this mode"
        elif mode == "sdp":
            sol = sdp.solve_p1(model, beta0, tol=tol)
            rank = sol.info["rank_ratio"]
            kkt = sol.info["kkt_max_residual"]
        elif mode == "equal_current":
            sol = baseline.equal_current_min_power(model, beta0)
            if sol.status is Status.INFEASIBLE:
                note = (f"equal currents of {sol.info['alpha']:.6g} A would violate "
                        + ", ".join(sol.violated))
                sol = replace(infeasible_solution(beta0), violated=sol.violated)
        elif mode == "oracle":
            cfg = baseline.OracleConfig(restarts=restarts, seed=seed)
            sol = baseline.multistart_qcqp(model, beta0, cfg)
        else:
            raise ValueError(f"unknown mode {mode!r}")
    except InfeasibleProblem as exc:
        sol = infeasible_solution(beta0)
        cert = exc.certificate
        note = "infeasible: " + str(exc)
    except NoFeasiblePointFound as exc:
        sol = infeasible_solution(beta0)
        note = "no feasible point found (not a certificate): " + str(exc)
    except (MaxIterationsReached, RankDeficiencyUnexpected) as exc:
        sol = infeasible_solution(beta0, status=Status.MAX_ITERATIONS)
        note = str(exc)
    wall = (time.perf_counter() - t0) * 1e3 if timing else None
    currents = None if sol.currents is None else align_phase(sol.currents, model.m)
    volts = None if currents is None else tx_voltages(model, currents)
    return SweepRecord(beta0, mode, str(sol.status), sol.total_power, sol.efficiency,
                       sol.load_power, currents, tuple(sol.binding), tuple(sol.violated),
                       rank, kkt, wall, note, cert, sol.per_tx_power, volts)


def record_to_json(rec: SweepRecord) -> dict:
    out = {
        "beta0_w": rec.beta0,
        "mode": rec.mode,
        "status": rec.status,
        "total_power_w": _num(rec.total_power),
        "load_power_w": _num(rec.load_power),
        "efficiency": _num(rec.efficiency),
        "i_mag_a": rec.i_mag,
        "i_phase_rad": rec.i_phase,
        "binding": list(rec.binding),
        "violated": list(rec.violated),
        "rank_ratio": _num(rec.rank_ratio),
        "kkt_residual": _num(rec.kkt_residual),
        "wall_ms": _num(rec.wall_ms),
    }
    if rec.per_tx_power is not None:
        out["per_tx_power_w"] = [float(x) for x in rec.per_tx_power]
        out["v_mag_v"] = np.abs(rec.voltages).tolist()
    if rec.note:
        out["note"] = rec.note
    if rec.certificate is not None:
        c = rec.certificate
        out["certificate"] = {"max_load_power_w": _num(c.get("max_load_power_w")),
                              "rho": [float(x) for x in c.get("rho", [])],
                              "mu": [float(x) for x in c.get("mu", [])]}
    return out


# ------------------------------------------------------------------ solve

def _format_record(rec: SweepRecord) -> list:
    lines = [f"[{rec.mode}] status: {rec.status}"]
    if rec.currents is None:
        if rec.note:
            lines.append("  " + rec.note)
        return lines
    lines.append(f"  total source power {rec.total_power:.6g} W, load power "
                 f"{rec.load_power:.6g} W, efficiency {100 * rec.efficiency:.3f} %")
    lines.append("   TX      |i| (A)   phase (deg)      |v| (V)        p (W)")
    phases = clean_phase(rec.currents)
    for k, i in enumerate(rec.currents):
        lines.append(f"  {k + 1:3d} {abs(i):12.6g} {np.degrees(phases[k]):13.4f} "
                     f"{abs(rec.voltages[k]):12.6g} {rec.per_tx_power[k]:12.6g}")
    lines.append("  binding: " + (", ".join(rec.binding) or "none"))
    if rec.violated:
        lines.append("  violated: " + ", ".join(rec.violated))
    if rec.rank_ratio is not None:
        lines.append(f"  rank ratio {rec.rank_ratio:.3e}, KKT max residual {rec.kkt_residual:.3e}")
    if rec.note:
        lines.append("  note: " + rec.note)
    return lines


def run_solve(sc: Scenario, mode: Optional[str] = None, beta0: Optional[float] = None,
              tol: Optional[float] = None, seed: Optional[int] = None, timing: bool = False):
    """Solve one load-power target.  Returns ``(text, report, exit_code)``.

    The exit code follows the SDP result when ``mode`` is ``all``: 0 for an
    optimum, 2 when the target is infeasible, 1 for anything else.
    """
    mode = mode or sc.solve.mode
    beta0 = beta0 if beta0 is not None else sc.solve.beta0
    if beta0 is None:
        raise MagbeamError("no beta0 given (set solve.beta0_w or pass --beta0)")
    tol = tol if tol is not None else sc.solve.tol
    seed = seed if seed is not None else sc.solve.seed
    model = sc.model()
    modes = MODES if mode == "all" else (mode,)
    recs = [solve_mode(model, beta0, m, tol, seed, sc.solve.oracle_restarts, timing)
            for m in modes]
    lines = [f"scenario {sc.name}: N = {sc.n}, beta0 = {beta0:.6g} W"]
    for rec in recs:
        lines += _format_record(rec)
    report = {"scenario": sc.name, "beta0_w": beta0, "results": [record_to_json(r) for r in recs]}
    by_mode = {r.mode: r for r in recs}
    if "closedform" in by_mode and "sdp" in by_mode:
        cf, sd = by_mode["closedform"], by_mode["sdp"]
        if sd.currents is not None:
            rel = abs(cf.total_power - sd.total_power) / sd.total_power
            lines.append(f"closedform/sdp agreement: {rel:.3e} relative"
                         + ("" if not cf.violated else " (limits active, closedform ignores them)"))
            report["closedform_sdp_rel_diff"] = rel
    key = by_mode.get("sdp", recs[0])
    code = {str(Status.OPTIMAL): EXIT_OK, str(Status.INFEASIBLE): EXIT_INFEASIBLE}.get(
        key.status, EXIT_ERROR)
    report["exit_code"] = code
    return "\n".join(lines) + "\n", report, code


# ------------------------------------------------------------------ sweep

CSV_FMT = ".9g"


def _fmt(x) -> str:
    if x is None:
        return ""
    x = float(x)
    return "" if math.isnan(x) else format(x, CSV_FMT)


def sweep_records(sc: Scenario, modes=None, tol=None, seed=None, timing=False, workers=1):
    if sc.solve.sweep is None:
        raise MagbeamError("scenario has no solve.sweep block")
    modes = tuple(modes) if modes else sc.solve.sweep_modes()
    tol = tol if tol is not None else sc.solve.tol
    seed = seed if seed is not None else sc.solve.seed
    model = sc.model()
    grid = sc.solve.sweep.grid()
    jobs = sorted(((m, float(b)) for m in modes for b in grid))

    def work(job):
        return solve_mode(model, job[1], job[0], tol, seed, sc.solve.oracle_restarts, timing)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(work, jobs))
    return [work(j) for j in jobs]


def records_to_csv(records, n: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["beta0", "mode", "status", "total_power_w", "efficiency"]
               + [f"i_mag_{k}" for k in range(1, n + 1)]
               + [f"i_phase_{k}" for k in range(1, n + 1)]
               + ["binding", "rank_ratio", "kkt_residual", "wall_ms"])
    for r in sorted(records, key=lambda r: (r.mode, r.beta0)):
        mags = [_fmt(x) for x in r.i_mag] or [""] * n
        phases = [_fmt(x) for x in r.i_phase] or [""] * n
        w.writerow([_fmt(r.beta0), r.mode, r.status, _fmt(r.total_power), _fmt(r.efficiency)]
                   + mags + phases
                   + [";".join(r.binding), _fmt(r.rank_ratio), _fmt(r.kkt_residual),
                      _fmt(r.wall_ms)])
    return buf.getvalue()


def run_sweep(sc: Scenario, modes=None, tol=None, seed=None, timing=False, workers=1) -> str:
    """CSV text with one row per (mode, beta0) grid point."""
    return records_to_csv(sweep_records(sc, modes, tol, seed, timing, workers), sc.n)


# --------------------------------------------------------------- maxpower

def run_maxpower(sc: Scenario, tol: Optional[float] = None):
    """Largest deliverable load power with optimal and with equal currents.

    Returns ``(text, report, exit_code)``; raises ``Unbounded`` when no limit
    is finite.
    """
    tol = tol if tol is not None else sc.solve.tol
    model = sc.model()
    bf, bf_sol = sdp.max_deliverable_power(model, tol=tol)
    eq, eq_sol = baseline.equal_current_max_power(model)
    gain = (bf / eq - 1.0) * 100.0
    report = {
        "scenario": sc.name,
        "beamforming": {"beta0_max_w": bf, "efficiency": bf_sol.efficiency,
                        "total_power_w": bf_sol.total_power, "binding": list(bf_sol.binding),
                        "i_mag_a": np.abs(bf_sol.currents).tolist()},
        "equal_current": {"beta0_max_w": eq, "efficiency": eq_sol.efficiency,
                          "total_power_w": eq_sol.total_power, "binding": list(eq_sol.binding),
                          "alpha_a": eq_sol.info["alpha"]},
        "enhancement_percent": gain,
    }
    text = (f"scenario {sc.name}: deliverable load power\n"
            f"  beamforming   {bf:10.6g} W  (efficiency {100 * bf_sol.efficiency:.2f} %, "
            f"binding {', '.join(bf_sol.binding)})\n"
            f"  equal current {eq:10.6g} W  (efficiency {100 * eq_sol.efficiency:.2f} %, "
            f"binding {', '.join(eq_sol.binding)})\n"
            f"  enhancement   {gain:10.4g} %\n")
    return text, report, EXIT_OK


def to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"
