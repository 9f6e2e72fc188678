"""Circuit algebra for a multi-TX, single-RX resonant coupling link.

All phasors use the peak (amplitude) convention, so time-averaged power is
``0.5 * Re(v * conj(i))``.  Currents are complex numpy vectors of length N.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidParams

SYMMETRY_TOL = 1e-12
RESONANCE_TOL = 1e-9
FEASIBILITY_TOL = 1e-7
BINDING_TOL = 1e-5


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    MAX_ITERATIONS = "MaxIterations"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class TxCoil:
    resistance: float
    max_voltage: Optional[float] = None
    max_current: Optional[float] = None
    self_inductance: Optional[float] = None
    capacitance: Optional[float] = None


@dataclass(frozen=True)
class RxCoil:
    parasitic_resistance: float
    load_resistance: float
    self_inductance: Optional[float] = None
    capacitance: Optional[float] = None


@dataclass(frozen=True, eq=False)
class SystemParams:
    """Raw electrical description of the link.

    ``m`` holds the signed TX->RX mutual inductances and ``m_tx`` the
    symmetric TX-TX mutual inductance matrix (zero diagonal), both in henries.
    A ``None`` voltage or current limit means the constraint is absent.
    """

    omega: float
    tx: tuple
    rx: RxCoil
    m: np.ndarray
    m_tx: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "tx", tuple(self.tx))
        object.__setattr__(self, "m", np.asarray(self.m, dtype=float).reshape(-1))
        object.__setattr__(self, "m_tx", np.asarray(self.m_tx, dtype=float))

    @property
    def n(self) -> int:
        return len(self.tx)

    @property
    def r(self) -> np.ndarray:
        return np.array([c.resistance for c in self.tx], dtype=float)

    @property
    def r0(self) -> float:
        return self.rx.parasitic_resistance + self.rx.load_resistance

    @property
    def v_max(self) -> tuple:
        return tuple(c.max_voltage for c in self.tx)

    @property
    def a_max(self) -> tuple:
        return tuple(c.max_current for c in self.tx)

    def has_finite_limits(self) -> bool:
        return any(v is not None for v in self.v_max + self.a_max)

    def replace(self, **changes) -> "SystemParams":
        fields = dict(omega=self.omega, tx=self.tx, rx=self.rx, m=self.m, m_tx=self.m_tx)
        fields.update(changes)
        return SystemParams(**fields)

    def without_limits(self) -> "SystemParams":
        tx = [TxCoil(c.resistance, None, None, c.self_inductance, c.capacitance) for c in self.tx]
        return self.replace(tx=tx)


def validate_params(params: SystemParams) -> None:
    n = params.n
    if n < 1:
        raise InvalidParams("at least one TX coil is required")
    if not (np.isfinite(params.omega) and params.omega > 0):
        raise InvalidParams(f"omega must be positive, got {params.omega!r}")
    for k, coil in enumerate(params.tx, start=1):
        if not coil.resistance > 0:
            raise InvalidParams(f"tx[{k}].resistance must be > 0, got {coil.resistance!r}")
        for name in ("max_voltage", "max_current"):
            val = getattr(coil, name)
            if val is not None and not val > 0:
                raise InvalidParams(f"tx[{k}].{name} must be > 0 when given, got {val!r}")
    if not params.rx.parasitic_resistance >= 0:
        raise InvalidParams("rx.parasitic_resistance must be >= 0")
    if not params.rx.load_resistance > 0:
        raise InvalidParams("rx.load_resistance must be > 0")
    if params.m.shape != (n,):
        raise InvalidParams(f"m must have length {n}, got shape {params.m.shape}")
    if params.m_tx.shape != (n, n):
        raise InvalidParams(f"m_tx must be {n}x{n}, got shape {params.m_tx.shape}")
    if not (np.all(np.isfinite(params.m)) and np.all(np.isfinite(params.m_tx))):
        raise InvalidParams("inductances must be finite")
    if np.max(np.abs(params.m_tx - params.m_tx.T), initial=0.0) > SYMMETRY_TOL:
        raise InvalidParams("m_tx must be symmetric")
    if np.max(np.abs(np.diag(params.m_tx)), initial=0.0) > SYMMETRY_TOL:
        raise InvalidParams("m_tx must have a zero diagonal")
    coils = [(f"tx[{k}]", c) for k, c in enumerate(params.tx, start=1)] + [("rx", params.rx)]
    for label, coil in coils:
        L, C = coil.self_inductance, coil.capacitance
        if L is None and C is None:
            continue
        if L is None or C is None or not (L > 0 and C > 0):
            raise InvalidParams(f"{label}: resonance data needs positive L and C together")
        if abs(params.omega**2 * L * C - 1.0) > RESONANCE_TOL:
            raise InvalidParams(f"{label}: not resonant at omega (|w^2 LC - 1| = "
                                f"{abs(params.omega**2 * L * C - 1.0):.3e})")


@dataclass(frozen=True, eq=False)
class SystemModel:
    """Derived matrices: ``B = B_bar + 1j * B_hat`` with ``v = B^H i``."""

    params: SystemParams
    B_bar: np.ndarray
    B_hat: np.ndarray

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def B(self) -> np.ndarray:
        return self.B_bar + 1j * self.B_hat

    @property
    def b_cols(self) -> list:
        B = self.B
        return [B[:, k].copy() for k in range(self.n)]

    @property
    def m(self) -> np.ndarray:
        return self.params.m

    @property
    def load_coeff(self) -> float:
        """Factor kappa in ``p0 = kappa * |m^T i|^2``."""
        p = self.params
        return p.omega**2 * p.rx.load_resistance / (2.0 * p.r0**2)


def build_system(params: SystemParams) -> SystemModel:
    validate_params(params)
    w, m, r0 = params.omega, params.m, params.r0
    B_bar = np.diag(params.r) + (w**2 / r0) * np.outer(m, m)
    B_hat = -w * params.m_tx.copy()
    np.fill_diagonal(B_hat, 0.0)
    B_bar = 0.5 * (B_bar + B_bar.T)
    B_hat = 0.5 * (B_hat + B_hat.T)
    scale = np.linalg.norm(B_bar)
    lo = np.linalg.eigvalsh(B_bar)[0]
    if lo < -1e-12 * scale:
        raise InvalidParams(f"B_bar is not PSD (min eigenvalue {lo:.3e})")
    B_bar.setflags(write=False)
    B_hat.setflags(write=False)
    return SystemModel(params, B_bar, B_hat)


def _currents(model: SystemModel, i) -> np.ndarray:
    i = np.asarray(i, dtype=complex).reshape(-1) if np.ndim(i) else np.array([i], dtype=complex)
    if i.shape != (model.n,):
        raise DimensionMismatch(f"expected {model.n} currents, got {i.shape[0]}")
    return i


def rx_current(model: SystemModel, i) -> complex:
    i = _currents(model, i)
    p = model.params
    return complex(1j * p.omega / p.r0 * np.dot(p.m, i))


def load_power(model: SystemModel, i) -> float:
    i = _currents(model, i)
    return float(model.load_coeff * abs(np.dot(model.m, i)) ** 2)


def tx_voltages(model: SystemModel, i) -> np.ndarray:
    i = _currents(model, i)
    return model.B.conj().T @ i


def total_source_power(model: SystemModel, i) -> float:
    i = _currents(model, i)
    return float(0.5 * np.real(np.vdot(i, model.B_bar @ i)))


def per_tx_power(model: SystemModel, i) -> np.ndarray:
    i = _currents(model, i)
    v = tx_voltages(model, i)
    return 0.5 * np.real(v * np.conj(i))


@dataclass(frozen=True)
class ConstraintStatus:
    name: str
    value: float
    limit: float
    slack: float  # relative; negative means violated
    state: str  # "slack" | "binding" | "violated"


@dataclass(frozen=True)
class FeasibilityReport:
    constraints: tuple

    @property
    def feasible(self) -> bool:
        return not self.violated

    @property
    def binding(self) -> tuple:
        return tuple(c.name for c in self.constraints if c.state == "binding")

    @property
    def violated(self) -> tuple:
        return tuple(c.name for c in self.constraints if c.state == "violated")

    def __getitem__(self, name) -> ConstraintStatus:
        for c in self.constraints:
            if c.name == name:
                return c
        raise KeyError(name)


def _classify(name, value, limit, slack):
    if slack < -FEASIBILITY_TOL:
        state = "violated"
    elif abs(slack) <= BINDING_TOL:
        state = "binding"
    else:
        state = "slack"
    return ConstraintStatus(name, float(value), float(limit), float(slack), state)


def check_feasibility(model: SystemModel, i, beta0: float) -> FeasibilityReport:
    """Classify the load-power, peak-voltage and peak-current constraints.

    Constraint names are ``"P0"``, ``"V1".."VN"`` and ``"A1".."AN"``; absent
    limits are skipped.
    """
    if not beta0 > 0:
        raise InvalidParams("beta0 must be positive")
    i = _currents(model, i)
    p0 = load_power(model, i)
    out = [_classify("P0", p0, beta0, (p0 - beta0) / beta0)]
    vmag = np.abs(tx_voltages(model, i))
    for k, lim in enumerate(model.params.v_max):
        if lim is not None:
            out.append(_classify(f"V{k + 1}", vmag[k], lim, (lim - vmag[k]) / lim))
    for k, lim in enumerate(model.params.a_max):
        if lim is not None:
            mag = abs(i[k])
            out.append(_classify(f"A{k + 1}", mag, lim, (lim - mag) / lim))
    return FeasibilityReport(tuple(out))


@dataclass(frozen=True, eq=False)
class CurrentSolution:
    currents: Optional[np.ndarray]
    load_power: float
    total_power: float
    per_tx_power: Optional[np.ndarray]
    efficiency: float
    binding: tuple
    status: Status
    beta0: Optional[float] = None
    violated: tuple = ()
    report: Optional[FeasibilityReport] = None
    info: dict = field(default_factory=dict)

    @property
    def objective(self) -> float:
        return self.total_power


def evaluate(model: SystemModel, i, beta0: Optional[float] = None,
             status: Status = Status.OPTIMAL, info: Optional[dict] = None) -> CurrentSolution:
    """Bundle all circuit quantities for current vector ``i``."""
    i = _currents(model, i)
    p0 = load_power(model, i)
    pn = per_tx_power(model, i)
    p = total_source_power(model, i)
    report = check_feasibility(model, i, beta0) if beta0 is not None else None
    return CurrentSolution(
        currents=i,
        load_power=p0,
        total_power=p,
        per_tx_power=pn,
        efficiency=p0 / p if p > 0 else 0.0,
        binding=report.binding if report else (),
        status=Status(status),
        beta0=beta0,
        violated=report.violated if report else (),
        report=report,
        info=dict(info or {}),
    )


def infeasible_solution(beta0: Optional[float], status: Status = Status.INFEASIBLE,
                        info: Optional[dict] = None) -> CurrentSolution:
    nan = float("nan")
    return CurrentSolution(None, nan, nan, None, nan, (), Status(status), beta0,
                           info=dict(info or {}))


def align_phase(i: np.ndarray, m: Sequence[float]) -> np.ndarray:
    """Rotate by a common phase so that ``m^T i`` is real and non-negative."""
    i = np.asarray(i, dtype=complex)
    s = np.dot(np.asarray(m, dtype=float), i)
    if abs(s) > 0:
        return i * (np.conj(s) / abs(s))
    k = int(np.argmax(np.abs(i)))
    if abs(i[k]) == 0:
        return i
    return i * (np.conj(i[k]) / abs(i[k]))
