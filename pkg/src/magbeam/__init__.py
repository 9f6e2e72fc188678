"""Optimal transmitter currents for multi-coil magnetic resonant power transfer."""
from .errors import MagbeamError
from .model import (CurrentSolution, RxCoil, Status, SystemModel, SystemParams, TxCoil,
                    build_system, check_feasibility, evaluate, load_power, per_tx_power,
                    total_source_power, tx_voltages)
from .closedform import solve_identical_r, solve_unconstrained
from .sdp import formulate, max_deliverable_power, solve_p1, solve_sdr, verify_kkt
from .baseline import (OracleConfig, equal_current_max_power, equal_current_min_power,
                       multistart_qcqp)

__version__ = "0.1.0"

__all__ = [
    "MagbeamError", "CurrentSolution", "RxCoil", "Status", "SystemModel", "SystemParams",
    "TxCoil", "build_system", "check_feasibility", "evaluate", "load_power", "per_tx_power",
    "total_source_power", "tx_voltages", "solve_identical_r", "solve_unconstrained",
    "formulate", "max_deliverable_power", "solve_p1", "solve_sdr", "verify_kkt",
    "OracleConfig", "equal_current_max_power", "equal_current_min_power", "multistart_qcqp",
]
