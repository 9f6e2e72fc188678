"""Reference systems: the five-TX benchmark setup and seeded random instances."""
import numpy as np

from .model import RxCoil, SystemParams, TxCoil

UH = 1e-6

# TX-RX and TX-TX mutual inductances, microhenries
PAPER_M = np.array([1.6121, 0.00781, -0.0296, 0.00781, 0.1508]) * UH
PAPER_M_TX = np.array([
    [0.0, 0.3565, 0.1253, 0.3565, 0.2984],
    [0.3565, 0.0, 0.3565, 0.1253, 0.2984],
    [0.1253, 0.3565, 0.0, 0.3565, 0.2984],
    [0.3565, 0.1253, 0.3565, 0.0, 0.2984],
    [0.2984, 0.2984, 0.2984, 0.2984, 0.0],
]) * UH
PAPER_SELF_INDUCTANCE = 5886.8 * UH
# 6.78e6 rad/s reproduces the reference efficiencies and optimal currents;
# scaling it by 2 pi does not.
PAPER_OMEGA = 6.78e6
PAPER_R_TX = 0.336
PAPER_R_P0 = 0.336
PAPER_R_L0 = 50.0
PAPER_V_MAX = 30.0 * np.sqrt(2.0)
PAPER_A_MAX = 5.0 * np.sqrt(2.0)


def paper_params(limits: bool = True) -> SystemParams:
    cap = 1.0 / (PAPER_OMEGA**2 * PAPER_SELF_INDUCTANCE)
    tx = [TxCoil(PAPER_R_TX,
                 PAPER_V_MAX if limits else None,
                 PAPER_A_MAX if limits else None,
                 PAPER_SELF_INDUCTANCE, cap)
          for _ in range(5)]
    rx = RxCoil(PAPER_R_P0, PAPER_R_L0, PAPER_SELF_INDUCTANCE, cap)
    return SystemParams(PAPER_OMEGA, tx, rx, PAPER_M.copy(), PAPER_M_TX.copy())


def trivial_params() -> SystemParams:
    """One TX, w = 1, r1 = 1, r_p0 = 0, r_l0 = 1, M01 = 1."""
    return SystemParams(1.0, [TxCoil(1.0)], RxCoil(0.0, 1.0), [1.0], [[0.0]])


def random_params(rng: np.random.Generator, n: int, limits: str = "random",
                  beta_fraction=(0.4, 0.95)):
    """Draw a random feasible system and a load power target.

    Limits are placed around a random reference current vector ``i_ref``
    (which therefore satisfies them), so the optimum has each limit active
    with roughly even odds.  ``limits`` is ``"random"`` or ``"none"``.

    Returns ``(params, beta0, i_ref)``.
    """
    omega = 1e6
    r = rng.uniform(0.2, 2.0, n)
    m = rng.normal(0.0, 1.0, n) * 1e-6
    m_tx = rng.normal(0.0, 0.3, (n, n)) * 1e-6
    m_tx = np.triu(m_tx, 1)
    m_tx = m_tx + m_tx.T
    r_p0 = rng.uniform(0.0, 1.0)
    r_l0 = rng.uniform(1.0, 20.0)
    i_ref = (rng.normal(size=n) + 1j * rng.normal(size=n)) * rng.uniform(0.5, 3.0)
    base = SystemParams(omega, [TxCoil(x) for x in r], RxCoil(r_p0, r_l0), m, m_tx)
    if limits == "none":
        tx = [TxCoil(x) for x in r]
    else:
        from .model import build_system, load_power, tx_voltages  # noqa: PLC0415
        model = build_system(base)
        vmag = np.abs(tx_voltages(model, i_ref))
        tx = []
        for k in range(n):
            vmax = vmag[k] * rng.uniform(1.0, 1.6) if rng.random() < 0.7 else None
            amax = abs(i_ref[k]) * rng.uniform(1.0, 1.6) if rng.random() < 0.7 else None
            tx.append(TxCoil(r[k], vmax, amax))
    params = base.replace(tx=tx)
    from .model import build_system, load_power  # noqa: PLC0415
    p_ref = load_power(build_system(params), i_ref)
    beta0 = p_ref * rng.uniform(*beta_fraction)
    return params, float(beta0), i_ref
