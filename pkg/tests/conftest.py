import numpy as np

ACCEPTANCE_LINES = []


def rk4_trajectory(A, f0, taus, h=1e-3):
    """Classical RK4 for df/dtau = A f, landing exactly on each sorted tau."""
    f = np.array(f0, dtype=float)
    t = 0.0
    out = []
    for target in taus:
        while t < target:
            dt = min(h, target - t)
            k1 = A @ f
            k2 = A @ (f + 0.5 * dt * k1)
            k3 = A @ (f + 0.5 * dt * k2)
            k4 = A @ (f + dt * k3)
            f = f + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            t += dt
            if target - t < 1e-13:
                t = target
        out.append(f.copy())
    return np.array(out).T


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
