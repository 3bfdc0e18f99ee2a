import numpy as np

OMEGA_C = 0.1
OMEGA_I = 1.0


def loss_total(B_hat, B, alpha_hat, alpha, m_hat, m, omega_c=OMEGA_C, omega_i=OMEGA_I):
    """Return ``(L, L_c, L_i)``.

    ``L_c`` is the squared error of the two scattering parameters and
    ``L_i`` the mean absolute error of the restored image.
    """
    B_hat = np.asarray(B_hat, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if B_hat.shape != B.shape:
        raise ValueError(f"shape mismatch: {B_hat.shape} vs {B.shape}")
    l_c = (alpha_hat - alpha) ** 2 + (m_hat - m) ** 2
    l_i = float(np.mean(np.abs(B_hat - B)))
    return omega_c * l_c + omega_i * l_i, l_c, l_i
