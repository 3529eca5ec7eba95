"""The spectral kernel on a small example: split index, value and weights."""
import numpy as np

from mesp_gscale.gamma import compute_iota, gamma_eval_from_spectrum, phi_s

lam = np.array([9.0, 4.0, 1.0, 0.5, 0.25])
for s in range(1, 6):
    ge = gamma_eval_from_spectrum(lam, s)
    print(f"s={s}: iota={compute_iota(lam, s)} phi={phi_s(lam, s):.4f} beta={np.round(ge.beta, 4)}")
print("phi_3(2 lam) - phi_3(lam) =", round(phi_s(2 * lam, 3) - phi_s(lam, 3), 12), "= 3 log 2 =", round(3 * np.log(2), 12))
