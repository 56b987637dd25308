use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest photon number accepted by the Hermite-Gauss evaluators.
pub const MAX_FOCK_INDEX: usize = 60;

/// `Psi_0 .. Psi_n` at `e`, all real.
///
/// Uses the recurrence for normalised Hermite functions in `x = sqrt(2) e`,
/// `phi_{k+1} = sqrt(2/(k+1)) x phi_k - sqrt(k/(k+1)) phi_{k-1}`, which
/// never forms `H_n` or `n!` and so cannot overflow; `Psi_k = 2^{1/4} phi_k`.
pub fn fock_ladder(n: usize, e: f64) -> Result<Vec<f64>> {
    if n > MAX_FOCK_INDEX {
        return Err(Error::FockIndex {
            n,
            max: MAX_FOCK_INDEX,
        });
    }
    let x = std::f64::consts::SQRT_2 * e;
    let mut out = Vec::with_capacity(n + 1);
    // 2^{1/4} pi^{-1/4} exp(-e^2)
    let psi0 = (2.0 / std::f64::consts::PI).powf(0.25) * (-e * e).exp();
    out.push(psi0);
    if n >= 1 {
        out.push(std::f64::consts::SQRT_2 * x * psi0);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
        out.push(next);
    }
    Ok(out)
}

/// Hermite-Gauss eigenfunction `Psi_N(E)` at the input plane.
pub fn fock_wavefunction(n: usize, e: f64) -> Result<Complex64> {
    Ok(Complex64::new(fock_ladder(n, e)?[n], 0.0))
}

/// `exp(i (N + 1/2) theta) Psi_N(E)`.
pub fn fock_propagated(n: usize, e: f64, theta: f64) -> Result<Complex64> {
    let psi = fock_ladder(n, e)?[n];
    Ok(Complex64::from_polar(1.0, (n as f64 + 0.5) * theta) * psi)
}
