use std::f64::consts::PI;

use num_complex::Complex64;
use qlight_core::classical::solve_fundamental;
use qlight_core::media::{LongitudinalProfile, MediumSpec, TabulatedProfile};
use qlight_core::quantum::{
    fock_wavefunction, gouy_phase, propagate_numeric, GaussianStateSpec, OfsGrid,
    SampledWavefunction,
};
use qlight_core::scenarios::{sweep_noise, sweep_table};

// reference guide in zeta = k0 z: N^2 = 1.515^2 + 0.25 cos^2(zeta / 50),
// one period is zeta in [0, 100 pi]
const NT: f64 = 1.515;
const DN: f64 = 0.5;

// scipy DOP853 (rtol 1e-13) and Radau (rtol 1e-12) agree to 1e-10 on these
const GOLDEN_THETA: [(f64, f64); 4] = [
    (0.25, 122.164574909986),
    (0.5, 244.329149200087),
    (0.75, 366.493722554100),
    (1.0, 488.658295114432),
];
const GOLDEN_RHO_QUARTER: f64 = 1.026187906370671;

/// Classical fourth-order Runge-Kutta on `[u, u', v, v', theta]` with a
/// fixed step, returning `(theta, rho)` at the requested fractions of the
/// period.
fn rk4_oracle(steps: usize, fractions: &[f64]) -> Vec<(f64, f64)> {
    let n0 = (NT * NT + DN * DN).sqrt();
    let f = |t: f64, y: [f64; 5]| {
        let n2 = NT * NT + DN * DN * (t / 50.0).cos().powi(2);
        let r2 = (n0 * y[0]).powi(2) + y[2] * y[2];
        [y[1], -n2 * y[0], y[3], -n2 * y[2], n0 / r2]
    };
    let total = 100.0 * PI;
    let h = total / steps as f64;
    let mut y = [0.0, 1.0, 1.0, 0.0, 0.0];
    let marks: Vec<usize> = fractions
        .iter()
        .map(|x| (x * steps as f64).round() as usize)
        .collect();
    let mut out = Vec::new();
    for k in 0..=steps {
        if marks.contains(&k) {
            out.push((y[4], ((n0 * y[0]).powi(2) + y[2] * y[2]).sqrt()));
        }
        if k == steps {
            break;
        }
        let t = k as f64 * h;
        let add = |a: [f64; 5], b: [f64; 5], s: f64| std::array::from_fn(|i| a[i] + s * b[i]);
        let k1 = f(t, y);
        let k2 = f(t + 0.5 * h, add(y, k1, 0.5 * h));
        let k3 = f(t + 0.5 * h, add(y, k2, 0.5 * h));
        let k4 = f(t + h, add(y, k3, h));
        y = std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    }
    out
}

#[test]
fn classical_phase_matches_rk4_oracle() {
    let sol = solve_fundamental(&MediumSpec::reference_cosine(), 1e-10, 2001).unwrap();
    let oracle = rk4_oracle(200_000, &[0.25, 1.0]);
    let quarter = 500;
    // default tolerance: theta to ~1e-9 relative
    assert!((sol.theta()[quarter] / oracle[0].0 - 1.0).abs() < 1e-9);
    assert!((sol.rho()[quarter] - oracle[0].1).abs() < 1e-9);
    assert!((sol.theta()[2000] / oracle[1].0 - 1.0).abs() < 1e-9);
    assert!((oracle[1].0 - GOLDEN_THETA[3].1).abs() < 1e-8);
}

#[test]
fn classical_phase_matches_golden() {
    let sol = solve_fundamental(&MediumSpec::reference_cosine(), 1e-10, 2001).unwrap();
    for (frac, theta) in GOLDEN_THETA {
        let i = (frac * 2000.0) as usize;
        assert!(
            (sol.theta()[i] / theta - 1.0).abs() < 1e-9,
            "{frac}: {}",
            sol.theta()[i]
        );
    }
    assert!((sol.rho()[500] - GOLDEN_RHO_QUARTER).abs() < 1e-9);
    // off-grid queries interpolate to the same values
    let l = sol.length_nm();
    assert!((sol.theta_at(l).unwrap() / GOLDEN_THETA[3].1 - 1.0).abs() < 1e-9);
    let tighter = solve_fundamental(&MediumSpec::reference_cosine(), 1e-13, 201).unwrap();
    assert!((tighter.theta()[200] - GOLDEN_THETA[3].1).abs() < 1e-8);
}

#[test]
fn tabulated_cosine_reproduces_analytic_profile() {
    let cos = MediumSpec::reference_cosine();
    let l = cos.length_nm();
    let lam = 2.0 * PI / l;
    let samples: Vec<(f64, f64)> = (0..=4000)
        .map(|i| {
            let z = l * i as f64 / 4000.0;
            (z, (lam * z).cos())
        })
        .collect();
    let tab = MediumSpec::new(
        653.0,
        NT,
        DN,
        LongitudinalProfile::Tabulated(TabulatedProfile::new(&samples).unwrap()),
        l,
    )
    .unwrap();
    let a = solve_fundamental(&cos, 1e-10, 101).unwrap();
    let b = solve_fundamental(&tab, 1e-10, 101).unwrap();
    let last = a.theta().len() - 1;
    assert!((a.theta()[last] - b.theta()[last]).abs() < 1e-4);
}

/// The kernel is diagonal in the Fock basis:
/// `<Psi_M| K(theta) |Psi_N> = delta_MN e^{i (N + 1/2) theta}` for M, N <= 40.
#[test]
fn kernel_acts_diagonally_on_fock_states() {
    for theta in [0.7, 2.4] {
        let grid = OfsGrid::symmetric(12.0, 4096)
            .unwrap()
            .resolved_for(theta)
            .unwrap();
        let basis: Vec<SampledWavefunction> = (0..=40)
            .map(|n| SampledWavefunction::from_fn(grid, |e| fock_wavefunction(n, e).unwrap()))
            .collect();
        let mut worst: f64 = 0.0;
        for (n, psi) in basis.iter().enumerate() {
            let out = propagate_numeric(psi, theta).unwrap();
            for (m, phi) in basis.iter().enumerate() {
                let want = if m == n {
                    Complex64::from_polar(1.0, (n as f64 + 0.5) * theta)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                worst = worst.max((phi.inner(&out) - want).norm());
            }
        }
        assert!(worst < 1e-6, "theta {theta}: {worst:e}");
    }
}

#[test]
fn sweep_rows_follow_golden_phase() {
    let medium = MediumSpec::reference_cosine();
    let values: Vec<f64> = (0..101)
        .map(|i| 1.0 / 3.0 + (3.0 - 1.0 / 3.0) * i as f64 / 100.0)
        .collect();
    let rows = sweep_noise(&medium, &values, 5).unwrap();
    assert_eq!(rows.len(), 101 * 5);
    assert_eq!(
        sweep_table(&rows).header(),
        ["noise0", "z_nm", "noise", "gouy_rad"]
    );
    let thetas = [
        0.0,
        GOLDEN_THETA[0].1,
        GOLDEN_THETA[1].1,
        GOLDEN_THETA[2].1,
        GOLDEN_THETA[3].1,
    ];
    for (k, row) in rows.iter().enumerate() {
        let n0 = values[k / 5];
        let theta = thetas[k % 5];
        assert_eq!(row.noise0, n0);
        assert!((row.z_nm - medium.length_nm() * (k % 5) as f64 / 4.0).abs() < 1e-9);
        let (s, c) = theta.sin_cos();
        let noise = s * s / n0 + c * c * n0;
        // theta is good to ~5e-7 here; both slopes are at most 3
        assert!((row.noise - noise).abs() < 2e-6, "{k}");
        let st = GaussianStateSpec::new(0.0, 0.0, n0).unwrap();
        assert!((row.gouy - gouy_phase(&st, theta)).abs() < 2e-6, "{k}");
        assert!((row.gouy - theta).abs() < PI / 2.0);
    }
    let flat = sweep_noise(&medium, &[1.0], 5).unwrap();
    assert!(flat.iter().all(|r| r.noise == 1.0));
}
