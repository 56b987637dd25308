//! Separable index model `n^2 = n0^2 f^2(x, y) + dn^2 h^2(z)` reduced to the
//! local propagation constant `beta(z)^2 = beta_t^2 + k0^2 dn^2 h(z)^2`.
//!
//! Lengths are in nanometres, propagation constants in rad/nm.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Longitudinal part `h(z)` of the index profile.
#[derive(Debug, Clone, PartialEq)]
pub enum LongitudinalProfile {
    /// `h(z) = 1`.
    Constant,
    /// `h(z) = cos(spatial_frequency * z)`, spatial frequency in rad/nm.
    Cosine {
        spatial_frequency: f64,
    },
    Tabulated(TabulatedProfile),
}

impl LongitudinalProfile {
    pub fn cosine(spatial_frequency: f64) -> Result<Self> {
        if !(spatial_frequency.is_finite() && spatial_frequency > 0.0) {
            return Err(Error::InvalidParameter {
                name: "spatial_frequency",
                value: spatial_frequency,
                reason: "must be finite and > 0",
            });
        }
        Ok(Self::Cosine { spatial_frequency })
    }

    pub fn h(&self, z: f64) -> Result<f64> {
        match self {
            Self::Constant => Ok(1.0),
            Self::Cosine { spatial_frequency } => Ok((spatial_frequency * z).cos()),
            Self::Tabulated(t) => t.eval(z),
        }
    }
}

/// Samples of `h(z)` joined by a monotone piecewise-cubic (PCHIP) interpolant.
///
/// Interpolating `h` itself keeps sign changes and never overshoots the
/// sampled extrema.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedProfile {
    z: Vec<f64>,
    h: Vec<f64>,
    slopes: Vec<f64>,
}

impl TabulatedProfile {
    pub fn new(samples: &[(f64, f64)]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidProfile(format!(
                "need at least 2 samples, got {}",
                samples.len()
            )));
        }
        for (i, &(z, h)) in samples.iter().enumerate() {
            if !z.is_finite() || !h.is_finite() {
                return Err(Error::InvalidProfile(format!("sample {i} is not finite")));
            }
        }
        for (i, w) in samples.windows(2).enumerate() {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidProfile(format!(
                    "z must be strictly increasing (sample {} at z = {} follows z = {})",
                    i + 1,
                    w[1].0,
                    w[0].0
                )));
            }
        }
        let z: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let h: Vec<f64> = samples.iter().map(|s| s.1).collect();
        let slopes = pchip_slopes(&z, &h);
        Ok(Self { z, h, slopes })
    }

    pub fn z_range(&self) -> (f64, f64) {
        (self.z[0], self.z[self.z.len() - 1])
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.z.iter().copied().zip(self.h.iter().copied())
    }

    pub fn eval(&self, z: f64) -> Result<f64> {
        let (lo, hi) = self.z_range();
        if !(z >= lo && z <= hi) {
            return Err(Error::OutOfDomain { z, lo, hi });
        }
        Ok(self.eval_clamped(z))
    }

    fn eval_clamped(&self, z: f64) -> f64 {
        let (lo, hi) = self.z_range();
        let z = z.clamp(lo, hi);
        // index of the interval [z_k, z_{k+1}] containing z
        let k = match self.z.partition_point(|&zk| zk <= z) {
            0 => 0,
            p => (p - 1).min(self.z.len() - 2),
        };
        let dz = self.z[k + 1] - self.z[k];
        let t = (z - self.z[k]) / dz;
        hermite_cubic(
            t,
            self.h[k],
            self.h[k + 1],
            self.slopes[k] * dz,
            self.slopes[k + 1] * dz,
        )
    }
}

/// Cubic Hermite basis on `t` in [0, 1] with endpoint values and
/// derivatives already scaled by the interval length.
pub(crate) fn hermite_cubic(t: f64, y0: f64, y1: f64, d0: f64, d1: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * d0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * d1
}

// Fritsch-Butland weighted harmonic mean slopes with the usual
// shape-preserving three-point end conditions.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    if n == 2 {
        return vec![delta[0], delta[0]];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    d[0] = pchip_end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = pchip_end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn pchip_end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d.signum() != d0.signum() || d0 == 0.0 {
        0.0
    } else if d0.signum() != d1.signum() && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

/// Waveguide description. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct MediumSpec {
    wavelength_nm: f64,
    n_transverse: f64,
    delta_n: f64,
    profile: LongitudinalProfile,
    length_nm: f64,
}

impl MediumSpec {
    pub fn new(
        wavelength_nm: f64,
        n_transverse: f64,
        delta_n: f64,
        profile: LongitudinalProfile,
        length_nm: f64,
    ) -> Result<Self> {
        positive("wavelength_nm", wavelength_nm)?;
        positive("n_transverse", n_transverse)?;
        positive("length_nm", length_nm)?;
        if !(delta_n.is_finite() && delta_n >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "delta_n",
                value: delta_n,
                reason: "must be finite and >= 0",
            });
        }
        if let LongitudinalProfile::Cosine { spatial_frequency } = profile {
            positive("spatial_frequency", spatial_frequency)?;
        }
        if let LongitudinalProfile::Tabulated(t) = &profile {
            let (lo, hi) = t.z_range();
            if lo > 0.0 || hi < length_nm {
                return Err(Error::InvalidProfile(format!(
                    "samples cover [{lo}, {hi}] nm but the medium spans [0, {length_nm}] nm"
                )));
            }
        }
        Ok(Self {
            wavelength_nm,
            n_transverse,
            delta_n,
            profile,
            length_nm,
        })
    }

    /// Cosine medium `h = cos(Lambda z)` with `Lambda = k0 / lambda_per_k0`
    /// and one full period `L = 2 pi / Lambda`.
    pub fn cosine(
        wavelength_nm: f64,
        n_transverse: f64,
        delta_n: f64,
        lambda_per_k0: f64,
    ) -> Result<Self> {
        positive("wavelength_nm", wavelength_nm)?;
        positive("lambda_per_k0", lambda_per_k0)?;
        let k0 = 2.0 * PI / wavelength_nm;
        let spatial_frequency = k0 / lambda_per_k0;
        Self::new(
            wavelength_nm,
            n_transverse,
            delta_n,
            LongitudinalProfile::cosine(spatial_frequency)?,
            2.0 * PI / spatial_frequency,
        )
    }

    /// The cosine guide used throughout the examples: 653 nm light,
    /// `N_t = 1.515`, `dn = 0.5`, `Lambda = k0 / 50`, `L = 2 pi / Lambda`.
    pub fn reference_cosine() -> Self {
        Self::cosine(653.0, 1.515, 0.5, 50.0).expect("reference parameters are valid")
    }

    /// Same transverse structure with the longitudinal modulation removed.
    pub fn homogeneous_counterpart(&self) -> Self {
        Self {
            delta_n: 0.0,
            profile: LongitudinalProfile::Constant,
            ..self.clone()
        }
    }

    pub fn wavelength_nm(&self) -> f64 {
        self.wavelength_nm
    }

    pub fn n_transverse(&self) -> f64 {
        self.n_transverse
    }

    pub fn delta_n(&self) -> f64 {
        self.delta_n
    }

    pub fn profile(&self) -> &LongitudinalProfile {
        &self.profile
    }

    pub fn length_nm(&self) -> f64 {
        self.length_nm
    }

    pub fn k0(&self) -> f64 {
        2.0 * PI / self.wavelength_nm
    }

    pub fn beta_t(&self) -> f64 {
        self.k0() * self.n_transverse
    }

    pub fn beta0(&self) -> f64 {
        self.k0() * self.effective_index_unchecked(0.0)
    }

    /// True when `beta` does not depend on `z`.
    pub fn is_homogeneous(&self) -> bool {
        self.delta_n == 0.0 || matches!(self.profile, LongitudinalProfile::Constant)
    }

    fn check_z(&self, z: f64) -> Result<()> {
        if z >= 0.0 && z <= self.length_nm {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                z,
                lo: 0.0,
                hi: self.length_nm,
            })
        }
    }

    /// Local propagation constant `beta(z)` in rad/nm.
    pub fn beta_local(&self, z: f64) -> Result<f64> {
        Ok(self.k0() * self.effective_index(z)?)
    }

    /// `N(z) = beta(z) / k0`.
    pub fn effective_index(&self, z: f64) -> Result<f64> {
        self.check_z(z)?;
        let h = self.profile.h(z)?;
        Ok(self.n_transverse.hypot(self.delta_n * h))
    }

    /// `N(z)^2` with `z` clamped into the medium; for the integrator, whose
    /// stage abscissae can round a hair past `L`.
    pub(crate) fn effective_index_sq_unchecked(&self, z: f64) -> f64 {
        let z = z.clamp(0.0, self.length_nm);
        let h = match &self.profile {
            LongitudinalProfile::Tabulated(t) => t.eval_clamped(z),
            p => p.h(z).unwrap_or(0.0),
        };
        let dh = self.delta_n * h;
        self.n_transverse * self.n_transverse + dh * dh
    }

    fn effective_index_unchecked(&self, z: f64) -> f64 {
        self.effective_index_sq_unchecked(z).sqrt()
    }

    /// Uniform samples `(z, N(z))` over `[0, L]`, endpoints included.
    pub fn effective_index_curve(&self, grid_points: usize) -> Result<Vec<(f64, f64)>> {
        if grid_points < 2 {
            return Err(Error::InvalidParameter {
                name: "grid_points",
                value: grid_points as f64,
                reason: "must be >= 2",
            });
        }
        uniform_grid(self.length_nm, grid_points)
            .into_iter()
            .map(|z| Ok((z, self.effective_index(z)?)))
            .collect()
    }
}

/// `points` uniformly spaced values on `[0, length]`, with both endpoints
/// exact. Grids with `2(n-1)+1` points contain every point of the `n` grid
/// bit-for-bit.
pub fn uniform_grid(length: f64, points: usize) -> Vec<f64> {
    let intervals = (points.max(2) - 1) as f64;
    (0..points.max(2))
        .map(|i| length * (i as f64 / intervals))
        .collect()
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tabulated_cos(n: usize, length: f64, freq: f64) -> TabulatedProfile {
        let samples: Vec<(f64, f64)> = uniform_grid(length, n)
            .into_iter()
            .map(|z| (z, (freq * z).cos()))
            .collect();
        TabulatedProfile::new(&samples).unwrap()
    }

    #[test]
    fn reference_effective_index_at_origin() {
        let m = MediumSpec::reference_cosine();
        let n0 = m.effective_index(0.0).unwrap();
        assert!((n0 - (1.515f64.powi(2) + 0.25).sqrt()).abs() < 1e-15);
        assert!((n0 - 1.5954).abs() < 5e-5);
        assert!((m.beta0() / m.k0() - n0).abs() < 1e-15);
    }

    #[test]
    fn cosine_zero_gives_transverse_constant() {
        let m = MediumSpec::reference_cosine();
        let LongitudinalProfile::Cosine { spatial_frequency } = *m.profile() else {
            unreachable!()
        };
        let z = PI / (2.0 * spatial_frequency);
        let beta = m.beta_local(z).unwrap();
        assert!((beta - m.beta_t()).abs() < 1e-15 * m.beta_t() * 10.0);
    }

    #[test]
    fn homogeneous_limit_ignores_profile() {
        let base = MediumSpec::reference_cosine();
        let l = base.length_nm();
        let profiles = [
            LongitudinalProfile::Constant,
            LongitudinalProfile::cosine(0.3).unwrap(),
            LongitudinalProfile::Tabulated(tabulated_cos(40, l, 0.001)),
        ];
        for p in profiles {
            let m = MediumSpec::new(653.0, 1.515, 0.0, p, l).unwrap();
            for z in [0.0, 0.3 * l, l] {
                assert_eq!(m.beta_local(z).unwrap(), m.beta_t());
            }
        }
    }

    #[test]
    fn out_of_range_z_names_interval() {
        let m = MediumSpec::reference_cosine();
        let err = m.beta_local(-1.0).unwrap_err();
        assert!(matches!(err, Error::OutOfDomain { hi, .. } if hi == m.length_nm()));
        assert!(m.beta_local(m.length_nm() * 1.001).is_err());
        assert!(err.to_string().contains("outside the valid interval"));
    }

    #[test]
    fn curve_endpoints_and_flat_constant() {
        let m = MediumSpec::reference_cosine();
        let c = m.effective_index_curve(2).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].0, 0.0);
        assert_eq!(c[1].0, m.length_nm());

        let flat = MediumSpec::new(653.0, 1.515, 0.5, LongitudinalProfile::Constant, 1e4).unwrap();
        let expected = (1.515f64.powi(2) + 0.25).sqrt();
        for (_, n) in flat.effective_index_curve(17).unwrap() {
            assert!((n - expected).abs() < 1e-15);
        }
        assert!(m.effective_index_curve(1).is_err());
    }

    #[test]
    fn reference_curve_bounds() {
        let m = MediumSpec::reference_cosine();
        let curve = m.effective_index_curve(4001).unwrap();
        let (lo, hi) = curve
            .iter()
            .fold((f64::MAX, f64::MIN), |(lo, hi), &(_, n)| {
                (lo.min(n), hi.max(n))
            });
        assert!((lo - 1.515).abs() < 1e-12);
        assert!((hi - (1.515f64.powi(2) + 0.25).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn invalid_media_rejected() {
        let p = LongitudinalProfile::Constant;
        assert!(MediumSpec::new(0.0, 1.5, 0.1, p.clone(), 1.0).is_err());
        assert!(MediumSpec::new(653.0, -1.0, 0.1, p.clone(), 1.0).is_err());
        assert!(MediumSpec::new(653.0, 1.5, -0.1, p.clone(), 1.0).is_err());
        assert!(MediumSpec::new(653.0, 1.5, 0.1, p, f64::NAN).is_err());
        assert!(LongitudinalProfile::cosine(0.0).is_err());
    }

    #[test]
    fn tabulated_validation() {
        assert!(TabulatedProfile::new(&[(0.0, 1.0)]).is_err());
        assert!(TabulatedProfile::new(&[(0.0, 1.0), (0.0, 2.0)]).is_err());
        assert!(TabulatedProfile::new(&[(1.0, 1.0), (0.0, 2.0)]).is_err());
        assert!(TabulatedProfile::new(&[(0.0, f64::NAN), (1.0, 2.0)]).is_err());

        let t = TabulatedProfile::new(&[(0.0, 1.0), (50.0, 0.5)]).unwrap();
        let err = MediumSpec::new(
            653.0,
            1.5,
            0.1,
            LongitudinalProfile::Tabulated(t.clone()),
            100.0,
        )
        .unwrap_err();
        assert!(err.to_string().contains("[0, 50]"));
        assert!(t.eval(60.0).is_err());
        assert!((t.eval(25.0).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn tabulated_reproduces_samples_and_tracks_smooth_profile() {
        let l = 1000.0;
        let t = tabulated_cos(201, l, 0.01);
        for (z, h) in t.samples() {
            assert_eq!(t.eval(z).unwrap(), h);
        }
        for i in 0..1000 {
            let z = l * (i as f64 + 0.37) / 1000.0;
            assert!((t.eval(z).unwrap() - (0.01 * z).cos()).abs() < 2e-3);
        }
    }

    #[test]
    fn tabulated_is_monotone_between_monotone_samples() {
        let t =
            TabulatedProfile::new(&[(0.0, 0.0), (1.0, 0.1), (2.0, 0.9), (3.0, 1.0), (4.0, 1.0)])
                .unwrap();
        let mut prev = t.eval(0.0).unwrap();
        for i in 1..=400 {
            let h = t.eval(i as f64 / 100.0).unwrap();
            assert!(h >= prev - 1e-15);
            assert!(h <= 1.0 + 1e-15);
            prev = h;
        }
    }

    #[test]
    fn nested_grids_share_points_exactly() {
        let l = MediumSpec::reference_cosine().length_nm();
        let coarse = uniform_grid(l, 101);
        let fine = uniform_grid(l, 201);
        for (i, z) in coarse.iter().enumerate() {
            assert_eq!(*z, fine[2 * i]);
        }
    }
}
