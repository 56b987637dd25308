//! Adaptive explicit Runge-Kutta integration with the Dormand-Prince 8(5,3)
//! embedded pair (DOP853).
//!
//! Output is requested at a sorted list of abscissae. The accepted step
//! sequence never depends on that list: every output point lying inside an
//! accepted step `[t, t + h]` is reached by an auxiliary step of size
//! `t_out - t` taken from the accepted state, so refining the output grid
//! leaves shared output values bit-identical.

const STAGES: usize = 12;

const C: [f64; STAGES] = [
    0.0,
    0.05260015195876773,
    0.0789002279381516,
    0.1183503419072274,
    0.2816496580927726,
    0.3333333333333333,
    0.25,
    0.3076923076923077,
    0.6512820512820513,
    0.6,
    0.8571428571428571,
    1.0,
];

#[rustfmt::skip]
const A: [[f64; STAGES]; STAGES] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.05260015195876773, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0197250569845379, 0.0591751709536137, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.02958758547680685, 0.0, 0.08876275643042054, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2413651341592667, 0.0, -0.8845494793282861, 0.924834003261792, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.037037037037037035, 0.0, 0.0, 0.17082860872947386, 0.12546768756682242, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.037109375, 0.0, 0.0, 0.17025221101954405, 0.06021653898045596, -0.017578125, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.03709200011850479, 0.0, 0.0, 0.17038392571223998, 0.10726203044637328, -0.015319437748624402, 0.008273789163814023, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.6241109587160757, 0.0, 0.0, -3.3608926294469414, -0.868219346841726, 27.59209969944671, 20.154067550477894, -43.48988418106996, 0.0, 0.0, 0.0, 0.0],
    [0.47766253643826434, 0.0, 0.0, -2.4881146199716677, -0.590290826836843, 21.230051448181193, 15.279233632882423, -33.28821096898486, -0.020331201708508627, 0.0, 0.0, 0.0],
    [-0.9371424300859873, 0.0, 0.0, 5.186372428844064, 1.0914373489967295, -8.149787010746927, -18.52006565999696, 22.739487099350505, 2.4936055526796523, -3.0467644718982196, 0.0, 0.0],
    [2.273310147516538, 0.0, 0.0, -10.53449546673725, -2.0008720582248625, -17.9589318631188, 27.94888452941996, -2.8589982771350235, -8.87285693353063, 12.360567175794303, 0.6433927460157636, 0.0],
];

const B: [f64; STAGES] = [
    0.054293734116568765,
    0.0,
    0.0,
    0.0,
    0.0,
    4.450312892752409,
    1.8915178993145003,
    -5.801203960010585,
    0.3111643669578199,
    -0.1521609496625161,
    0.20136540080403034,
    0.04471061572777259,
];

// Differences between B and the embedded 3rd / 5th order weights.
const E3: [f64; STAGES] = [
    -0.18980075407240762,
    0.0,
    0.0,
    0.0,
    0.0,
    4.450312892752409,
    1.8915178993145003,
    -5.801203960010585,
    -0.4226823213237919,
    -0.1521609496625161,
    0.20136540080403034,
    0.02265179219836082,
];

const E5: [f64; STAGES] = [
    0.01312004499419488,
    0.0,
    0.0,
    0.0,
    0.0,
    -1.2251564463762044,
    -0.4957589496572502,
    1.6643771824549864,
    -0.35032884874997366,
    0.3341791187130175,
    0.08192320648511571,
    -0.022355307863886294,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const ERROR_EXPONENT: f64 = -1.0 / 8.0;
const MAX_STEPS: usize = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepFailure {
    pub t: f64,
    pub reason: &'static str,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

pub struct Solution<const N: usize> {
    /// State at each requested output abscissa.
    pub states: Vec<[f64; N]>,
    pub stats: Stats,
}

struct Rhs<F> {
    f: F,
    evaluations: usize,
}

impl<F> Rhs<F> {
    fn call<const N: usize>(&mut self, t: f64, y: &[f64; N]) -> [f64; N]
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        self.evaluations += 1;
        (self.f)(t, y)
    }
}

/// One DOP853 step. Returns the new state and the stage derivatives.
fn rk_step<const N: usize, F>(
    rhs: &mut Rhs<F>,
    t: f64,
    y: &[f64; N],
    f0: &[f64; N],
    h: f64,
) -> ([f64; N], [[f64; N]; STAGES])
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let mut k = [[0.0; N]; STAGES];
    k[0] = *f0;
    for s in 1..STAGES {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j];
            if a != 0.0 {
                for i in 0..N {
                    ys[i] += h * a * kj[i];
                }
            }
        }
        k[s] = rhs.call(t + C[s] * h, &ys);
    }
    let mut y_new = *y;
    for (s, ks) in k.iter().enumerate() {
        if B[s] != 0.0 {
            for i in 0..N {
                y_new[i] += h * B[s] * ks[i];
            }
        }
    }
    (y_new, k)
}

fn error_norm<const N: usize>(
    k: &[[f64; N]; STAGES],
    h: f64,
    y: &[f64; N],
    y_new: &[f64; N],
    tol: Tolerances,
) -> f64 {
    let mut e5 = 0.0;
    let mut e3 = 0.0;
    for i in 0..N {
        let scale = tol.abs + tol.rel * y[i].abs().max(y_new[i].abs());
        let (mut s5, mut s3) = (0.0, 0.0);
        for s in 0..STAGES {
            s5 += E5[s] * k[s][i];
            s3 += E3[s] * k[s][i];
        }
        e5 += (s5 / scale).powi(2);
        e3 += (s3 / scale).powi(2);
    }
    if e5 == 0.0 && e3 == 0.0 {
        return 0.0;
    }
    h.abs() * e5 / ((e5 + 0.01 * e3) * N as f64).sqrt()
}

fn rms<const N: usize>(x: &[f64; N], scale: &[f64; N]) -> f64 {
    (x.iter()
        .zip(scale)
        .map(|(a, s)| (a / s).powi(2))
        .sum::<f64>()
        / N as f64)
        .sqrt()
}

fn initial_step<const N: usize, F>(
    rhs: &mut Rhs<F>,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    tol: Tolerances,
) -> f64
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let scale: [f64; N] = std::array::from_fn(|i| tol.abs + tol.rel * y0[i].abs());
    let d0 = rms(y0, &scale);
    let d1 = rms(f0, &scale);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1: [f64; N] = std::array::from_fn(|i| y0[i] + h0 * f0[i]);
    let f1 = rhs.call(t0 + h0, &y1);
    let df: [f64; N] = std::array::from_fn(|i| f1[i] - f0[i]);
    let d2 = rms(&df, &scale) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 8.0)
    };
    (100.0 * h0).min(h1)
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end` (> `t0`), returning the
/// state at every point of `outputs` (ascending, inside `[t0, t_end]`).
pub fn integrate<const N: usize, F>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    outputs: &[f64],
    tol: Tolerances,
) -> Result<Solution<N>, StepFailure>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    assert!(t_end > t0, "integration interval must be non-empty");
    debug_assert!(outputs.windows(2).all(|w| w[0] <= w[1]));
    let mut rhs = Rhs { f, evaluations: 0 };
    let mut stats = Stats::default();
    let mut states = Vec::with_capacity(outputs.len());
    let mut next_out = 0;

    let mut t = t0;
    let mut y = y0;
    let mut f_t = rhs.call(t, &y);
    while next_out < outputs.len() && outputs[next_out] <= t0 {
        states.push(y);
        next_out += 1;
    }
    let mut h_abs = initial_step(&mut rhs, t, &y, &f_t, tol);

    while t < t_end {
        if stats.accepted + stats.rejected >= MAX_STEPS {
            return Err(StepFailure {
                t,
                reason: "maximum number of steps exceeded",
            });
        }
        let min_step = 10.0 * (next_up(t) - t);
        let mut rejected = false;
        let (t_new, y_new) = loop {
            if h_abs < min_step || !h_abs.is_finite() {
                return Err(StepFailure {
                    t,
                    reason: "step size underflow",
                });
            }
            let t_new = (t + h_abs).min(t_end);
            let h = t_new - t;
            let (y_new, k) = rk_step(&mut rhs, t, &y, &f_t, h);
            let err = error_norm(&k, h, &y, &y_new, tol);
            if err < 1.0 && y_new.iter().all(|v| v.is_finite()) {
                let mut factor = if err == 0.0 {
                    MAX_FACTOR
                } else {
                    MAX_FACTOR.min(SAFETY * err.powf(ERROR_EXPONENT))
                };
                if rejected {
                    factor = factor.min(1.0);
                }
                h_abs = h * factor;
                stats.accepted += 1;
                break (t_new, y_new);
            }
            let factor = if err.is_finite() {
                MIN_FACTOR.max(SAFETY * err.powf(ERROR_EXPONENT))
            } else {
                MIN_FACTOR
            };
            h_abs = h * factor;
            rejected = true;
            stats.rejected += 1;
        };

        while next_out < outputs.len() && outputs[next_out] <= t_new {
            let t_out = outputs[next_out];
            if t_out >= t_new {
                states.push(y_new);
            } else {
                let (y_out, _) = rk_step(&mut rhs, t, &y, &f_t, t_out - t);
                states.push(y_out);
            }
            next_out += 1;
        }

        t = t_new;
        y = y_new;
        f_t = rhs.call(t, &y);
    }
    // anything requested past t_end (rounding) gets the final state
    while next_out < outputs.len() {
        states.push(y);
        next_out += 1;
    }
    stats.evaluations = rhs.evaluations;
    Ok(Solution { states, stats })
}

fn next_up(t: f64) -> f64 {
    if t.is_nan() || t == f64::INFINITY {
        return t;
    }
    if t == 0.0 {
        return f64::from_bits(1);
    }
    let bits = t.to_bits();
    if t > 0.0 {
        f64::from_bits(bits + 1)
    } else {
        f64::from_bits(bits - 1)
    }
}
