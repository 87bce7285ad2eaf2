//! Brute-force dense-matrix counterparts of the split-step pipeline.
//!
//! Operators act on amplitude vectors sampled on the angle grid. The Floquet
//! matrix is assembled from its defining sums,
//!
//! ```text
//! U[j][l] = (1/N) sum_n exp(i n (theta_j - theta_l)) exp(-i hbar n^2 / 2) k(theta_l)
//! k(theta) = exp(-i K (cos theta + i lambda sin theta) / hbar)
//! ```
//!
//! with `n` running over the momentum indices `-N/2 .. N/2-1`, so it shares
//! no FFT, no precomputed phase table and no kick table with the propagator.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::table::{ColumnType, ResultTable};
use crate::error::{Error, Result};
use crate::otoc::{otoc_series, OtocBreakdown};
use crate::propagator::{Direction, Floquet, Renormalize, SimParams};
use crate::state::{PhaseSpace, WaveFunction};

pub const MAX_DENSE_POINTS: usize = 256;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

fn check_size(n_points: usize) -> Result<()> {
    if n_points > MAX_DENSE_POINTS {
        return Err(Error::SizeCap {
            requested: n_points,
            cap: MAX_DENSE_POINTS,
        });
    }
    if n_points < 2 || !n_points.is_power_of_two() {
        return Err(Error::invalid(
            "n_points",
            format!("dense oracle needs a power of two >= 2, got {n_points}"),
        ));
    }
    Ok(())
}

fn thetas(n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| -PI + 2.0 * PI * j as f64 / n as f64)
        .collect()
}

fn momentum_indices(n: usize) -> impl Iterator<Item = i64> {
    let half = (n / 2) as i64;
    -half..half
}

/// Matrix of a function of momentum, `f(p_n)`, in the angle representation.
fn momentum_function(n: usize, hbar: f64, f: impl Fn(f64) -> Complex64) -> CMatrix {
    let theta = thetas(n);
    let weights: Vec<(i64, Complex64)> = momentum_indices(n)
        .map(|m| (m, f(m as f64 * hbar)))
        .collect();
    CMatrix::from_fn(n, n, |j, l| {
        let d = theta[j] - theta[l];
        weights
            .iter()
            .map(|&(m, w)| Complex64::from_polar(1.0, m as f64 * d) * w)
            .sum::<Complex64>()
            / n as f64
    })
}

/// `U` as an `N x N` matrix; column `l` is `U` applied to the unit vector at `theta_l`.
pub fn build_dense_floquet(params: &SimParams) -> Result<CMatrix> {
    params.validate()?;
    check_size(params.n_points)?;
    let h = params.hbar;
    let free = momentum_function(params.n_points, h, |p| {
        Complex64::from_polar(1.0, -p * p / (2.0 * h))
    });
    let kick: Vec<Complex64> = thetas(params.n_points)
        .iter()
        .map(|&t| {
            let v = Complex64::new(t.cos(), params.lambda * t.sin());
            (Complex64::new(0.0, -params.k / h) * v).exp()
        })
        .collect();
    Ok(CMatrix::from_fn(
        params.n_points,
        params.n_points,
        |j, l| free[(j, l)] * kick[l],
    ))
}

/// The momentum operator.
pub fn dense_momentum(n_points: usize, hbar: f64) -> Result<CMatrix> {
    check_size(n_points)?;
    Ok(momentum_function(n_points, hbar, |p| {
        Complex64::new(p, 0.0)
    }))
}

/// The angle operator, diagonal on the grid.
pub fn dense_theta(n_points: usize) -> Result<CMatrix> {
    check_size(n_points)?;
    let theta = thetas(n_points);
    Ok(CMatrix::from_fn(n_points, n_points, |j, l| {
        if j == l {
            Complex64::new(theta[j], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

/// Quadrature norm `(2 pi / N) sum |v_j|^2`.
pub fn dense_norm(v: &CVector) -> f64 {
    2.0 * PI / v.len() as f64 * v.iter().map(|z| z.norm_sqr()).sum::<f64>()
}

fn dense_inner(a: &CVector, b: &CVector) -> Complex64 {
    a.dotc(b) * (2.0 * PI / a.len() as f64)
}

/// Unit-norm Gaussian seed on `n_points` samples.
pub fn dense_gaussian(n_points: usize, sigma: f64) -> CVector {
    let v = CVector::from_iterator(
        n_points,
        thetas(n_points)
            .iter()
            .map(|&t| Complex64::new((-sigma * t * t / 2.0).exp(), 0.0)),
    );
    let norm = dense_norm(&v);
    v / Complex64::new(norm.sqrt(), 0.0)
}

fn rescale(v: &mut CVector, target: f64) {
    let factor = (target / dense_norm(v)).sqrt();
    *v *= Complex64::new(factor, 0.0);
}

/// Apply `m` to `v` `n` times, rescaling to the starting norm after each step.
pub fn dense_evolve(m: &CMatrix, v: &CVector, n: usize, renormalize: bool) -> CVector {
    let target = dense_norm(v);
    let mut out = v.clone();
    for _ in 0..n {
        out = m * out;
        if renormalize {
            rescale(&mut out, target);
        }
    }
    out
}

/// Dense operators for one parameter set.
pub struct DenseModel {
    pub u: CMatrix,
    pub u_adj: CMatrix,
    pub p: CMatrix,
    pub theta: CMatrix,
}

impl DenseModel {
    pub fn new(params: &SimParams) -> Result<Self> {
        let u = build_dense_floquet(params)?;
        let u_adj = u.adjoint();
        Ok(Self {
            u,
            u_adj,
            p: dense_momentum(params.n_points, params.hbar)?,
            theta: dense_theta(params.n_points)?,
        })
    }

    /// Forward `t_n` kicks, insert `p`, back `t_n` kicks with `U^dagger`,
    /// renormalizing per kick exactly as the split-step pipeline does.
    pub fn reverse(&self, seed: &CVector, t_n: usize) -> CVector {
        let forward = dense_evolve(&self.u, seed, t_n, true);
        let pivot = &self.p * forward;
        dense_evolve(&self.u_adj, &pivot, t_n, true)
    }

    pub fn otoc(&self, sigma: f64, t_max: usize) -> Vec<OtocBreakdown> {
        let n = self.u.nrows();
        let psi0 = dense_gaussian(n, sigma);
        let phi0 = &self.theta * &psi0;
        (1..=t_max)
            .map(|t_n| {
                let psi_r = self.reverse(&psi0, t_n);
                let phi_r = self.reverse(&phi0, t_n);
                let theta_psi = &self.theta * &psi_r;
                OtocBreakdown::assemble(
                    t_n,
                    dense_inner(&theta_psi, &theta_psi).re,
                    dense_norm(&phi_r),
                    dense_inner(&theta_psi, &phi_r),
                )
            })
            .collect()
    }
}

/// Largest `|a - b| / scale`, with `scale` the largest `|b|`.
pub fn relative_max_deviation(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = b
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
        / scale
}

/// Seeded complex vector with real and imaginary parts uniform in `[-1, 1)`.
pub fn random_amplitudes(n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

/// One row of the oracle report.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleCheck {
    pub n_points: usize,
    pub name: &'static str,
    pub deviation: f64,
    pub tolerance: f64,
}

impl OracleCheck {
    pub fn passed(&self) -> bool {
        self.deviation < self.tolerance
    }
}

pub const ORACLE_TOLERANCE: f64 = 1e-9;
pub const IDENTITY_TOLERANCE: f64 = 1e-12;

/// Compare split-step evolution, adjoint evolution, the OTOC pipeline and
/// transform identities against the dense model on `params.n_points` samples.
pub fn oracle_checks(params: &SimParams, t_max: usize, seed: u64) -> Result<Vec<OracleCheck>> {
    let n = params.n_points;
    let model = DenseModel::new(params)?;
    let space = PhaseSpace::new(n, params.hbar)?;
    let floquet = Floquet::new(*params, space.clone())?.with_guard(None);
    let kicks = t_max.max(1);
    let mut checks = Vec::new();
    let mut push = |name, deviation, tolerance| {
        checks.push(OracleCheck {
            n_points: n,
            name,
            deviation,
            tolerance,
        })
    };

    let raw = random_amplitudes(n, seed);
    let psi = WaveFunction::from_amplitudes(space.clone(), raw.clone())?;
    let v = CVector::from_vec(raw.clone());

    let mut column_dev: f64 = 0.0;
    for l in 0..n {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[l] = Complex64::new(1.0, 0.0);
        let split = floquet.forward_step(&WaveFunction::from_amplitudes(space.clone(), e)?);
        let col: Vec<Complex64> = model.u.column(l).iter().copied().collect();
        column_dev = column_dev.max(relative_max_deviation(split.amplitudes(), &col));
    }
    push("matrix_columns", column_dev, ORACLE_TOLERANCE);

    let split = floquet.evolve(&psi, kicks, Direction::Forward, Renormalize::PerKick)?;
    let dense = dense_evolve(&model.u, &v, kicks, true);
    push(
        "forward_evolution",
        relative_max_deviation(split.state.amplitudes(), dense.as_slice()),
        ORACLE_TOLERANCE,
    );

    let split = floquet.evolve(&psi, kicks, Direction::Backward, Renormalize::PerKick)?;
    let dense = dense_evolve(&model.u_adj, &v, kicks, true);
    push(
        "adjoint_evolution",
        relative_max_deviation(split.state.amplitudes(), dense.as_slice()),
        ORACLE_TOLERANCE,
    );

    let split = otoc_series(&floquet, t_max.max(2))?;
    let dense = model.otoc(params.sigma, t_max.max(2));
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
    let mut otoc_dev: f64 = 0.0;
    for (s, d) in split.points.iter().zip(&dense) {
        let c3_scale = (d.c1 * d.c2).sqrt().max(f64::MIN_POSITIVE);
        let total_scale = (d.c1 + d.c2 + 2.0 * d.c3.re.abs()).max(f64::MIN_POSITIVE);
        otoc_dev = otoc_dev
            .max(rel(s.c1, d.c1))
            .max(rel(s.c2, d.c2))
            .max((s.c3 - d.c3).norm() / c3_scale)
            .max((s.c_total - d.c_total).abs() / total_scale);
    }
    push("otoc_pipeline", otoc_dev, ORACLE_TOLERANCE);

    let hermitian = SimParams {
        lambda: 0.0,
        ..*params
    };
    let u0 = build_dense_floquet(&hermitian)?;
    let unitarity = (u0.adjoint() * &u0 - CMatrix::identity(n, n))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    push("unitarity_dense", unitarity, IDENTITY_TOLERANCE);

    let f0 = Floquet::new(hermitian, space.clone())?.with_guard(None);
    let mut state = psi.clone();
    let mut drift: f64 = 0.0;
    for _ in 0..kicks {
        let next = f0.forward_step(&state);
        drift = drift.max((next.norm() / state.norm() - 1.0).abs());
        state = next;
    }
    push("unitarity_drift_per_kick", drift, IDENTITY_TOLERANCE);

    let coeffs = psi.to_momentum();
    let parseval = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>();
    push(
        "parseval",
        (parseval / psi.norm() - 1.0).abs(),
        IDENTITY_TOLERANCE,
    );
    let back = WaveFunction::from_momentum(space, &coeffs)?;
    push(
        "transform_round_trip",
        relative_max_deviation(back.amplitudes(), psi.amplitudes()),
        IDENTITY_TOLERANCE,
    );

    Ok(checks)
}

pub fn report_table(checks: &[OracleCheck]) -> Result<ResultTable> {
    let mut table = ResultTable::new(&[
        ("n_points", ColumnType::Int),
        ("check", ColumnType::Text),
        ("deviation", ColumnType::Float),
        ("tolerance", ColumnType::Float),
        ("pass", ColumnType::Int),
    ]);
    for c in checks {
        table.push(vec![
            c.n_points.into(),
            c.name.into(),
            c.deviation.into(),
            c.tolerance.into(),
            (c.passed() as i64).into(),
        ])?;
    }
    Ok(table)
}
