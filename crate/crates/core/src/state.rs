//! Rotor states on a uniform angle grid and their momentum expansion.
//!
//! The angle representation is authoritative. Momentum coefficients follow
//! the continuum convention `c_n = <phi_n|psi>` with
//! `phi_n(theta) = exp(i n theta) / sqrt(2 pi)`, so that Parseval reads
//! `sum |c_n|^2 = sum |psi_j|^2 * (2 pi / N)`.
//!
//! Angles live on `[-pi, pi)`. The angle operator is the single-valued
//! multiplication by `theta` on that interval; its branch cut at `+-pi` is
//! harmless as long as the density stays away from the cut, which holds for
//! the states of interest (they concentrate near `pi/2`).

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use log::warn;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Uniform samples of one period, `theta_j = -pi + 2 pi j / N`.
#[derive(Clone, Debug)]
pub struct AngleGrid {
    theta: Vec<f64>,
}

impl AngleGrid {
    pub fn new(n_points: usize) -> Result<Self> {
        check_grid_size(n_points)?;
        let spacing = 2.0 * PI / n_points as f64;
        let theta = (0..n_points).map(|j| -PI + j as f64 * spacing).collect();
        Ok(Self { theta })
    }

    pub fn n_points(&self) -> usize {
        self.theta.len()
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.theta.len() as f64
    }

    /// Quadrature weight of every sample (periodic trapezoid rule).
    pub fn weight(&self) -> f64 {
        self.spacing()
    }

    pub fn theta_values(&self) -> &[f64] {
        &self.theta
    }

    /// Index of the sample closest to `theta` (taken modulo 2 pi).
    pub fn nearest_index(&self, theta: f64) -> usize {
        let wrapped = (theta + PI).rem_euclid(2.0 * PI);
        ((wrapped / self.spacing()).round() as usize) % self.n_points()
    }
}

/// Angular-momentum eigenbasis paired with an [`AngleGrid`]:
/// `p_n = n * hbar` for `n` in `[-N/2, N/2)`.
#[derive(Clone, Debug)]
pub struct MomentumBasis {
    hbar: f64,
    n_points: usize,
}

impl MomentumBasis {
    pub fn new(n_points: usize, hbar: f64) -> Result<Self> {
        check_grid_size(n_points)?;
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::invalid(
                "hbar",
                format!("must be positive, got {hbar}"),
            ));
        }
        Ok(Self { hbar, n_points })
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    /// Integer indices in ascending order.
    pub fn indices(&self) -> impl Iterator<Item = i64> {
        let half = (self.n_points / 2) as i64;
        -half..half
    }

    pub fn p_values(&self) -> Vec<f64> {
        self.indices().map(|n| n as f64 * self.hbar).collect()
    }

    /// Momentum index stored at position `k` of an unshifted FFT buffer.
    pub fn index_at_fft_slot(&self, k: usize) -> i64 {
        if k < self.n_points / 2 {
            k as i64
        } else {
            k as i64 - self.n_points as i64
        }
    }

    /// Position in an unshifted FFT buffer holding index `n`.
    pub fn fft_slot(&self, n: i64) -> Option<usize> {
        let half = (self.n_points / 2) as i64;
        if n < -half || n >= half {
            None
        } else if n >= 0 {
            Some(n as usize)
        } else {
            Some((n + self.n_points as i64) as usize)
        }
    }
}

fn check_grid_size(n_points: usize) -> Result<()> {
    if n_points < 2 || !n_points.is_power_of_two() {
        return Err(Error::invalid(
            "n_points",
            format!("must be a power of two >= 2, got {n_points}"),
        ));
    }
    Ok(())
}

/// Grid, momentum basis and FFT plans shared by every state of one run.
pub struct PhaseSpace {
    grid: AngleGrid,
    basis: MomentumBasis,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    /// `p_n` laid out in FFT slot order.
    p_slots: Vec<f64>,
}

impl fmt::Debug for PhaseSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhaseSpace")
            .field("n_points", &self.grid.n_points())
            .field("hbar", &self.basis.hbar())
            .finish()
    }
}

impl PhaseSpace {
    pub fn new(n_points: usize, hbar: f64) -> Result<Arc<Self>> {
        let grid = AngleGrid::new(n_points)?;
        let basis = MomentumBasis::new(n_points, hbar)?;
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n_points);
        let ifft = planner.plan_fft_inverse(n_points);
        let p_slots = (0..n_points)
            .map(|k| basis.index_at_fft_slot(k) as f64 * hbar)
            .collect();
        Ok(Arc::new(Self {
            grid,
            basis,
            fft,
            ifft,
            p_slots,
        }))
    }

    pub fn grid(&self) -> &AngleGrid {
        &self.grid
    }

    pub fn basis(&self) -> &MomentumBasis {
        &self.basis
    }

    pub fn n_points(&self) -> usize {
        self.grid.n_points()
    }

    pub fn hbar(&self) -> f64 {
        self.basis.hbar()
    }

    /// Momentum values in FFT slot order.
    pub fn p_slots(&self) -> &[f64] {
        &self.p_slots
    }

    /// Unnormalized forward DFT in place.
    pub(crate) fn forward(&self, buf: &mut [Complex64]) {
        self.fft.process(buf);
    }

    /// Inverse DFT in place, including the `1/N` factor.
    pub(crate) fn inverse(&self, buf: &mut [Complex64]) {
        self.ifft.process(buf);
        let scale = 1.0 / buf.len() as f64;
        buf.iter_mut().for_each(|z| *z *= scale);
    }

    /// Multiply a state by a diagonal operator given in FFT slot order.
    pub(crate) fn apply_momentum_diagonal<F>(&self, buf: &mut [Complex64], mut factor: F)
    where
        F: FnMut(usize) -> Complex64,
    {
        self.forward(buf);
        for (k, z) in buf.iter_mut().enumerate() {
            *z *= factor(k);
        }
        self.inverse(buf);
    }
}

/// A rotor state sampled on the angle grid. Not necessarily normalized.
#[derive(Clone, Debug)]
pub struct WaveFunction {
    amplitudes: Vec<Complex64>,
    space: Arc<PhaseSpace>,
}

impl WaveFunction {
    pub fn from_amplitudes(space: Arc<PhaseSpace>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != space.n_points() {
            return Err(Error::invalid(
                "amplitudes",
                format!(
                    "length {} does not match grid size {}",
                    amplitudes.len(),
                    space.n_points()
                ),
            ));
        }
        Ok(Self { amplitudes, space })
    }

    /// Gaussian wavepacket `(sigma/pi)^{1/4} exp(-sigma theta^2 / 2)`,
    /// renormalized to unit norm under the grid quadrature.
    pub fn gaussian(space: Arc<PhaseSpace>, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid(
                "sigma",
                format!("must be positive, got {sigma}"),
            ));
        }
        let tail = (-sigma * PI * PI / 2.0).exp();
        if tail > 1e-12 {
            warn!("gaussian sigma={sigma}: tail at theta=+-pi is {tail:.2e} of the peak");
        }
        let prefactor = (sigma / PI).powf(0.25);
        let amplitudes = space
            .grid()
            .theta_values()
            .iter()
            .map(|&t| Complex64::new(prefactor * (-sigma * t * t / 2.0).exp(), 0.0))
            .collect();
        let mut psi = Self { amplitudes, space };
        psi.normalize_to(1.0)?;
        Ok(psi)
    }

    /// Unit-norm momentum eigenstate `exp(i n theta)/sqrt(2 pi)`.
    pub fn momentum_eigenstate(space: Arc<PhaseSpace>, n: i64) -> Result<Self> {
        if space.basis().fft_slot(n).is_none() {
            return Err(Error::invalid(
                "n",
                format!("momentum index {n} outside the basis"),
            ));
        }
        let amp = 1.0 / (2.0 * PI).sqrt();
        let amplitudes = space
            .grid()
            .theta_values()
            .iter()
            .map(|&t| Complex64::from_polar(amp, n as f64 * t))
            .collect();
        Ok(Self { amplitudes, space })
    }

    /// Inverse of [`WaveFunction::to_momentum`].
    pub fn from_momentum(space: Arc<PhaseSpace>, coefficients: &[Complex64]) -> Result<Self> {
        let n_points = space.n_points();
        if coefficients.len() != n_points {
            return Err(Error::invalid(
                "coefficients",
                format!(
                    "length {} does not match grid size {n_points}",
                    coefficients.len()
                ),
            ));
        }
        let basis = space.basis();
        let mut buf = vec![Complex64::new(0.0, 0.0); n_points];
        for (n, &c) in basis.indices().zip(coefficients) {
            let sign = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            buf[basis.fft_slot(n).unwrap()] = c * sign;
        }
        space.inverse(&mut buf);
        let scale = n_points as f64 / (2.0 * PI).sqrt();
        buf.iter_mut().for_each(|z| *z *= scale);
        Ok(Self {
            amplitudes: buf,
            space,
        })
    }

    pub fn space(&self) -> &Arc<PhaseSpace> {
        &self.space
    }

    pub fn grid(&self) -> &AngleGrid {
        self.space.grid()
    }

    pub fn basis(&self) -> &MomentumBasis {
        self.space.basis()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    /// `<psi|psi>` under the grid quadrature.
    pub fn norm(&self) -> f64 {
        self.grid().weight() * self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &WaveFunction) -> Complex64 {
        let sum: Complex64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum();
        sum * self.grid().weight()
    }

    /// `<self| theta |other>`.
    pub fn theta_matrix_element(&self, other: &WaveFunction) -> Complex64 {
        let sum: Complex64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .zip(self.grid().theta_values())
            .map(|((a, b), &t)| a.conj() * b * t)
            .sum();
        sum * self.grid().weight()
    }

    /// Unnormalized `<psi| theta^2 |psi>`.
    pub fn theta_sq_expectation(&self) -> f64 {
        self.grid().weight()
            * self
                .amplitudes
                .iter()
                .zip(self.grid().theta_values())
                .map(|(z, &t)| z.norm_sqr() * t * t)
                .sum::<f64>()
    }

    pub fn scale(&mut self, factor: f64) {
        self.amplitudes.iter_mut().for_each(|z| *z *= factor);
    }

    /// Rescale to the given norm; returns the norm before rescaling.
    pub fn normalize_to(&mut self, target: f64) -> Result<f64> {
        let current = self.norm();
        if !(current > 0.0 && current.is_finite()) {
            return Err(Error::DegenerateState(format!(
                "cannot renormalize a state of norm {current}"
            )));
        }
        self.scale((target / current).sqrt());
        Ok(current)
    }

    /// Coefficients `c_n` for `n = -N/2 .. N/2-1`, ascending.
    pub fn to_momentum(&self) -> Vec<Complex64> {
        let mut buf = self.amplitudes.clone();
        self.space.forward(&mut buf);
        let basis = self.basis();
        let scale = (2.0 * PI).sqrt() / self.grid().n_points() as f64;
        basis
            .indices()
            .map(|n| {
                let sign = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                buf[basis.fft_slot(n).unwrap()] * (scale * sign)
            })
            .collect()
    }

    /// `|c_n|^2` in FFT slot order, summing to the state norm.
    pub fn momentum_probabilities(&self) -> Vec<f64> {
        let mut buf = self.amplitudes.clone();
        self.space.forward(&mut buf);
        let scale = 2.0 * PI / (self.grid().n_points() as f64).powi(2);
        buf.iter().map(|z| z.norm_sqr() * scale).collect()
    }

    /// `p |psi>`, unnormalized.
    pub fn apply_p(&self) -> WaveFunction {
        let mut out = self.clone();
        let p = self.space.p_slots();
        self.space
            .apply_momentum_diagonal(&mut out.amplitudes, |k| Complex64::new(p[k], 0.0));
        out
    }

    /// `theta |psi>`, unnormalized.
    pub fn apply_theta(&self) -> WaveFunction {
        let mut out = self.clone();
        out.amplitudes
            .iter_mut()
            .zip(self.grid().theta_values())
            .for_each(|(z, &t)| *z *= t);
        out
    }

    /// Norm-normalized first and second moments of angle and momentum.
    pub fn observables(&self) -> Result<Observables> {
        self.observables_and_edge(AliasGuard::default().edge_fraction)
            .map(|(obs, _)| obs)
    }

    /// Observables plus the momentum edge fraction, from a single transform.
    pub(crate) fn observables_and_edge(&self, edge_fraction: f64) -> Result<(Observables, f64)> {
        let norm = self.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::DegenerateState(format!("state norm is {norm}")));
        }
        let w = self.grid().weight();
        let (mut t1, mut t2) = (0.0, 0.0);
        for (z, &t) in self.amplitudes.iter().zip(self.grid().theta_values()) {
            let d = z.norm_sqr();
            t1 += d * t;
            t2 += d * t * t;
        }
        let probs = self.momentum_probabilities();
        let (mut p1, mut p2) = (0.0, 0.0);
        for (prob, &p) in probs.iter().zip(self.space.p_slots()) {
            p1 += prob * p;
            p2 += prob * p * p;
        }
        let obs = Observables {
            mean_theta: t1 * w / norm,
            mean_theta_sq: t2 * w / norm,
            mean_p: p1 / norm,
            mean_p_sq: p2 / norm,
            norm,
        };
        Ok((obs, edge_fraction_of(&probs, edge_fraction)))
    }

    /// Fraction of the norm carried by the outermost `edge_fraction` of
    /// momentum indices (half at each end of the basis).
    pub fn edge_probability_fraction(&self, edge_fraction: f64) -> f64 {
        edge_fraction_of(&self.momentum_probabilities(), edge_fraction)
    }
}

/// Edge weight of a probability vector stored in FFT slot order.
pub(crate) fn edge_fraction_of(probs_fft_order: &[f64], edge_fraction: f64) -> f64 {
    let n = probs_fft_order.len();
    let per_side = ((edge_fraction * n as f64) / 2.0).ceil() as usize;
    let per_side = per_side.clamp(1, n / 2);
    let total: f64 = probs_fft_order.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    // Highest positive indices sit just below slot N/2, most negative ones at N/2 upward.
    let half = n / 2;
    let edge: f64 = probs_fft_order[half - per_side..half + per_side]
        .iter()
        .sum();
    edge / total
}

/// Momentum-space aliasing guard: evolution aborts when more than
/// `tolerance` of the norm sits in the outermost `edge_fraction` of indices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AliasGuard {
    pub edge_fraction: f64,
    pub tolerance: f64,
}

impl Default for AliasGuard {
    fn default() -> Self {
        Self {
            edge_fraction: 0.05,
            tolerance: 1e-8,
        }
    }
}

/// One row of observables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observables {
    pub mean_theta: f64,
    pub mean_theta_sq: f64,
    pub mean_p: f64,
    pub mean_p_sq: f64,
    pub norm: f64,
}

/// Observables recorded after successive kicks.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ObservableSeries {
    pub times: Vec<usize>,
    pub mean_theta: Vec<f64>,
    pub mean_theta_sq: Vec<f64>,
    pub mean_p: Vec<f64>,
    pub mean_p_sq: Vec<f64>,
    pub norm: Vec<f64>,
}

impl ObservableSeries {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            times: Vec::with_capacity(n),
            mean_theta: Vec::with_capacity(n),
            mean_theta_sq: Vec::with_capacity(n),
            mean_p: Vec::with_capacity(n),
            mean_p_sq: Vec::with_capacity(n),
            norm: Vec::with_capacity(n),
        }
    }

    pub fn push(&mut self, t: usize, row: Observables) {
        self.times.push(t);
        self.mean_theta.push(row.mean_theta);
        self.mean_theta_sq.push(row.mean_theta_sq);
        self.mean_p.push(row.mean_p);
        self.mean_p_sq.push(row.mean_p_sq);
        self.norm.push(row.norm);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn row(&self, i: usize) -> Observables {
        Observables {
            mean_theta: self.mean_theta[i],
            mean_theta_sq: self.mean_theta_sq[i],
            mean_p: self.mean_p[i],
            mean_p_sq: self.mean_p_sq[i],
            norm: self.norm[i],
        }
    }

    /// Row recorded at kick `t`, if any.
    pub fn at(&self, t: usize) -> Option<Observables> {
        self.times.iter().position(|&s| s == t).map(|i| self.row(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(n: usize, hbar: f64) -> Arc<PhaseSpace> {
        PhaseSpace::new(n, hbar).unwrap()
    }

    /// Composite Simpson rule on [a, b] with `n` (even) panels.
    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let x = a + i as f64 * h;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        s * h / 3.0
    }

    #[test]
    fn grid_spacing_and_range() {
        let g = AngleGrid::new(1 << 10).unwrap();
        assert!((g.spacing() * g.n_points() as f64 - 2.0 * PI).abs() < 1e-15);
        assert_eq!(g.theta_values()[0], -PI);
        assert!(g.theta_values().iter().all(|&t| (-PI..PI).contains(&t)));
        assert_eq!(g.nearest_index(PI / 2.0), 3 * (1 << 10) / 4);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(AngleGrid::new(12).is_err());
        assert!(AngleGrid::new(1).is_err());
        assert!(MomentumBasis::new(8, 0.0).is_err());
    }

    #[test]
    fn momentum_basis_values() {
        let b = MomentumBasis::new(8, 0.1).unwrap();
        let idx: Vec<i64> = b.indices().collect();
        assert_eq!(idx, vec![-4, -3, -2, -1, 0, 1, 2, 3]);
        for (n, p) in idx.iter().zip(b.p_values()) {
            assert_eq!(p, *n as f64 * 0.1);
        }
        for k in 0..8 {
            assert_eq!(b.fft_slot(b.index_at_fft_slot(k)), Some(k));
        }
    }

    #[test]
    fn gaussian_moments() {
        let s = space(1 << 12, 0.1);
        let psi = WaveFunction::gaussian(s, 10.0).unwrap();
        let obs = psi.observables().unwrap();
        assert!((obs.norm - 1.0).abs() < 1e-14);
        assert!(obs.mean_theta.abs() < 1e-14);
        assert!((obs.mean_theta_sq - 0.05).abs() < 1e-6);
        assert!(obs.mean_p.abs() < 1e-14);
    }

    #[test]
    fn gaussian_p_sq_matches_continuum_quadrature() {
        // <p^2> = hbar^2 \int |psi'|^2 / \int |psi|^2, integrated directly.
        let (sigma, hbar) = (10.0_f64, 0.1_f64);
        let psi = |t: f64| (-sigma * t * t / 2.0).exp();
        let dpsi = |t: f64| -sigma * t * psi(t);
        let num = simpson(|t| dpsi(t).powi(2), -PI, PI, 200_000);
        let den = simpson(|t| psi(t).powi(2), -PI, PI, 200_000);
        let oracle = hbar * hbar * num / den;
        assert!((oracle - 0.05).abs() < 1e-9);

        let wf = WaveFunction::gaussian(space(1 << 12, hbar), sigma).unwrap();
        let obs = wf.observables().unwrap();
        assert!((obs.mean_p_sq - oracle).abs() < 1e-4);
    }

    #[test]
    fn gaussian_rejects_nonpositive_sigma() {
        let s = space(64, 0.1);
        assert!(matches!(
            WaveFunction::gaussian(s.clone(), 0.0),
            Err(Error::InvalidParameter { name: "sigma", .. })
        ));
        assert!(WaveFunction::gaussian(s, -1.0).is_err());
    }

    #[test]
    fn plane_wave_has_single_coefficient() {
        let s = space(64, 0.1);
        for n0 in [-32, -5, 0, 7, 31] {
            let psi = WaveFunction::momentum_eigenstate(s.clone(), n0).unwrap();
            let c = psi.to_momentum();
            for (n, z) in s.basis().indices().zip(&c) {
                let expected = if n == n0 { 1.0 } else { 0.0 };
                assert!(
                    (z.norm() - expected).abs() < 1e-12,
                    "n={n} |c|={}",
                    z.norm()
                );
            }
            // phase convention: c_n0 = 1 exactly
            let z = c[(n0 + 32) as usize];
            assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn gaussian_coefficients_match_continuum_transform() {
        // c_n = (1/sqrt(2pi)) \int e^{-in theta} psi = (sigma/pi)^{1/4} exp(-n^2/(2 sigma)) / sqrt(sigma)
        let sigma = 10.0_f64;
        let s = space(256, 0.1);
        let psi = WaveFunction::gaussian(s.clone(), sigma).unwrap();
        let c = psi.to_momentum();
        for (n, z) in s.basis().indices().zip(&c) {
            let nf = n as f64;
            let analytic =
                (sigma / PI).powf(0.25) * (-nf * nf / (2.0 * sigma)).exp() / sigma.sqrt();
            assert!((z.norm() - analytic).abs() < 1e-6, "n={n}");
        }
    }

    #[test]
    fn eigenstate_observables() {
        let psi = WaveFunction::momentum_eigenstate(space(64, 0.1), 3).unwrap();
        let obs = psi.observables().unwrap();
        assert!((obs.mean_p - 0.3).abs() < 1e-12);
        assert!((obs.mean_p_sq - 0.09).abs() < 1e-12);
        assert!((obs.norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn apply_p_on_eigenstate_scales() {
        let s = space(64, 0.1);
        let psi = WaveFunction::momentum_eigenstate(s, -7).unwrap();
        let out = psi.apply_p();
        for (a, b) in psi.amplitudes().iter().zip(out.amplitudes()) {
            assert!((a * -0.7 - b).norm() < 1e-12);
        }
    }

    #[test]
    fn apply_p_norm_is_mean_p_sq() {
        let psi = WaveFunction::gaussian(space(1 << 12, 0.1), 10.0).unwrap();
        let mps = psi.observables().unwrap().mean_p_sq;
        assert!((psi.apply_p().norm() - mps).abs() < 1e-12);
    }

    #[test]
    fn apply_theta_gaussian_norm() {
        let psi = WaveFunction::gaussian(space(1 << 12, 0.1), 10.0).unwrap();
        assert!((psi.apply_theta().norm() - 0.05).abs() < 1e-6);
    }

    #[test]
    fn apply_theta_kills_state_at_origin() {
        let s = space(16, 0.1);
        let mut amps = vec![Complex64::new(0.0, 0.0); 16];
        amps[8] = Complex64::new(1.0, 2.0); // theta_8 = 0
        let psi = WaveFunction::from_amplitudes(s, amps).unwrap();
        assert!(psi
            .apply_theta()
            .amplitudes()
            .iter()
            .all(|z| z.norm() == 0.0));
        assert!(psi.apply_theta().observables().is_err());
    }

    #[test]
    fn zero_state_is_degenerate() {
        let s = space(16, 0.1);
        let psi = WaveFunction::from_amplitudes(s, vec![Complex64::new(0.0, 0.0); 16]).unwrap();
        assert!(matches!(psi.observables(), Err(Error::DegenerateState(_))));
    }

    #[test]
    fn edge_fraction_counts_both_ends() {
        let s = space(64, 0.1);
        let top = WaveFunction::momentum_eigenstate(s.clone(), 31).unwrap();
        let bottom = WaveFunction::momentum_eigenstate(s.clone(), -32).unwrap();
        let middle = WaveFunction::momentum_eigenstate(s, 10).unwrap();
        assert!((top.edge_probability_fraction(0.05) - 1.0).abs() < 1e-12);
        assert!((bottom.edge_probability_fraction(0.05) - 1.0).abs() < 1e-12);
        assert!(middle.edge_probability_fraction(0.05) < 1e-20);
    }
}
