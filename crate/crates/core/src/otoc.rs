//! Out-of-time-ordered correlator `C(t_n) = -<[p(t_n), theta(0)]^2>` via
//! explicit forward/backward evolution.
//!
//! For each `t_n` the state is evolved forward `t_n` kicks, hit with `p`,
//! and evolved back with `U^dagger`. Two seeds are used: the Gaussian
//! `psi0`, giving `psi_R`, and `theta psi0`, giving `phi_R`. Then
//!
//! ```text
//! C1 = <psi_R| theta^2 |psi_R>    C2 = <phi_R|phi_R>    C3 = <psi_R| theta |phi_R>
//! C  = C1 + C2 - 2 Re C3 = || theta psi_R - phi_R ||^2
//! ```
//!
//! Norms follow the renormalized ledger: forward segments hold the seed's
//! norm, the `p` insertion sets the pivot norm `<p^2>`, and the backward
//! segment holds that pivot norm. The never-renormalized correlator is
//! exponentially larger and is not what is reported here.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::classical::predicted_d;
use crate::error::{Error, Result};
use crate::fit::{fit_free_exponent, fit_line, fit_power_law, fixed_exponent_rate, FitWindow};
use crate::propagator::{Direction, Evolution, Floquet, Renormalize, SegmentLedger, SimParams};
use crate::state::{ObservableSeries, WaveFunction};

/// Reference plateau prefactor used for the predicted staircase line.
pub const REFERENCE_NU: f64 = 1.8;

/// The decomposed correlator at one time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OtocBreakdown {
    pub t_n: usize,
    pub c1: f64,
    pub c2: f64,
    pub c3: Complex64,
    pub c_total: f64,
}

impl OtocBreakdown {
    pub fn assemble(t_n: usize, c1: f64, c2: f64, c3: Complex64) -> Self {
        Self {
            t_n,
            c1,
            c2,
            c3,
            c_total: c1 + c2 - 2.0 * c3.re,
        }
    }

    /// Cauchy-Schwarz and positivity checks, with the given relative slack.
    pub fn is_consistent(&self, slack: f64) -> bool {
        let scale = self.c1 + self.c2;
        self.c1 >= 0.0
            && self.c2 >= 0.0
            && self.c3.norm() <= (self.c1 * self.c2).sqrt() * (1.0 + slack) + slack * scale
            && self.c_total >= -slack * scale
    }
}

/// Norms of one forward / `p` / backward pass.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NormLedger {
    pub forward: SegmentLedger,
    /// Norm right after the `p` insertion, `<p^2>` times the forward norm.
    pub pivot_norm: f64,
    pub backward: SegmentLedger,
}

impl NormLedger {
    pub fn forward_norms(&self) -> &[f64] {
        &self.forward.norms
    }

    pub fn backward_norms(&self) -> &[f64] {
        &self.backward.norms
    }

    /// Total log of all discarded normalization factors.
    pub fn log_scale(&self) -> f64 {
        self.forward.log_scale + self.backward.log_scale
    }
}

/// A complete forward / `p` / backward pass with its observables.
#[derive(Clone, Debug)]
pub struct TimeReversal {
    pub forward: Evolution,
    /// `p psi(t_n)`.
    pub pivot: WaveFunction,
    pub backward: Evolution,
    pub ledger: NormLedger,
}

impl TimeReversal {
    /// State at the end of time reversal.
    pub fn reversed(&self) -> &WaveFunction {
        &self.backward.state
    }
}

/// Run the forward / `p` / backward pass from `seed` for `t_n` kicks.
pub fn time_reversal(floquet: &Floquet, seed: &WaveFunction, t_n: usize) -> Result<TimeReversal> {
    let forward = floquet.evolve(seed, t_n, Direction::Forward, Renormalize::PerKick)?;
    let (pivot, backward) = reverse_from(floquet, &forward.state, t_n)?;
    let ledger = NormLedger {
        forward: forward.ledger.clone(),
        pivot_norm: pivot.norm(),
        backward: backward.ledger.clone(),
    };
    Ok(TimeReversal {
        forward,
        pivot,
        backward,
        ledger,
    })
}

fn reverse_from(
    floquet: &Floquet,
    forward_state: &WaveFunction,
    t_n: usize,
) -> Result<(WaveFunction, Evolution)> {
    let pivot = forward_state.apply_p();
    let backward = floquet.evolve(&pivot, t_n, Direction::Backward, Renormalize::PerKick)?;
    Ok((pivot, backward))
}

/// `C1(t_n)` and the reversed state `psi_R`.
pub fn compute_c1(floquet: &Floquet, t_n: usize) -> Result<(f64, WaveFunction)> {
    let psi0 = floquet.initial_gaussian()?;
    let pass = time_reversal(floquet, &psi0, t_n)?;
    let psi_r = pass.backward.state;
    Ok((psi_r.theta_sq_expectation(), psi_r))
}

/// `C2(t_n)` and the reversed state `phi_R`, seeded with `theta psi0`.
pub fn compute_c2(floquet: &Floquet, t_n: usize) -> Result<(f64, WaveFunction)> {
    let phi0 = floquet.initial_gaussian()?.apply_theta();
    let pass = time_reversal(floquet, &phi0, t_n)?;
    let phi_r = pass.backward.state;
    Ok((phi_r.norm(), phi_r))
}

/// `C3 = <psi_R| theta |phi_R>`.
pub fn compute_c3(psi_r: &WaveFunction, phi_r: &WaveFunction) -> Complex64 {
    psi_r.theta_matrix_element(phi_r)
}

/// Fidelity `|<a|b>|^2 / (|a|^2 |b|^2)` between two unnormalized states.
pub fn fidelity(a: &WaveFunction, b: &WaveFunction) -> f64 {
    a.inner(b).norm_sqr() / (a.norm() * b.norm())
}

/// Correlator history for `t_n = 1..=t_max` plus forward observables.
#[derive(Clone, Debug)]
pub struct OtocSeries {
    pub params: SimParams,
    pub points: Vec<OtocBreakdown>,
    /// Forward observables of the Gaussian seed, `t = 1..=t_max`.
    pub forward: ObservableSeries,
    /// Reversed states for `t_n = t_max`.
    pub psi_r: WaveFunction,
    pub phi_r: WaveFunction,
    /// Ledger of the `psi` pass at `t_max`.
    pub ledger: NormLedger,
}

impl OtocSeries {
    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t_n as f64).collect()
    }

    pub fn c1(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.c1).collect()
    }

    pub fn c2(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.c2).collect()
    }

    pub fn c3_re(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.c3.re).collect()
    }

    pub fn c_total(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.c_total).collect()
    }
}

/// Correlators for every `t_n` in `1..=t_max`.
///
/// The forward passes of both seeds run once, keeping the renormalized state
/// after every kick; each `t_n` then gets its own fresh backward pass. The
/// checkpointed forward states are bitwise identical to those of a fresh
/// forward run, so every point equals an independent pipeline.
pub fn otoc_series(floquet: &Floquet, t_max: usize) -> Result<OtocSeries> {
    if t_max < 2 {
        return Err(Error::invalid(
            "t_max",
            format!("must be >= 2, got {t_max}"),
        ));
    }
    let psi0 = floquet.initial_gaussian()?;
    let phi0 = psi0.apply_theta();
    let psi_fwd = checkpointed_forward(floquet, &psi0, t_max)?;
    let phi_fwd = checkpointed_forward(floquet, &phi0, t_max)?;

    let mut points = Vec::with_capacity(t_max);
    let mut last = None;
    for t_n in 1..=t_max {
        let (psi_pivot, psi_back) = reverse_from(floquet, &psi_fwd.states[t_n - 1], t_n)?;
        let (_, phi_back) = reverse_from(floquet, &phi_fwd.states[t_n - 1], t_n)?;
        let psi_r = psi_back.state;
        let phi_r = phi_back.state;
        points.push(OtocBreakdown::assemble(
            t_n,
            psi_r.theta_sq_expectation(),
            phi_r.norm(),
            compute_c3(&psi_r, &phi_r),
        ));
        if t_n == t_max {
            let ledger = NormLedger {
                forward: psi_fwd.evolution.ledger.clone(),
                pivot_norm: psi_pivot.norm(),
                backward: psi_back.ledger,
            };
            last = Some((psi_r, phi_r, ledger));
        }
    }
    let (psi_r, phi_r, ledger) = last.expect("t_max >= 2");
    Ok(OtocSeries {
        params: *floquet.params(),
        points,
        forward: psi_fwd.evolution.series,
        psi_r,
        phi_r,
        ledger,
    })
}

struct Checkpoints {
    evolution: Evolution,
    states: Vec<WaveFunction>,
}

fn checkpointed_forward(floquet: &Floquet, seed: &WaveFunction, n: usize) -> Result<Checkpoints> {
    let mut states = Vec::with_capacity(n);
    let evolution = floquet.evolve_inspect(
        seed,
        n,
        Direction::Forward,
        Renormalize::PerKick,
        |_, state| states.push(state.clone()),
    )?;
    Ok(Checkpoints { evolution, states })
}

/// Growth rates extracted from one correlator history.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateFit {
    pub k: f64,
    /// Quadratic rate of `C`.
    pub g: f64,
    /// Slope of forward `<p>` (least-squares line).
    pub d: f64,
    /// `<p>` rate of a line forced through the origin, for comparison.
    pub d_through_origin: f64,
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
    pub nu: f64,
    pub window: FitWindow,
    /// Relative RMS residual of the fixed-exponent fit of `C`.
    pub residual: f64,
    /// Exponent of a free power-law fit of `C`.
    pub q_free: f64,
    /// Largest `|Im C3 / Re C3|` inside the window.
    pub c3_imag_ratio: f64,
}

impl RateFit {
    pub fn from_series(series: &OtocSeries, window: FitWindow) -> Result<Self> {
        let t = series.times();
        let c_total = series.c_total();
        let c_fit = fit_power_law(&t, &c_total, window, 2.0)?;
        let c1 = fit_power_law(&t, &series.c1(), window, 2.0)?.rate;
        let c2 = fit_power_law(&t, &series.c2(), window, 2.0)?.rate;
        let c3 = fixed_exponent_rate(&t, &series.c3_re(), window, 2.0)?;
        let (_, q_free) = fit_free_exponent(&t, &c_total, window)?;

        let ft: Vec<f64> = series.forward.times.iter().map(|&t| t as f64).collect();
        let d = fit_line(&ft, &series.forward.mean_p, window)?.slope;
        let d_through_origin = fixed_exponent_rate(&ft, &series.forward.mean_p, window, 1.0)?;
        let d2 = d * d;
        let c3_imag_ratio = series
            .points
            .iter()
            .filter(|p| window.contains(p.t_n as f64))
            .map(|p| (p.c3.im / p.c3.re).abs())
            .fold(0.0, f64::max);
        Ok(Self {
            k: series.params.k,
            g: c_fit.rate,
            d,
            d_through_origin,
            alpha: c1 / d2,
            beta: c2 / d2,
            eta: c3 / d2,
            nu: c_fit.rate / d2,
            window,
            residual: c_fit.residual,
            q_free,
            c3_imag_ratio,
        })
    }

    /// `alpha + beta - 2 eta`, which must reproduce `nu`.
    pub fn nu_from_parts(&self) -> f64 {
        self.alpha + self.beta - 2.0 * self.eta
    }
}

/// One K of a staircase scan.
#[derive(Clone, Debug)]
pub struct ScanEntry {
    pub k: f64,
    pub series: OtocSeries,
    pub fit: RateFit,
    /// `REFERENCE_NU * D(K)^2`, absent when K has no quantized plateau.
    pub predicted_g: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct StaircaseScan {
    pub entries: Vec<ScanEntry>,
}

impl StaircaseScan {
    pub fn k_values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.k).collect()
    }

    pub fn fits(&self) -> Vec<RateFit> {
        self.entries.iter().map(|e| e.fit).collect()
    }

    /// `(max - min) / mean` of `G` over the K values lying in plateau `m`.
    pub fn plateau_spread(&self, m: i64) -> Option<f64> {
        let g: Vec<f64> = self
            .entries
            .iter()
            .filter(|e| plateau_index(e.k) == Some(m))
            .map(|e| e.fit.g)
            .collect();
        relative_spread(&g)
    }
}

/// Plateau `m` with `K` in `(2 m pi - pi, 2 m pi + pi)`.
pub fn plateau_index(k: f64) -> Option<i64> {
    predicted_d(k).ok().map(|d| (d / (2.0 * PI)).round() as i64)
}

/// `(max - min) / mean`, or `None` for fewer than two values.
pub fn relative_spread(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    Some((max - min) / mean)
}

/// Run the full correlator pipeline for every K, `jobs` at a time.
pub fn scan_staircase(
    k_values: &[f64],
    base: SimParams,
    t_max: usize,
    window: FitWindow,
    jobs: usize,
) -> Result<StaircaseScan> {
    if k_values.is_empty() {
        return Err(Error::invalid("k_values", "must not be empty"));
    }
    let run = |&k: &f64| -> Result<ScanEntry> {
        let params = SimParams { k, ..base };
        params.warn_if_unbroken();
        let floquet = Floquet::from_params(params)?;
        let series = otoc_series(&floquet, t_max)?;
        let fit = RateFit::from_series(&series, window)?;
        let predicted_g = predicted_d(k).ok().map(|d| REFERENCE_NU * d * d);
        Ok(ScanEntry {
            k,
            series,
            fit,
            predicted_g,
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let entries = pool.install(|| k_values.par_iter().map(run).collect::<Result<Vec<_>>>())?;
    Ok(StaircaseScan { entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn floquet(k: f64, lambda: f64, n_points: usize) -> Floquet {
        Floquet::from_params(SimParams {
            k,
            lambda,
            hbar: 0.1,
            sigma: 10.0,
            n_points,
            n_kicks: 10,
        })
        .unwrap()
    }

    #[test]
    fn assemble_matches_norm_identity() {
        let f = floquet(2.0 * PI, 0.9, 1 << 12);
        let (c1, psi_r) = compute_c1(&f, 4).unwrap();
        let (c2, phi_r) = compute_c2(&f, 4).unwrap();
        let c3 = compute_c3(&psi_r, &phi_r);
        let b = OtocBreakdown::assemble(4, c1, c2, c3);
        // C = || theta psi_R - phi_R ||^2
        let mut diff = psi_r.apply_theta();
        for (a, z) in diff.amplitudes_mut().iter_mut().zip(phi_r.amplitudes()) {
            *a -= z;
        }
        assert!((diff.norm() - b.c_total).abs() < 1e-9 * (c1 + c2));
        assert!(b.is_consistent(1e-9));
    }

    #[test]
    fn series_matches_fresh_pipelines() {
        let f = floquet(2.0 * PI, 0.9, 1 << 12);
        let s = otoc_series(&f, 5).unwrap();
        for t_n in [1, 3, 5] {
            let (c1, psi_r) = compute_c1(&f, t_n).unwrap();
            let (c2, phi_r) = compute_c2(&f, t_n).unwrap();
            let p = s.points[t_n - 1];
            assert_eq!(p.t_n, t_n);
            assert_eq!(p.c1, c1);
            assert_eq!(p.c2, c2);
            assert_eq!(p.c3, compute_c3(&psi_r, &phi_r));
        }
    }

    #[test]
    fn c2_without_evolution_is_p_sq_of_seed() {
        let f = floquet(2.0 * PI, 0.9, 1 << 12);
        let (c2, _) = compute_c2(&f, 0).unwrap();
        let phi0 = f.initial_gaussian().unwrap().apply_theta();
        let obs = phi0.observables().unwrap();
        assert!((c2 - obs.mean_p_sq * obs.norm).abs() < 1e-12);
    }

    #[test]
    fn ledger_holds_norms() {
        let f = floquet(2.0 * PI, 0.9, 1 << 12);
        let psi0 = f.initial_gaussian().unwrap();
        let pass = time_reversal(&f, &psi0, 6).unwrap();
        let l = &pass.ledger;
        assert!(l.forward_norms().iter().all(|n| (n - 1.0).abs() < 1e-12));
        assert!(l
            .backward_norms()
            .iter()
            .all(|n| (n - l.pivot_norm).abs() < 1e-12 * l.pivot_norm));
        let mps = pass.forward.series.row(5).mean_p_sq;
        assert!((l.pivot_norm - mps).abs() < 1e-9 * mps);
        assert!(l.log_scale() > 0.0);
    }

    #[test]
    fn rejects_short_series() {
        let f = floquet(2.0 * PI, 0.9, 1 << 12);
        assert!(otoc_series(&f, 1).is_err());
    }

    #[test]
    fn spread_and_plateaus() {
        assert_eq!(plateau_index(2.0 * PI), Some(1));
        assert_eq!(plateau_index(14.0), Some(2));
        assert_eq!(plateau_index(2.0), None);
        assert!((relative_spread(&[1.0, 1.1, 0.9]).unwrap() - 0.2).abs() < 1e-12);
        assert!(relative_spread(&[1.0]).is_none());
    }
}
