//! One-period Floquet map of the PT-symmetric kicked rotor and its adjoint.
//!
//! `U = exp(-i p^2 / 2 hbar) exp(-i K [cos theta + i lambda sin theta] / hbar)`:
//! the kick acts first, then free rotation. The adjoint reverses the order
//! and conjugates each factor; the gain `exp(K lambda sin theta / hbar)` is
//! real, so the adjoint keeps the gain at `theta = pi/2`. Backward evolution
//! always uses `U^dagger`, never `U^{-1}`; the two differ once `lambda != 0`.

use std::sync::Arc;

use log::warn;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::{AliasGuard, AngleGrid, ObservableSeries, PhaseSpace, WaveFunction};

/// Largest gain exponent accepted before `exp` gets close to overflow.
pub const MAX_GAIN_EXPONENT: f64 = 700.0;

/// Below this value of `K lambda / hbar` the broken-PT assumption is shaky.
pub const BROKEN_PT_THRESHOLD: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimParams {
    /// Kick strength.
    pub k: f64,
    /// Strength of the imaginary part of the kick.
    pub lambda: f64,
    pub hbar: f64,
    /// Width parameter of the initial Gaussian.
    pub sigma: f64,
    pub n_points: usize,
    pub n_kicks: usize,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            k: 2.0 * std::f64::consts::PI,
            lambda: 0.9,
            hbar: 0.1,
            sigma: 10.0,
            n_points: 1 << 14,
            n_kicks: 10,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.k >= 0.0 && self.k.is_finite()) {
            return Err(Error::invalid("K", format!("must be >= 0, got {}", self.k)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid(
                "lambda",
                format!("must be >= 0, got {}", self.lambda),
            ));
        }
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(Error::invalid(
                "hbar",
                format!("must be > 0, got {}", self.hbar),
            ));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid(
                "sigma",
                format!("must be > 0, got {}", self.sigma),
            ));
        }
        if self.n_points < 2 || !self.n_points.is_power_of_two() {
            return Err(Error::invalid(
                "n_points",
                format!("must be a power of two >= 2, got {}", self.n_points),
            ));
        }
        if self.n_kicks == 0 {
            return Err(Error::invalid("n_kicks", "must be positive"));
        }
        Ok(())
    }

    /// `K lambda / hbar`, the exponent of the peak gain per kick.
    pub fn gain_exponent(&self) -> f64 {
        self.k * self.lambda / self.hbar
    }

    pub fn is_broken_pt(&self) -> bool {
        self.gain_exponent() >= BROKEN_PT_THRESHOLD
    }

    pub fn warn_if_unbroken(&self) {
        if !self.is_broken_pt() {
            warn!(
                "K*lambda/hbar = {:.3} < {BROKEN_PT_THRESHOLD}: outside the broken-PT regime",
                self.gain_exponent()
            );
        }
    }
}

/// Kick multiplier `exp(-i K cos theta / hbar) exp(K lambda sin theta / hbar)`
/// at every grid point.
pub fn kick_factor(params: &SimParams, grid: &AngleGrid) -> Result<Vec<Complex64>> {
    kick_values(params, grid, -1.0)
}

/// Conjugate of [`kick_factor`], used by the adjoint step.
pub fn adjoint_kick_factor(params: &SimParams, grid: &AngleGrid) -> Result<Vec<Complex64>> {
    kick_values(params, grid, 1.0)
}

fn kick_values(params: &SimParams, grid: &AngleGrid, phase_sign: f64) -> Result<Vec<Complex64>> {
    let exponent = params.gain_exponent();
    if !(exponent <= MAX_GAIN_EXPONENT) {
        return Err(Error::Overflow {
            exponent,
            limit: MAX_GAIN_EXPONENT,
        });
    }
    let (k, h, l) = (params.k, params.hbar, params.lambda);
    Ok(grid
        .theta_values()
        .iter()
        .map(|&t| Complex64::from_polar((k * l * t.sin() / h).exp(), phase_sign * k * t.cos() / h))
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Apply `U`.
    Forward,
    /// Apply `U^dagger`.
    Backward,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Renormalize {
    /// Rescale after every kick back to the norm the segment started with.
    #[default]
    PerKick,
    Never,
}

impl std::str::FromStr for Renormalize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-kick" => Ok(Renormalize::PerKick),
            "none" | "never" => Ok(Renormalize::Never),
            other => Err(Error::Config(format!(
                "renormalize: expected `per-kick` or `none`, got `{other}`"
            ))),
        }
    }
}

/// Norm bookkeeping for one evolution segment.
///
/// `log_factors[j]` is `ln(raw_norms[j] / held norm)`, the factor removed by
/// the renormalization after kick `j` (zero when nothing is rescaled).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SegmentLedger {
    pub start_norm: f64,
    /// Norm after each kick, post-renormalization.
    pub norms: Vec<f64>,
    /// Norm after each kick, before renormalization.
    pub raw_norms: Vec<f64>,
    pub log_factors: Vec<f64>,
    pub log_scale: f64,
}

impl SegmentLedger {
    /// Norm the state would carry had it never been rescaled.
    pub fn unrenormalized_norm(&self) -> f64 {
        let last = self.norms.last().copied().unwrap_or(self.start_norm);
        last * self.log_scale.exp()
    }
}

/// Result of [`Floquet::evolve`].
#[derive(Clone, Debug)]
pub struct Evolution {
    pub state: WaveFunction,
    pub series: ObservableSeries,
    pub ledger: SegmentLedger,
}

/// Precomputed one-period operators for a parameter set on a phase space.
#[derive(Clone, Debug)]
pub struct Floquet {
    params: SimParams,
    space: Arc<PhaseSpace>,
    kick: Vec<Complex64>,
    kick_adj: Vec<Complex64>,
    /// `exp(-i p_n^2 / 2 hbar)` in FFT slot order.
    free: Vec<Complex64>,
    guard: Option<AliasGuard>,
}

impl Floquet {
    pub fn new(params: SimParams, space: Arc<PhaseSpace>) -> Result<Self> {
        params.validate()?;
        if space.n_points() != params.n_points || space.hbar() != params.hbar {
            return Err(Error::invalid(
                "space",
                "phase space does not match n_points/hbar of the parameters",
            ));
        }
        let kick = kick_factor(&params, space.grid())?;
        let kick_adj = adjoint_kick_factor(&params, space.grid())?;
        let h = params.hbar;
        let free = space
            .p_slots()
            .iter()
            .map(|&p| Complex64::from_polar(1.0, -p * p / (2.0 * h)))
            .collect();
        Ok(Self {
            params,
            space,
            kick,
            kick_adj,
            free,
            guard: Some(AliasGuard::default()),
        })
    }

    /// Convenience constructor that builds its own phase space.
    pub fn from_params(params: SimParams) -> Result<Self> {
        params.validate()?;
        let space = PhaseSpace::new(params.n_points, params.hbar)?;
        Self::new(params, space)
    }

    /// Replace the aliasing guard; `None` disables it (tiny oracle grids).
    pub fn with_guard(mut self, guard: Option<AliasGuard>) -> Self {
        self.guard = guard;
        self
    }

    pub fn params(&self) -> &SimParams {
        &self.params
    }

    pub fn space(&self) -> &Arc<PhaseSpace> {
        &self.space
    }

    pub fn guard(&self) -> Option<AliasGuard> {
        self.guard
    }

    pub fn kick(&self) -> &[Complex64] {
        &self.kick
    }

    pub fn initial_gaussian(&self) -> Result<WaveFunction> {
        WaveFunction::gaussian(self.space.clone(), self.params.sigma)
    }

    /// `U psi`, unnormalized.
    pub fn forward_step(&self, psi: &WaveFunction) -> WaveFunction {
        let mut out = psi.clone();
        self.forward_in_place(out.amplitudes_mut());
        out
    }

    /// `U^dagger psi`, unnormalized.
    pub fn adjoint_step(&self, psi: &WaveFunction) -> WaveFunction {
        let mut out = psi.clone();
        self.adjoint_in_place(out.amplitudes_mut());
        out
    }

    fn forward_in_place(&self, amps: &mut [Complex64]) {
        amps.iter_mut().zip(&self.kick).for_each(|(z, k)| *z *= k);
        let free = &self.free;
        self.space.apply_momentum_diagonal(amps, |k| free[k]);
    }

    fn adjoint_in_place(&self, amps: &mut [Complex64]) {
        let free = &self.free;
        self.space.apply_momentum_diagonal(amps, |k| free[k].conj());
        amps.iter_mut()
            .zip(&self.kick_adj)
            .for_each(|(z, k)| *z *= k);
    }

    pub fn step(&self, psi: &WaveFunction, direction: Direction) -> WaveFunction {
        match direction {
            Direction::Forward => self.forward_step(psi),
            Direction::Backward => self.adjoint_step(psi),
        }
    }

    /// Apply `n` steps in `direction`, recording observables after each one.
    ///
    /// Forward segments are labelled `t = 1..=n`, backward segments count
    /// down from `n - 1` to `0` (they start at the pivot time `t_n = n`).
    pub fn evolve(
        &self,
        psi0: &WaveFunction,
        n: usize,
        direction: Direction,
        policy: Renormalize,
    ) -> Result<Evolution> {
        self.evolve_inspect(psi0, n, direction, policy, |_, _| {})
    }

    /// [`Floquet::evolve`], handing the (renormalized) state after every
    /// kick to `on_step` together with its time label.
    pub fn evolve_inspect<F>(
        &self,
        psi0: &WaveFunction,
        n: usize,
        direction: Direction,
        policy: Renormalize,
        mut on_step: F,
    ) -> Result<Evolution>
    where
        F: FnMut(usize, &WaveFunction),
    {
        let start_norm = psi0.norm();
        if !(start_norm > 0.0 && start_norm.is_finite()) {
            return Err(Error::DegenerateState(format!(
                "evolution started from norm {start_norm}"
            )));
        }
        let mut state = psi0.clone();
        let mut series = ObservableSeries::with_capacity(n);
        let mut ledger = SegmentLedger {
            start_norm,
            ..Default::default()
        };
        let edge_fraction = self
            .guard
            .map_or(AliasGuard::default().edge_fraction, |g| g.edge_fraction);
        for j in 1..=n {
            match direction {
                Direction::Forward => self.forward_in_place(state.amplitudes_mut()),
                Direction::Backward => self.adjoint_in_place(state.amplitudes_mut()),
            }
            let raw = state.norm();
            if !(raw.is_finite() && raw > 0.0) {
                return Err(Error::NonFinite(j));
            }
            ledger.raw_norms.push(raw);
            let log_factor = match policy {
                Renormalize::PerKick => {
                    state.scale((start_norm / raw).sqrt());
                    (raw / start_norm).ln()
                }
                Renormalize::Never => 0.0,
            };
            ledger.log_factors.push(log_factor);
            ledger.log_scale += log_factor;
            let (obs, edge) = state.observables_and_edge(edge_fraction)?;
            if let Some(guard) = self.guard {
                if edge > guard.tolerance {
                    return Err(Error::Aliasing {
                        kick: j,
                        fraction: edge,
                        tolerance: guard.tolerance,
                    });
                }
            }
            ledger.norms.push(obs.norm);
            let t = match direction {
                Direction::Forward => j,
                Direction::Backward => n - j,
            };
            series.push(t, obs);
            on_step(t, &state);
        }
        Ok(Evolution {
            state,
            series,
            ledger,
        })
    }
}
