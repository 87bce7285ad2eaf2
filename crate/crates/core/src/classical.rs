//! Point-particle picture of the quantized acceleration.
//!
//! A soliton sits on a gain maximum `theta_c(m) = 2 m pi + pi/2`. One kick
//! adds `K sin(theta_c) = K` to its momentum, free flight moves it by the new
//! momentum, and the gain pulls it onto the nearest maximum (capture radius
//! `pi`). The momentum is then read off as the distance actually travelled,
//! so it is always a multiple of `2 pi`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

const TAU: f64 = 2.0 * PI;

/// Relative tolerance for recognizing plateau positions and interval edges.
const EDGE_TOL: f64 = 1e-12;

/// Soliton position on the unwrapped angle axis plus its momentum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolitonState {
    pub theta: f64,
    pub p: f64,
}

impl SolitonState {
    /// The soliton on gain maximum `m` with momentum `p`.
    pub fn at_plateau(m: i64, p: f64) -> Self {
        Self {
            theta: FRAC_PI_2 + TAU * m as f64,
            p,
        }
    }

    /// Index `m` of the gain maximum the soliton sits on, if it sits on one.
    pub fn plateau(&self) -> Option<i64> {
        let x = (self.theta - FRAC_PI_2) / TAU;
        let m = x.round();
        ((x - m).abs() <= EDGE_TOL * x.abs().max(1.0)).then_some(m as i64)
    }
}

/// One kick, one free flight, one snap onto the nearest gain maximum.
pub fn soliton_step(s: SolitonState, k: f64) -> Result<SolitonState> {
    let m0 = s.plateau().ok_or_else(|| {
        Error::invalid(
            "theta",
            format!("{} is not of the form 2 m pi + pi/2", s.theta),
        )
    })?;
    // sin(theta_c) = 1 on every plateau
    let p_kicked = s.p + k;
    // drift theta~ = theta + p~; only the offset from theta matters for the snap
    let jumps = p_kicked / TAU;
    let frac = jumps - jumps.floor();
    if (frac - 0.5).abs() <= EDGE_TOL * jumps.abs().max(1.0) {
        return Err(Error::SnapTie {
            theta: s.theta + p_kicked,
        });
    }
    let jumps = jumps.round() as i64;
    Ok(SolitonState::at_plateau(m0 + jumps, TAU * jumps as f64))
}

/// Iterate [`soliton_step`] `n` times, returning every state including the start.
pub fn soliton_trajectory(start: SolitonState, k: f64, n: usize) -> Result<Vec<SolitonState>> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(start);
    let mut s = start;
    for _ in 0..n {
        s = soliton_step(s, k)?;
        out.push(s);
    }
    Ok(out)
}

/// Plateau index `m` with `K` in `(2 m pi - pi, 2 m pi + pi)`, `m >= 1`.
pub fn plateau_of(k: f64) -> Result<i64> {
    if !(k > PI) {
        return Err(Error::OutOfDomain {
            k,
            reason: "quantized acceleration needs K > pi".into(),
        });
    }
    let x = k / PI;
    let nearest_odd = 2.0 * ((x - 1.0) / 2.0).round() + 1.0;
    if (x - nearest_odd).abs() <= EDGE_TOL * x {
        return Err(Error::OutOfDomain {
            k,
            reason: "K is an odd multiple of pi (interval boundary)".into(),
        });
    }
    Ok((k / TAU).round() as i64)
}

/// Quantized acceleration `D = 2 m pi`.
pub fn predicted_d(k: f64) -> Result<f64> {
    plateau_of(k).map(|m| TAU * m as f64)
}
