//! Comparison envelope for `X' <= C X log(e + V/X)`.
//!
//! `rho' = C rho log(e + V(t)/rho)` is integrated with an adaptive
//! Dormand-Prince 5(4) pair. The modulus `r log(e + V/r)` extends continuously
//! by zero at `r = 0`, so `rho(0) = 0` stays identically zero.

use std::f64::consts::E;

use crate::error::{Error, Result};

/// `V(t)`: a constant or samples interpolated linearly (held constant past the ends).
#[derive(Clone, Debug, PartialEq)]
pub enum Forcing {
    Constant(f64),
    Sampled { times: Vec<f64>, values: Vec<f64> },
}

impl Forcing {
    fn validate(&self) -> Result<()> {
        match self {
            Forcing::Constant(v) if !(v.is_finite() && *v >= 0.0) => {
                Err(Error::Precondition(format!("V must be finite and nonnegative, got {v}")))
            }
            Forcing::Sampled { times, values } => {
                if times.is_empty() || times.len() != values.len() {
                    return Err(Error::Precondition("sampled V needs matching, nonempty samples".into()));
                }
                if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(Error::Precondition("sampled V must be finite and nonnegative".into()));
                }
                if times.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::Precondition("sampled V needs increasing times".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn at(&self, t: f64) -> f64 {
        match self {
            Forcing::Constant(v) => *v,
            Forcing::Sampled { times, values } => {
                let k = times.partition_point(|&s| s <= t);
                if k == 0 {
                    values[0]
                } else if k == times.len() {
                    values[k - 1]
                } else {
                    let (t0, t1) = (times[k - 1], times[k]);
                    let w = (t - t0) / (t1 - t0);
                    values[k - 1] * (1.0 - w) + values[k] * w
                }
            }
        }
    }

    fn knots(&self) -> &[f64] {
        match self {
            Forcing::Constant(_) => &[],
            Forcing::Sampled { times, .. } => times,
        }
    }
}

/// `r log(e + v/r)`, zero at `r = 0`.
pub fn modulus(r: f64, v: f64) -> f64 {
    if r <= 0.0 {
        0.0
    } else {
        r * (E + v / r).ln()
    }
}

const RTOL: f64 = 1e-12;

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate from `t0` to `t1` over a stretch where the right-hand side is smooth.
fn dopri(f: &dyn Fn(f64, f64) -> f64, t0: f64, t1: f64, y0: f64) -> f64 {
    let span = t1 - t0;
    if span <= 0.0 {
        return y0;
    }
    let mut t = t0;
    let mut y = y0;
    let mut h = span.min(1e-3 * span.max(1e-12)).max(span * 1e-6);
    let mut k1 = f(t, y);
    while t < t1 {
        if t + h > t1 {
            h = t1 - t;
        }
        let mut k = [0.0; 7];
        k[0] = k1;
        for s in 1..7 {
            let incr: f64 = (0..s).map(|m| A[s][m] * k[m]).sum();
            k[s] = f(t + C[s] * h, y + h * incr);
        }
        let y5 = y + h * (0..7).map(|s| B5[s] * k[s]).sum::<f64>();
        let y4 = y + h * (0..7).map(|s| B4[s] * k[s]).sum::<f64>();
        let scale = RTOL * y.abs().max(y5.abs()) + f64::MIN_POSITIVE;
        let err = (y5 - y4).abs() / scale;
        if err <= 1.0 {
            t += h;
            y = y5;
            k1 = k[6];
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < 1e-14 * span {
            h = 1e-14 * span;
        }
    }
    y
}

/// Envelope `rho(t_i)` at `times` (increasing, starting at the initial time).
pub fn osgood_envelope(x0: f64, c: f64, v: &Forcing, times: &[f64]) -> Result<Vec<f64>> {
    if !(x0.is_finite() && x0 >= 0.0) {
        return Err(Error::Precondition(format!("x0 must be nonnegative, got {x0}")));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::Precondition(format!("C must be positive, got {c}")));
    }
    v.validate()?;
    if times.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::Precondition("envelope times must be nondecreasing".into()));
    }
    let Some(&start) = times.first() else {
        return Ok(Vec::new());
    };
    if x0 == 0.0 {
        return Ok(vec![0.0; times.len()]);
    }
    let rhs = |t: f64, r: f64| c * modulus(r, v.at(t));
    let mut out = Vec::with_capacity(times.len());
    let mut t = start;
    let mut y = x0;
    out.push(y);
    for &target in &times[1..] {
        let mut stops: Vec<f64> = v.knots().iter().copied().filter(|&k| k > t && k < target).collect();
        stops.push(target);
        for s in stops {
            y = dopri(&rhs, t, s, y);
            t = s;
        }
        out.push(y);
    }
    Ok(out)
}
