//! Generalized inverse Gaussian variates.
//!
//! Density `∝ x^{ν-1} exp{-(δ²/x + γ² x)/2}` on `x > 0`. Boundary cases use
//! the gamma and reciprocal-gamma reductions, `ν = -1/2` uses the
//! inverse-Gaussian transformation method, and everything else uses the
//! ratio-of-uniforms generators of Hörmann and Leydold (2014) on the
//! standardised two-parameter form.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::special::log_bessel_k_unchecked;

use super::gamma::standard_gamma_log;
use super::RngState;

/// Order `ν`, chi `δ` and tilt `γ` of a single GIG law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GigParams {
    order: f64,
    chi: f64,
    tilt: f64,
}

impl GigParams {
    pub fn new(order: f64, chi: f64, tilt: f64) -> Result<Self> {
        if !(order.is_finite() && chi.is_finite() && tilt.is_finite()) {
            return Err(domain("GigParams", "parameters must be finite"));
        }
        if chi < 0.0 || tilt < 0.0 {
            return Err(domain(
                "GigParams",
                format!("chi {chi} and tilt {tilt} must be nonnegative"),
            ));
        }
        if chi == 0.0 && tilt == 0.0 {
            return Err(domain("GigParams", "chi and tilt cannot both be zero"));
        }
        if tilt == 0.0 && order >= 0.0 {
            return Err(domain(
                "GigParams",
                format!("zero tilt requires negative order, got {order}"),
            ));
        }
        if chi == 0.0 && order <= 0.0 {
            return Err(domain(
                "GigParams",
                format!("zero chi requires positive order, got {order}"),
            ));
        }
        Ok(Self { order, chi, tilt })
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn tilt(&self) -> f64 {
        self.tilt
    }
}

/// Mean of the GIG law, `(δ/γ) K_{ν+1}(δγ) / K_ν(δγ)` with the gamma and
/// reciprocal-gamma limits. Infinite when the reciprocal-gamma mean does not exist.
pub fn gig_mean(params: &GigParams) -> f64 {
    let GigParams { order, chi, tilt } = *params;
    if tilt == 0.0 {
        // 1/X, X ~ Gamma(-ν, rate δ²/2)
        return if order < -1.0 {
            0.5 * chi * chi / (-order - 1.0)
        } else {
            f64::INFINITY
        };
    }
    if chi == 0.0 {
        return 2.0 * order / (tilt * tilt);
    }
    let omega = chi * tilt;
    chi / tilt
        * (log_bessel_k_unchecked(order + 1.0, omega) - log_bessel_k_unchecked(order, omega)).exp()
}

/// An exact draw from `GIG(ν, δ, γ)`.
pub fn gig_sample(params: &GigParams, rng: &mut RngState) -> f64 {
    let GigParams { order, chi, tilt } = *params;
    if tilt == 0.0 {
        return (2.0 * chi.ln() - std::f64::consts::LN_2 - standard_gamma_log(-order, rng)).exp();
    }
    if chi == 0.0 {
        return (standard_gamma_log(order, rng) + std::f64::consts::LN_2 - 2.0 * tilt.ln()).exp();
    }
    if order == -0.5 {
        return inverse_gaussian(chi / tilt, chi * chi, rng);
    }
    let lambda = order.abs();
    let omega = chi * tilt;
    let x = standard_gig(lambda, omega, rng);
    // X ~ GIG(|ν|, ω) standardised; the scale is δ/γ, and a negative order
    // is the reciprocal of the positive one with δ and γ swapped.
    let scale = chi / tilt;
    if order < 0.0 {
        scale / x
    } else {
        scale * x
    }
}

/// Michael–Schucany–Haas transformation with mean `mu` and shape `shape`.
fn inverse_gaussian(mu: f64, shape: f64, rng: &mut RngState) -> f64 {
    let n = rng.standard_normal();
    let y = n * n;
    let mu_y = mu * y;
    let x = mu + mu / (2.0 * shape) * (mu_y - (4.0 * shape * mu_y + mu_y * mu_y).sqrt());
    // guard the cancellation branch for very small draws
    let x = if x > 0.0 { x } else { mu * mu / (mu + mu_y) };
    if rng.uniform() <= mu / (mu + x) {
        x
    } else {
        mu * mu / x
    }
}

fn mode(lambda: f64, omega: f64) -> f64 {
    if lambda >= 1.0 {
        (((lambda - 1.0) * (lambda - 1.0) + omega * omega).sqrt() + (lambda - 1.0)) / omega
    } else {
        omega / (((1.0 - lambda) * (1.0 - lambda) + omega * omega).sqrt() + (1.0 - lambda))
    }
}

/// Density `∝ x^{λ-1} exp{-ω(x + 1/x)/2}`, `λ >= 0`, `ω > 0`.
fn standard_gig(lambda: f64, omega: f64, rng: &mut RngState) -> f64 {
    if lambda > 2.0 || omega > 3.0 {
        rou_shifted(lambda, omega, rng)
    } else if lambda >= 1.0 - 2.25 * omega * omega || omega > 0.2 {
        rou_plain(lambda, omega, rng)
    } else {
        concave_hat(lambda, omega, rng)
    }
}

fn rou_plain(lambda: f64, omega: f64, rng: &mut RngState) -> f64 {
    let t = 0.5 * (lambda - 1.0);
    let s = 0.25 * omega;
    let xm = mode(lambda, omega);
    let nc = t * xm.ln() - s * (xm + 1.0 / xm);
    let ym = ((lambda + 1.0) + ((lambda + 1.0) * (lambda + 1.0) + omega * omega).sqrt()) / omega;
    let um = (0.5 * (lambda + 1.0) * ym.ln() - s * (ym + 1.0 / ym) - nc).exp();
    loop {
        let u = um * rng.uniform();
        let v = rng.uniform();
        let x = u / v;
        if v.ln() <= t * x.ln() - s * (x + 1.0 / x) - nc {
            return x;
        }
    }
}

fn rou_shifted(lambda: f64, omega: f64, rng: &mut RngState) -> f64 {
    let t = 0.5 * (lambda - 1.0);
    let s = 0.25 * omega;
    let xm = mode(lambda, omega);
    let nc = t * xm.ln() - s * (xm + 1.0 / xm);
    // extrema of (x - xm) sqrt(f(x)) are roots of y³ + a y² + b y + c = 0
    let a = -(2.0 * (lambda + 1.0) / omega + xm);
    let b = 2.0 * (lambda - 1.0) * xm / omega - 1.0;
    let c = xm;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let fi = (-q / (2.0 * (-(p * p * p) / 27.0).sqrt()))
        .clamp(-1.0, 1.0)
        .acos();
    let fak = 2.0 * (-p / 3.0).sqrt();
    let y1 = fak * (fi / 3.0).cos() - a / 3.0;
    let y2 = fak * (fi / 3.0 + 4.0 / 3.0 * PI).cos() - a / 3.0;
    let uplus = (y1 - xm) * (t * y1.ln() - s * (y1 + 1.0 / y1) - nc).exp();
    let uminus = (y2 - xm) * (t * y2.ln() - s * (y2 + 1.0 / y2) - nc).exp();
    loop {
        let u = uminus + rng.uniform() * (uplus - uminus);
        let v = rng.uniform();
        let x = u / v + xm;
        if x > 0.0 && v.ln() <= t * x.ln() - s * (x + 1.0 / x) - nc {
            return x;
        }
    }
}

/// Three-piece hat for the non-log-concave region `0 <= λ < 1`, small `ω`.
fn concave_hat(lambda: f64, omega: f64, rng: &mut RngState) -> f64 {
    let xm = mode(lambda, omega);
    let x0 = omega / (1.0 - lambda);
    let k0 = ((lambda - 1.0) * xm.ln() - 0.5 * omega * (xm + 1.0 / xm)).exp();
    let a0 = k0 * x0;
    let (k1, a1, k2, a2);
    if x0 >= 2.0 / omega {
        k1 = 0.0;
        a1 = 0.0;
        k2 = x0.powf(lambda - 1.0);
        a2 = k2 * 2.0 * (-omega * x0 / 2.0).exp() / omega;
    } else {
        k1 = (-omega).exp();
        a1 = if lambda == 0.0 {
            k1 * (2.0 / (omega * omega)).ln()
        } else {
            k1 / lambda * ((2.0 / omega).powf(lambda) - x0.powf(lambda))
        };
        k2 = (2.0 / omega).powf(lambda - 1.0);
        a2 = k2 * 2.0 * (-1.0f64).exp() / omega;
    }
    let total = a0 + a1 + a2;
    loop {
        let mut v = total * rng.uniform();
        let (x, hx);
        if v <= a0 {
            x = x0 * v / a0;
            hx = k0;
        } else {
            v -= a0;
            if v <= a1 {
                if lambda == 0.0 {
                    x = omega * (omega.exp() * v).exp();
                    hx = k1 / x;
                } else {
                    x = (x0.powf(lambda) + lambda / k1 * v).powf(1.0 / lambda);
                    hx = k1 * x.powf(lambda - 1.0);
                }
            } else {
                v -= a1;
                let start = x0.max(2.0 / omega);
                x = -2.0 / omega * ((-omega / 2.0 * start).exp() - omega / (2.0 * k2) * v).ln();
                hx = k2 * (-omega / 2.0 * x).exp();
            }
        }
        let u = rng.uniform() * hx;
        if u.ln() <= (lambda - 1.0) * x.ln() - omega / 2.0 * (x + 1.0 / x) {
            return x;
        }
    }
}
