use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

fn norm_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// Discounted Black price of a call (`call = true`) or put.
pub fn black(forward: f64, strike: f64, expiry: f64, vol: f64, discount: f64, call: bool) -> f64 {
    let sd = vol * expiry.max(0.0).sqrt();
    let sign = if call { 1.0 } else { -1.0 };
    if sd <= 0.0 || strike <= 0.0 {
        return discount * (sign * (forward - strike)).max(0.0);
    }
    let d1 = ((forward / strike).ln() + 0.5 * sd * sd) / sd;
    let d2 = d1 - sd;
    discount * sign * (forward * norm_cdf(sign * d1) - strike * norm_cdf(sign * d2))
}

/// Discounted Black vega per unit of volatility.
pub fn black_vega(forward: f64, strike: f64, expiry: f64, vol: f64, discount: f64) -> f64 {
    let sd = vol * expiry.max(0.0).sqrt();
    if sd <= 0.0 || strike <= 0.0 || forward <= 0.0 {
        return 0.0;
    }
    let d1 = ((forward / strike).ln() + 0.5 * sd * sd) / sd;
    let pdf = (-0.5 * d1 * d1).exp() / (2.0 * std::f64::consts::PI).sqrt();
    discount * forward * pdf * expiry.sqrt()
}

/// Black price on `1 + F` against `1 + K` (shift 1 by default).
#[allow(clippy::too_many_arguments)]
pub fn shifted_black(
    forward: f64,
    strike: f64,
    expiry: f64,
    vol: f64,
    discount: f64,
    shift: f64,
    call: bool,
) -> f64 {
    black(forward + shift, strike + shift, expiry, vol, discount, call)
}

/// Implied Black volatility by bisection to `1e-12`.
pub fn implied_vol_black(
    forward: f64,
    strike: f64,
    expiry: f64,
    price: f64,
    discount: f64,
    call: bool,
) -> Result<f64> {
    if !(forward > 0.0 && strike > 0.0 && expiry > 0.0 && discount > 0.0) {
        return Err(Error::NoSolution(format!(
            "forward {forward}, strike {strike}, expiry {expiry} and discount {discount} must be positive"
        )));
    }
    let intrinsic = black(forward, strike, expiry, 0.0, discount, call);
    let cap = discount * if call { forward } else { strike };
    let scale = discount * forward.max(strike);
    if !price.is_finite() || price < intrinsic - 1e-10 * scale || price >= cap {
        return Err(Error::NoSolution(format!(
            "price {price} outside [{intrinsic}, {cap})"
        )));
    }
    if price <= intrinsic {
        return Ok(0.0);
    }
    let f = |v: f64| black(forward, strike, expiry, v, discount, call);
    let mut hi = 1.0;
    while f(hi) < price {
        hi *= 2.0;
        if hi > 1e4 {
            return Err(Error::NoSolution(format!("price {price} needs vol above 1e4")));
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < price {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Implied shifted-Black volatility; `forward` and `strike` are rates.
#[allow(clippy::too_many_arguments)]
pub fn implied_vol_shifted_black(
    forward: f64,
    strike: f64,
    expiry: f64,
    price: f64,
    discount: f64,
    shift: f64,
    call: bool,
) -> Result<f64> {
    implied_vol_black(forward + shift, strike + shift, expiry, price, discount, call)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for &(f, k, t, v) in &[(0.03, 0.02, 2.0, 0.2), (0.03, 0.05, 7.5, 0.45), (1.02, 0.99, 4.0, 0.01)] {
            for call in [true, false] {
                let p = black(f, k, t, v, 0.9, call);
                let iv = implied_vol_black(f, k, t, p, 0.9, call).unwrap();
                assert!((iv - v).abs() < 1e-10, "{iv} vs {v}");
            }
        }
    }

    #[test]
    fn intrinsic_gives_zero() {
        let p = 0.8 * (0.04 - 0.02);
        assert_eq!(implied_vol_black(0.04, 0.02, 1.0, p, 0.8, true).unwrap(), 0.0);
    }

    #[test]
    fn outside_band_has_no_solution() {
        assert!(implied_vol_black(0.04, 0.02, 1.0, 0.001, 0.8, true).is_err());
        assert!(implied_vol_black(0.04, 0.02, 1.0, 0.04, 0.8, true).is_err());
    }

    #[test]
    fn shift_admits_negative_strikes() {
        let p = shifted_black(0.02, -0.01, 3.0, 0.015, 0.9, 1.0, false);
        let iv = implied_vol_shifted_black(0.02, -0.01, 3.0, p, 0.9, 1.0, false).unwrap();
        assert!((iv - 0.015).abs() < 1e-10);
    }

    #[test]
    fn vega_matches_difference() {
        let h = 1e-6;
        let fd = (black(0.02, 0.025, 3.0, 0.3 + h, 0.9, true) - black(0.02, 0.025, 3.0, 0.3 - h, 0.9, true)) / (2.0 * h);
        assert!((black_vega(0.02, 0.025, 3.0, 0.3, 0.9) - fd).abs() < 1e-9);
    }

    #[test]
    fn parity() {
        let (f, k, t, v, d) = (0.031, 0.027, 3.0, 0.3, 0.93);
        let c = black(f, k, t, v, d, true);
        let p = black(f, k, t, v, d, false);
        assert!((c - p - d * (f - k)).abs() < 1e-15);
    }
}
