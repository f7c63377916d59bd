use std::cell::RefCell;

use crate::error::{invalid, Error, Result};

const INITIAL_PANELS: usize = 16;
const MAX_DEPTH: u32 = 48;

/// `∫_a^b f` by adaptive trapezoid refinement to relative tolerance `rel_tol`.
///
/// A panel is accepted once halving it changes its trapezoid value by less
/// than its share of the error budget. Panels at the depth limit (jumps of
/// step-function integrands) are accepted when their discrepancy is a
/// negligible fraction of the whole budget.
pub fn adaptive_trapezoid(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::QuadratureFailure(format!("non-finite limits [{a}, {b}]")));
    }
    if b <= a {
        return Ok(0.0);
    }
    let eval = |x: f64| {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::QuadratureFailure(format!("integrand is {y} at {x}")))
        }
    };
    let h = (b - a) / INITIAL_PANELS as f64;
    let xs: Vec<f64> = (0..=INITIAL_PANELS).map(|i| a + i as f64 * h).collect();
    let ys = xs.iter().map(|&x| eval(x)).collect::<Result<Vec<f64>>>()?;
    let coarse: f64 = ys.windows(2).map(|w| 0.5 * h * (w[0] + w[1])).sum();
    let scale = ys.iter().map(|y| y.abs()).fold(0.0, f64::max) * (b - a);
    let budget = rel_tol * coarse.abs().max(1e-12 * scale).max(f64::MIN_POSITIVE);

    let mut total = 0.0;
    // (left, right, f(left), f(right), tolerance, depth)
    let mut stack: Vec<(f64, f64, f64, f64, f64, u32)> = (0..INITIAL_PANELS)
        .rev()
        .map(|i| (xs[i], xs[i + 1], ys[i], ys[i + 1], budget / INITIAL_PANELS as f64, 0))
        .collect();
    while let Some((l, r, fl, fr, tol, depth)) = stack.pop() {
        let mid = 0.5 * (l + r);
        let fm = eval(mid)?;
        let one = 0.5 * (r - l) * (fl + fr);
        let two = 0.25 * (r - l) * (fl + 2.0 * fm + fr);
        if (two - one).abs() <= 3.0 * tol {
            total += two;
            continue;
        }
        if depth >= MAX_DEPTH {
            if (two - one).abs() <= 1e-6 * budget {
                total += two;
                continue;
            }
            return Err(Error::QuadratureFailure(format!(
                "no convergence on [{l:e}, {r:e}] after {MAX_DEPTH} halvings"
            )));
        }
        let child = tol / 2.0;
        stack.push((mid, r, fm, fr, child, depth + 1));
        stack.push((l, mid, fl, fm, child, depth + 1));
    }
    Ok(total)
}

const REL_TOL: f64 = 1e-6;

/// `C_p ε^{−5} (∫_{ε^{1/p}/10}^{R} u^{p/2−1} (∫_u^R H(c_p ε t)/t dt)^{1/2} du)²`
/// before rounding. Both integrals run in logarithmic variables.
pub fn required_m_integral_value(
    p: f64,
    epsilon: f64,
    r: f64,
    h: &dyn Fn(f64) -> f64,
    c_p: f64,
    big_c_p: f64,
) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(invalid(format!("exponent p = {p} must be finite and at least 1")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid(format!("ε = {epsilon} must lie in (0, 1)")));
    }
    if !(r > 0.0 && r.is_finite() && c_p > 0.0 && big_c_p > 0.0) {
        return Err(invalid("R, c_p and C_p must be positive"));
    }
    let tail = h(2.0 * r);
    if tail != 0.0 {
        return Err(invalid(format!("entropy H(2R) = {tail} must vanish")));
    }
    let lo = 0.1 * epsilon.powf(1.0 / p);
    let ln_r = r.ln();
    let inner = |ln_u: f64| adaptive_trapezoid(&|s: f64| h(c_p * epsilon * s.exp()), ln_u, ln_r, REL_TOL * 0.1);
    // The integrand cannot return errors, so the first one is parked here.
    let failure = RefCell::new(None);
    let outer = adaptive_trapezoid(
        &|w: f64| match inner(w) {
            Ok(i) => (w * p / 2.0).exp() * i.max(0.0).sqrt(),
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        lo.ln(),
        ln_r,
        REL_TOL,
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(big_c_p * epsilon.powi(-5) * outer * outer)
}

/// Integer budget: the ceiling of [`required_m_integral_value`].
pub fn required_m_integral(
    p: f64,
    epsilon: f64,
    r: f64,
    h: &dyn Fn(f64) -> f64,
    c_p: f64,
    big_c_p: f64,
) -> Result<u64> {
    let value = required_m_integral_value(p, epsilon, r, h, c_p, big_c_p)?;
    if value >= u64::MAX as f64 {
        return Err(Error::QuadratureFailure(format!("budget {value:e} overflows u64")));
    }
    Ok(value.ceil() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_smooth_and_jump() {
        let v = adaptive_trapezoid(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-8).unwrap();
        assert!((v - 2.0).abs() < 1e-7);
        let step = adaptive_trapezoid(&|x: f64| if x < 0.3 { 1.0 } else { 0.0 }, 0.0, 1.0, 1e-6).unwrap();
        assert!((step - 0.3).abs() < 1e-5);
        assert_eq!(adaptive_trapezoid(&|x| x, 1.0, 1.0, 1e-6).unwrap(), 0.0);
        assert!(adaptive_trapezoid(&|_| f64::NAN, 0.0, 1.0, 1e-6).is_err());
    }

    #[test]
    fn zero_entropy_needs_no_points() {
        assert_eq!(required_m_integral(1.0, 0.5, 2.0, &|_| 0.0, 1.0, 1.0).unwrap(), 0);
    }

    #[test]
    fn constant_entropy_closed_form() {
        // Inner integral c·ln(R/u); with p = 2 the outer one is
        // √c ∫_{u0}^{R} √(ln(R/u)) du = √c R Γ(3/2, ln(R/u0)) via u = R e^{−s}.
        let (c, eps, r) = (3.0, 0.25, 2.0);
        let h = move |t: f64| if t < 2.0 * r { c } else { 0.0 };
        let got = required_m_integral_value(2.0, eps, r, &h, 1.0, 1.0).unwrap();
        let u0: f64 = 0.1 * eps.sqrt();
        let big_s = (r / u0).ln();
        // ∫_0^S √s e^{−s} ds by a fine midpoint rule.
        let n = 2_000_000;
        let ds = big_s / n as f64;
        let g: f64 = (0..n)
            .map(|i| {
                let s = (i as f64 + 0.5) * ds;
                s.sqrt() * (-s).exp()
            })
            .sum::<f64>()
            * ds;
        let expect = eps.powi(-5) * c * (r * g).powi(2);
        assert!((got / expect - 1.0).abs() < 1e-5, "{got} vs {expect}");
    }

    #[test]
    fn rejects_nonvanishing_tail() {
        assert!(required_m_integral(1.0, 0.5, 2.0, &|_| 1.0, 1.0, 1.0).is_err());
        assert!(required_m_integral(1.0, 1.5, 2.0, &|_| 0.0, 1.0, 1.0).is_err());
    }
}
