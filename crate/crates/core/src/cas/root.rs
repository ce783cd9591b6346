use super::CasError;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const MAX_WIDENINGS: u32 = 8;
const MAX_ITERATIONS: u32 = 200;

fn eval_at(f: &mut impl FnMut(f64) -> f64, x: f64) -> Result<f64, CasError> {
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CasError::ResidualUndefined(x))
    }
}

/// Bracketed bisection. Non-finite residual values are reported as
/// `ResidualUndefined`.
pub fn invert_numeric(mut residual: impl FnMut(f64) -> f64, bracket: (f64, f64), tol: f64) -> Result<f64, CasError> {
    let (mut lo, mut hi) = if bracket.0 <= bracket.1 { bracket } else { (bracket.1, bracket.0) };
    let mut f_lo = eval_at(&mut residual, lo)?;
    let f_hi = eval_at(&mut residual, hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(CasError::NoSignChange { lo, hi });
    }
    let mut best = if f_lo.abs() <= f_hi.abs() { (lo, f_lo.abs()) } else { (hi, f_hi.abs()) };
    for _ in 0..MAX_ITERATIONS {
        let mid = lo + (hi - lo) / 2.0;
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = eval_at(&mut residual, mid)?;
        if f_mid.abs() < best.1 {
            best = (mid, f_mid.abs());
        }
        if f_mid.abs() <= tol {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        if hi - lo <= tol && best.1 <= tol {
            break;
        }
    }
    Ok(best.0)
}

/// Searches outward from `center` for the nearest root: scans `[c, c+w]`
/// and `[c-w, c]` for the first sign change, doubling `w` up to
/// [`MAX_WIDENINGS`] times, never leaving `limits`.
pub fn invert_widening(
    mut residual: impl FnMut(f64) -> f64,
    center: f64,
    width: f64,
    limits: (f64, f64),
    tol: f64,
) -> Result<f64, CasError> {
    let clamp = |v: f64| v.clamp(limits.0, limits.1);
    let center = clamp(center);
    let mut w = width.abs().max(f64::EPSILON);
    for _ in 0..=MAX_WIDENINGS {
        let found = [clamp(center + w), clamp(center - w)]
            .into_iter()
            .filter_map(|end| first_root(&mut residual, center, end, tol))
            .min_by(|a, b| (a - center).abs().total_cmp(&(b - center).abs()));
        if let Some(r) = found {
            return Ok(r);
        }
        w *= 2.0;
    }
    Err(CasError::DragUnsolvable)
}

/// Steps per scanned bracket.
const SCAN_STEPS: u32 = 64;

/// The root closest to `from` on the segment towards `to`, located by
/// stepping from `from` and bisecting the first sign change whose midpoint
/// is a true root (sign changes across poles are skipped).
fn first_root(residual: &mut impl FnMut(f64) -> f64, from: f64, to: f64, tol: f64) -> Option<f64> {
    if from == to {
        return None;
    }
    let mut prev = (from, residual(from));
    if prev.1 == 0.0 {
        return Some(from);
    }
    for i in 1..=SCAN_STEPS {
        let x = if i == SCAN_STEPS { to } else { from + (to - from) * f64::from(i) / f64::from(SCAN_STEPS) };
        let fx = residual(x);
        if prev.1.is_finite() && fx.is_finite() && (fx == 0.0 || prev.1.signum() != fx.signum()) {
            if let Ok(r) = invert_numeric(&mut *residual, (prev.0, x), tol) {
                if residual(r).abs() <= 2.0 * tol || (x - prev.0).abs() <= tol {
                    return Some(r);
                }
            }
        }
        prev = (x, fx);
    }
    None
}
