use alloc::vec::Vec;

use super::vector::StateVector;
use super::C64;
use crate::error::{invalid, Error, Result};

fn check_finite(v: &[C64]) -> Result<()> {
    if v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite("ODE derivative".into()))
    }
}

fn rk4_step<F>(f: &mut F, t: f64, h: f64, y: &[C64]) -> Result<Vec<C64>>
where
    F: FnMut(f64, &[C64]) -> Vec<C64>,
{
    let n = y.len();
    let eval = |f: &mut F, t: f64, y: &[C64]| -> Result<Vec<C64>> {
        let d = f(t, y);
        if d.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: d.len() });
        }
        check_finite(&d)?;
        Ok(d)
    };
    let shifted = |k: &[C64], c: f64| -> Vec<C64> { y.iter().zip(k).map(|(a, b)| a + b * c).collect() };
    let k1 = eval(f, t, y)?;
    let k2 = eval(f, t + 0.5 * h, &shifted(&k1, 0.5 * h))?;
    let k3 = eval(f, t + 0.5 * h, &shifted(&k2, 0.5 * h))?;
    let k4 = eval(f, t + h, &shifted(&k3, h))?;
    Ok((0..n).map(|i| y[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0)).collect())
}

/// Classical fourth-order Runge–Kutta integration of y' = f(t, y) with
/// `steps` equal steps from `t0` to `t1`.
///
/// Returns the `steps + 1` states y(t0), …, y(t1).
pub fn ode_rk4<F>(mut f: F, y0: &StateVector, t0: f64, t1: f64, steps: usize) -> Result<Vec<StateVector>>
where
    F: FnMut(f64, &[C64]) -> Vec<C64>,
{
    if steps == 0 {
        return Err(invalid("RK4 needs at least one step"));
    }
    if !(t0.is_finite() && t1.is_finite()) {
        return Err(Error::NonFinite("integration bounds".into()));
    }
    let h = (t1 - t0) / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(y0.clone());
    let mut y = y0.amplitudes.clone();
    for k in 0..steps {
        y = rk4_step(&mut f, t0 + k as f64 * h, h, &y)?;
        out.push(StateVector::new(y.clone()));
    }
    Ok(out)
}

/// Like [`ode_rk4`] but returns only the final state.
pub fn ode_rk4_endpoint<F>(mut f: F, y0: &StateVector, t0: f64, t1: f64, steps: usize) -> Result<StateVector>
where
    F: FnMut(f64, &[C64]) -> Vec<C64>,
{
    if steps == 0 {
        return Err(invalid("RK4 needs at least one step"));
    }
    let h = (t1 - t0) / steps as f64;
    let mut y = y0.amplitudes.clone();
    for k in 0..steps {
        y = rk4_step(&mut f, t0 + k as f64 * h, h, &y)?;
    }
    Ok(StateVector::new(y))
}
