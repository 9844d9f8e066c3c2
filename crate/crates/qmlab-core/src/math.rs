// Float math for a no_std build. Glob-imported by the numeric modules so the
// formulas read like ordinary math; core::f64 lacks these as methods.
#![allow(unused_imports)]

pub(crate) use core::f64::consts::{FRAC_1_SQRT_2, LN_2, PI};
pub(crate) use libm::{
    atan2, ceil, cos, cosh, exp, floor, log, log10, log2, pow, round, sin, sinh, sqrt, tan, tanh,
};

