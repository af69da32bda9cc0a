//! Bubble coefficient for the rectangular master element `[0, l] x [0, h]` and
//! the model problem `u_y = u_xx`.
//!
//! The trial is the bilinear interpolant of the corner values plus
//! `c x y (l - x)(h - y)`; `c` minimises `int int (u_xx - u_y)^2`.

use crate::error::{Error, Result};
use crate::quadrature::gauss_rule;

/// Corner values `u(0,0)`, `u(0,h)`, `u(l,0)`, `u(l,h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corners {
    pub u00: f64,
    pub u0h: f64,
    pub ul0: f64,
    pub ulh: f64,
}

impl Corners {
    pub fn new(u00: f64, u0h: f64, ul0: f64, ulh: f64) -> Self {
        Corners { u00, u0h, ul0, ulh }
    }
}

fn check_sides(l: f64, h: f64) -> Result<()> {
    if l > 0.0 && h > 0.0 && l.is_finite() && h.is_finite() {
        Ok(())
    } else {
        Err(Error::Argument("rectangle sides must be positive and finite"))
    }
}

/// `c = 15 (u00 - u0h + ul0 - ulh) / (h (l^4 + 12 h^2))`
pub fn bubble_2d_coefficient(l: f64, h: f64, corners: Corners) -> Result<f64> {
    check_sides(l, h)?;
    let Corners { u00, u0h, ul0, ulh } = corners;
    Ok(15.0 * (u00 - u0h + ul0 - ulh) / (h * (l * l * l * l + 12.0 * h * h)))
}

/// `R(x, y) = u_xx - u_y` for the enriched trial.
pub fn residual_2d(l: f64, h: f64, corners: Corners, c: f64, x: f64, y: f64) -> f64 {
    let Corners { u00, u0h, ul0, ulh } = corners;
    let u_xx = -2.0 * c * y * (h - y);
    let u_y = ((l - x) / l * (u0h - u00) + x / l * (ulh - ul0)) / h
        + c * x * (l - x) * (h - 2.0 * y);
    u_xx - u_y
}

/// `int_0^l int_0^h R^2 dy dx` by a 3x3 tensor Gauss rule, exact because `R^2`
/// has degree 4 in each variable.
pub fn residual_functional_2d(l: f64, h: f64, corners: Corners, c: f64) -> Result<f64> {
    check_sides(l, h)?;
    let rule = gauss_rule(3)?;
    let mut sum = 0.0;
    for (x, wx) in rule.mapped(0.0, l) {
        for (y, wy) in rule.mapped(0.0, h) {
            let r = residual_2d(l, h, corners, c, x, y);
            sum += wx * wy * r * r;
        }
    }
    Ok(sum)
}
