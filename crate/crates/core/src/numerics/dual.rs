//! Second-order forward-mode dual numbers in two real variables.
//!
//! A [`Dual2`] carries the value of a scalar field `f(x, y)` together with its
//! gradient and Hessian. Arithmetic propagates all six entries through the
//! chain rule exactly, so Laplacians of compositions such as `log(ΔQ)` carry no
//! discretization error.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Dual2 {
    pub value: f64,
    pub dx: f64,
    pub dy: f64,
    pub dxx: f64,
    pub dxy: f64,
    pub dyy: f64,
}

impl Dual2 {
    pub const fn constant(value: f64) -> Self {
        Dual2 { value, dx: 0.0, dy: 0.0, dxx: 0.0, dxy: 0.0, dyy: 0.0 }
    }

    /// The coordinate function `x` seeded at `x0`.
    pub const fn var_x(x0: f64) -> Self {
        Dual2 { value: x0, dx: 1.0, dy: 0.0, dxx: 0.0, dxy: 0.0, dyy: 0.0 }
    }

    /// The coordinate function `y` seeded at `y0`.
    pub const fn var_y(y0: f64) -> Self {
        Dual2 { value: y0, dx: 0.0, dy: 1.0, dxx: 0.0, dxy: 0.0, dyy: 0.0 }
    }

    pub fn laplacian(&self) -> f64 {
        self.dxx + self.dyy
    }

    pub fn gradient(&self) -> (f64, f64) {
        (self.dx, self.dy)
    }

    /// Wirtinger derivative `∂f = (f_x − i f_y) / 2`.
    pub fn wirtinger(&self) -> Complex64 {
        Complex64::new(0.5 * self.dx, -0.5 * self.dy)
    }

    /// Conjugate Wirtinger derivative `∂̄f = (f_x + i f_y) / 2`.
    pub fn wirtinger_bar(&self) -> Complex64 {
        Complex64::new(0.5 * self.dx, 0.5 * self.dy)
    }

    /// Radial derivative at the point `p` (undefined at the origin).
    pub fn radial_derivative(&self, p: Complex64) -> f64 {
        let r = p.norm();
        (p.re * self.dx + p.im * self.dy) / r
    }

    /// Applies a univariate function given its value and first two derivatives
    /// at `self.value`.
    pub fn chain(&self, f: f64, df: f64, d2f: f64) -> Self {
        Dual2 {
            value: f,
            dx: df * self.dx,
            dy: df * self.dy,
            dxx: d2f * self.dx * self.dx + df * self.dxx,
            dxy: d2f * self.dx * self.dy + df * self.dxy,
            dyy: d2f * self.dy * self.dy + df * self.dyy,
        }
    }

    pub fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn ln(self) -> Self {
        let v = self.value;
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
    }

    pub fn sqrt(self) -> Self {
        let s = self.value.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.value))
    }

    pub fn powi(self, k: i32) -> Self {
        match k {
            0 => Dual2::constant(1.0),
            1 => self,
            _ => {
                let v = self.value;
                let kf = k as f64;
                self.chain(v.powi(k), kf * v.powi(k - 1), kf * (kf - 1.0) * v.powi(k - 2))
            }
        }
    }

    pub fn scale(self, c: f64) -> Self {
        Dual2 {
            value: c * self.value,
            dx: c * self.dx,
            dy: c * self.dy,
            dxx: c * self.dxx,
            dxy: c * self.dxy,
            dyy: c * self.dyy,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.dx.is_finite()
            && self.dy.is_finite()
            && self.dxx.is_finite()
            && self.dxy.is_finite()
            && self.dyy.is_finite()
    }
}

impl Add for Dual2 {
    type Output = Dual2;
    fn add(self, o: Dual2) -> Dual2 {
        Dual2 {
            value: self.value + o.value,
            dx: self.dx + o.dx,
            dy: self.dy + o.dy,
            dxx: self.dxx + o.dxx,
            dxy: self.dxy + o.dxy,
            dyy: self.dyy + o.dyy,
        }
    }
}

impl Sub for Dual2 {
    type Output = Dual2;
    fn sub(self, o: Dual2) -> Dual2 {
        self + (-o)
    }
}

impl Neg for Dual2 {
    type Output = Dual2;
    fn neg(self) -> Dual2 {
        self.scale(-1.0)
    }
}

impl Mul for Dual2 {
    type Output = Dual2;
    fn mul(self, o: Dual2) -> Dual2 {
        Dual2 {
            value: self.value * o.value,
            dx: self.dx * o.value + self.value * o.dx,
            dy: self.dy * o.value + self.value * o.dy,
            dxx: self.dxx * o.value + 2.0 * self.dx * o.dx + self.value * o.dxx,
            dxy: self.dxy * o.value + self.dx * o.dy + self.dy * o.dx + self.value * o.dxy,
            dyy: self.dyy * o.value + 2.0 * self.dy * o.dy + self.value * o.dyy,
        }
    }
}

impl Div for Dual2 {
    type Output = Dual2;
    fn div(self, o: Dual2) -> Dual2 {
        let v = o.value;
        self * o.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }
}

impl Add<f64> for Dual2 {
    type Output = Dual2;
    fn add(mut self, c: f64) -> Dual2 {
        self.value += c;
        self
    }
}

impl Mul<f64> for Dual2 {
    type Output = Dual2;
    fn mul(self, c: f64) -> Dual2 {
        self.scale(c)
    }
}

/// A real scalar field on the plane with exact first and second derivatives.
pub trait ScalarField: Sync {
    fn jet(&self, z: Complex64) -> Dual2;

    fn value(&self, z: Complex64) -> f64 {
        self.jet(z).value
    }
}

impl<F: ScalarField + ?Sized> ScalarField for &F {
    fn jet(&self, z: Complex64) -> Dual2 {
        (**self).jet(z)
    }
    fn value(&self, z: Complex64) -> f64 {
        (**self).value(z)
    }
}

/// Seeds the coordinate jets at `z`.
pub fn coordinates(z: Complex64) -> (Dual2, Dual2) {
    (Dual2::var_x(z.re), Dual2::var_y(z.im))
}
