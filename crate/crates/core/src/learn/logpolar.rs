use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A complex number stored as `e^r (a + bi)` with `a² + b² = 1`.
///
/// Long products of such numbers only add their `r` parts, so they neither
/// underflow nor overflow where the Cartesian product would.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogPolarComplex {
    pub r: f64,
    pub a: f64,
    pub b: f64,
}

impl LogPolarComplex {
    pub const ONE: Self = Self {
        r: 0.0,
        a: 1.0,
        b: 0.0,
    };

    /// Projects `(a, b)` onto the unit circle; the zero direction maps to 1.
    pub fn normalized(r: f64, a: f64, b: f64) -> Self {
        let n = a.hypot(b);
        if n == 0.0 {
            Self { r, a: 1.0, b: 0.0 }
        } else {
            Self {
                r,
                a: a / n,
                b: b / n,
            }
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        let n = z.norm();
        Self::normalized(n.ln(), z.re, z.im)
    }

    pub fn to_complex(self) -> Complex64 {
        let m = self.r.exp();
        Complex64::new(m * self.a, m * self.b)
    }

    pub fn angle(self) -> f64 {
        self.b.atan2(self.a)
    }

    /// `|a² + b² − 1|`.
    pub fn unit_drift(self) -> f64 {
        (self.a * self.a + self.b * self.b - 1.0).abs()
    }
}

/// The product of two log-polar numbers, renormalized to the unit circle.
#[inline]
pub fn logpolar_mul(x: LogPolarComplex, y: LogPolarComplex) -> LogPolarComplex {
    let a = x.a * y.a - x.b * y.b;
    let b = x.a * y.b + x.b * y.a;
    let n2 = a * a + b * b;
    let excess = n2 - 1.0;
    // ln √n2 is excess/2 to within excess², far below rounding when |excess| < 1e-8.
    let log_norm = if excess.abs() < 1e-8 {
        0.5 * excess
    } else {
        0.5 * n2.ln()
    };
    let inv = 1.0 / n2.sqrt();
    LogPolarComplex {
        r: x.r + y.r + log_norm,
        a: a * inv,
        b: b * inv,
    }
}
