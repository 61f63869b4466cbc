//! The trapezoidal flat-top kernel family and the Gaussian comparator.
//!
//! The kernel is defined through its Fourier transform `kappa`: a trapezoid
//! equal to 1 on `[-1, 1]`, falling linearly to 0 at `|t| = 1 + 1/c`. Because
//! `kappa` is identically 1 near the origin, every polynomial moment of the
//! kernel beyond the zeroth vanishes, which is what makes it infinite-order.
//!
//! Inverting the transform gives the closed form
//!
//! ```text
//! K(x) = c (cos x - cos bx) / (pi x^2),   b = 1 + 1/c,
//! ```
//!
//! with `K(0) = (1 + b) / (2 pi)`. Near the origin the closed form cancels
//! catastrophically (two cosines close to 1 divided by `x^2`), so for
//! `|x| <= 0.25/b` value and derivatives switch to the even Taylor expansion;
//! both branches agree to ~1e-12 at the seam.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Common kernel surface: pointwise evaluation, derivatives up to order two,
/// and the two constants the plug-in bandwidth formulas need.
pub trait Kernel {
    fn value(&self, x: f64) -> f64;
    fn deriv1(&self, x: f64) -> f64;
    fn deriv2(&self, x: f64) -> f64;

    /// `p`-th derivative for `p` in `{0, 1, 2}`.
    fn derivative(&self, p: usize, x: f64) -> Result<f64> {
        match p {
            0 => Ok(self.value(x)),
            1 => Ok(self.deriv1(x)),
            2 => Ok(self.deriv2(x)),
            _ => Err(Error::DerivativeOrder { p }),
        }
    }

    /// Integral of the squared kernel.
    fn roughness(&self) -> f64;

    /// Integral of `x^2 * kernel(x)`.
    fn second_moment(&self) -> f64;
}

/// Infinite-order kernel from a trapezoidal flat-top transform with slope
/// parameter `c`.
#[derive(Debug, Clone, Copy)]
pub struct FlatTopKernel {
    c: f64,
    b: f64,
    taylor: [f64; 5],
    x_switch: f64,
}

impl FlatTopKernel {
    /// Slope used throughout the benchmarks; works well generally.
    pub const DEFAULT_SLOPE: f64 = 4.0;

    pub fn new(c: f64) -> Result<Self> {
        if !c.is_finite() || c <= 0.0 {
            return Err(Error::InvalidKernelParameter { c });
        }
        let b = 1.0 + 1.0 / c;
        // a_m = (c/pi) (-1)^m (b^{2m+2} - 1) / (2m+2)!
        let mut taylor = [0.0; 5];
        let mut factorial = 2.0;
        for (m, slot) in taylor.iter_mut().enumerate() {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            *slot = sign * (c / PI) * (b.powi(2 * m as i32 + 2) - 1.0) / factorial;
            let k = 2.0 * m as f64;
            factorial *= (k + 3.0) * (k + 4.0);
        }
        Ok(Self {
            c,
            b,
            taylor,
            x_switch: 0.25 / b,
        })
    }

    pub fn slope(&self) -> f64 {
        self.c
    }

    /// `1 + 1/c`: the `|t|` past which the transform vanishes.
    pub fn support_edge(&self) -> f64 {
        self.b
    }

    /// The trapezoidal transform: 1 on `[-1, 1]`, linear flanks, 0 beyond
    /// `1 + 1/c`. Exact at the corners.
    pub fn kappa(&self, t: f64) -> f64 {
        let a = t.abs();
        if a <= 1.0 {
            1.0
        } else {
            (1.0 + self.c - self.c * a).max(0.0)
        }
    }
}

impl Default for FlatTopKernel {
    fn default() -> Self {
        Self::new(Self::DEFAULT_SLOPE).expect("default slope is valid")
    }
}

impl Kernel for FlatTopKernel {
    fn value(&self, x: f64) -> f64 {
        let [a0, a1, a2, a3, a4] = self.taylor;
        if x.abs() <= self.x_switch {
            let x2 = x * x;
            a0 + x2 * (a1 + x2 * (a2 + x2 * (a3 + x2 * a4)))
        } else {
            self.c * (x.cos() - (self.b * x).cos()) / (PI * x * x)
        }
    }

    fn deriv1(&self, x: f64) -> f64 {
        let [_, a1, a2, a3, a4] = self.taylor;
        if x.abs() <= self.x_switch {
            let x2 = x * x;
            x * (2.0 * a1 + x2 * (4.0 * a2 + x2 * (6.0 * a3 + x2 * 8.0 * a4)))
        } else {
            let b = self.b;
            let n = x.cos() - (b * x).cos();
            let n1 = -x.sin() + b * (b * x).sin();
            (self.c / PI) * (n1 / (x * x) - 2.0 * n / (x * x * x))
        }
    }

    fn deriv2(&self, x: f64) -> f64 {
        let [_, a1, a2, a3, a4] = self.taylor;
        if x.abs() <= self.x_switch {
            let x2 = x * x;
            2.0 * a1 + x2 * (12.0 * a2 + x2 * (30.0 * a3 + x2 * 56.0 * a4))
        } else {
            let b = self.b;
            let x2 = x * x;
            let n = x.cos() - (b * x).cos();
            let n1 = -x.sin() + b * (b * x).sin();
            let n2 = -x.cos() + b * b * (b * x).cos();
            (self.c / PI) * (n2 / x2 - 4.0 * n1 / (x2 * x) + 6.0 * n / (x2 * x2))
        }
    }

    // Parseval: int K^2 = (1/2pi) int kappa^2 = (1/pi)(1 + 1/(3c)).
    fn roughness(&self) -> f64 {
        (1.0 + 1.0 / (3.0 * self.c)) / PI
    }

    // kappa is flat at the origin, so -kappa''(0) = int x^2 K = 0.
    fn second_moment(&self) -> f64 {
        0.0
    }
}

/// Standard Gaussian density as a second-order comparator kernel.
#[derive(Debug, Clone, Copy, Default)]
pub struct GaussianKernel;

const INV_SQRT_2PI: f64 = 0.3989422804014327;

impl Kernel for GaussianKernel {
    fn value(&self, x: f64) -> f64 {
        (-0.5 * x * x).exp() * INV_SQRT_2PI
    }

    fn deriv1(&self, x: f64) -> f64 {
        -x * self.value(x)
    }

    fn deriv2(&self, x: f64) -> f64 {
        (x * x - 1.0) * self.value(x)
    }

    fn roughness(&self) -> f64 {
        0.5 / PI.sqrt()
    }

    fn second_moment(&self) -> f64 {
        1.0
    }
}

/// `(roughness, second moment)` of the standard Gaussian kernel: the
/// constants entering the plug-in bandwidth formulas.
pub fn gaussian_kernel_constants() -> (f64, f64) {
    (GaussianKernel.roughness(), GaussianKernel.second_moment())
}
