//! Compensated summation and grid quadrature.
//!
//! All reductions in the library go through [`Kahan`]/[`KahanComplex`] in a
//! fixed traversal order, so repeated runs produce bit-identical results
//! regardless of thread count.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Kahan compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Componentwise compensated accumulator for complex values.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanComplex {
    re: Kahan,
    im: Kahan,
}

impl KahanComplex {
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Composite Simpson weight for node `i` of `n` subintervals (`n` even).
fn simpson_coeff(i: usize, n: usize) -> f64 {
    if i == 0 || i == n {
        1.0
    } else if i % 2 == 1 {
        4.0
    } else {
        2.0
    }
}

fn simpson_1d<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, n: usize) -> Complex64 {
    let h = (b - a) / n as f64;
    let mut acc = KahanComplex::default();
    for i in 0..=n {
        let x = if i == n { b } else { a + h * i as f64 };
        acc.add(simpson_coeff(i, n) * f(x));
    }
    acc.value() * (h / 3.0)
}

/// Tensor-product composite Simpson over an axis-aligned box, `n` subintervals
/// per axis.
fn simpson_nd<F: Fn(&[f64]) -> Complex64>(f: &F, lo: &[f64], hi: &[f64], n: usize) -> Complex64 {
    let dim = lo.len();
    let h: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| (b - a) / n as f64).collect();
    let mut idx = vec![0usize; dim];
    let mut x = vec![0.0f64; dim];
    let mut acc = KahanComplex::default();
    loop {
        let mut coeff = 1.0;
        for a in 0..dim {
            coeff *= simpson_coeff(idx[a], n);
            x[a] = if idx[a] == n { hi[a] } else { lo[a] + h[a] * idx[a] as f64 };
        }
        acc.add(coeff * f(&x));
        // odometer increment
        let mut axis = 0;
        loop {
            if axis == dim {
                let scale: f64 = h.iter().map(|hi| hi / 3.0).product();
                return acc.value() * scale;
            }
            idx[axis] += 1;
            if idx[axis] <= n {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
    }
}

fn max_subdivisions(dim: usize) -> usize {
    match dim {
        1 => 1 << 20,
        2 => 1 << 12,
        3 => 1 << 8,
        _ => 1 << 5,
    }
}

/// Integrate `f` over the closed box `[lo, hi]`, refining a composite Simpson
/// rule (doubling subdivisions per axis) until two successive refinements
/// differ by less than `tol` in absolute value.
pub fn integrate_box<F: Fn(&[f64]) -> Complex64>(
    f: &F,
    lo: &[f64],
    hi: &[f64],
    tol: f64,
) -> Result<Complex64> {
    assert_eq!(lo.len(), hi.len());
    let dim = lo.len();
    if dim == 0 || lo.iter().zip(hi).any(|(a, b)| a >= b) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let n_max = max_subdivisions(dim);
    let mut n = 16.min(n_max);
    let mut prev = if dim == 1 {
        simpson_1d(&|x| f(std::slice::from_ref(&x)), lo[0], hi[0], n)
    } else {
        simpson_nd(f, lo, hi, n)
    };
    while n < n_max {
        n *= 2;
        let cur = if dim == 1 {
            simpson_1d(&|x| f(std::slice::from_ref(&x)), lo[0], hi[0], n)
        } else {
            simpson_nd(f, lo, hi, n)
        };
        if (cur - prev).norm() < tol {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::QuadratureNotConverged {
        context: format!(
            "composite Simpson did not settle below {tol:.1e} at {n} subintervals per axis (dim {dim})"
        ),
    })
}
