//! Weight functions on internal space and their certified analysis.
//!
//! A weight is admissible when it is continuous and decays fast enough that
//! the comb built from it has locally summable weights: a decay certificate
//! `|x|^(m+alpha) |f(x)| <= C` with `alpha > 0` is sufficient, and the shell
//! decomposition of the internal cube grid turns it into an explicit tail
//! bound, `2^(2m+1) C / det` times a convergent power sum. Sharp windows are
//! kept non-smooth and only enter the density path.
//!
//! Fourier transforms use the convention `F(k) = integral f(h) e^{+2 pi i k.h} dh`.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lattice::BoxRegion;
use crate::numeric::integrate_box;
use crate::scheme::SchemeSpec;
use crate::tol;

/// Claimed decay bound `|x|^(m+alpha) |f(x)| <= c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayCertificate {
    pub c: f64,
    pub alpha: f64,
}

/// Verified admissibility data for a weight on a given scheme.
#[derive(Debug, Clone, Copy)]
pub struct AdmissibilityCertificate {
    /// Decay constant from the certificate.
    pub c: f64,
    /// Decay exponent margin.
    pub alpha: f64,
    /// Shell-bound constant `2^(2m+1) c / det`; the comb weight tail beyond
    /// radius `l` per unit box volume is at most `c_tilde * sum_{k>=l} k^-(1+alpha)`.
    pub c_tilde: f64,
    /// Largest sampled value of `|x|^(m+alpha) |f(x)|` on the verification grid.
    pub observed_max: f64,
}

#[derive(Debug, Clone)]
enum WeightKind {
    /// `exp(-pi |h|^2 / width^2)`
    Gaussian { width: f64 },
    /// `exp(1 - 1/(1 - |h/radius|^2))` inside the ball, zero outside.
    Bump { radius: f64 },
    /// `(1 + |h/scale|^2)^(-exponent/2)`
    PolyDecay { exponent: f64, scale: f64 },
    /// Characteristic function of a closed box.
    SharpWindow { window: BoxRegion },
    /// Product of one-dimensional weights, one per axis.
    Tensor { factors: Vec<WeightFunction> },
    Scaled { factor: Complex64, inner: Box<WeightFunction> },
    Translated { offset: Vec<f64>, inner: Box<WeightFunction> },
}

/// A weight function on internal space `R^m`.
#[derive(Debug, Clone)]
pub struct WeightFunction {
    dim: usize,
    kind: WeightKind,
    decay: Option<DecayCertificate>,
}

fn norm2(h: &[f64]) -> f64 {
    h.iter().map(|x| x * x).sum::<f64>()
}

fn norm_inf(h: &[f64]) -> f64 {
    h.iter().fold(0.0, |a, x| a.max(x.abs()))
}

impl WeightFunction {
    pub fn gaussian(dim: usize, width: f64) -> Result<Self> {
        if dim == 0 || !(width > 0.0) || !width.is_finite() {
            return Err(Error::InvalidParameter("gaussian needs dim >= 1 and width > 0".into()));
        }
        // max of r^(m+1) exp(-pi r^2/w^2) over r >= 0
        let m1 = (dim + 1) as f64;
        let c = (width * width * m1 / (2.0 * PI * std::f64::consts::E)).powf(m1 / 2.0);
        Ok(WeightFunction {
            dim,
            kind: WeightKind::Gaussian { width },
            decay: Some(DecayCertificate { c, alpha: 1.0 }),
        })
    }

    pub fn bump(dim: usize, radius: f64) -> Result<Self> {
        if dim == 0 || !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter("bump needs dim >= 1 and radius > 0".into()));
        }
        let c = radius.powi(dim as i32 + 1); // |x|^{m+1} f <= r^{m+1} on the support
        Ok(WeightFunction {
            dim,
            kind: WeightKind::Bump { radius },
            decay: Some(DecayCertificate { c, alpha: 1.0 }),
        })
    }

    pub fn poly_decay(dim: usize, exponent: f64, scale: f64) -> Result<Self> {
        if dim == 0 || !exponent.is_finite() || !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidParameter(
                "polydecay needs dim >= 1, finite exponent, scale > 0".into(),
            ));
        }
        let alpha = exponent - dim as f64;
        let decay = if alpha > 0.0 {
            Some(DecayCertificate { c: scale.powf(exponent), alpha })
        } else {
            None // not admissible; operations that need the certificate reject it
        };
        Ok(WeightFunction { dim, kind: WeightKind::PolyDecay { exponent, scale }, decay })
    }

    pub fn sharp_window(window: BoxRegion) -> Result<Self> {
        let dim = window.dim();
        let r = window
            .corners()
            .iter()
            .map(|c| norm2(c).sqrt())
            .fold(0.0, f64::max);
        let c = r.powi(dim as i32 + 1);
        Ok(WeightFunction {
            dim,
            kind: WeightKind::SharpWindow { window },
            decay: Some(DecayCertificate { c, alpha: 1.0 }),
        })
    }

    /// Tensor product of one-dimensional weights, one per internal axis.
    pub fn tensor(factors: Vec<WeightFunction>) -> Result<Self> {
        if factors.is_empty() || factors.iter().any(|f| f.dim != 1) {
            return Err(Error::InvalidParameter(
                "tensor needs at least one factor, each one-dimensional".into(),
            ));
        }
        let dim = factors.len();
        let alpha = factors
            .iter()
            .map(|f| f.decay.map(|d| d.alpha))
            .collect::<Option<Vec<f64>>>()
            .map(|v| v.into_iter().fold(f64::INFINITY, f64::min));
        let mut w = WeightFunction { dim, kind: WeightKind::Tensor { factors }, decay: None };
        if let Some(alpha) = alpha {
            let c = w.sampled_decay_max(alpha) * 1.05;
            w.decay = Some(DecayCertificate { c, alpha });
        }
        Ok(w)
    }

    pub fn scaled(factor: Complex64, inner: WeightFunction) -> Result<Self> {
        if !factor.re.is_finite() || !factor.im.is_finite() {
            return Err(Error::InvalidParameter("scale factor must be finite".into()));
        }
        let decay = inner
            .decay
            .map(|d| DecayCertificate { c: d.c * factor.norm(), alpha: d.alpha });
        Ok(WeightFunction { dim: inner.dim, kind: WeightKind::Scaled { factor, inner: Box::new(inner) }, decay })
    }

    pub fn translated(offset: Vec<f64>, inner: WeightFunction) -> Result<Self> {
        if offset.len() != inner.dim || offset.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "translation offset must be finite and match the inner dimension".into(),
            ));
        }
        let alpha = inner.decay.map(|d| d.alpha);
        let mut w = WeightFunction {
            dim: inner.dim,
            kind: WeightKind::Translated { offset, inner: Box::new(inner) },
            decay: None,
        };
        if let Some(alpha) = alpha {
            let c = w.sampled_decay_max(alpha) * 1.05;
            w.decay = Some(DecayCertificate { c, alpha });
        }
        Ok(w)
    }

    /// Replace the decay certificate with a user-supplied claim.
    pub fn with_decay_cert(mut self, c: f64, alpha: f64) -> Result<Self> {
        if !(c >= 0.0) || !(alpha > 0.0) {
            return Err(Error::InvalidParameter("decay certificate needs c >= 0 and alpha > 0".into()));
        }
        self.decay = Some(DecayCertificate { c, alpha });
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn decay_cert(&self) -> Option<DecayCertificate> {
        self.decay
    }

    /// False iff a sharp window occurs anywhere in the composition.
    pub fn is_smooth(&self) -> bool {
        match &self.kind {
            WeightKind::SharpWindow { .. } => false,
            WeightKind::Tensor { factors } => factors.iter().all(|f| f.is_smooth()),
            WeightKind::Scaled { inner, .. } | WeightKind::Translated { inner, .. } => {
                inner.is_smooth()
            }
            _ => true,
        }
    }

    /// True when the Fourier transform evaluates through closed forms only.
    pub fn has_analytic_ft(&self) -> bool {
        match &self.kind {
            WeightKind::Gaussian { .. } | WeightKind::SharpWindow { .. } => true,
            WeightKind::Bump { .. } | WeightKind::PolyDecay { .. } => false,
            WeightKind::Tensor { factors } => factors.iter().all(|f| f.has_analytic_ft()),
            WeightKind::Scaled { inner, .. } | WeightKind::Translated { inner, .. } => {
                inner.has_analytic_ft()
            }
        }
    }

    /// Evaluate the weight; complex because scaling factors may be complex.
    pub fn eval(&self, h: &[f64]) -> Complex64 {
        debug_assert_eq!(h.len(), self.dim);
        match &self.kind {
            WeightKind::Gaussian { width } => {
                Complex64::new((-PI * norm2(h) / (width * width)).exp(), 0.0)
            }
            WeightKind::Bump { radius } => {
                let t = norm2(h) / (radius * radius);
                if t >= 1.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new((1.0 - 1.0 / (1.0 - t)).exp(), 0.0)
                }
            }
            WeightKind::PolyDecay { exponent, scale } => {
                Complex64::new((1.0 + norm2(h) / (scale * scale)).powf(-exponent / 2.0), 0.0)
            }
            WeightKind::SharpWindow { window } => {
                if window.contains(h, tol::BOX_TIE) {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            WeightKind::Tensor { factors } => factors
                .iter()
                .zip(h)
                .map(|(f, &x)| f.eval(&[x]))
                .product(),
            WeightKind::Scaled { factor, inner } => factor * inner.eval(h),
            WeightKind::Translated { offset, inner } => {
                let shifted: Vec<f64> = h.iter().zip(offset).map(|(x, o)| x - o).collect();
                inner.eval(&shifted)
            }
        }
    }

    /// Upper bound on `|f|`.
    pub fn sup_abs(&self) -> f64 {
        match &self.kind {
            WeightKind::Gaussian { .. }
            | WeightKind::Bump { .. }
            | WeightKind::PolyDecay { .. }
            | WeightKind::SharpWindow { .. } => 1.0,
            WeightKind::Tensor { factors } => factors.iter().map(|f| f.sup_abs()).product(),
            WeightKind::Scaled { factor, inner } => factor.norm() * inner.sup_abs(),
            WeightKind::Translated { inner, .. } => inner.sup_abs(),
        }
    }

    /// Upper bound on `sup { |f(h)| : |h|_inf >= x }`.
    pub fn sup_tail_inf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return self.sup_abs();
        }
        match &self.kind {
            WeightKind::Gaussian { width } => (-PI * x * x / (width * width)).exp(),
            WeightKind::Bump { radius } => {
                if x >= *radius {
                    0.0
                } else {
                    let t = (x / radius).powi(2);
                    (1.0 - 1.0 / (1.0 - t)).exp()
                }
            }
            WeightKind::PolyDecay { exponent, scale } => {
                (1.0 + (x / scale).powi(2)).powf(-exponent / 2.0)
            }
            WeightKind::SharpWindow { window } => {
                let reach = window
                    .lo()
                    .iter()
                    .chain(window.hi())
                    .fold(0.0f64, |a, v| a.max(v.abs()));
                if x > reach {
                    0.0
                } else {
                    1.0
                }
            }
            WeightKind::Tensor { factors } => {
                let sups: Vec<f64> = factors.iter().map(|f| f.sup_abs()).collect();
                let total: f64 = sups.iter().product();
                factors
                    .iter()
                    .enumerate()
                    .map(|(j, f)| {
                        let others = if sups[j] > 0.0 { total / sups[j] } else { 0.0 };
                        f.sup_tail_inf(x) * others
                    })
                    .fold(0.0, f64::max)
            }
            WeightKind::Scaled { factor, inner } => factor.norm() * inner.sup_tail_inf(x),
            WeightKind::Translated { offset, inner } => {
                inner.sup_tail_inf((x - norm_inf(offset)).max(0.0))
            }
        }
    }

    /// Half-side of the smallest cube known to contain the support.
    pub fn support_radius_inf(&self) -> Option<f64> {
        match &self.kind {
            WeightKind::Bump { radius } => Some(*radius),
            WeightKind::SharpWindow { window } => Some(
                window
                    .lo()
                    .iter()
                    .chain(window.hi())
                    .fold(0.0f64, |a, v| a.max(v.abs())),
            ),
            WeightKind::Tensor { factors } => factors
                .iter()
                .map(|f| f.support_radius_inf())
                .collect::<Option<Vec<f64>>>()
                .map(|v| v.into_iter().fold(0.0, f64::max)),
            WeightKind::Scaled { inner, .. } => inner.support_radius_inf(),
            WeightKind::Translated { offset, inner } => {
                inner.support_radius_inf().map(|r| r + norm_inf(offset))
            }
            _ => None,
        }
    }

    /// Shell-sum bound on the comb weight tail beyond internal radius `r`,
    /// per unit physical box volume: lattice points per internal cube shell
    /// are counted by volume/det, and `|f|` on each shell by [`Self::sup_tail_inf`].
    pub fn shell_tail_bound(&self, r: f64, det_abs: f64) -> f64 {
        if let Some(s) = self.support_radius_inf() {
            if r >= s {
                return 0.0;
            }
        }
        let m = self.dim as f64;
        let mut total = 0.0f64;
        let mut x = r.max(0.0);
        for _ in 0..65_536 {
            let shell_vol = (2.0 * (x + 1.0)).powf(m) - (2.0 * x).powf(m);
            let term = shell_vol * self.sup_tail_inf(x);
            total += term;
            x += 1.0;
            if term <= total * 1e-15 || term == 0.0 {
                return total / det_abs;
            }
        }
        // power-law remainder via the decay certificate
        if let Some(d) = self.decay {
            let two_m = 2f64.powf(m);
            let rem = two_m * m * d.c * (1.0 + 1.0 / x).powf(m - 1.0)
                * (x.powf(-d.alpha) / d.alpha + x.powf(-1.0 - d.alpha));
            total += rem;
        } else {
            total = f64::INFINITY;
        }
        total / det_abs
    }

    /// Smallest internal truncation radius whose certified tail bound, scaled
    /// by `box_volume_scale`, stays below `eps`. Compactly supported weights
    /// return their support radius for every `eps`.
    pub fn truncation_radius(
        &self,
        scheme: &SchemeSpec,
        eps: f64,
        box_volume_scale: f64,
    ) -> Result<f64> {
        if !(eps > 0.0) || !(box_volume_scale > 0.0) {
            return Err(Error::InvalidParameter(
                "truncation eps and box volume scale must be positive".into(),
            ));
        }
        if self.dim != scheme.m() {
            return Err(Error::InvalidParameter(format!(
                "weight dimension {} does not match internal dimension {}",
                self.dim,
                scheme.m()
            )));
        }
        if let Some(s) = self.support_radius_inf() {
            return Ok(s);
        }
        let det = scheme.det_abs();
        let ok = |r: f64| self.shell_tail_bound(r, det) * box_volume_scale <= eps;
        let mut hi = 1.0f64;
        while !ok(hi) {
            hi *= 2.0;
            if hi > 1e12 {
                return Err(Error::InvalidParameter(format!(
                    "truncation eps {eps:.1e} is unattainable for this weight's decay"
                )));
            }
        }
        let mut lo = 0.0f64;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if ok(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// Max of `|x|^(m+alpha) |f(x)|` over the radial verification grid.
    fn sampled_decay_max(&self, alpha: f64) -> f64 {
        let power = self.dim as f64 + alpha;
        let mut max = 0.0f64;
        for dir in sample_directions(self.dim) {
            let mut r = 0.05;
            while r <= tol::DECAY_GRID_RADIUS {
                let x: Vec<f64> = dir.iter().map(|d| d * r).collect();
                let v = r.powf(power) * self.eval(&x).norm();
                max = max.max(v);
                r += 0.05;
            }
        }
        max
    }

    /// Verify the claimed decay certificate by sampling and package the shell
    /// constant for the given scheme.
    pub fn admissibility_certificate(
        &self,
        scheme: &SchemeSpec,
    ) -> Result<AdmissibilityCertificate> {
        if !self.is_smooth() {
            return Err(Error::NonSmoothWeight);
        }
        if self.dim != scheme.m() {
            return Err(Error::InvalidParameter(format!(
                "weight dimension {} does not match internal dimension {}",
                self.dim,
                scheme.m()
            )));
        }
        let decay = self.decay.ok_or_else(|| Error::NotAdmissible {
            reason: "no positive-exponent decay certificate is available".into(),
        })?;
        let observed = self.sampled_decay_max(decay.alpha);
        if observed > tol::ADMISSIBILITY_HEADROOM * decay.c {
            return Err(Error::NotAdmissible {
                reason: format!(
                    "sampled decay maximum {observed:.6e} exceeds certified constant {:.6e}",
                    decay.c
                ),
            });
        }
        let m = self.dim as u32;
        let c_tilde = 2f64.powi(2 * m as i32 + 1) * decay.c / scheme.det_abs();
        Ok(AdmissibilityCertificate {
            c: decay.c,
            alpha: decay.alpha,
            c_tilde,
            observed_max: observed,
        })
    }

    /// Upper bound on `sup |F|` when one is known in closed form.
    pub fn ft_modulus_sup(&self) -> Option<f64> {
        match &self.kind {
            WeightKind::Gaussian { width } => Some(width.powi(self.dim as i32)),
            WeightKind::SharpWindow { window } => Some(window.volume()),
            WeightKind::Tensor { factors } => factors
                .iter()
                .map(|f| f.ft_modulus_sup())
                .collect::<Option<Vec<f64>>>()
                .map(|v| v.into_iter().product()),
            WeightKind::Scaled { factor, inner } => {
                inner.ft_modulus_sup().map(|s| s * factor.norm())
            }
            WeightKind::Translated { inner, .. } => inner.ft_modulus_sup(),
            _ => None,
        }
    }

    /// Upper bound on `sup { |F(k)| : |k|_inf >= r }` when one is known in
    /// closed form; None for weights whose transform is quadrature-only.
    pub fn ft_modulus_tail(&self, r: f64) -> Option<f64> {
        if r <= 0.0 {
            return self.ft_modulus_sup();
        }
        match &self.kind {
            WeightKind::Gaussian { width } => {
                Some(width.powi(self.dim as i32) * (-PI * width * width * r * r).exp())
            }
            WeightKind::SharpWindow { window } => {
                let lens: Vec<f64> = (0..self.dim)
                    .map(|i| window.hi()[i] - window.lo()[i])
                    .collect();
                let total: f64 = lens.iter().product();
                let bound = lens
                    .iter()
                    .map(|len| {
                        let others = if *len > 0.0 { total / len } else { 0.0 };
                        len.min(1.0 / (PI * r)) * others
                    })
                    .fold(0.0, f64::max);
                Some(bound)
            }
            WeightKind::Tensor { factors } => {
                let sups = factors
                    .iter()
                    .map(|f| f.ft_modulus_sup())
                    .collect::<Option<Vec<f64>>>()?;
                let total: f64 = sups.iter().product();
                let mut bound = 0.0f64;
                for (j, f) in factors.iter().enumerate() {
                    let others = if sups[j] > 0.0 { total / sups[j] } else { 0.0 };
                    bound = bound.max(f.ft_modulus_tail(r)? * others);
                }
                Some(bound)
            }
            WeightKind::Scaled { factor, inner } => {
                inner.ft_modulus_tail(r).map(|b| b * factor.norm())
            }
            WeightKind::Translated { inner, .. } => inner.ft_modulus_tail(r),
            _ => None,
        }
    }

    /// Quadrature box half-side so the neglected `|f|` mass is below `tail_eps`.
    fn integral_radius(&self, tail_eps: f64) -> Result<f64> {
        if let Some(s) = self.support_radius_inf() {
            return Ok(s);
        }
        let ok = |r: f64| self.shell_tail_bound(r, 1.0) <= tail_eps;
        let mut hi = 1.0f64;
        while !ok(hi) {
            hi *= 2.0;
            if hi > 1e4 {
                return Err(Error::QuadratureNotConverged {
                    context: format!(
                        "weight decays too slowly to truncate its integral at tolerance {tail_eps:.1e}"
                    ),
                });
            }
        }
        let mut lo = 0.0f64;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if ok(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// Fourier transform `F(k) = integral f(h) e^{+2 pi i k.h} dh`; closed
    /// form when available, otherwise grid quadrature at tolerance `tol`.
    pub fn fourier(&self, k: &[f64], tol: f64) -> Result<Complex64> {
        debug_assert_eq!(k.len(), self.dim);
        if self.has_analytic_ft() {
            return Ok(self.fourier_analytic(k));
        }
        self.fourier_numeric(k, tol)
    }

    fn fourier_analytic(&self, k: &[f64]) -> Complex64 {
        match &self.kind {
            WeightKind::Gaussian { width } => {
                let mag = width.powi(self.dim as i32) * (-PI * width * width * norm2(k)).exp();
                Complex64::new(mag, 0.0)
            }
            WeightKind::SharpWindow { window } => {
                let mut v = Complex64::new(1.0, 0.0);
                for (i, &ki) in k.iter().enumerate() {
                    let (a, b) = (window.lo()[i], window.hi()[i]);
                    let len = b - a;
                    let center = 0.5 * (a + b);
                    let axis = if ki.abs() < 1e-12 {
                        Complex64::new(len, 0.0)
                    } else {
                        Complex64::from_polar(1.0, 2.0 * PI * ki * center)
                            * ((PI * ki * len).sin() / (PI * ki))
                    };
                    v *= axis;
                }
                v
            }
            WeightKind::Tensor { factors } => factors
                .iter()
                .zip(k)
                .map(|(f, &ki)| f.fourier_analytic(&[ki]))
                .product(),
            WeightKind::Scaled { factor, inner } => factor * inner.fourier_analytic(k),
            WeightKind::Translated { offset, inner } => {
                let phase: f64 = k.iter().zip(offset).map(|(ki, oi)| ki * oi).sum();
                Complex64::from_polar(1.0, 2.0 * PI * phase) * inner.fourier_analytic(k)
            }
            _ => unreachable!("fourier_analytic called without a closed form"),
        }
    }

    /// Quadrature evaluation of the Fourier transform; exposed so closed
    /// forms can be cross-validated against it.
    pub fn fourier_numeric(&self, k: &[f64], tol: f64) -> Result<Complex64> {
        let r = self.integral_radius((tol * 0.1).max(1e-300))?;
        let lo = vec![-r; self.dim];
        let hi = vec![r; self.dim];
        integrate_box(
            &|h: &[f64]| {
                let phase: f64 = k.iter().zip(h).map(|(ki, hi)| ki * hi).sum();
                self.eval(h) * Complex64::from_polar(1.0, 2.0 * PI * phase)
            },
            &lo,
            &hi,
            tol,
        )
    }

    /// Total mass `integral f`.
    pub fn integral(&self, tol: f64) -> Result<Complex64> {
        self.fourier(&vec![0.0; self.dim], tol)
    }

    /// True when the self-correlation evaluates through closed forms only.
    pub fn has_analytic_self_correlation(&self) -> bool {
        match &self.kind {
            WeightKind::Gaussian { .. } | WeightKind::SharpWindow { .. } => true,
            WeightKind::Bump { .. } | WeightKind::PolyDecay { .. } => false,
            WeightKind::Tensor { factors } => {
                factors.iter().all(|f| f.has_analytic_self_correlation())
            }
            WeightKind::Scaled { inner, .. } | WeightKind::Translated { inner, .. } => {
                inner.has_analytic_self_correlation()
            }
        }
    }

    /// Self-correlation `(f * f~)(u) = integral f(h) conj(f(h - u)) dh`;
    /// Hermitian in `u`.
    pub fn self_correlation(&self, u: &[f64], tol: f64) -> Result<Complex64> {
        debug_assert_eq!(u.len(), self.dim);
        if self.has_analytic_self_correlation() {
            return Ok(self.self_correlation_analytic(u));
        }
        self.self_correlation_numeric(u, tol)
    }

    fn self_correlation_analytic(&self, u: &[f64]) -> Complex64 {
        match &self.kind {
            WeightKind::Gaussian { width } => {
                let m = self.dim as f64;
                let mag = width.powf(m) / 2f64.powf(m / 2.0)
                    * (-PI * norm2(u) / (2.0 * width * width)).exp();
                Complex64::new(mag, 0.0)
            }
            WeightKind::SharpWindow { window } => {
                let mut vol = 1.0;
                for (i, &ui) in u.iter().enumerate() {
                    let len = window.hi()[i] - window.lo()[i];
                    vol *= (len - ui.abs()).max(0.0);
                }
                Complex64::new(vol, 0.0)
            }
            WeightKind::Tensor { factors } => factors
                .iter()
                .zip(u)
                .map(|(f, &ui)| f.self_correlation_analytic(&[ui]))
                .product(),
            WeightKind::Scaled { factor, inner } => {
                factor.norm_sqr() * inner.self_correlation_analytic(u)
            }
            WeightKind::Translated { inner, .. } => inner.self_correlation_analytic(u),
            _ => unreachable!("self_correlation_analytic called without a closed form"),
        }
    }

    /// Quadrature evaluation of the self-correlation; exposed for cross-validation.
    pub fn self_correlation_numeric(&self, u: &[f64], tol: f64) -> Result<Complex64> {
        let sup = self.sup_abs().max(1e-12);
        let r = self.integral_radius((tol * 0.05 / sup).max(1e-300))? + norm_inf(u);
        let lo = vec![-r; self.dim];
        let hi = vec![r; self.dim];
        integrate_box(
            &|h: &[f64]| {
                let shifted: Vec<f64> = h.iter().zip(u).map(|(x, ui)| x - ui).collect();
                self.eval(h) * self.eval(&shifted).conj()
            },
            &lo,
            &hi,
            tol,
        )
    }

    /// Scan for a translation `u != 0` with `f(. - u) = f` everywhere on the
    /// sample grid (within `tol`). Returns the witness when found; the zero
    /// function reports its first probe as a degenerate period.
    pub fn has_nontrivial_period(&self, search_radius: f64, tol: f64) -> (bool, Option<Vec<f64>>) {
        let m = self.dim;
        let steps: i64 = if m == 1 { 5 } else { 3 };
        let stride = search_radius / steps as f64;
        // evaluation grid covering the mass of f
        let r_eval = self
            .support_radius_inf()
            .unwrap_or_else(|| self.integral_radius(1e-6).unwrap_or(8.0))
            .max(2.0 * search_radius);
        let grid_n: i64 = match m {
            1 => 400,
            2 => 60,
            _ => 16,
        };
        // odometer over {-steps..steps}^m
        let mut offsets: Vec<Vec<i64>> = Vec::new();
        let mut cursor = vec![-steps; m];
        loop {
            offsets.push(cursor.clone());
            let mut axis = 0;
            while axis < m {
                cursor[axis] += 1;
                if cursor[axis] <= steps {
                    break;
                }
                cursor[axis] = -steps;
                axis += 1;
            }
            if axis == m {
                break;
            }
        }
        for off in offsets {
            if off.iter().all(|&v| v == 0) {
                continue;
            }
            let u: Vec<f64> = off.iter().map(|&v| v as f64 * stride).collect();
            let mut max_diff = 0.0f64;
            let mut idx = vec![-grid_n; m];
            'grid: loop {
                let h: Vec<f64> =
                    idx.iter().map(|&i| i as f64 * r_eval / grid_n as f64).collect();
                let shifted: Vec<f64> = h.iter().zip(&u).map(|(x, ui)| x - ui).collect();
                max_diff = max_diff.max((self.eval(&shifted) - self.eval(&h)).norm());
                if max_diff > tol {
                    break 'grid;
                }
                let mut axis = 0;
                loop {
                    if axis == m {
                        break 'grid;
                    }
                    idx[axis] += 1;
                    if idx[axis] <= grid_n {
                        break;
                    }
                    idx[axis] = -grid_n;
                    axis += 1;
                }
            }
            if max_diff <= tol {
                return (true, Some(u));
            }
        }
        (false, None)
    }
}

/// Deterministic direction set for radial sampling.
fn sample_directions(dim: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..64)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / 64.0;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => {
            // Fibonacci sphere
            let n = 64;
            (0..n)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
                    let r = (1.0 - z * z).sqrt();
                    let a = PI * (1.0 + 5f64.sqrt()) * i as f64;
                    vec![r * a.cos(), r * a.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut dirs = Vec::new();
            for a in 0..dim {
                for s in [1.0, -1.0] {
                    let mut v = vec![0.0; dim];
                    v[a] = s;
                    dirs.push(v);
                }
            }
            let diag = 1.0 / (dim as f64).sqrt();
            dirs.push(vec![diag; dim]);
            dirs.push(vec![-diag; dim]);
            dirs
        }
    }
}
