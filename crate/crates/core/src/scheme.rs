//! Cut-and-project scheme: physical space R^d, internal space R^m, and a
//! lattice in R^(d+m) whose physical projection is injective and whose
//! internal projection is dense.
//!
//! Validation produces a certificate rather than a proof: injectivity is
//! checked by enumerating every lattice point in a thin slab around the
//! internal axis up to a search radius (fatal on a witness), denseness by an
//! eps-grid coverage scan of internal images (warning flag only).
//!
//! Torus elements are stored in basis-fractional coordinates, so invariance
//! under lattice translations is exact by construction.

use crate::error::{Error, Result};
use crate::lattice::{BoxRegion, LatticeBasis};
use crate::tol;

/// Options for [`validate_scheme`].
#[derive(Debug, Clone)]
pub struct ValidationOptions {
    /// Injectivity witnesses are searched among |z|_inf <= search_radius.
    pub search_radius: i64,
    /// Cell size of the internal coverage grid.
    pub coverage_eps: f64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions { search_radius: 100, coverage_eps: 0.05 }
    }
}

/// Outcome of scheme validation.
#[derive(Debug, Clone)]
pub struct ValidationCertificate {
    /// No nonzero lattice point with |z|_inf up to this radius projects to
    /// (numerically) zero in physical space.
    pub injectivity_radius: i64,
    /// Every coverage cell of the internal unit cube received a star image.
    pub denseness_ok: bool,
    pub coverage_eps: f64,
}

/// A point of the torus (R^d x R^m) / lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusPoint {
    /// Basis-fractional coordinates in [0,1)^(d+m); the canonical identity of
    /// the point.
    pub fractional: Vec<f64>,
    /// The representative (s, k) this point was built from.
    pub lift: Vec<f64>,
}

/// Validated cut-and-project data.
#[derive(Debug, Clone)]
pub struct SchemeSpec {
    d: usize,
    m: usize,
    basis: LatticeBasis,
    certificate: ValidationCertificate,
}

/// Validate a candidate scheme and package it with its certificate.
///
/// Fails with [`Error::InjectivityFailed`] (witness attached) if some nonzero
/// lattice point within the search radius has physical norm below
/// [`tol::INJECTIVITY_NORM`]. A failed denseness scan only clears
/// `denseness_ok` in the certificate.
pub fn validate_scheme(
    d: usize,
    m: usize,
    basis: LatticeBasis,
    opts: &ValidationOptions,
) -> Result<SchemeSpec> {
    if d == 0 || m == 0 {
        return Err(Error::InvalidParameter(
            "physical and internal dimensions must both be at least 1".into(),
        ));
    }
    if d + m != basis.dim() {
        return Err(Error::InvalidParameter(format!(
            "d + m = {} does not match basis dimension {}",
            d + m,
            basis.dim()
        )));
    }
    if opts.search_radius < 10 {
        return Err(Error::InvalidParameter("injectivity search radius must be >= 10".into()));
    }
    if !(opts.coverage_eps > 0.0) {
        return Err(Error::InvalidParameter("coverage eps must be positive".into()));
    }

    if let Some(witness) = injectivity_witness(d, m, &basis, opts.search_radius)? {
        return Err(Error::InjectivityFailed { witness });
    }
    let denseness_ok = denseness_scan(d, m, &basis, opts)?;

    Ok(SchemeSpec {
        d,
        m,
        basis,
        certificate: ValidationCertificate {
            injectivity_radius: opts.search_radius,
            denseness_ok,
            coverage_eps: opts.coverage_eps,
        },
    })
}

/// Smallest-|z|_inf nonzero lattice point (first-nonzero-coordinate positive,
/// then lexicographically smallest) whose physical part nearly vanishes.
fn injectivity_witness(
    d: usize,
    m: usize,
    basis: &LatticeBasis,
    radius: i64,
) -> Result<Option<Vec<i64>>> {
    // Internal parts of points with |z|_inf <= radius are bounded per axis by
    // radius * sum_j |B[k][j]|, so a thin slab around the internal axis
    // contains every possible witness.
    let phys = BoxRegion::centered_cube(d, tol::INJECTIVITY_NORM)?;
    let mut int_lo = Vec::with_capacity(m);
    let mut int_hi = Vec::with_capacity(m);
    for k in 0..m {
        let bound: f64 =
            (0..d + m).map(|j| basis.entry(d + k, j).abs()).sum::<f64>() * radius as f64;
        int_lo.push(-bound - 1.0);
        int_hi.push(bound + 1.0);
    }
    let slab = phys.product(&BoxRegion::new(int_lo, int_hi)?);
    let pts = basis.enumerate_in_box_default(&slab)?;

    let mut best: Option<Vec<i64>> = None;
    for p in pts {
        if p.int_coords.iter().all(|&z| z == 0) {
            continue;
        }
        if p.int_coords.iter().any(|&z| z.abs() > radius) {
            continue;
        }
        let phys_norm: f64 = p.point[..d].iter().map(|x| x * x).sum::<f64>().sqrt();
        if phys_norm >= tol::INJECTIVITY_NORM {
            continue;
        }
        // canonical sign: first nonzero coordinate positive
        let mut z = p.int_coords.clone();
        if let Some(first) = z.iter().find(|&&v| v != 0) {
            if *first < 0 {
                z.iter_mut().for_each(|v| *v = -*v);
            }
        }
        let norm_inf = z.iter().map(|v| v.abs()).max().unwrap_or(0);
        let better = match &best {
            None => true,
            Some(b) => {
                let b_norm = b.iter().map(|v| v.abs()).max().unwrap_or(0);
                (norm_inf, &z) < (b_norm, b)
            }
        };
        if better {
            best = Some(z);
        }
    }
    Ok(best)
}

/// Coverage heuristic: star images of lattice points with physical part in
/// `[-r, r]^d` and internal part in the unit cube must hit every eps-cell.
fn denseness_scan(d: usize, m: usize, basis: &LatticeBasis, opts: &ValidationOptions) -> Result<bool> {
    let r = opts.search_radius as f64;
    let eps = opts.coverage_eps;
    let window = BoxRegion::new(vec![-r; d], vec![r; d])?
        .product(&BoxRegion::new(vec![0.0; m], vec![1.0; m])?);
    let pts = basis.enumerate_in_box_default(&window)?;

    let cells_per_axis = (1.0 / eps).ceil() as usize;
    let total_cells = cells_per_axis.pow(m as u32);
    let mut hit = vec![false; total_cells];
    let mut hits = 0usize;
    for p in pts {
        let mut idx = 0usize;
        for k in 0..m {
            let frac = {
                let v = p.point[d + k];
                let f = v - v.floor();
                if f >= 1.0 {
                    0.0
                } else {
                    f
                }
            };
            let cell = ((frac / eps).floor() as usize).min(cells_per_axis - 1);
            idx = idx * cells_per_axis + cell;
        }
        if !hit[idx] {
            hit[idx] = true;
            hits += 1;
            if hits == total_cells {
                return Ok(true);
            }
        }
    }
    Ok(hits == total_cells)
}

impl SchemeSpec {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim_total(&self) -> usize {
        self.d + self.m
    }

    pub fn basis(&self) -> &LatticeBasis {
        &self.basis
    }

    pub fn det_abs(&self) -> f64 {
        self.basis.det_abs()
    }

    pub fn certificate(&self) -> &ValidationCertificate {
        &self.certificate
    }

    /// Split a (d+m)-vector into (physical, internal) parts.
    pub fn split<'a>(&self, v: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        v.split_at(self.d)
    }

    /// Physical and internal parts of the lattice point with integer
    /// coordinates `z`.
    pub fn star_map(&self, z: &[i64]) -> (Vec<f64>, Vec<f64>) {
        let x = self.basis.apply(z);
        (x[..self.d].to_vec(), x[self.d..].to_vec())
    }

    /// Torus point for the representative `(s, k)`.
    pub fn torus_point(&self, s: &[f64], k: &[f64]) -> TorusPoint {
        assert_eq!(s.len(), self.d, "physical part has wrong dimension");
        assert_eq!(k.len(), self.m, "internal part has wrong dimension");
        let mut lift = s.to_vec();
        lift.extend_from_slice(k);
        let (fractional, _) = self.basis.reduce_to_fundamental(&lift);
        TorusPoint { fractional, lift }
    }

    /// The torus identity [0, 0].
    pub fn torus_zero(&self) -> TorusPoint {
        TorusPoint { fractional: vec![0.0; self.dim_total()], lift: vec![0.0; self.dim_total()] }
    }

    /// Embedding of physical space: t maps to [t, 0].
    pub fn iota(&self, t: &[f64]) -> TorusPoint {
        self.torus_point(t, &vec![0.0; self.m])
    }

    /// Embedding of internal space: h maps to [0, h].
    pub fn kappa(&self, h: &[f64]) -> TorusPoint {
        self.torus_point(&vec![0.0; self.d], h)
    }

    /// Group law on the torus in fractional coordinates.
    pub fn torus_add(&self, a: &TorusPoint, b: &TorusPoint) -> TorusPoint {
        let sum: Vec<f64> = a.fractional.iter().zip(&b.fractional).map(|(x, y)| x + y).collect();
        let lift_sum = self.basis.apply_real(&sum);
        let (fractional, lift) = self.basis.reduce_to_fundamental(&lift_sum);
        TorusPoint { fractional, lift }
    }

    /// Canonical representative `B * fractional`; identical for every lift of
    /// the same torus point.
    pub fn canonical_lift(&self, xi: &TorusPoint) -> Vec<f64> {
        self.basis.apply_real(&xi.fractional)
    }

    /// Torus metric: max over axes of the wrap-around fractional distance.
    pub fn torus_distance(&self, a: &TorusPoint, b: &TorusPoint) -> f64 {
        a.fractional
            .iter()
            .zip(&b.fractional)
            .map(|(x, y)| {
                let d = (x - y).abs();
                d.min(1.0 - d)
            })
            .fold(0.0, f64::max)
    }
}
