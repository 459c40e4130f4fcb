//! Lattice bases, axis-aligned boxes, and exact point enumeration.
//!
//! A lattice is stored as a square matrix whose columns generate it. All
//! arithmetic is f64 with a conditioning guard at construction; the cached
//! inverse is verified to reproduce the identity to [`tol::LINALG_CHECK`].

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::tol;

/// Closed axis-aligned box `[lo_1, hi_1] x ... x [lo_n, hi_n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxRegion {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::InvalidParameter(
                "box bounds must be non-empty and of equal dimension".into(),
            ));
        }
        for (a, b) in lo.iter().zip(&hi) {
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::InvalidParameter("box bounds must be finite".into()));
            }
            if a > b {
                return Err(Error::InvalidParameter(format!(
                    "box lower bound {a} exceeds upper bound {b}"
                )));
            }
        }
        Ok(BoxRegion { lo, hi })
    }

    /// Cube `[-r, r]^dim`.
    pub fn centered_cube(dim: usize, r: f64) -> Result<Self> {
        BoxRegion::new(vec![-r; dim], vec![r; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    /// Closed membership with per-axis tie tolerance `tie`.
    pub fn contains(&self, x: &[f64], tie: f64) -> bool {
        debug_assert_eq!(x.len(), self.dim());
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (a, b))| *v >= a - tie && *v <= b + tie)
    }

    /// True if `other` lies inside `self` (with tie tolerance).
    pub fn contains_box(&self, other: &BoxRegion, tie: f64) -> bool {
        self.dim() == other.dim()
            && other
                .lo
                .iter()
                .zip(&other.hi)
                .zip(self.lo.iter().zip(&self.hi))
                .all(|((olo, ohi), (slo, shi))| *olo >= slo - tie && *ohi <= shi + tie)
    }

    pub fn translate(&self, t: &[f64]) -> BoxRegion {
        debug_assert_eq!(t.len(), self.dim());
        BoxRegion {
            lo: self.lo.iter().zip(t).map(|(a, s)| a + s).collect(),
            hi: self.hi.iter().zip(t).map(|(b, s)| b + s).collect(),
        }
    }

    /// Cartesian product of two boxes (used to join physical and internal windows).
    pub fn product(&self, other: &BoxRegion) -> BoxRegion {
        let mut lo = self.lo.clone();
        let mut hi = self.hi.clone();
        lo.extend_from_slice(&other.lo);
        hi.extend_from_slice(&other.hi);
        BoxRegion { lo, hi }
    }

    /// All `2^dim` corner vertices.
    pub fn corners(&self) -> Vec<Vec<f64>> {
        let dim = self.dim();
        (0..1usize << dim)
            .map(|mask| {
                (0..dim)
                    .map(|a| if mask >> a & 1 == 0 { self.lo[a] } else { self.hi[a] })
                    .collect()
            })
            .collect()
    }
}

/// Lattice point: integer coordinates and their image under the basis.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticePoint {
    pub int_coords: Vec<i64>,
    pub point: Vec<f64>,
}

/// Square lattice basis; columns are the generators.
#[derive(Debug, Clone)]
pub struct LatticeBasis {
    dim: usize,
    mat: DMatrix<f64>,
    inv: DMatrix<f64>,
    det_abs: f64,
}

impl LatticeBasis {
    /// Build a basis from generator columns; fails for near-singular input.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let dim = columns.len();
        if dim == 0 {
            return Err(Error::InvalidParameter("basis needs at least one column".into()));
        }
        if columns.iter().any(|c| c.len() != dim) {
            return Err(Error::InvalidParameter(
                "basis columns must all have length equal to the column count".into(),
            ));
        }
        if columns.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("basis entries must be finite".into()));
        }
        let mat = DMatrix::from_fn(dim, dim, |i, j| columns[j][i]);
        let det = mat.clone().lu().determinant();
        let norm_product: f64 = (0..dim).map(|j| mat.column(j).norm()).product();
        if det.abs() < tol::BASIS_CONDITION_FLOOR * norm_product {
            return Err(Error::SingularBasis { det: det.abs() });
        }
        let inv = mat.clone().try_inverse().ok_or(Error::SingularBasis { det: det.abs() })?;
        let residual = (&mat * &inv - DMatrix::<f64>::identity(dim, dim)).abs().max();
        if residual > tol::LINALG_CHECK {
            return Err(Error::SingularBasis { det: det.abs() });
        }
        Ok(LatticeBasis { dim, mat, inv, det_abs: det.abs() })
    }

    /// Build from matrix rows (the orientation used by config files).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidParameter("basis rows must form a square matrix".into()));
        }
        let columns: Vec<Vec<f64>> = (0..dim).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
        Self::from_columns(&columns)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn det_abs(&self) -> f64 {
        self.det_abs
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.mat.column(j).iter().copied().collect()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.mat[(i, j)]
    }

    /// `B z` for integer coordinates.
    pub fn apply(&self, z: &[i64]) -> Vec<f64> {
        debug_assert_eq!(z.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                let mut acc = 0.0;
                for (j, &zj) in z.iter().enumerate() {
                    acc += self.mat[(i, j)] * zj as f64;
                }
                acc
            })
            .collect()
    }

    /// `B y` for real coordinates.
    pub fn apply_real(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.dim);
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.mat[(i, j)] * y[j]).sum())
            .collect()
    }

    /// `B^{-1} v` via the cached inverse.
    pub fn solve(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.inv[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Dual basis `B^{-T}`: generator pairings `<d_i, b_j> = delta_ij`.
    pub fn dual(&self) -> LatticeBasis {
        LatticeBasis {
            dim: self.dim,
            mat: self.inv.transpose(),
            inv: self.mat.transpose(),
            det_abs: 1.0 / self.det_abs,
        }
    }

    /// All integer points `z` with `B z` in the closed `region`, boundary ties
    /// included at [`tol::BOX_TIE`]. Deterministic output, sorted by integer
    /// coordinates.
    ///
    /// The search walks integer coordinates axis by axis, intersecting each
    /// axis range with interval bounds propagated from the box constraints, so
    /// the visit count stays proportional to the true point count even for
    /// long thin boxes under skewed bases. `cap` bounds the number of visited
    /// branch nodes.
    pub fn enumerate_in_box(&self, region: &BoxRegion, cap: u128) -> Result<Vec<LatticePoint>> {
        if region.dim() != self.dim {
            return Err(Error::InvalidParameter(format!(
                "region dimension {} does not match basis dimension {}",
                region.dim(),
                self.dim
            )));
        }
        let n = self.dim;

        // Integer bounding ranges from the preimage parallelotope corners.
        let mut y_lo = vec![f64::INFINITY; n];
        let mut y_hi = vec![f64::NEG_INFINITY; n];
        for corner in region.corners() {
            let y = self.solve(&corner);
            for a in 0..n {
                y_lo[a] = y_lo[a].min(y[a]);
                y_hi[a] = y_hi[a].max(y[a]);
            }
        }
        let pad = |v: f64| 1e-9 * (1.0 + v.abs());
        let z_min: Vec<i64> = (0..n).map(|a| (y_lo[a] - pad(y_lo[a])).ceil() as i64).collect();
        let z_max: Vec<i64> = (0..n).map(|a| (y_hi[a] + pad(y_hi[a])).floor() as i64).collect();
        if (0..n).any(|a| z_min[a] > z_max[a]) {
            return Ok(Vec::new());
        }

        // Visit axes narrowest-first so the outer loops are short.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&a| z_max[a] - z_min[a]);

        // suffix interval of sum_{u > t} B[i][order[u]] * z_u over the integer ranges
        let mut suffix_lo = vec![vec![0.0f64; n]; n + 1];
        let mut suffix_hi = vec![vec![0.0f64; n]; n + 1];
        for t in (0..n).rev() {
            let a = order[t];
            for i in 0..n {
                let c = self.mat[(i, a)];
                let v1 = c * z_min[a] as f64;
                let v2 = c * z_max[a] as f64;
                suffix_lo[t][i] = suffix_lo[t + 1][i] + v1.min(v2);
                suffix_hi[t][i] = suffix_hi[t + 1][i] + v1.max(v2);
            }
        }

        struct Walk<'a> {
            basis: &'a LatticeBasis,
            region: &'a BoxRegion,
            order: &'a [usize],
            z_min: &'a [i64],
            z_max: &'a [i64],
            suffix_lo: &'a [Vec<f64>],
            suffix_hi: &'a [Vec<f64>],
            z: Vec<i64>,
            fixed: Vec<f64>,
            visited: u128,
            cap: u128,
            out: Vec<LatticePoint>,
        }

        impl Walk<'_> {
            fn descend(&mut self, t: usize) -> Result<()> {
                let n = self.basis.dim;
                if t == n {
                    let x = self.basis.apply(&self.z);
                    if self.region.contains(&x, tol::BOX_TIE) {
                        self.out.push(LatticePoint { int_coords: self.z.clone(), point: x });
                    }
                    return Ok(());
                }
                let axis = self.order[t];
                // Feasible interval for z[axis] from every row constraint.
                let mut lo = self.z_min[axis] as f64;
                let mut hi = self.z_max[axis] as f64;
                for i in 0..n {
                    let c = self.basis.mat[(i, axis)];
                    let r_lo =
                        self.region.lo[i] - tol::BOX_TIE - self.fixed[i] - self.suffix_hi[t + 1][i];
                    let r_hi =
                        self.region.hi[i] + tol::BOX_TIE - self.fixed[i] - self.suffix_lo[t + 1][i];
                    if c.abs() > 1e-14 {
                        let (mut a, mut b) = (r_lo / c, r_hi / c);
                        if c < 0.0 {
                            std::mem::swap(&mut a, &mut b);
                        }
                        lo = lo.max(a - 1e-9);
                        hi = hi.min(b + 1e-9);
                    } else if r_lo > 0.0 || r_hi < 0.0 {
                        return Ok(()); // row infeasible regardless of this axis
                    }
                }
                let lo_i = lo.ceil() as i64;
                let hi_i = hi.floor() as i64;
                if lo_i > hi_i {
                    return Ok(());
                }
                self.visited += (hi_i - lo_i + 1) as u128;
                if self.visited > self.cap {
                    return Err(Error::CapacityExceeded { candidates: self.visited, cap: self.cap });
                }
                for zv in lo_i..=hi_i {
                    self.z[axis] = zv;
                    for i in 0..n {
                        self.fixed[i] += self.basis.mat[(i, axis)] * zv as f64;
                    }
                    self.descend(t + 1)?;
                    for i in 0..n {
                        self.fixed[i] -= self.basis.mat[(i, axis)] * zv as f64;
                    }
                }
                Ok(())
            }
        }

        let mut walk = Walk {
            basis: self,
            region,
            order: &order,
            z_min: &z_min,
            z_max: &z_max,
            suffix_lo: &suffix_lo,
            suffix_hi: &suffix_hi,
            z: vec![0; n],
            fixed: vec![0.0; n],
            visited: 0,
            cap,
            out: Vec::new(),
        };
        walk.descend(0)?;
        let mut out = walk.out;
        out.sort_by(|p, q| p.int_coords.cmp(&q.int_coords));
        Ok(out)
    }

    /// Enumeration with the default candidate cap.
    pub fn enumerate_in_box_default(&self, region: &BoxRegion) -> Result<Vec<LatticePoint>> {
        self.enumerate_in_box(region, tol::ENUM_CAP)
    }

    /// Reduce `v` modulo the lattice: returns `(fractional, representative)`
    /// with `fractional = frac(B^{-1} v)` in `[0,1)^dim` and
    /// `representative = B * fractional`. Fractional parts within
    /// [`tol::WRAP_SNAP`] of 0 or 1 collapse to exactly 0, so lattice points
    /// reduce identically no matter which side rounding lands on.
    pub fn reduce_to_fundamental(&self, v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let y = self.solve(v);
        let frac: Vec<f64> = y
            .iter()
            .map(|&c| {
                let mut f = c - c.floor();
                if 1.0 - f < tol::WRAP_SNAP || f < tol::WRAP_SNAP {
                    f = 0.0;
                }
                f
            })
            .collect();
        let rep = self.apply_real(&frac);
        (frac, rep)
    }
}

/// Golden-ratio constant used by tests and shipped example configs.
pub const PHI: f64 = 1.618033988749895;

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn golden_basis() -> LatticeBasis {
        LatticeBasis::from_columns(&[vec![1.0, 1.0], vec![PHI, -1.0 / PHI]]).unwrap()
    }

    #[test]
    fn golden_determinant_is_sqrt5() {
        let b = golden_basis();
        assert!((b.det_abs() - 5.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rejects_singular_and_non_finite() {
        let r = LatticeBasis::from_columns(&[vec![1.0, 1.0], vec![2.0, 2.0]]);
        assert!(matches!(r, Err(Error::SingularBasis { .. })));
        let r = LatticeBasis::from_columns(&[vec![f64::NAN, 0.0], vec![0.0, 1.0]]);
        assert!(matches!(r, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn dual_of_golden_matches_inverse_transpose_oracle() {
        // Oracle: hand-computed B^{-T} for B = [[1, phi], [1, -1/phi]].
        let d = golden_basis().dual();
        let s5 = 5.0f64.sqrt();
        let expect_col0 = [1.0 / (PHI * s5), PHI / s5]; // (0.2763932, 0.7236068)
        let expect_col1 = [1.0 / s5, -1.0 / s5]; // (0.4472136, -0.4472136)
        let c0 = d.column(0);
        let c1 = d.column(1);
        for (got, want) in c0.iter().zip(expect_col0).chain(c1.iter().zip(expect_col1)) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert!((d.det_abs() - 1.0 / s5).abs() < 1e-14);
    }

    #[test]
    fn dual_pairings_are_kronecker_delta() {
        let b = golden_basis();
        let d = b.dual();
        for i in 0..2 {
            for j in 0..2 {
                let dot: f64 = d.column(i).iter().zip(b.column(j)).map(|(x, y)| x * y).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dual_of_dual_is_original() {
        let b = golden_basis();
        let dd = b.dual().dual();
        for i in 0..2 {
            for j in 0..2 {
                assert!((b.entry(i, j) - dd.entry(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn enumerate_identity_box_counts_integer_grid() {
        let b = LatticeBasis::from_columns(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let region = BoxRegion::new(vec![0.0, 0.0], vec![3.0, 2.0]).unwrap();
        let pts = b.enumerate_in_box_default(&region).unwrap();
        assert_eq!(pts.len(), 12); // closed box: {0..3} x {0..2}
    }

    #[test]
    fn enumerate_golden_matches_brute_force_oracle() {
        let b = golden_basis();
        let region = BoxRegion::new(vec![0.0, -2.0], vec![10.0, 2.0]).unwrap();
        let pts = b.enumerate_in_box_default(&region).unwrap();
        // Oracle: scan all integer pairs in a generous window.
        let mut expected = Vec::new();
        for z0 in -50i64..=50 {
            for z1 in -50i64..=50 {
                let x = b.apply(&[z0, z1]);
                if region.contains(&x, tol::BOX_TIE) {
                    expected.push(vec![z0, z1]);
                }
            }
        }
        expected.sort();
        let got: Vec<Vec<i64>> = pts.iter().map(|p| p.int_coords.clone()).collect();
        assert_eq!(got, expected);
        assert!(!got.is_empty());
    }

    #[test]
    fn enumerate_respects_capacity_cap() {
        let b = golden_basis();
        let region = BoxRegion::new(vec![0.0, -2.0], vec![1000.0, 2.0]).unwrap();
        let r = b.enumerate_in_box(&region, 100);
        assert!(matches!(r, Err(Error::CapacityExceeded { .. })));
    }

    #[test]
    fn reduce_sends_lattice_points_to_zero() {
        let b = golden_basis();
        for z in [[3i64, -2], [-7, 11], [120, 77]] {
            let v = b.apply(&z);
            let (frac, rep) = b.reduce_to_fundamental(&v);
            assert!(frac.iter().all(|&f| f == 0.0), "frac {frac:?}");
            assert!(rep.iter().all(|&r| r.abs() < 1e-9));
        }
    }

    #[test]
    fn reduce_is_idempotent_and_lattice_invariant() {
        let b = golden_basis();
        let v = [0.7, -1.3];
        let (frac, rep) = b.reduce_to_fundamental(&v);
        assert!(frac.iter().all(|&f| (0.0..1.0).contains(&f)));
        // v - rep is a lattice vector
        let diff: Vec<f64> = v.iter().zip(&rep).map(|(a, b)| a - b).collect();
        let y = b.solve(&diff);
        for c in &y {
            assert!((c - c.round()).abs() < 1e-10, "non-integer {c}");
        }
        let (frac2, rep2) = b.reduce_to_fundamental(&rep);
        for (a, b) in frac.iter().zip(&frac2) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in rep.iter().zip(&rep2) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn box_volume_and_corners() {
        let region = BoxRegion::new(vec![0.0, -1.0, 2.0], vec![2.0, 1.0, 2.5]).unwrap();
        assert!((region.volume() - 2.0 * 2.0 * 0.5).abs() < 1e-15);
        assert_eq!(region.corners().len(), 8);
        assert!(BoxRegion::new(vec![1.0], vec![0.0]).is_err());
    }

    fn arb_basis(dim: usize) -> impl Strategy<Value = LatticeBasis> {
        proptest::collection::vec(proptest::collection::vec(-3.0f64..3.0, dim), dim)
            .prop_filter_map("well-conditioned", |cols| LatticeBasis::from_columns(&cols).ok())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn enumerated_points_lie_in_region(b in arb_basis(2), w0 in 0.5f64..6.0, w1 in 0.5f64..6.0) {
            let region = BoxRegion::new(vec![-w0, -w1], vec![w0, w1]).unwrap();
            let pts = b.enumerate_in_box(&region, 10_000_000).unwrap();
            for p in &pts {
                prop_assert!(region.contains(&p.point, tol::BOX_TIE));
            }
        }

        #[test]
        fn no_interior_point_is_missed(b in arb_basis(2), w in 1.0f64..5.0) {
            let region = BoxRegion::new(vec![-w, -w], vec![w, w]).unwrap();
            let pts = b.enumerate_in_box(&region, 10_000_000).unwrap();
            let found: std::collections::HashSet<Vec<i64>> =
                pts.into_iter().map(|p| p.int_coords).collect();
            for z0 in -30i64..=30 {
                for z1 in -30i64..=30 {
                    let x = b.apply(&[z0, z1]);
                    // strictly inside by a margin wider than the tie tolerance
                    let strictly_inside = x
                        .iter()
                        .zip(region.lo().iter().zip(region.hi()))
                        .all(|(v, (a, b))| *v > a + 1e-9 && *v < b - 1e-9);
                    if strictly_inside {
                        prop_assert!(found.contains(&vec![z0, z1]));
                    }
                }
            }
        }

        #[test]
        fn reduce_representative_is_equivalent(b in arb_basis(3), v in proptest::collection::vec(-10.0f64..10.0, 3)) {
            let (frac, rep) = b.reduce_to_fundamental(&v);
            prop_assert!(frac.iter().all(|&f| (0.0..1.0).contains(&f)));
            let diff: Vec<f64> = v.iter().zip(&rep).map(|(a, b)| a - b).collect();
            for c in b.solve(&diff) {
                prop_assert!((c - c.round()).abs() < 1e-8);
            }
        }
    }
}
