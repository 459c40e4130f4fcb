//! Weighted Dirac combs restricted to a physical box.
//!
//! For a torus point with canonical lift `(t, h)` the comb places, for every
//! lattice point `z` and decoration atom `(s_j, k_j, w_j)`, an atom at
//! `t + phys(z) + s_j` with weight `w_j f(int(z) + h + k_j)`. Truncation drops
//! the internal tail beyond a certified radius so the neglected total weight
//! stays below the requested budget.

use num_complex::Complex64;
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::lattice::BoxRegion;
use crate::numeric::KahanComplex;
use crate::scheme::{SchemeSpec, TorusPoint};
use crate::tol;
use crate::weights::WeightFunction;

/// One decoration site: a physical shift, an internal shift, and a complex weight.
#[derive(Debug, Clone, PartialEq)]
pub struct DecorationAtom {
    pub shift_physical: Vec<f64>,
    pub shift_internal: Vec<f64>,
    pub weight: Complex64,
}

/// A finite family of decoration sites. Shifts are stored as canonical torus
/// representatives, so families differing by lattice vectors produce the same comb.
#[derive(Debug, Clone)]
pub struct Decoration {
    atoms: Vec<DecorationAtom>,
}

impl Decoration {
    pub fn new(scheme: &SchemeSpec, atoms: Vec<DecorationAtom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidParameter("decoration needs at least one atom".into()));
        }
        let mut canonical = Vec::with_capacity(atoms.len());
        for a in &atoms {
            if a.shift_physical.len() != scheme.d() || a.shift_internal.len() != scheme.m() {
                return Err(Error::InvalidParameter(
                    "decoration shift dimensions do not match the scheme".into(),
                ));
            }
            if !a.weight.re.is_finite() || !a.weight.im.is_finite() {
                return Err(Error::InvalidParameter("decoration weight must be finite".into()));
            }
            let xi = scheme.torus_point(&a.shift_physical, &a.shift_internal);
            let lift = scheme.canonical_lift(&xi);
            let (s, k) = scheme.split(&lift);
            canonical.push(DecorationAtom {
                shift_physical: s.to_vec(),
                shift_internal: k.to_vec(),
                weight: a.weight,
            });
        }
        Ok(Decoration { atoms: canonical })
    }

    /// The undecorated comb: one atom at the origin with weight one.
    pub fn single_default(scheme: &SchemeSpec) -> Self {
        Decoration {
            atoms: vec![DecorationAtom {
                shift_physical: vec![0.0; scheme.d()],
                shift_internal: vec![0.0; scheme.m()],
                weight: Complex64::new(1.0, 0.0),
            }],
        }
    }

    pub fn atoms(&self) -> &[DecorationAtom] {
        &self.atoms
    }

    pub fn total_weight(&self) -> Complex64 {
        let mut acc = KahanComplex::default();
        for a in &self.atoms {
            acc.add(a.weight);
        }
        acc.value()
    }

    pub fn total_abs_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight.norm()).sum()
    }
}

/// A point mass of the generated comb.
#[derive(Debug, Clone, PartialEq)]
pub struct CombAtom {
    pub position: Vec<f64>,
    pub weight: Complex64,
}

/// A weighted comb restricted to a physical box, atoms sorted by position.
#[derive(Debug, Clone)]
pub struct WeightedComb {
    d: usize,
    atoms: Vec<CombAtom>,
    region: BoxRegion,
    internal_radius: f64,
    trunc_eps: f64,
    origin: TorusPoint,
}

fn generate_atoms(
    scheme: &SchemeSpec,
    f: &WeightFunction,
    deco: &Decoration,
    xi: &TorusPoint,
    region: &BoxRegion,
    trunc_eps: f64,
) -> Result<(Vec<CombAtom>, f64)> {
    let d = scheme.d();
    let m = scheme.m();
    if region.dim() != d {
        return Err(Error::InvalidParameter(format!(
            "region dimension {} does not match physical dimension {d}",
            region.dim()
        )));
    }
    if f.dim() != m {
        return Err(Error::InvalidParameter(format!(
            "weight dimension {} does not match internal dimension {m}",
            f.dim()
        )));
    }
    // neglected total weight <= trunc_eps; small boxes keep the absolute budget
    let scale = (region.volume() * deco.total_abs_weight()).max(1.0);
    let radius = f.truncation_radius(scheme, trunc_eps, scale)?;
    let lift = scheme.canonical_lift(xi);
    let (t, h) = scheme.split(&lift);

    // quantized position -> (representative, accumulated weight)
    let mut merged: std::collections::BTreeMap<Vec<i64>, (Vec<f64>, KahanComplex)> =
        std::collections::BTreeMap::new();
    for atom in deco.atoms() {
        if atom.weight.norm() == 0.0 {
            continue;
        }
        let mut shift_phys = vec![0.0; d];
        for i in 0..d {
            shift_phys[i] = t[i] + atom.shift_physical[i];
        }
        let neg_shift: Vec<f64> = shift_phys.iter().map(|v| -v).collect();
        let phys_box = region.translate(&neg_shift);
        let mut center = vec![0.0; m];
        for i in 0..m {
            center[i] = -(h[i] + atom.shift_internal[i]);
        }
        let cube = BoxRegion::centered_cube(m, radius)?.translate(&center);
        let full = phys_box.product(&cube);
        let points = scheme.basis().enumerate_in_box_default(&full)?;
        for p in points {
            let (phys, int) = scheme.split(&p.point);
            let mut arg = vec![0.0; m];
            for i in 0..m {
                arg[i] = int[i] + h[i] + atom.shift_internal[i];
            }
            let w = atom.weight * f.eval(&arg);
            if w.norm() == 0.0 {
                continue;
            }
            let mut position = vec![0.0; d];
            let mut key = vec![0i64; d];
            for i in 0..d {
                position[i] = shift_phys[i] + phys[i];
                key[i] = (position[i] / tol::POSITION_MERGE).round() as i64;
            }
            merged
                .entry(key)
                .or_insert_with(|| (position, KahanComplex::default()))
                .1
                .add(w);
        }
    }
    let atoms: Vec<CombAtom> = merged
        .into_values()
        .filter_map(|(position, acc)| {
            let weight = acc.value();
            (weight.norm() != 0.0).then_some(CombAtom { position, weight })
        })
        .collect();
    Ok((atoms, radius))
}

/// Build the comb for any admissible or sharp-window weight. Sharp windows
/// are allowed here because counting and density work stays meaningful for
/// them; spectral closed forms reject them separately.
pub fn generate_comb(
    scheme: &SchemeSpec,
    f: &WeightFunction,
    deco: &Decoration,
    xi: &TorusPoint,
    region: &BoxRegion,
    trunc_eps: f64,
) -> Result<WeightedComb> {
    let (atoms, internal_radius) = generate_atoms(scheme, f, deco, xi, region, trunc_eps)?;
    Ok(WeightedComb {
        d: scheme.d(),
        atoms,
        region: region.clone(),
        internal_radius,
        trunc_eps,
        origin: xi.clone(),
    })
}

/// Build the comb for a hull element; requires a smooth weight.
pub fn hull_element(
    scheme: &SchemeSpec,
    f: &WeightFunction,
    deco: &Decoration,
    xi: &TorusPoint,
    region: &BoxRegion,
    trunc_eps: f64,
) -> Result<WeightedComb> {
    if !f.is_smooth() {
        return Err(Error::NonSmoothWeight);
    }
    generate_comb(scheme, f, deco, xi, region, trunc_eps)
}

impl WeightedComb {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn atoms(&self) -> &[CombAtom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn region(&self) -> &BoxRegion {
        &self.region
    }

    pub fn internal_radius(&self) -> f64 {
        self.internal_radius
    }

    pub fn trunc_eps(&self) -> f64 {
        self.trunc_eps
    }

    pub fn origin(&self) -> &TorusPoint {
        &self.origin
    }

    /// The comb shifted by `t`: every atom moves, the box moves, and the
    /// origin picks up `iota(t)`.
    pub fn translate(&self, scheme: &SchemeSpec, t: &[f64]) -> WeightedComb {
        assert_eq!(t.len(), self.d, "translation has wrong dimension");
        let atoms = self
            .atoms
            .iter()
            .map(|a| CombAtom {
                position: a.position.iter().zip(t).map(|(x, ti)| x + ti).collect(),
                weight: a.weight,
            })
            .collect();
        WeightedComb {
            d: self.d,
            atoms,
            region: self.region.translate(t),
            internal_radius: self.internal_radius,
            trunc_eps: self.trunc_eps,
            origin: scheme.torus_add(&self.origin, &scheme.iota(t)),
        }
    }

    /// Sum of weights over atoms inside `region`.
    pub fn weight_sum_in(&self, region: &BoxRegion) -> Complex64 {
        let mut acc = KahanComplex::default();
        for a in &self.atoms {
            if region.contains(&a.position, tol::BOX_TIE) {
                acc.add(a.weight);
            }
        }
        acc.value()
    }

    /// CSV with one atom per row, 12 significant digits.
    pub fn write_csv<W: Write + ?Sized>(&self, out: &mut W) -> io::Result<()> {
        for i in 1..=self.d {
            write!(out, "position_{i},")?;
        }
        writeln!(out, "weight_re,weight_im")?;
        for a in &self.atoms {
            for x in &a.position {
                write!(out, "{x:.11e},")?;
            }
            writeln!(out, "{:.11e},{:.11e}", a.weight.re, a.weight.im)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{LatticeBasis, PHI};
    use crate::scheme::{validate_scheme, ValidationOptions};
    use std::f64::consts::PI;

    fn golden() -> SchemeSpec {
        let basis = LatticeBasis::from_columns(&[vec![1.0, 1.0], vec![PHI, -1.0 / PHI]]).unwrap();
        validate_scheme(1, 1, basis, &ValidationOptions::default()).unwrap()
    }

    fn gaussian() -> WeightFunction {
        WeightFunction::gaussian(1, 1.0).unwrap()
    }

    fn find_atom(comb: &WeightedComb, pos: f64) -> Option<CombAtom> {
        comb.atoms()
            .iter()
            .find(|a| (a.position[0] - pos).abs() < 1e-9)
            .cloned()
    }

    #[test]
    fn golden_comb_contains_expected_atoms() {
        let s = golden();
        let deco = Decoration::single_default(&s);
        let region = BoxRegion::new(vec![0.0], vec![3.0]).unwrap();
        let comb =
            generate_comb(&s, &gaussian(), &deco, &s.torus_zero(), &region, 1e-12).unwrap();
        // z = (0,0): position 0, weight 1
        let at0 = find_atom(&comb, 0.0).expect("origin atom");
        assert!((at0.weight.re - 1.0).abs() < 1e-14);
        // z = (1,1): position phi^2, internal 2 - phi
        let at = find_atom(&comb, PHI * PHI).expect("atom at phi^2");
        let expect = (-PI * (2.0 - PHI) * (2.0 - PHI)).exp();
        assert!((at.weight.re - expect).abs() < 1e-14, "{} vs {expect}", at.weight.re);
        // every atom sits in the box with a nonzero weight
        for a in comb.atoms() {
            assert!(region.contains(&a.position, 1e-12));
            assert!(a.weight.norm() > 0.0);
        }
        // sorted by position
        for pair in comb.atoms().windows(2) {
            assert!(pair[0].position[0] < pair[1].position[0]);
        }
    }

    #[test]
    fn comb_is_independent_of_the_chosen_lift() {
        let s = golden();
        let deco = Decoration::single_default(&s);
        let region = BoxRegion::new(vec![0.0], vec![20.0]).unwrap();
        let xi1 = s.torus_point(&[0.3], &[0.1]);
        // same torus point, lifted through the lattice image of z = (1,1)
        let xi2 = s.torus_point(&[0.3 + 1.0 + PHI], &[0.1 + 1.0 - 1.0 / PHI]);
        let c1 = generate_comb(&s, &gaussian(), &deco, &xi1, &region, 1e-12).unwrap();
        let c2 = generate_comb(&s, &gaussian(), &deco, &xi2, &region, 1e-12).unwrap();
        assert_eq!(c1.len(), c2.len());
        for (a, b) in c1.atoms().iter().zip(c2.atoms()) {
            assert!((a.position[0] - b.position[0]).abs() < 1e-9);
            assert!((a.weight - b.weight).norm() < 1e-12);
        }
    }

    #[test]
    fn translate_matches_regeneration_at_shifted_origin() {
        let s = golden();
        let deco = Decoration::single_default(&s);
        let region = BoxRegion::new(vec![0.0], vec![15.0]).unwrap();
        let xi = s.torus_point(&[0.2], &[0.05]);
        let t = 0.7;
        let base = generate_comb(&s, &gaussian(), &deco, &xi, &region, 1e-12).unwrap();
        let moved = base.translate(&s, &[t]);
        let xi_t = s.torus_add(&xi, &s.iota(&[t]));
        let direct =
            generate_comb(&s, &gaussian(), &deco, &xi_t, &region.translate(&[t]), 1e-12).unwrap();
        assert_eq!(moved.len(), direct.len());
        for (a, b) in moved.atoms().iter().zip(direct.atoms()) {
            assert!((a.position[0] - b.position[0]).abs() < 1e-9);
            assert!((a.weight - b.weight).norm() < 1e-12);
        }
    }

    #[test]
    fn cancelling_decoration_produces_empty_comb() {
        let s = golden();
        let deco = Decoration::new(
            &s,
            vec![
                DecorationAtom {
                    shift_physical: vec![0.0],
                    shift_internal: vec![0.0],
                    weight: Complex64::new(1.0, 0.0),
                },
                DecorationAtom {
                    shift_physical: vec![0.0],
                    shift_internal: vec![0.0],
                    weight: Complex64::new(-1.0, 0.0),
                },
            ],
        )
        .unwrap();
        let region = BoxRegion::new(vec![0.0], vec![10.0]).unwrap();
        let comb =
            generate_comb(&s, &gaussian(), &deco, &s.torus_zero(), &region, 1e-12).unwrap();
        assert!(comb.is_empty());
    }

    #[test]
    fn decorated_comb_places_shifted_weighted_copies() {
        let s = golden();
        let w2 = Complex64::new(0.0, 0.5);
        let deco = Decoration::new(
            &s,
            vec![
                DecorationAtom {
                    shift_physical: vec![0.0],
                    shift_internal: vec![0.0],
                    weight: Complex64::new(1.0, 0.0),
                },
                DecorationAtom {
                    shift_physical: vec![0.25],
                    shift_internal: vec![0.0],
                    weight: w2,
                },
            ],
        )
        .unwrap();
        let region = BoxRegion::new(vec![0.0], vec![5.0]).unwrap();
        let comb =
            generate_comb(&s, &gaussian(), &deco, &s.torus_zero(), &region, 1e-12).unwrap();
        let at0 = find_atom(&comb, 0.0).expect("base copy");
        assert!((at0.weight.re - 1.0).abs() < 1e-14);
        let shifted = find_atom(&comb, 0.25).expect("shifted copy");
        assert!((shifted.weight - w2).norm() < 1e-14);
        let at_phi2 = find_atom(&comb, PHI * PHI).unwrap();
        let at_phi2_shift = find_atom(&comb, PHI * PHI + 0.25).unwrap();
        assert!((at_phi2_shift.weight - w2 * at_phi2.weight).norm() < 1e-14);
    }

    #[test]
    fn zero_weight_decoration_atom_contributes_nothing() {
        let s = golden();
        let deco = Decoration::new(
            &s,
            vec![
                DecorationAtom {
                    shift_physical: vec![0.0],
                    shift_internal: vec![0.0],
                    weight: Complex64::new(1.0, 0.0),
                },
                DecorationAtom {
                    shift_physical: vec![0.33],
                    shift_internal: vec![0.0],
                    weight: Complex64::new(0.0, 0.0),
                },
            ],
        )
        .unwrap();
        let region = BoxRegion::new(vec![0.0], vec![10.0]).unwrap();
        let comb =
            generate_comb(&s, &gaussian(), &deco, &s.torus_zero(), &region, 1e-12).unwrap();
        let base = generate_comb(
            &s,
            &gaussian(),
            &Decoration::single_default(&s),
            &s.torus_zero(),
            &region,
            1e-12,
        )
        .unwrap();
        assert_eq!(comb.len(), base.len());
    }

    #[test]
    fn sharp_window_comb_counts_model_set_points() {
        let s = golden();
        let window = BoxRegion::new(vec![-0.5], vec![0.5]).unwrap();
        let f = WeightFunction::sharp_window(window).unwrap();
        let deco = Decoration::single_default(&s);
        let region = BoxRegion::new(vec![0.0], vec![100.0]).unwrap();
        let comb = generate_comb(&s, &f, &deco, &s.torus_zero(), &region, 1e-12).unwrap();
        for a in comb.atoms() {
            assert!((a.weight.re - 1.0).abs() < 1e-14);
            assert_eq!(a.weight.im, 0.0);
        }
        // expected count is about volume / det = 100 / sqrt(5) = 44.7
        assert!((40..=50).contains(&comb.len()), "count {}", comb.len());
        // hull_element rejects the sharp window
        assert!(matches!(
            hull_element(&s, &f, &deco, &s.torus_zero(), &region, 1e-12),
            Err(Error::NonSmoothWeight)
        ));
    }

    #[test]
    fn weight_sums_split_across_subregions()  {
        let s = golden();
        let deco = Decoration::single_default(&s);
        let region = BoxRegion::new(vec![0.0], vec![40.0]).unwrap();
        let comb =
            generate_comb(&s, &gaussian(), &deco, &s.torus_zero(), &region, 1e-12).unwrap();
        let left = BoxRegion::new(vec![0.0], vec![17.3]).unwrap();
        let right = BoxRegion::new(vec![17.3], vec![40.0]).unwrap();
        let total = comb.weight_sum_in(&region);
        let split = comb.weight_sum_in(&left) + comb.weight_sum_in(&right);
        assert!((total - split).norm() < 1e-12);
        assert!(total.re > 0.0);
    }

    #[test]
    fn csv_round_trips_positions_and_weights() {
        let s = golden();
        let deco = Decoration::single_default(&s);
        let region = BoxRegion::new(vec![0.0], vec![8.0]).unwrap();
        let comb =
            generate_comb(&s, &gaussian(), &deco, &s.torus_zero(), &region, 1e-12).unwrap();
        let mut buf = Vec::new();
        comb.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("position_1,weight_re,weight_im"));
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), comb.len());
        for (row, atom) in rows.iter().zip(comb.atoms()) {
            let cols: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
            assert!((cols[0] - atom.position[0]).abs() < 1e-9 * (1.0 + atom.position[0].abs()));
            assert!((cols[1] - atom.weight.re).abs() < 1e-9);
        }
    }
}
