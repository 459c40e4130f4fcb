//! Run configuration: a single JSON document describing the scheme, the
//! weight, optional decoration, averaging boxes, thresholds, and output.
//! Unknown fields are rejected so typos fail loudly.

use num_complex::Complex64;
use serde::Deserialize;
use std::path::Path;

use crate::comb::{Decoration, DecorationAtom};
use crate::error::{Error, Result};
use crate::lattice::{BoxRegion, LatticeBasis};
use crate::scheme::{validate_scheme, SchemeSpec, TorusPoint, ValidationOptions};
use crate::spectral::compare::CompareSettings;
use crate::spectral::BoxSequence;
use crate::weights::WeightFunction;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("config field `{field}`: {message}")]
    Invalid { field: String, message: String },
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scheme: SchemeConfig,
    pub weight: WeightConfig,
    #[serde(default)]
    pub decoration: Option<DecorationConfig>,
    #[serde(default)]
    pub origin: Option<OriginConfig>,
    #[serde(default)]
    pub boxes: Option<BoxesConfig>,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub ranges: Ranges,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub d: usize,
    pub m: usize,
    /// Rows of the basis matrix; the lattice generators are its columns.
    pub basis_rows: Vec<Vec<f64>>,
    #[serde(default)]
    pub validation: ValidationConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationConfig {
    #[serde(default = "default_search_radius")]
    pub search_radius: i64,
    #[serde(default = "default_coverage_eps")]
    pub coverage_eps: f64,
}

fn default_search_radius() -> i64 {
    100
}

fn default_coverage_eps() -> f64 {
    0.05
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            search_radius: default_search_radius(),
            coverage_eps: default_coverage_eps(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayCertConfig {
    pub c: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightConfig {
    Gaussian {
        width: f64,
        #[serde(default)]
        decay_cert: Option<DecayCertConfig>,
    },
    Bump {
        radius: f64,
        #[serde(default)]
        decay_cert: Option<DecayCertConfig>,
    },
    PolyDecay {
        exponent: f64,
        scale: f64,
        #[serde(default)]
        decay_cert: Option<DecayCertConfig>,
    },
    SharpWindow {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    Tensor {
        factors: Vec<WeightConfig>,
        #[serde(default)]
        decay_cert: Option<DecayCertConfig>,
    },
    Scaled {
        factor: [f64; 2],
        inner: Box<WeightConfig>,
        #[serde(default)]
        decay_cert: Option<DecayCertConfig>,
    },
    Translated {
        offset: Vec<f64>,
        inner: Box<WeightConfig>,
        #[serde(default)]
        decay_cert: Option<DecayCertConfig>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecorationConfig {
    pub atoms: Vec<DecorationAtomConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecorationAtomConfig {
    pub s: Vec<f64>,
    pub k: Vec<f64>,
    /// Complex weight as `[re, im]`.
    pub w: [f64; 2],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OriginConfig {
    pub s: Vec<f64>,
    pub k: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxesConfig {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    #[serde(default = "default_growth")]
    pub growth: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
}

fn default_growth() -> f64 {
    10.0
}

fn default_steps() -> usize {
    3
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    pub eps_trunc: f64,
    pub quad_tol: f64,
    pub match_tol: f64,
    pub intensity_floor: f64,
    pub internal_cut: Option<f64>,
    pub autocorr_internal_cut: Option<f64>,
    pub almost_period_eps: f64,
    pub kernel_scale: f64,
    pub almost_delta: Option<f64>,
    pub max_candidates: usize,
    pub dual_search_radius: i64,
    pub top_n_peaks: usize,
    pub top_n_autocorr: usize,
    pub density_rel_tol: f64,
    pub autocorr_rel_tol: f64,
    pub diffraction_rel_tol: f64,
    pub uniformity_probes: usize,
    pub seed: u64,
    pub workers: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            eps_trunc: 1e-12,
            quad_tol: 1e-9,
            match_tol: 1e-6,
            intensity_floor: 1e-8,
            internal_cut: None,
            autocorr_internal_cut: None,
            almost_period_eps: 1e-3,
            kernel_scale: 150.0,
            almost_delta: None,
            max_candidates: 64,
            dual_search_radius: 8,
            top_n_peaks: 10,
            top_n_autocorr: 15,
            density_rel_tol: 0.01,
            autocorr_rel_tol: 0.02,
            diffraction_rel_tol: 0.03,
            uniformity_probes: 10,
            seed: 2026,
            workers: 8,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeConfig {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Ranges {
    pub k_range: Option<RangeConfig>,
    pub displacement_range: Option<RangeConfig>,
    pub almost_period_search: Option<RangeConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
    pub formats: Vec<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: "out".into(), formats: vec!["csv".into(), "json".into()] }
    }
}

impl RunConfig {
    pub fn parse_str(text: &str) -> std::result::Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> std::result::Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_str(&text)
    }

    /// Structural checks that do not need the numerics: dimensions line up
    /// and the output formats are known.
    fn check(&self) -> std::result::Result<(), ConfigError> {
        let d = self.scheme.d;
        let m = self.scheme.m;
        let n = d + m;
        if self.scheme.basis_rows.len() != n
            || self.scheme.basis_rows.iter().any(|r| r.len() != n)
        {
            return Err(ConfigError::Invalid {
                field: "scheme.basis_rows".into(),
                message: format!("expected a {n} x {n} matrix for d = {d}, m = {m}"),
            });
        }
        if let Some(deco) = &self.decoration {
            for (i, a) in deco.atoms.iter().enumerate() {
                if a.s.len() != d || a.k.len() != m {
                    return Err(ConfigError::Invalid {
                        field: format!("decoration.atoms[{i}]"),
                        message: format!("s must have length {d} and k length {m}"),
                    });
                }
            }
        }
        if let Some(origin) = &self.origin {
            if origin.s.len() != d || origin.k.len() != m {
                return Err(ConfigError::Invalid {
                    field: "origin".into(),
                    message: format!("s must have length {d} and k length {m}"),
                });
            }
        }
        if let Some(boxes) = &self.boxes {
            if boxes.lo.len() != d || boxes.hi.len() != d {
                return Err(ConfigError::Invalid {
                    field: "boxes".into(),
                    message: format!("lo and hi must have length {d}"),
                });
            }
        }
        for (name, r) in [
            ("ranges.k_range", &self.ranges.k_range),
            ("ranges.displacement_range", &self.ranges.displacement_range),
            ("ranges.almost_period_search", &self.ranges.almost_period_search),
        ] {
            if let Some(r) = r {
                if r.lo.len() != d || r.hi.len() != d {
                    return Err(ConfigError::Invalid {
                        field: name.into(),
                        message: format!("lo and hi must have length {d}"),
                    });
                }
            }
        }
        for fmt in &self.output.formats {
            if fmt != "csv" && fmt != "json" {
                return Err(ConfigError::Invalid {
                    field: "output.formats".into(),
                    message: format!("unknown format `{fmt}`; expected csv or json"),
                });
            }
        }
        Ok(())
    }

    pub fn build_scheme(&self) -> Result<SchemeSpec> {
        let basis = LatticeBasis::from_rows(&self.scheme.basis_rows)?;
        let opts = ValidationOptions {
            search_radius: self.scheme.validation.search_radius,
            coverage_eps: self.scheme.validation.coverage_eps,
        };
        validate_scheme(self.scheme.d, self.scheme.m, basis, &opts)
    }

    pub fn build_weight(&self) -> Result<WeightFunction> {
        build_weight_config(&self.weight, self.scheme.m)
    }

    pub fn build_decoration(&self, scheme: &SchemeSpec) -> Result<Decoration> {
        match &self.decoration {
            None => Ok(Decoration::single_default(scheme)),
            Some(cfg) => {
                let atoms = cfg
                    .atoms
                    .iter()
                    .map(|a| DecorationAtom {
                        shift_physical: a.s.clone(),
                        shift_internal: a.k.clone(),
                        weight: Complex64::new(a.w[0], a.w[1]),
                    })
                    .collect();
                Decoration::new(scheme, atoms)
            }
        }
    }

    pub fn build_origin(&self, scheme: &SchemeSpec) -> TorusPoint {
        match &self.origin {
            None => scheme.torus_zero(),
            Some(o) => scheme.torus_point(&o.s, &o.k),
        }
    }

    pub fn build_boxes(&self) -> Result<BoxSequence> {
        let d = self.scheme.d;
        let (lo, hi, growth, steps) = match &self.boxes {
            Some(b) => (b.lo.clone(), b.hi.clone(), b.growth, b.steps),
            None => (vec![0.0; d], vec![100.0; d], default_growth(), default_steps()),
        };
        let base = BoxRegion::new(lo, hi)?;
        BoxSequence::geometric(&base, growth, steps)
    }

    pub fn k_range(&self) -> Result<BoxRegion> {
        match &self.ranges.k_range {
            Some(r) => BoxRegion::new(r.lo.clone(), r.hi.clone()),
            None => BoxRegion::centered_cube(self.scheme.d, 10.0),
        }
    }

    pub fn displacement_range(&self) -> Result<BoxRegion> {
        match &self.ranges.displacement_range {
            Some(r) => BoxRegion::new(r.lo.clone(), r.hi.clone()),
            None => BoxRegion::centered_cube(self.scheme.d, 50.0),
        }
    }

    pub fn almost_period_search(&self) -> Result<BoxRegion> {
        match &self.ranges.almost_period_search {
            Some(r) => BoxRegion::new(r.lo.clone(), r.hi.clone()),
            None => BoxRegion::new(vec![0.0; self.scheme.d], vec![500.0; self.scheme.d]),
        }
    }

    pub fn compare_settings(&self, scheme: &SchemeSpec) -> Result<CompareSettings> {
        let mut settings = CompareSettings::defaults(scheme);
        settings.region = self.build_boxes()?.largest().clone();
        settings.displacement_range = self.displacement_range()?;
        settings.k_range = self.k_range()?;
        let t = &self.thresholds;
        settings.trunc_eps = t.eps_trunc;
        settings.quad_tol = t.quad_tol;
        settings.match_tol = t.match_tol;
        settings.intensity_floor = t.intensity_floor;
        settings.internal_cut = t.internal_cut;
        settings.autocorr_internal_cut = t.autocorr_internal_cut;
        settings.top_n_autocorr = t.top_n_autocorr;
        settings.top_n_peaks = t.top_n_peaks;
        settings.density_rel_tol = t.density_rel_tol;
        settings.autocorr_rel_tol = t.autocorr_rel_tol;
        settings.diffraction_rel_tol = t.diffraction_rel_tol;
        settings.uniformity_probes = t.uniformity_probes;
        settings.seed = t.seed;
        settings.workers = t.workers;
        Ok(settings)
    }
}

fn build_weight_config(cfg: &WeightConfig, m: usize) -> Result<WeightFunction> {
    let apply_cert = |w: WeightFunction, cert: &Option<DecayCertConfig>| match cert {
        None => Ok(w),
        Some(c) => w.with_decay_cert(c.c, c.alpha),
    };
    match cfg {
        WeightConfig::Gaussian { width, decay_cert } => {
            apply_cert(WeightFunction::gaussian(m, *width)?, decay_cert)
        }
        WeightConfig::Bump { radius, decay_cert } => {
            apply_cert(WeightFunction::bump(m, *radius)?, decay_cert)
        }
        WeightConfig::PolyDecay { exponent, scale, decay_cert } => {
            apply_cert(WeightFunction::poly_decay(m, *exponent, *scale)?, decay_cert)
        }
        WeightConfig::SharpWindow { lo, hi } => {
            if lo.len() != m || hi.len() != m {
                return Err(Error::InvalidParameter(format!(
                    "sharp window bounds must have length {m}"
                )));
            }
            WeightFunction::sharp_window(BoxRegion::new(lo.clone(), hi.clone())?)
        }
        WeightConfig::Tensor { factors, decay_cert } => {
            if factors.len() != m {
                return Err(Error::InvalidParameter(format!(
                    "tensor needs exactly {m} one-dimensional factors"
                )));
            }
            let built = factors
                .iter()
                .map(|f| build_weight_config(f, 1))
                .collect::<Result<Vec<_>>>()?;
            apply_cert(WeightFunction::tensor(built)?, decay_cert)
        }
        WeightConfig::Scaled { factor, inner, decay_cert } => {
            let inner = build_weight_config(inner, m)?;
            apply_cert(
                WeightFunction::scaled(Complex64::new(factor[0], factor[1]), inner)?,
                decay_cert,
            )
        }
        WeightConfig::Translated { offset, inner, decay_cert } => {
            let inner = build_weight_config(inner, m)?;
            apply_cert(WeightFunction::translated(offset.clone(), inner)?, decay_cert)
        }
    }
}
