//! Lattice-spacing bounds from observational limits on photon dispersion and
//! on the anisotropy of the speed of light.
//!
//! With `E_QG,1 = cħ/Δx` the walk's leading speed correction is
//! `Δv/c = (E/E_QG,1)·s(θ, φ)`. A dispersion limit `E_QG,1 > E_min` then gives
//! `Δx ≤ cħ/(f·E_min)` for a direction factor `f`, and a resonator limit
//! `Δc/c < ε` at wavelength `λ` gives `Δx ≤ (ε/f)·λ/2π`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::export::fmt_num;

const BUNDLED_CATALOG: &str = include_str!("../data/experiments.json");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("record {id}: the walk's leading correction is linear; order {order} is not predicted")]
    UnsupportedOrder { id: String, order: u8 },
    #[error("record {0}: anisotropy record has no wavelength")]
    MissingWavelength(String),
    #[error("record {id}: expected a {expected} record")]
    WrongKind { id: String, expected: &'static str },
    #[error("factor {0} must be positive and finite")]
    InvalidFactor(f64),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("record {id}: violates `{invariant}`")]
    Validation { id: String, invariant: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

/// Physical constants used to convert to metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// `cħ` in GeV·m.
    pub hbar_c: f64,
    /// Planck length in m.
    pub planck_length: f64,
    /// m/s.
    pub speed_of_light: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            hbar_c: 1.973_269_804e-16,
            planck_length: 1.6e-35,
            speed_of_light: 2.997_924_58e8,
        }
    }
}

impl PhysicalConstants {
    /// `cħ ≈ 2×10⁻⁷ eV·m`, the rounded value of the original estimate.
    pub fn rounded() -> Self {
        Self {
            hbar_c: 2.0e-16,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), BoundsError> {
        for (name, v) in [
            ("hbar_c > 0", self.hbar_c),
            ("planck_length > 0", self.planck_length),
            ("speed_of_light > 0", self.speed_of_light),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(BoundsError::Validation {
                    id: "constants".into(),
                    invariant: name.into(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Dispersion,
    Anisotropy,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Dispersion => "dispersion",
            ExperimentKind::Anisotropy => "anisotropy",
        }
    }
}

/// An observational constraint. Dispersion records carry `e_qg_lower_bound`
/// (GeV), `liv_order` and `sign` (`+1` subluminal, `-1` superluminal);
/// anisotropy records carry `delta_c_over_c` and `wavelength` (m).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentRecord {
    pub id: String,
    pub kind: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_qg_lower_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub liv_order: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign: Option<i8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_c_over_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavelength: Option<f64>,
    #[serde(default)]
    pub source: String,
}

fn positive(v: Option<f64>) -> bool {
    matches!(v, Some(x) if x.is_finite() && x > 0.0)
}

impl ExperimentRecord {
    pub fn dispersion(id: &str, e_qg_lower_bound: f64, liv_order: u8, sign: i8) -> Self {
        Self {
            id: id.into(),
            kind: ExperimentKind::Dispersion,
            e_qg_lower_bound: Some(e_qg_lower_bound),
            liv_order: Some(liv_order),
            sign: Some(sign),
            delta_c_over_c: None,
            wavelength: None,
            source: String::new(),
        }
    }

    pub fn anisotropy(id: &str, delta_c_over_c: f64, wavelength: f64) -> Self {
        Self {
            id: id.into(),
            kind: ExperimentKind::Anisotropy,
            e_qg_lower_bound: None,
            liv_order: None,
            sign: None,
            delta_c_over_c: Some(delta_c_over_c),
            wavelength: Some(wavelength),
            source: String::new(),
        }
    }

    pub fn validate(&self) -> Result<(), BoundsError> {
        let fail = |invariant: &str| {
            Err(BoundsError::Validation {
                id: self.id.clone(),
                invariant: invariant.into(),
            })
        };
        if self.id.is_empty() {
            return fail("id is non-empty");
        }
        match self.kind {
            ExperimentKind::Dispersion => {
                if !positive(self.e_qg_lower_bound) {
                    return fail("e_qg_lower_bound > 0");
                }
                if !matches!(self.liv_order, Some(1 | 2)) {
                    return fail("liv_order ∈ {1, 2}");
                }
                if !matches!(self.sign, Some(1 | -1)) {
                    return fail("sign ∈ {+1, -1}");
                }
            }
            ExperimentKind::Anisotropy => {
                if !positive(self.delta_c_over_c) {
                    return fail("delta_c_over_c > 0");
                }
                if !positive(self.wavelength) {
                    return fail("wavelength > 0");
                }
            }
        }
        Ok(())
    }
}

/// Which direction factor converted the record into a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `√(∫s² dΩ) = √(4π/105)`.
    PaperRms,
    /// `√⟨s²⟩ = 1/√105`.
    UnitAverageRms,
    /// `max s - min s = 2/(3√3)`.
    MaxSpread,
    Custom,
}

impl Normalization {
    pub fn as_str(self) -> &'static str {
        match self {
            Normalization::PaperRms => "paper_rms",
            Normalization::UnitAverageRms => "unit_average_rms",
            Normalization::MaxSpread => "max_spread",
            Normalization::Custom => "custom",
        }
    }
}

pub fn paper_rms_factor() -> f64 {
    (4.0 * std::f64::consts::PI / 105.0).sqrt()
}

pub fn unit_average_rms_factor() -> f64 {
    (1.0 / 105.0f64).sqrt()
}

pub fn max_spread_factor() -> f64 {
    2.0 / (3.0 * 3f64.sqrt())
}

fn classify_rms(f: f64) -> Normalization {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-3 * b;
    if close(f, paper_rms_factor()) {
        Normalization::PaperRms
    } else if close(f, unit_average_rms_factor()) {
        Normalization::UnitAverageRms
    } else {
        Normalization::Custom
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputsEcho {
    pub record: ExperimentRecord,
    pub constants: PhysicalConstants,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundResult {
    pub experiment_id: String,
    pub kind: ExperimentKind,
    /// m.
    pub delta_x_upper_bound: f64,
    pub ratio_to_planck: f64,
    pub normalization_used: Normalization,
    pub factor: f64,
    /// Anisotropy only: `true` when the factor multiplies rather than divides.
    pub paper_compat: bool,
    /// Anisotropy only: the other reading of the factor, reported when it
    /// differs from the chosen bound by more than 1%.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alternate_delta_x_upper_bound: Option<f64>,
    pub inputs_echo: InputsEcho,
}

fn check_factor(f: f64) -> Result<(), BoundsError> {
    if !(f.is_finite() && f > 0.0) {
        return Err(BoundsError::InvalidFactor(f));
    }
    Ok(())
}

/// `Δx ≤ cħ/(rms_factor · E_QG,1)`.
pub fn dispersion_bound(
    record: &ExperimentRecord,
    constants: &PhysicalConstants,
    rms_factor: f64,
) -> Result<BoundResult, BoundsError> {
    if record.kind != ExperimentKind::Dispersion {
        return Err(BoundsError::WrongKind {
            id: record.id.clone(),
            expected: "dispersion",
        });
    }
    record.validate()?;
    constants.validate()?;
    check_factor(rms_factor)?;
    let order = record.liv_order.unwrap_or(0);
    if order != 1 {
        return Err(BoundsError::UnsupportedOrder {
            id: record.id.clone(),
            order,
        });
    }
    let e_qg = record.e_qg_lower_bound.expect("validated");
    let dx = constants.hbar_c / (rms_factor * e_qg);
    Ok(BoundResult {
        experiment_id: record.id.clone(),
        kind: record.kind,
        delta_x_upper_bound: dx,
        ratio_to_planck: dx / constants.planck_length,
        normalization_used: classify_rms(rms_factor),
        factor: rms_factor,
        paper_compat: false,
        alternate_delta_x_upper_bound: None,
        inputs_echo: InputsEcho {
            record: record.clone(),
            constants: *constants,
        },
    })
}

/// Resonator bound. From first principles `Δx ≤ (Δc/c / f)·λ/2π`; with
/// `paper_compat` the factor multiplies instead, `Δx ≤ (Δc/c · f)·λ/2π`.
pub fn anisotropy_bound(
    record: &ExperimentRecord,
    constants: &PhysicalConstants,
    spread_factor: f64,
    paper_compat: bool,
) -> Result<BoundResult, BoundsError> {
    if record.kind != ExperimentKind::Anisotropy {
        return Err(BoundsError::WrongKind {
            id: record.id.clone(),
            expected: "anisotropy",
        });
    }
    let wavelength = record
        .wavelength
        .ok_or_else(|| BoundsError::MissingWavelength(record.id.clone()))?;
    record.validate()?;
    constants.validate()?;
    check_factor(spread_factor)?;
    let eps = record.delta_c_over_c.expect("validated");
    let reduced = wavelength / (2.0 * std::f64::consts::PI);
    let derived = eps / spread_factor * reduced;
    let compat = eps * spread_factor * reduced;
    let (chosen, other) = if paper_compat {
        (compat, derived)
    } else {
        (derived, compat)
    };
    let alternate = ((chosen - other).abs() > 0.01 * chosen).then_some(other);
    Ok(BoundResult {
        experiment_id: record.id.clone(),
        kind: record.kind,
        delta_x_upper_bound: chosen,
        ratio_to_planck: chosen / constants.planck_length,
        normalization_used: Normalization::MaxSpread,
        factor: spread_factor,
        paper_compat,
        alternate_delta_x_upper_bound: alternate,
        inputs_echo: InputsEcho {
            record: record.clone(),
            constants: *constants,
        },
    })
}

/// Arrival-time difference (s) of photons at `e_high` and `e_low` (GeV)
/// after `distance` metres of flat space. Positive means the
/// higher-energy photon is late.
pub fn time_lag(
    distance: f64,
    e_high: f64,
    e_low: f64,
    e_qg: f64,
    order: u8,
    sign: i8,
) -> Result<f64, BoundsError> {
    let fail = |invariant: &str| {
        Err(BoundsError::Validation {
            id: "time_lag".into(),
            invariant: invariant.into(),
        })
    };
    if !(distance > 0.0) {
        return fail("distance > 0");
    }
    if !(e_high >= e_low && e_low >= 0.0) {
        return fail("e_high ≥ e_low ≥ 0");
    }
    if !(e_qg > 0.0) {
        return fail("e_qg > 0");
    }
    if !matches!(order, 1 | 2) {
        return fail("order ∈ {1, 2}");
    }
    if !matches!(sign, 1 | -1) {
        return fail("sign ∈ {+1, -1}");
    }
    let n = order as i32;
    let c = PhysicalConstants::default().speed_of_light;
    let spread = (e_high.powi(n) - e_low.powi(n)) / e_qg.powi(n);
    Ok(sign as f64 * (distance / c) * (n as f64 + 1.0) / 2.0 * spread)
}

/// Parse and validate a JSON catalog.
pub fn parse_experiments(text: &str) -> Result<Vec<ExperimentRecord>, BoundsError> {
    let records: Vec<ExperimentRecord> =
        serde_json::from_str(text).map_err(|e| BoundsError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
    for r in &records {
        r.validate()?;
    }
    Ok(records)
}

pub fn load_experiments(path: impl AsRef<Path>) -> Result<Vec<ExperimentRecord>, BoundsError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| BoundsError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_experiments(&text)
}

/// The shipped catalog of dispersion and resonator limits.
pub fn bundled_catalog() -> Vec<ExperimentRecord> {
    parse_experiments(BUNDLED_CATALOG).expect("bundled catalog is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsOptions {
    /// Direction factor for dispersion records.
    pub rms_normalization: Normalization,
    pub spread_factor: f64,
    pub paper_compat: bool,
}

impl Default for BoundsOptions {
    fn default() -> Self {
        Self {
            rms_normalization: Normalization::PaperRms,
            spread_factor: max_spread_factor(),
            paper_compat: true,
        }
    }
}

impl BoundsOptions {
    pub fn rms_factor(&self) -> f64 {
        match self.rms_normalization {
            Normalization::UnitAverageRms => unit_average_rms_factor(),
            _ => paper_rms_factor(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum CatalogEntry {
    Bound(BoundResult),
    Unsupported {
        experiment_id: String,
        kind: ExperimentKind,
        status: &'static str,
        reason: String,
    },
}

impl CatalogEntry {
    pub fn id(&self) -> &str {
        match self {
            CatalogEntry::Bound(b) => &b.experiment_id,
            CatalogEntry::Unsupported { experiment_id, .. } => experiment_id,
        }
    }

    pub fn bound(&self) -> Option<&BoundResult> {
        match self {
            CatalogEntry::Bound(b) => Some(b),
            CatalogEntry::Unsupported { .. } => None,
        }
    }
}

/// Convert every record. Numeric bounds come first, tightest first; records
/// the model cannot convert follow in input order.
pub fn run_catalog(
    records: &[ExperimentRecord],
    constants: &PhysicalConstants,
    options: &BoundsOptions,
) -> Result<Vec<CatalogEntry>, BoundsError> {
    let mut bounds = Vec::new();
    let mut unsupported = Vec::new();
    for r in records {
        let result = match r.kind {
            ExperimentKind::Dispersion => dispersion_bound(r, constants, options.rms_factor()),
            ExperimentKind::Anisotropy => {
                anisotropy_bound(r, constants, options.spread_factor, options.paper_compat)
            }
        };
        match result {
            Ok(b) => bounds.push(b),
            Err(e @ BoundsError::UnsupportedOrder { .. }) => {
                unsupported.push(CatalogEntry::Unsupported {
                    experiment_id: r.id.clone(),
                    kind: r.kind,
                    status: "unsupported_by_model",
                    reason: e.to_string(),
                })
            }
            Err(e) => return Err(e),
        }
    }
    bounds.sort_by(|a, b| a.delta_x_upper_bound.total_cmp(&b.delta_x_upper_bound));
    Ok(bounds
        .into_iter()
        .map(CatalogEntry::Bound)
        .chain(unsupported)
        .collect())
}

/// `id,kind,delta_x_m,ratio_to_planck,normalization`.
pub fn catalog_csv(entries: &[CatalogEntry]) -> String {
    let mut out = String::from("id,kind,delta_x_m,ratio_to_planck,normalization\n");
    for e in entries {
        match e {
            CatalogEntry::Bound(b) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    b.experiment_id,
                    b.kind.as_str(),
                    fmt_num(b.delta_x_upper_bound),
                    fmt_num(b.ratio_to_planck),
                    b.normalization_used.as_str()
                );
            }
            CatalogEntry::Unsupported {
                experiment_id,
                kind,
                status,
                ..
            } => {
                let _ = writeln!(out, "{},{},,,{}", experiment_id, kind.as_str(), status);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn linear_grb_bound() {
        let r = ExperimentRecord::dispersion("grb", 1e20, 1, 1);
        let b = dispersion_bound(&r, &PhysicalConstants::default(), 0.346).unwrap();
        assert!(rel(b.delta_x_upper_bound, 5.70e-36) < 1e-3);
        assert!(rel(b.delta_x_upper_bound, 5.8e-36) < 0.02);
        assert_eq!(b.normalization_used, Normalization::PaperRms);
    }

    #[test]
    fn superluminal_record() {
        let r = ExperimentRecord::dispersion("grb-super", 1.1e20, 1, -1);
        let b = dispersion_bound(&r, &PhysicalConstants::default(), 0.346).unwrap();
        assert!(rel(b.delta_x_upper_bound, 5.1845e-36) < 1e-4);
    }

    #[test]
    fn unit_factor_inverts() {
        let c = PhysicalConstants::default();
        let r = ExperimentRecord::dispersion("unit", c.hbar_c, 1, 1);
        let b = dispersion_bound(&r, &c, 1.0).unwrap();
        assert!((b.delta_x_upper_bound - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quadratic_is_unsupported() {
        let r = ExperimentRecord::dispersion("quad", 6.9e11, 2, 1);
        assert!(matches!(
            dispersion_bound(&r, &PhysicalConstants::default(), 0.346),
            Err(BoundsError::UnsupportedOrder { order: 2, .. })
        ));
    }

    #[test]
    fn resonator_bound_both_readings() {
        let r = ExperimentRecord::anisotropy("ir", 1e-18, 1e-6);
        let c = PhysicalConstants::default();
        let compat = anisotropy_bound(&r, &c, max_spread_factor(), true).unwrap();
        assert!(rel(compat.delta_x_upper_bound, 6.13e-26) < 1e-3);
        assert!(rel(compat.delta_x_upper_bound, 6.5e-26) < 0.10);
        let derived = anisotropy_bound(&r, &c, max_spread_factor(), false).unwrap();
        assert!(rel(derived.delta_x_upper_bound, 4.135e-25) < 1e-3);
        assert_eq!(
            compat.alternate_delta_x_upper_bound,
            Some(derived.delta_x_upper_bound)
        );
    }

    #[test]
    fn microwave_is_looser_by_wavelength_ratio() {
        let c = PhysicalConstants::default();
        let ir = anisotropy_bound(&ExperimentRecord::anisotropy("a", 1e-18, 1e-6), &c, 0.385, false)
            .unwrap();
        let mw = anisotropy_bound(&ExperimentRecord::anisotropy("b", 1e-18, 2e-2), &c, 0.385, false)
            .unwrap();
        assert!(rel(mw.delta_x_upper_bound / ir.delta_x_upper_bound, 2e4) < 1e-12);
    }

    #[test]
    fn missing_wavelength() {
        let mut r = ExperimentRecord::anisotropy("nowl", 1e-18, 1e-6);
        r.wavelength = None;
        assert_eq!(
            anisotropy_bound(&r, &PhysicalConstants::default(), 0.385, false),
            Err(BoundsError::MissingWavelength("nowl".into()))
        );
    }

    #[test]
    fn time_lag_examples() {
        let c = PhysicalConstants::default().speed_of_light;
        assert_eq!(time_lag(c, 1.0, 1.0, 1e20, 1, 1).unwrap(), 0.0);
        let t = time_lag(c, 1.0, 0.0, 1e20, 1, 1).unwrap();
        assert!(rel(t, 1e-20) < 1e-15);
        let t2 = time_lag(c, 1.0, 0.0, 2e20, 1, 1).unwrap();
        assert!(rel(t2, t / 2.0) < 1e-15);
        assert!(time_lag(c, 1.0, 0.0, 1e20, 1, -1).unwrap() < 0.0);
        assert!(time_lag(-1.0, 1.0, 0.0, 1e20, 1, 1).is_err());
    }

    #[test]
    fn negative_bound_fails_validation() {
        let text = r#"[{"id":"bad","kind":"dispersion","e_qg_lower_bound":-1.0,"liv_order":1,"sign":1,"source":""}]"#;
        assert!(matches!(
            parse_experiments(text),
            Err(BoundsError::Validation { .. })
        ));
    }

    #[test]
    fn parse_error_has_position() {
        let text = "[\n  {\"id\": \"x\",\n   \"kind\": \"dispersion\" \"oops\"}\n]";
        match parse_experiments(text) {
            Err(BoundsError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_catalog() {
        let out = run_catalog(&[], &PhysicalConstants::default(), &BoundsOptions::default()).unwrap();
        assert!(out.is_empty());
    }
}
