use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{C64, DIM};
use crate::momentum::{positive_energy_projector, wrap_to_zone, Helicity, ReducedMomentum};

use super::{Basis, Lattice, LatticeError, LatticeState};

/// Projections shorter than this are discarded when building eigenvectors.
const NULL_PROJECTION: f64 = 1e-6;

/// Unit positive-energy eigenvector of `U_κ` in the given helicity sector.
///
/// Canonical basis vectors of the sector are projected in index order and the
/// longest projection is kept. The global phase makes the first component of
/// modulus above 1e-8 real and positive.
pub fn positive_energy_vector(
    kappa: &ReducedMomentum,
    helicity: Helicity,
) -> Result<[C64; DIM], LatticeError> {
    let (projector, _) = positive_energy_projector(kappa, helicity)?;
    let mut best: Option<([C64; DIM], f64)> = None;
    for i in helicity.internal_range() {
        let mut e = [C64::new(0.0, 0.0); DIM];
        e[i] = C64::new(1.0, 0.0);
        let v = projector.mul_vec(&e);
        let len = norm(&v);
        if len < NULL_PROJECTION {
            continue;
        }
        if best.is_none_or(|(_, l)| len > l) {
            best = Some((v, len));
        }
    }
    let (v, len) = best.ok_or_else(|| {
        LatticeError::SpecViolation(format!("no positive-energy vector at κ = {kappa:?}"))
    })?;
    Ok(fix_phase(v.map(|z| z / len)))
}

fn norm(v: &[C64; DIM]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn fix_phase(v: [C64; DIM]) -> [C64; DIM] {
    match v.iter().find(|z| z.norm() > 1e-8) {
        Some(z) => {
            let rot = z.conj() / z.norm();
            v.map(|c| c * rot)
        }
        None => v,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PacketShape {
    /// Uniform square pulse of `span + 1` modes per axis centred on the
    /// (grid-snapped) central momentum. `span` is even.
    Sinc { span: u32 },
    /// Amplitudes `e^{-|k-k₀|²/4σ²}`, renormalized on the grid.
    Gaussian { sigma: f64 },
}

/// How the internal state varies across the packet's modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum InternalProfile {
    /// The central mode's eigenvector on every mode.
    #[default]
    Frozen,
    /// The central eigenvector projected onto each mode's own positive-energy
    /// eigenvector, keeping the packet on a single branch.
    PerMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavePacketSpec {
    pub shape: PacketShape,
    pub center_momentum: ReducedMomentum,
    pub center_position: [i64; 3],
    pub helicity: Helicity,
    pub internal: InternalProfile,
}

impl WavePacketSpec {
    pub fn gaussian(center_momentum: ReducedMomentum, center_position: [i64; 3], sigma: f64) -> Self {
        Self {
            shape: PacketShape::Gaussian { sigma },
            center_momentum,
            center_position,
            helicity: Helicity::Up,
            internal: InternalProfile::Frozen,
        }
    }

    pub fn sinc(center_momentum: ReducedMomentum, center_position: [i64; 3], span: u32) -> Self {
        Self {
            shape: PacketShape::Sinc { span },
            center_momentum,
            center_position,
            helicity: Helicity::Up,
            internal: InternalProfile::Frozen,
        }
    }

    pub fn with_internal(mut self, internal: InternalProfile) -> Self {
        self.internal = internal;
        self
    }

    pub fn with_helicity(mut self, helicity: Helicity) -> Self {
        self.helicity = helicity;
        self
    }

    pub fn validate(&self, lattice: &Lattice) -> Result<(), LatticeError> {
        let n = lattice.n();
        match self.shape {
            PacketShape::Sinc { span } => {
                if span % 2 != 0 {
                    return Err(LatticeError::SpecViolation(format!(
                        "sinc span {span} must be even"
                    )));
                }
                if (span as usize + 1) * 4 > n {
                    return Err(LatticeError::SpecViolation(format!(
                        "sinc span {span}: span + 1 must not exceed n/4 = {}",
                        n / 4
                    )));
                }
            }
            PacketShape::Gaussian { sigma } => {
                let lower = 4.0 * PI / n as f64;
                if !(sigma.is_finite() && sigma > 0.0) {
                    return Err(LatticeError::SpecViolation(format!(
                        "gaussian σ = {sigma} must be positive"
                    )));
                }
                if sigma > PI / 8.0 * (1.0 + 1e-12) || sigma < lower * (1.0 - 1e-12) {
                    return Err(LatticeError::SpecViolation(format!(
                        "gaussian σ = {sigma} outside [{lower}, {}]",
                        PI / 8.0
                    )));
                }
            }
        }
        Ok(())
    }

    /// The packet's central momentum as it is realized on the lattice.
    pub fn effective_center(&self, lattice: &Lattice) -> ReducedMomentum {
        match self.shape {
            PacketShape::Sinc { .. } => {
                let labels = self.snapped_labels(lattice);
                ReducedMomentum::from_array(
                    labels.map(|l| 2.0 * PI * l as f64 / lattice.n() as f64),
                )
            }
            PacketShape::Gaussian { .. } => self.center_momentum,
        }
    }

    fn snapped_labels(&self, lattice: &Lattice) -> [i64; 3] {
        let n = lattice.n() as f64;
        self.center_momentum.as_array().map(|k| {
            let l = (k * n / (2.0 * PI)).round() as i64;
            lattice.signed_label(lattice.storage_index(l))
        })
    }
}

/// Build the packet in the momentum basis.
pub fn make_wavepacket(
    lattice: &Lattice,
    spec: &WavePacketSpec,
) -> Result<LatticeState, LatticeError> {
    spec.validate(lattice)?;
    let center = spec.effective_center(lattice);
    let u0 = positive_energy_vector(&center, spec.helicity)?;
    let n = lattice.n() as i64;
    let snapped = spec.snapped_labels(lattice);
    let x0 = spec.center_position;

    let mut amplitudes = vec![C64::new(0.0, 0.0); lattice.len()];
    amplitudes
        .par_chunks_mut(DIM)
        .enumerate()
        .for_each(|(mode, chunk)| {
            let idx = lattice.site_of(mode);
            let labels = idx.map(|l| lattice.signed_label(l));
            let weight = match spec.shape {
                PacketShape::Sinc { span } => {
                    let half = span as i64 / 2;
                    let inside = (0..3).all(|a| {
                        let d = (labels[a] - snapped[a]).rem_euclid(n);
                        let d = if d > n / 2 { d - n } else { d };
                        d.abs() <= half
                    });
                    if inside {
                        1.0
                    } else {
                        0.0
                    }
                }
                PacketShape::Gaussian { sigma } => {
                    let k = lattice.mode_momentum(mode).as_array();
                    let c = center.as_array();
                    let d2: f64 = (0..3).map(|a| wrap_to_zone(k[a] - c[a]).powi(2)).sum();
                    (-d2 / (4.0 * sigma * sigma)).exp()
                }
            };
            if weight == 0.0 {
                return;
            }
            // e^{-ik·x₀} with k·x₀ reduced as an integer modulo n.
            let m: i64 = (0..3).map(|a| labels[a] * x0[a]).sum();
            let shift = lattice.root_of_unity(-m);
            let internal = match spec.internal {
                InternalProfile::Frozen => u0,
                InternalProfile::PerMode => match project_onto_mode(lattice, mode, spec.helicity, &u0) {
                    Some(v) => v,
                    None => return,
                },
            };
            let a = shift * weight;
            for (dst, v) in chunk.iter_mut().zip(internal) {
                *dst = a * v;
            }
        });
    LatticeState::normalized(*lattice, Basis::Momentum, amplitudes)
}

fn project_onto_mode(
    lattice: &Lattice,
    mode: usize,
    helicity: Helicity,
    u0: &[C64; DIM],
) -> Option<[C64; DIM]> {
    let kappa = lattice.mode_momentum(mode);
    let (p, _) = positive_energy_projector(&kappa, helicity).ok()?;
    let v = p.mul_vec(u0);
    let len = norm(&v);
    if len < NULL_PROJECTION {
        return None;
    }
    Some(v.map(|z| z / len))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PacketKind {
    Sinc,
    Gaussian,
}

/// JSON description of a propagation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketDocument {
    pub kind: PacketKind,
    pub n: usize,
    pub k0: [f64; 3],
    pub x0: [i64; 3],
    /// Sinc: even mode span. Gaussian: σ in reduced momentum units.
    pub width: f64,
    pub helicity: u8,
    pub steps: u64,
    pub sample_every: u64,
}

impl PacketDocument {
    pub fn lattice(&self) -> Result<Lattice, LatticeError> {
        Lattice::new(self.n)
    }

    pub fn spec(&self) -> Result<WavePacketSpec, LatticeError> {
        let helicity = Helicity::from_index(self.helicity).ok_or_else(|| {
            LatticeError::SpecViolation(format!("helicity {} must be 0 or 1", self.helicity))
        })?;
        let shape = match self.kind {
            PacketKind::Sinc => {
                if self.width < 0.0 || self.width.fract() != 0.0 || self.width > u32::MAX as f64 {
                    return Err(LatticeError::SpecViolation(format!(
                        "sinc width {} must be a non-negative integer",
                        self.width
                    )));
                }
                PacketShape::Sinc {
                    span: self.width as u32,
                }
            }
            PacketKind::Gaussian => PacketShape::Gaussian { sigma: self.width },
        };
        Ok(WavePacketSpec {
            shape,
            center_momentum: ReducedMomentum::from_array(self.k0),
            center_position: self.x0,
            helicity,
            internal: InternalProfile::Frozen,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::momentum::{helicity_phase, kernel_closed_form};

    #[test]
    fn eigenvector_definition_holds() {
        let k = ReducedMomentum::wrapped(0.4, -0.3, 1.1);
        let u = kernel_closed_form(&k);
        let mut vs = Vec::new();
        for h in Helicity::ALL {
            let v = positive_energy_vector(&k, h).unwrap();
            let phase = helicity_phase(&k, h).unwrap();
            let uv = u.mul_vec(&v);
            let lam = C64::from_polar(1.0, -phase);
            for i in 0..DIM {
                assert!((uv[i] - lam * v[i]).norm() < 1e-10);
            }
            vs.push(v);
        }
        let dot: C64 = (0..DIM).map(|i| vs[0][i].conj() * vs[1][i]).sum();
        assert!(dot.norm() < 1e-12);
        assert!((norm(&vs[0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigenvector_is_deterministic_with_real_lead() {
        let k = ReducedMomentum::wrapped(0.2, 0.9, -0.5);
        let a = positive_energy_vector(&k, Helicity::Up).unwrap();
        let b = positive_energy_vector(&k, Helicity::Up).unwrap();
        assert_eq!(a, b);
        let lead = a.iter().find(|z| z.norm() > 1e-8).unwrap();
        assert_eq!(lead.im, 0.0);
        assert!(lead.re > 0.0);
    }

    #[test]
    fn spec_violations() {
        let l = Lattice::new(32).unwrap();
        let k = ReducedMomentum::wrapped(0.4, 0.0, 0.0);
        assert!(WavePacketSpec::sinc(k, [0, 0, 0], 3).validate(&l).is_err());
        assert!(WavePacketSpec::sinc(k, [0, 0, 0], 8).validate(&l).is_err());
        assert!(WavePacketSpec::sinc(k, [0, 0, 0], 6).validate(&l).is_ok());
        assert!(WavePacketSpec::gaussian(k, [0, 0, 0], 0.5).validate(&l).is_err());
        assert!(WavePacketSpec::gaussian(k, [0, 0, 0], 0.1).validate(&l).is_err());
        assert!(WavePacketSpec::gaussian(k, [0, 0, 0], PI / 8.0).validate(&l).is_ok());
    }

    #[test]
    fn degenerate_center_is_rejected() {
        let l = Lattice::new(16).unwrap();
        let spec = WavePacketSpec::sinc(ReducedMomentum::zero(), [0, 0, 0], 2);
        assert!(matches!(
            make_wavepacket(&l, &spec),
            Err(LatticeError::Kernel(_))
        ));
    }

    #[test]
    fn single_mode_packet_is_flat_in_position() {
        let l = Lattice::new(8).unwrap();
        let spec = WavePacketSpec::sinc(ReducedMomentum::wrapped(PI / 2.0, 0.0, 0.0), [1, 2, 3], 0);
        let pos = make_wavepacket(&l, &spec).unwrap().to_position().unwrap();
        let p = pos.cell_probabilities();
        for v in p {
            assert!((v - 1.0 / 512.0).abs() < 1e-15);
        }
    }

    #[test]
    fn document_parses_and_rejects_unknown_fields() {
        let doc: PacketDocument = serde_json::from_str(
            r#"{"kind":"gaussian","n":64,"k0":[0.4,0,0],"x0":[16,16,16],"width":0.19634954084936207,"helicity":0,"steps":40,"sample_every":1}"#,
        )
        .unwrap();
        assert_eq!(doc.kind, PacketKind::Gaussian);
        assert!(doc.spec().unwrap().validate(&doc.lattice().unwrap()).is_ok());
        let bad = serde_json::from_str::<PacketDocument>(
            r#"{"kind":"sinc","n":64,"k0":[0.4,0,0],"x0":[0,0,0],"width":4,"helicity":0,"steps":4,"sample_every":1,"extra":1}"#,
        );
        assert!(bad.is_err());
    }
}
