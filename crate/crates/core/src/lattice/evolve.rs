use rayon::prelude::*;

use crate::algebra::{Axis, InternalMatrix, ProjectorTriple, C64, DIM};
use crate::momentum::{kernel_closed_form, mode_decomposition};

use super::{Basis, LatticeError, LatticeState};

/// Evolve by `steps` walk steps through the momentum representation.
///
/// Each mode's internal vector is multiplied by `U_κ` `steps` times. A
/// position-basis input is transformed and returned in the position basis.
pub fn evolve_spectral(state: &LatticeState, steps: u64) -> Result<LatticeState, LatticeError> {
    per_mode(state, |kernel, v| {
        let mut v = *v;
        for _ in 0..steps {
            v = kernel.mul_vec(&v);
        }
        v
    })
}

/// As [`evolve_spectral`], but raising each mode's kernel to the power
/// `steps` through its spectral resolution. Modes at branch points, where
/// the resolution does not exist, fall back to repeated squaring.
pub fn evolve_spectral_decomposed(
    state: &LatticeState,
    steps: u64,
) -> Result<LatticeState, LatticeError> {
    let lattice = state.lattice();
    with_momentum(state, |momentum| {
        momentum
            .amplitudes_mut()
            .par_chunks_mut(DIM)
            .enumerate()
            .for_each(|(mode, chunk)| {
                let kappa = lattice.mode_momentum(mode);
                let power = match mode_decomposition(&kappa) {
                    Ok(d) => d.power(steps),
                    Err(_) => kernel_closed_form(&kappa).pow(steps),
                };
                let v: [C64; DIM] = chunk.try_into().expect("chunk of DIM");
                chunk.copy_from_slice(&power.mul_vec(&v));
            });
    })
}

fn per_mode(
    state: &LatticeState,
    f: impl Fn(&InternalMatrix, &[C64; DIM]) -> [C64; DIM] + Sync,
) -> Result<LatticeState, LatticeError> {
    let lattice = state.lattice();
    with_momentum(state, |momentum| {
        momentum
            .amplitudes_mut()
            .par_chunks_mut(DIM)
            .enumerate()
            .for_each(|(mode, chunk)| {
                let kernel = kernel_closed_form(&lattice.mode_momentum(mode));
                let v: [C64; DIM] = chunk.try_into().expect("chunk of DIM");
                chunk.copy_from_slice(&f(&kernel, &v));
            });
    })
}

fn with_momentum(
    state: &LatticeState,
    f: impl FnOnce(&mut LatticeState),
) -> Result<LatticeState, LatticeError> {
    match state.basis() {
        Basis::Momentum => {
            let mut out = state.clone();
            f(&mut out);
            Ok(out)
        }
        Basis::Position => {
            let mut out = state.to_momentum()?;
            f(&mut out);
            out.to_position()
        }
    }
}

/// Evolve in the position basis by applying the shift-and-project factors
/// directly: per step the Z factor acts first, then Y, then X. Along each
/// axis the `P^+` component moves one site forward, `P^-` one site back and
/// `P^0` stays, with periodic wraparound.
pub fn evolve_direct(state: &LatticeState, steps: u64) -> Result<LatticeState, LatticeError> {
    if state.basis() != Basis::Position {
        return Err(LatticeError::BasisMismatch {
            expected: Basis::Position,
            found: state.basis(),
        });
    }
    let triples = Axis::ALL.map(ProjectorTriple::new);
    let mut amplitudes = state.amplitudes().to_vec();
    for _ in 0..steps {
        for axis in [Axis::Z, Axis::Y, Axis::X] {
            amplitudes = shift_factor(state, &amplitudes, &triples[axis.index()]);
        }
    }
    Ok(state.with_amplitudes(amplitudes))
}

fn shift_factor(state: &LatticeState, src: &[C64], triple: &ProjectorTriple) -> Vec<C64> {
    let lattice = state.lattice();
    let n = lattice.n();
    let a = triple.axis.index();
    let vec_at = |site: [usize; 3]| -> [C64; DIM] {
        let i = lattice.index(site, 0);
        src[i..i + DIM].try_into().expect("DIM entries")
    };
    let mut out = vec![C64::new(0.0, 0.0); src.len()];
    out.par_chunks_mut(DIM).enumerate().for_each(|(cell, dst)| {
        let site = lattice.site_of(cell);
        let mut behind = site;
        behind[a] = (site[a] + n - 1) % n;
        let mut ahead = site;
        ahead[a] = (site[a] + 1) % n;
        let from_behind = triple.plus.mul_vec(&vec_at(behind));
        let staying = triple.zero.mul_vec(&vec_at(site));
        let from_ahead = triple.minus.mul_vec(&vec_at(ahead));
        for s in 0..DIM {
            dst[s] = from_behind[s] + staying[s] + from_ahead[s];
        }
    });
    out
}
