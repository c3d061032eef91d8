//! Unitary 3D DFT over the `[x][y][z][internal]` layout, one line at a time.
//!
//! Every line is transformed independently, so results do not depend on how
//! rayon schedules the work.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::algebra::{C64, DIM};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Direction {
    /// `Σ_x e^{-ik·x}`.
    ToMomentum,
    /// `Σ_k e^{+ik·x}`.
    ToPosition,
}

pub(crate) fn transform(data: &mut [C64], n: usize, direction: Direction) {
    assert_eq!(data.len(), n * n * n * DIM);
    let mut planner = FftPlanner::<f64>::new();
    let fft = match direction {
        Direction::ToMomentum => planner.plan_fft_forward(n),
        Direction::ToPosition => planner.plan_fft_inverse(n),
    };

    // z lines: each (x, y) row is a contiguous block of n·DIM entries.
    data.par_chunks_mut(n * DIM).for_each(|row| {
        for s in 0..DIM {
            transform_strided(row, s, DIM, n, &fft);
        }
    });

    // y lines: each x slab is contiguous.
    data.par_chunks_mut(n * n * DIM).for_each(|slab| {
        for z in 0..n {
            for s in 0..DIM {
                transform_strided(slab, z * DIM + s, n * DIM, n, &fft);
            }
        }
    });

    // x lines span every slab; gather them, transform, scatter back.
    let stride = n * n * DIM;
    let lines: Vec<Vec<C64>> = (0..stride)
        .into_par_iter()
        .map(|offset| {
            let mut line: Vec<C64> = (0..n).map(|x| data[offset + x * stride]).collect();
            fft.process(&mut line);
            line
        })
        .collect();
    for (offset, line) in lines.into_iter().enumerate() {
        for (x, v) in line.into_iter().enumerate() {
            data[offset + x * stride] = v;
        }
    }

    let scale = 1.0 / ((n * n * n) as f64).sqrt();
    data.par_iter_mut().for_each(|v| *v *= scale);
}

fn transform_strided(buf: &mut [C64], start: usize, stride: usize, n: usize, fft: &Arc<dyn Fft<f64>>) {
    let mut line: Vec<C64> = (0..n).map(|i| buf[start + i * stride]).collect();
    fft.process(&mut line);
    for (i, v) in line.into_iter().enumerate() {
        buf[start + i * stride] = v;
    }
}
