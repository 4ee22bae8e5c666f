//! Internal n-dimensional FFT driver on row-major arrays.
//!
//! Plans are cached per thread and per scalar type; rustfft plans are
//! deterministic for a fixed length, which keeps every transform bitwise
//! reproducible regardless of how calls are scheduled.

use std::any::{Any, TypeId};
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::Scalar;

thread_local! {
    static PLANNERS: RefCell<HashMap<TypeId, Box<dyn Any>>> = RefCell::new(HashMap::new());
}

fn plan<T: Scalar>(len: usize, inverse: bool) -> Arc<dyn Fft<T>> {
    PLANNERS.with(|cell| {
        let mut map = cell.borrow_mut();
        let planner = map
            .entry(TypeId::of::<T>())
            .or_insert_with(|| Box::new(FftPlanner::<T>::new()) as Box<dyn Any>)
            .downcast_mut::<FftPlanner<T>>()
            .expect("planner type");
        if inverse {
            planner.plan_fft_inverse(len)
        } else {
            planner.plan_fft_forward(len)
        }
    })
}

/// Unnormalized DFT along every axis of a row-major `len^dim` array.
///
/// Forward uses the `e^{-2πi jk/len}` kernel, inverse the conjugate kernel;
/// neither applies a 1/len factor.
pub(crate) fn dft_nd<T: Scalar>(values: &mut [Complex<T>], dim: usize, len: usize, inverse: bool) {
    debug_assert_eq!(values.len(), len.pow(dim as u32));
    let fft = plan::<T>(len, inverse);
    let mut scratch = vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()];
    let mut line = vec![Complex::new(T::zero(), T::zero()); len];

    for axis in 0..dim {
        // stride between consecutive entries along `axis` in row-major order
        let stride = len.pow((dim - 1 - axis) as u32);
        let lines = values.len() / len;
        for l in 0..lines {
            // base offset of the l-th line along this axis
            let block = l / stride;
            let rem = l % stride;
            let base = block * stride * len + rem;
            if stride == 1 {
                let seg = &mut values[base..base + len];
                fft.process_with_scratch(seg, &mut scratch);
            } else {
                for (i, slot) in line.iter_mut().enumerate() {
                    *slot = values[base + i * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (i, slot) in line.iter().enumerate() {
                    values[base + i * stride] = *slot;
                }
            }
        }
    }
}

/// 1-d unnormalized DFT of a single line (used for the x-axis action on
/// sampled symbol cubes).
pub(crate) fn dft_line<T: Scalar>(values: &mut [Complex<T>], inverse: bool) {
    let fft = plan::<T>(values.len(), inverse);
    let mut scratch = vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(values, &mut scratch);
}
