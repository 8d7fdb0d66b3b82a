//! Jerk-level LQR with integral action.

use nalgebra::{DMatrix, DVector, SMatrix, SVector, Vector3};
use serde::{Deserialize, Serialize};

use super::care::{lqr_gain, solve_care};
use super::error_state::{ErrorState, ErrorVector};
use crate::error::Result;
use crate::scalar::Real;

pub type SystemMatrix<T> = SMatrix<T, 24, 24>;
pub type InputMatrix<T> = SMatrix<T, 24, 6>;
pub type GainMatrix<T> = SMatrix<T, 6, 24>;
pub type VirtualInput<T> = SVector<T, 6>;

/// Diagonal weights of the quadratic cost. Each scalar gain is applied to
/// all three axes of its error block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct LqriWeights<T: Real> {
    pub k_p: T,
    pub k_p_i: T,
    pub k_v: T,
    pub k_a: T,
    #[serde(rename = "k_R")]
    pub k_r: T,
    #[serde(rename = "k_R_i")]
    pub k_r_i: T,
    pub k_omega: T,
    pub k_psi: T,
    pub r_f_dot: Vector3<T>,
    pub r_tau_dot: Vector3<T>,
}

impl<T: Real> LqriWeights<T> {
    /// Weights used on the prototype in flight experiments.
    pub fn paper() -> Self {
        Self {
            k_p: T::lit(200.0),
            k_p_i: T::lit(50.0),
            k_v: T::lit(100.0),
            k_a: T::zero(),
            k_r: T::lit(100.0),
            k_r_i: T::lit(100.0),
            k_omega: T::lit(200.0),
            k_psi: T::zero(),
            r_f_dot: Vector3::new(T::one(), T::one(), T::lit(0.2)),
            r_tau_dot: Vector3::new(T::one(), T::one(), T::one()),
        }
    }

    pub fn q_diagonal(&self) -> ErrorVector<T> {
        let ks = [self.k_p, self.k_p_i, self.k_v, self.k_a, self.k_r, self.k_r_i, self.k_omega, self.k_psi];
        ErrorVector::from_fn(|i, _| ks[i / 3])
    }

    pub fn q(&self) -> SystemMatrix<T> {
        SystemMatrix::from_diagonal(&self.q_diagonal())
    }

    pub fn r(&self) -> SMatrix<T, 6, 6> {
        let d = VirtualInput::from_fn(|i, _| if i < 3 { self.r_f_dot[i] } else { self.r_tau_dot[i - 3] });
        SMatrix::from_diagonal(&d)
    }
}

/// Linearized error dynamics `de = A e + B u` with the attitude error
/// linearized about zero: three chains of integrators (position integral,
/// position, velocity, acceleration and the rotational counterpart).
pub fn linearized_system<T: Real>() -> (SystemMatrix<T>, InputMatrix<T>) {
    let mut a = SystemMatrix::zeros();
    let id = SMatrix::<T, 3, 3>::identity();
    // (row block, column block): d(row)/dt depends on column
    for (row, col) in [(0, 2), (1, 0), (2, 3), (4, 6), (5, 4), (6, 7)] {
        a.fixed_view_mut::<3, 3>(3 * row, 3 * col).copy_from(&id);
    }
    let mut b = InputMatrix::zeros();
    b.fixed_view_mut::<3, 3>(9, 0).copy_from(&id);
    b.fixed_view_mut::<3, 3>(21, 3).copy_from(&id);
    (a, b)
}

/// Gain and Riccati solution for a weight set.
#[derive(Clone, Debug)]
pub struct LqriGain<T: Real> {
    pub p: SystemMatrix<T>,
    pub k: GainMatrix<T>,
    pub q: SystemMatrix<T>,
    pub r: SMatrix<T, 6, 6>,
    pub b: InputMatrix<T>,
}

fn to_dynamic<T: Real, const R: usize, const C: usize>(m: &SMatrix<T, R, C>) -> DMatrix<T> {
    DMatrix::from_column_slice(R, C, m.as_slice())
}

impl<T: Real> LqriGain<T> {
    pub fn new(weights: &LqriWeights<T>) -> Result<Self> {
        let (a, b) = linearized_system::<T>();
        let (q, r) = (weights.q(), weights.r());
        let (bd, rd) = (to_dynamic(&b), to_dynamic(&r));
        let p = solve_care(&to_dynamic(&a), &bd, &to_dynamic(&q), &rd)?;
        let k = lqr_gain(&p, &bd, &rd)?;
        Ok(Self {
            p: SystemMatrix::from_column_slice(p.as_slice()),
            k: GainMatrix::from_column_slice(k.as_slice()),
            q,
            r,
            b,
        })
    }

    /// Virtual input `u = -K e`.
    pub fn control(&self, e: &ErrorState<T>) -> VirtualInput<T> {
        -(self.k * e.to_vector())
    }

    pub fn closed_loop(&self) -> DMatrix<T> {
        let (a, b) = linearized_system::<T>();
        to_dynamic(&(a - b * self.k))
    }
}

/// `u = -K e` for a dynamically sized gain.
pub fn lqri_control<T: Real>(k: &DMatrix<T>, e: &DVector<T>) -> DVector<T> {
    -(k * e)
}
