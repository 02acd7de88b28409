//! Floating-point scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display, LowerExp};
use std::sync::{Mutex, OnceLock};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::{FftNum, FftPlanner};

/// Real scalar type the spectral machinery is generic over.
///
/// Implemented for `f32` and `f64`. Tolerances of structural checks scale
/// with the precision of the type.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + FftNum + Default + Display + LowerExp + Debug + Send + Sync + 'static
{
    /// Relative tolerance for exactness checks (Hermitian symmetry,
    /// divergence, roundtrips).
    fn structural_tol() -> Self;

    /// Process-wide FFT planner for this precision.
    fn planner() -> &'static Mutex<FftPlanner<Self>>;

    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn from_i64_lossy(n: i64) -> Self {
        Self::from_i64(n).expect("i64 representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

macro_rules! impl_real {
    ($t:ty, $tol:expr) => {
        impl Real for $t {
            #[inline]
            fn structural_tol() -> Self {
                $tol
            }

            fn planner() -> &'static Mutex<FftPlanner<Self>> {
                static PLANNER: OnceLock<Mutex<FftPlanner<$t>>> = OnceLock::new();
                PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
            }
        }
    };
}

impl_real!(f64, 1e-12);
impl_real!(f32, 1e-4);
