//! Element types supported by the simulated kernels.
//!
//! All six data types carried by the kernels share one trait. Integer
//! arithmetic wraps on overflow and accumulates at the element width, so a
//! reference computation and a simulated kernel produce bit-identical
//! results no matter how the work was partitioned.

use serde::{Deserialize, Serialize};
use std::fmt::{Debug, Display};
use std::str::FromStr;

/// Runtime tag for the element type of a kernel run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    Int8,
    Int16,
    Int32,
    Int64,
    Fp32,
    Fp64,
}

impl Dtype {
    /// Element width in bytes.
    pub fn width(self) -> usize {
        match self {
            Dtype::Int8 => 1,
            Dtype::Int16 => 2,
            Dtype::Int32 => 4,
            Dtype::Int64 => 8,
            Dtype::Fp32 => 4,
            Dtype::Fp64 => 8,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Dtype::Int8 => "int8",
            Dtype::Int16 => "int16",
            Dtype::Int32 => "int32",
            Dtype::Int64 => "int64",
            Dtype::Fp32 => "fp32",
            Dtype::Fp64 => "fp64",
        }
    }

    pub const ALL: [Dtype; 6] = [
        Dtype::Int8,
        Dtype::Int16,
        Dtype::Int32,
        Dtype::Int64,
        Dtype::Fp32,
        Dtype::Fp64,
    ];
}

impl Display for Dtype {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Dtype {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "int8" | "i8" => Ok(Dtype::Int8),
            "int16" | "i16" => Ok(Dtype::Int16),
            "int32" | "i32" => Ok(Dtype::Int32),
            "int64" | "i64" => Ok(Dtype::Int64),
            "fp32" | "f32" | "float" => Ok(Dtype::Fp32),
            "fp64" | "f64" | "double" => Ok(Dtype::Fp64),
            other => Err(format!(
                "unknown data type `{other}` (expected int8|int16|int32|int64|fp32|fp64)"
            )),
        }
    }
}

/// A matrix/vector element.
///
/// `mul_acc` is the one arithmetic step the kernels perform per nonzero:
/// `acc + a * b`, wrapping for integers.
pub trait Scalar:
    Copy + PartialEq + Debug + Display + Send + Sync + Serialize + 'static
{
    const DTYPE: Dtype;

    fn zero() -> Self;

    /// Conversion used by generators and input-vector construction. The
    /// argument is always a small integer, so the conversion is exact for
    /// every supported type.
    fn from_small_int(v: i64) -> Self;

    /// Value-preserving conversion from a parsed file value. Integer types
    /// truncate toward zero (saturating at the type bounds).
    fn from_f64(v: f64) -> Self;

    /// `self + a * b`, wrapping on integer overflow.
    fn mul_acc(self, a: Self, b: Self) -> Self;

    /// `self + other`, wrapping on integer overflow. Used by host-side
    /// merging of partial results.
    fn add(self, other: Self) -> Self;

    fn to_f64(self) -> f64;
}

macro_rules! int_scalar {
    ($t:ty, $dtype:expr) => {
        impl Scalar for $t {
            const DTYPE: Dtype = $dtype;

            fn zero() -> Self {
                0
            }

            fn from_small_int(v: i64) -> Self {
                v as $t
            }

            fn from_f64(v: f64) -> Self {
                v as $t
            }

            fn mul_acc(self, a: Self, b: Self) -> Self {
                self.wrapping_add(a.wrapping_mul(b))
            }

            fn add(self, other: Self) -> Self {
                self.wrapping_add(other)
            }

            fn to_f64(self) -> f64 {
                self as f64
            }
        }
    };
}

macro_rules! float_scalar {
    ($t:ty, $dtype:expr) => {
        impl Scalar for $t {
            const DTYPE: Dtype = $dtype;

            fn zero() -> Self {
                0.0
            }

            fn from_small_int(v: i64) -> Self {
                v as $t
            }

            fn from_f64(v: f64) -> Self {
                v as $t
            }

            fn mul_acc(self, a: Self, b: Self) -> Self {
                self + a * b
            }

            fn add(self, other: Self) -> Self {
                self + other
            }

            fn to_f64(self) -> f64 {
                self as f64
            }
        }
    };
}

int_scalar!(i8, Dtype::Int8);
int_scalar!(i16, Dtype::Int16);
int_scalar!(i32, Dtype::Int32);
int_scalar!(i64, Dtype::Int64);
float_scalar!(f32, Dtype::Fp32);
float_scalar!(f64, Dtype::Fp64);

/// Dispatches a generic closure-like macro body over a runtime [`Dtype`].
#[macro_export]
macro_rules! with_scalar {
    ($dtype:expr, $s:ident => $body:expr) => {
        match $dtype {
            $crate::scalar::Dtype::Int8 => {
                type $s = i8;
                $body
            }
            $crate::scalar::Dtype::Int16 => {
                type $s = i16;
                $body
            }
            $crate::scalar::Dtype::Int32 => {
                type $s = i32;
                $body
            }
            $crate::scalar::Dtype::Int64 => {
                type $s = i64;
                $body
            }
            $crate::scalar::Dtype::Fp32 => {
                type $s = f32;
                $body
            }
            $crate::scalar::Dtype::Fp64 => {
                type $s = f64;
                $body
            }
        }
    };
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn widths() {
        assert_eq!(Dtype::Int8.width(), 1);
        assert_eq!(Dtype::Int16.width(), 2);
        assert_eq!(Dtype::Int32.width(), 4);
        assert_eq!(Dtype::Int64.width(), 8);
        assert_eq!(Dtype::Fp32.width(), 4);
        assert_eq!(Dtype::Fp64.width(), 8);
    }

    #[test]
    fn integer_mul_acc_wraps() {
        let acc: i8 = 100;
        // 100 + 9*9 = 181 wraps to -75 in i8.
        assert_eq!(acc.mul_acc(9, 9), -75i8);
    }

    #[test]
    fn dtype_parse_roundtrip() {
        for d in Dtype::ALL {
            assert_eq!(d.name().parse::<Dtype>().unwrap(), d);
        }
        assert!("complex64".parse::<Dtype>().is_err());
    }
}
