//! Working precision and conversions between extended-precision values and
//! their decimal string form.

use rug::float::Constant;
use rug::{Complex, Float};

/// Default working precision in bits for extended-precision arithmetic.
pub const DEFAULT_PRECISION: u32 = 192;

/// Smallest precision for which the documented tolerances hold.
pub const MIN_PRECISION: u32 = 128;

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

pub fn float(prec: u32, v: f64) -> Float {
    Float::with_val(prec, v)
}

/// Number of decimal digits carried by `prec` bits.
pub fn decimal_digits(prec: u32) -> usize {
    ((prec as f64) * std::f64::consts::LOG10_2).floor() as usize
}

/// Decimal rendering of a float with `digits` significant digits.
pub fn to_decimal(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    x.to_string_radix(10, Some(digits.max(1)))
}

pub fn complex_to_decimal(z: &Complex, digits: usize) -> (String, String) {
    (to_decimal(z.real(), digits), to_decimal(z.imag(), digits))
}

pub fn parse_decimal(s: &str, prec: u32) -> Option<Float> {
    Float::parse(s).ok().map(|p| Float::with_val(prec, p))
}
