// SPDX-License-Identifier: Apache-2.0

//! Binary fixed-point formats. A raw integer `r` in format `f` represents
//! `r / 2^f.fraction_bits`.

use core::fmt;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Widest format accepted; keeps every product and accumulator inside `i64`.
pub const MAX_TOTAL_BITS: u32 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FixedFormat {
    pub signed: bool,
    pub integer_bits: u32,
    pub fraction_bits: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quantized {
    pub raw: i64,
    pub saturated: bool,
}

impl FixedFormat {
    pub const fn unsigned(integer_bits: u32, fraction_bits: u32) -> Self {
        FixedFormat { signed: false, integer_bits, fraction_bits }
    }

    pub const fn signed(integer_bits: u32, fraction_bits: u32) -> Self {
        FixedFormat { signed: true, integer_bits, fraction_bits }
    }

    pub fn total_bits(&self) -> u32 {
        self.signed as u32 + self.integer_bits + self.fraction_bits
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.total_bits();
        if w == 0 || w > MAX_TOTAL_BITS {
            return Err(invalid(alloc::format!("fixed-point width {w} outside [1, {MAX_TOTAL_BITS}]")));
        }
        Ok(())
    }

    pub fn scale(&self) -> f64 {
        libm::ldexp(1.0, self.fraction_bits as i32)
    }

    pub fn min_raw(&self) -> i64 {
        if self.signed {
            -(1i64 << (self.integer_bits + self.fraction_bits))
        } else {
            0
        }
    }

    pub fn max_raw(&self) -> i64 {
        (1i64 << (self.integer_bits + self.fraction_bits)) - 1
    }

    pub fn contains(&self, raw: i64) -> bool {
        (self.min_raw()..=self.max_raw()).contains(&raw)
    }

    pub fn min_value(&self) -> f64 {
        self.min_raw() as f64 / self.scale()
    }

    pub fn max_value(&self) -> f64 {
        self.max_raw() as f64 / self.scale()
    }

    /// Round half away from zero, then saturate to the representable range.
    pub fn quantize(&self, v: f64) -> Quantized {
        let scaled = libm::round(v * self.scale());
        let (lo, hi) = (self.min_raw(), self.max_raw());
        if scaled.is_nan() {
            return Quantized { raw: 0, saturated: true };
        }
        if scaled < lo as f64 {
            Quantized { raw: lo, saturated: true }
        } else if scaled > hi as f64 {
            Quantized { raw: hi, saturated: true }
        } else {
            Quantized { raw: scaled as i64, saturated: false }
        }
    }

    pub fn dequantize(&self, raw: i64) -> Result<f64> {
        if !self.contains(raw) {
            return Err(invalid(alloc::format!("raw value {raw} does not fit {self}")));
        }
        Ok(raw as f64 / self.scale())
    }

    /// Value after a quantize/dequantize round trip.
    pub fn round_trip(&self, v: f64) -> f64 {
        self.quantize(v).raw as f64 / self.scale()
    }

    /// Two's-complement (or plain binary) bit pattern of `raw`, LSB first.
    pub fn to_bits(&self, raw: i64) -> alloc::vec::Vec<bool> {
        (0..self.total_bits()).map(|i| (raw >> i) & 1 == 1).collect()
    }

    pub fn from_bits(&self, bits: &[bool]) -> i64 {
        let w = bits.len();
        let mut raw = 0i64;
        for (i, &b) in bits.iter().enumerate() {
            if b {
                raw |= 1 << i;
            }
        }
        if self.signed && w > 0 && bits[w - 1] {
            raw -= 1 << w;
        }
        raw
    }
}

impl fmt::Display for FixedFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}.{}", if self.signed { 's' } else { 'u' }, self.integer_bits, self.fraction_bits)
    }
}

/// Smallest `i` such that `|v| < 2^i`.
pub fn integer_bits_for(max_abs: f64) -> u32 {
    let mut i = 0u32;
    while libm::ldexp(1.0, i as i32) <= max_abs && i < MAX_TOTAL_BITS {
        i += 1;
    }
    i
}

/// `ceil(log2(x))` for `x >= 1`.
pub fn ceil_log2(x: usize) -> u32 {
    assert!(x >= 1, "ceil_log2 of zero");
    usize::BITS - (x - 1).leading_zeros()
}
