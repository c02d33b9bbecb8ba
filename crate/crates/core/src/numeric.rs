//! Bit-exact emulation of customized floating-point and fixed-point values
//! and the arithmetic performed in them.
//!
//! A format is either a [`FloatFormat`] (sign bit, exponent field, mantissa
//! field with an implicit leading 1), a [`FixedFormat`] (sign bit plus
//! integer and fraction magnitude bits), or [`NumericFormat::Baseline`],
//! which passes values through IEEE-754 single precision unchanged.
//!
//! All arithmetic is carried out in `f64` (the wide emulation substrate) and
//! the result is re-quantized after every operation, so the quantizer is the
//! only source of numerical error. The default rounding is truncation toward
//! zero; round-to-nearest-even is available through [`Rounding`]. Values that
//! exceed the representable range saturate to the maximum magnitude and
//! nonzero values below the smallest representable magnitude flush to zero.
//! Custom formats define no infinity or NaN encodings.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Exponent-field width limit for custom float formats.
pub const MAX_EXPONENT_BITS: u32 = 16;
/// Mantissa-field width limit; the substrate stores 52 explicit mantissa bits.
pub const MAX_MANTISSA_BITS: u32 = 52;
/// Magnitude-bit limit for fixed formats, so every value is substrate-exact.
pub const MAX_FIXED_MAGNITUDE_BITS: u32 = 53;
/// Widest format that `enumerate_values` will expand.
pub const MAX_ENUMERABLE_BITS: u32 = 14;

/// Rounding mode applied when a substrate value is mapped into a format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Rounding {
    /// Truncate the magnitude toward zero (the default).
    #[default]
    TruncateTowardZero,
    /// Round to the nearest representable value, ties to even.
    NearestEven,
}

/// A customized floating-point format: sign | exponent | mantissa.
///
/// The stored mantissa omits the implicit leading 1, so a pattern with
/// exponent field `E` and mantissa field `m` represents
/// `2^(E - bias) * (1 + m / 2^mantissa_bits)`. The all-zero exponent and
/// mantissa encode zero; there are no subnormals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FloatFormat {
    mantissa_bits: u32,
    exponent_bits: u32,
    bias: i32,
}

impl FloatFormat {
    /// Builds a format with an explicit exponent bias.
    pub fn with_bias(mantissa_bits: u32, exponent_bits: u32, bias: i32) -> Result<Self> {
        if !(1..=MAX_EXPONENT_BITS).contains(&exponent_bits) {
            return Err(Error::InvalidFormat(format!(
                "exponent bits must be in 1..={MAX_EXPONENT_BITS}, got {exponent_bits}"
            )));
        }
        if mantissa_bits > MAX_MANTISSA_BITS {
            return Err(Error::InvalidFormat(format!(
                "mantissa bits must be at most {MAX_MANTISSA_BITS}, got {mantissa_bits}"
            )));
        }
        let width = 1 + exponent_bits + mantissa_bits;
        if width > 64 {
            return Err(Error::InvalidFormat(format!(
                "total width {width} exceeds the 64-bit encoding limit"
            )));
        }
        // When the smallest format values sit inside the substrate range they
        // must land on its grid (2^-1074 steps), otherwise the flush boundary
        // could not be honored exactly. Formats whose low end lies entirely
        // below the substrate are fine: no finite input ever reaches it.
        let bias = bias as i64;
        if bias <= 1074 && bias + (mantissa_bits as i64) > 1074 {
            return Err(Error::InvalidFormat(format!(
                "bias {bias} straddles the emulation substrate's smallest values"
            )));
        }
        if !(-(1i64 << 20)..=(1i64 << 20)).contains(&bias) {
            return Err(Error::InvalidFormat(format!("bias {bias} out of range")));
        }
        let bias = bias as i32;
        Ok(Self {
            mantissa_bits,
            exponent_bits,
            bias,
        })
    }

    /// Builds a format with the default bias `2^(exponent_bits - 1) - 1`.
    pub fn new(mantissa_bits: u32, exponent_bits: u32) -> Result<Self> {
        if !(1..=MAX_EXPONENT_BITS).contains(&exponent_bits) {
            return Err(Error::InvalidFormat(format!(
                "exponent bits must be in 1..={MAX_EXPONENT_BITS}, got {exponent_bits}"
            )));
        }
        Self::with_bias(
            mantissa_bits,
            exponent_bits,
            Self::default_bias(exponent_bits),
        )
    }

    /// The conventional bias for a given exponent width.
    pub fn default_bias(exponent_bits: u32) -> i32 {
        (1i32 << (exponent_bits - 1)) - 1
    }

    pub fn mantissa_bits(&self) -> u32 {
        self.mantissa_bits
    }

    pub fn exponent_bits(&self) -> u32 {
        self.exponent_bits
    }

    pub fn bias(&self) -> i32 {
        self.bias
    }

    /// Total encoded width including the sign bit.
    pub fn total_bits(&self) -> u32 {
        1 + self.exponent_bits + self.mantissa_bits
    }

    /// Smallest unbiased exponent of a representable value.
    fn min_exp(&self) -> i64 {
        -(self.bias as i64)
    }

    /// Largest unbiased exponent (the all-ones exponent field is an ordinary
    /// value; there are no infinity/NaN encodings).
    fn max_exp(&self) -> i64 {
        ((1i64 << self.exponent_bits) - 1) - self.bias as i64
    }

    /// Largest representable magnitude, `2^max_exp * (2 - 2^-mantissa_bits)`.
    ///
    /// Formats whose range exceeds the substrate (max_exp > 1023) report
    /// `f64::INFINITY`; saturation is unreachable for such formats.
    pub fn max_value(&self) -> f64 {
        let shift = self.max_exp() - self.mantissa_bits as i64;
        let sig = (1u64 << (self.mantissa_bits + 1)) - 1;
        mul_exp2(sig as f64, shift)
    }

    /// Smallest positive representable magnitude.
    ///
    /// The all-zero exponent and mantissa encode zero, so the smallest value
    /// carries the lowest nonzero encoding: `2^min_exp * (1 + 2^-mantissa_bits)`
    /// (which reduces to `2^(min_exp + 1)` when the mantissa is empty).
    /// Formats whose smallest values lie below the substrate report 0;
    /// flushing is unreachable for them.
    pub fn min_positive(&self) -> f64 {
        let shift = self.min_exp() - self.mantissa_bits as i64;
        let sig = (1u64 << self.mantissa_bits) + 1;
        mul_exp2(sig as f64, shift)
    }

    /// Spacing between adjacent representable values at magnitude `|x|`:
    /// `2^(e - mantissa_bits)` where `e` is the unbiased exponent of
    /// `quantize(x)`. Returns `min_positive` when `x` quantizes to zero.
    pub fn ulp(&self, x: f64) -> f64 {
        let q = self.quantize(x, Rounding::TruncateTowardZero);
        if q == 0.0 {
            return self.min_positive();
        }
        let (e, _, _) = decompose(q.abs());
        exp2i(e - self.mantissa_bits as i64)
    }

    fn quantize(&self, x: f64, mode: Rounding) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        let a = x.abs();
        let negative = x < 0.0;
        let magnitude = match mode {
            Rounding::TruncateTowardZero => self.truncate_magnitude(a),
            Rounding::NearestEven => self.nearest_magnitude(a),
        };
        if magnitude == 0.0 {
            return 0.0;
        }
        if negative {
            -magnitude
        } else {
            magnitude
        }
    }

    /// Truncation toward zero operating directly on the substrate bit
    /// pattern, so the result is exact for every finite input.
    fn truncate_magnitude(&self, a: f64) -> f64 {
        let (e, sig, lead) = decompose(a);
        if e > self.max_exp() {
            return self.max_value();
        }
        if e < self.min_exp() {
            return 0.0;
        }
        let drop = lead as i64 - self.mantissa_bits as i64;
        let kept = if drop > 0 { sig >> drop << drop } else { sig };
        // The all-zero encoding is reserved for zero, so the lowest-exponent
        // value with an empty mantissa does not exist; truncation falls
        // through to zero.
        if e == self.min_exp() && kept == 1u64 << lead {
            return 0.0;
        }
        mul_exp2(kept as f64, e - lead as i64)
    }

    fn nearest_magnitude(&self, a: f64) -> f64 {
        let (e, _, _) = decompose(a);
        if e > self.max_exp() {
            return self.max_value();
        }
        let min_pos = self.min_positive();
        if e < self.min_exp() {
            return if 2.0 * a > min_pos { min_pos } else { 0.0 };
        }
        // Scale so the mantissa grid at exponent e lands on integers.
        let scaled = mul_exp2(a, self.mantissa_bits as i64 - e);
        let mut rounded = scaled.round_ties_even();
        let mut e_out = e;
        if rounded == exp2i(self.mantissa_bits as i64 + 1) {
            rounded = exp2i(self.mantissa_bits as i64);
            e_out += 1;
            if e_out > self.max_exp() {
                return self.max_value();
            }
        }
        if e_out == self.min_exp() && rounded == exp2i(self.mantissa_bits as i64) {
            // Rounded into the encoding reserved for zero; resolve against
            // its real neighbors.
            return if 2.0 * a > min_pos { min_pos } else { 0.0 };
        }
        mul_exp2(rounded, e_out - self.mantissa_bits as i64)
    }

    fn encode_magnitude(&self, a: f64) -> (u64, u64) {
        if a == 0.0 {
            return (0, 0);
        }
        let (e, sig, lead) = decompose(a);
        let field = (e + self.bias as i64) as u64;
        let drop = lead as i64 - self.mantissa_bits as i64;
        let mantissa = if drop >= 0 {
            (sig >> drop) & ((1u64 << self.mantissa_bits) - 1)
        } else {
            (sig << -drop) & ((1u64 << self.mantissa_bits) - 1)
        };
        (field, mantissa)
    }

    fn decode_fields(&self, field: u64, mantissa: u64) -> f64 {
        if field == 0 && mantissa == 0 {
            return 0.0;
        }
        let sig = (1u64 << self.mantissa_bits) | mantissa;
        let e = field as i64 - self.bias as i64;
        mul_exp2(sig as f64, e - self.mantissa_bits as i64)
    }
}

/// A customized fixed-point format: sign | integer bits | fraction bits.
///
/// Sign-magnitude with an explicit sign bit; the `integer_bits + fraction_bits`
/// magnitude bits represent multiples of `2^-fraction_bits`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FixedFormat {
    integer_bits: u32,
    fraction_bits: u32,
}

impl FixedFormat {
    pub fn new(integer_bits: u32, fraction_bits: u32) -> Result<Self> {
        let magnitude = integer_bits + fraction_bits;
        if magnitude < 1 {
            return Err(Error::InvalidFormat(
                "fixed format needs at least one magnitude bit".into(),
            ));
        }
        if magnitude > MAX_FIXED_MAGNITUDE_BITS {
            return Err(Error::InvalidFormat(format!(
                "fixed magnitude bits must be at most {MAX_FIXED_MAGNITUDE_BITS}, got {magnitude}"
            )));
        }
        Ok(Self {
            integer_bits,
            fraction_bits,
        })
    }

    pub fn integer_bits(&self) -> u32 {
        self.integer_bits
    }

    pub fn fraction_bits(&self) -> u32 {
        self.fraction_bits
    }

    /// Magnitude bits left plus right of the radix point.
    pub fn magnitude_bits(&self) -> u32 {
        self.integer_bits + self.fraction_bits
    }

    /// Total encoded width including the sign bit.
    pub fn total_bits(&self) -> u32 {
        self.magnitude_bits() + 1
    }

    /// Largest representable magnitude, `2^integer_bits - 2^-fraction_bits`.
    pub fn max_value(&self) -> f64 {
        let steps = (1u64 << self.magnitude_bits()) - 1;
        steps as f64 * self.step()
    }

    /// Smallest positive representable magnitude, `2^-fraction_bits`.
    pub fn step(&self) -> f64 {
        exp2i(-(self.fraction_bits as i64))
    }

    fn quantize(&self, x: f64, mode: Rounding) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        let a = x.abs();
        let negative = x < 0.0;
        let max_steps = (1u64 << self.magnitude_bits()) - 1;
        // Scaling by the step is exact: magnitudes below max fit in 53 bits.
        let scaled = a * exp2i(self.fraction_bits as i64);
        let steps = match mode {
            Rounding::TruncateTowardZero => scaled.floor(),
            Rounding::NearestEven => scaled.round_ties_even(),
        };
        let steps = if steps > max_steps as f64 {
            max_steps as f64
        } else {
            steps
        };
        let magnitude = steps * self.step();
        if magnitude == 0.0 {
            return 0.0;
        }
        if negative {
            -magnitude
        } else {
            magnitude
        }
    }
}

/// One point of the customized-precision design space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NumericFormat {
    /// Customized floating point.
    Float(FloatFormat),
    /// Customized fixed point.
    Fixed(FixedFormat),
    /// IEEE-754 single precision pass-through (23 mantissa bits, 8 exponent
    /// bits, bias 127), quantized by rounding to the nearest `f32`.
    Baseline,
}

/// Whether a format quantizes on the float grid or the fixed grid; used to
/// pick the matching cost table. Baseline counts as float.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatKind {
    Float,
    Fixed,
}

impl fmt::Display for FormatKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormatKind::Float => write!(f, "float"),
            FormatKind::Fixed => write!(f, "fixed"),
        }
    }
}

impl NumericFormat {
    pub fn float(mantissa_bits: u32, exponent_bits: u32) -> Result<Self> {
        Ok(Self::Float(FloatFormat::new(mantissa_bits, exponent_bits)?))
    }

    pub fn float_with_bias(mantissa_bits: u32, exponent_bits: u32, bias: i32) -> Result<Self> {
        Ok(Self::Float(FloatFormat::with_bias(
            mantissa_bits,
            exponent_bits,
            bias,
        )?))
    }

    pub fn fixed(integer_bits: u32, fraction_bits: u32) -> Result<Self> {
        Ok(Self::Fixed(FixedFormat::new(integer_bits, fraction_bits)?))
    }

    pub fn kind(&self) -> FormatKind {
        match self {
            NumericFormat::Float(_) | NumericFormat::Baseline => FormatKind::Float,
            NumericFormat::Fixed(_) => FormatKind::Fixed,
        }
    }

    /// Total encoded width including the sign bit.
    pub fn total_bits(&self) -> u32 {
        match self {
            NumericFormat::Float(f) => f.total_bits(),
            NumericFormat::Fixed(f) => f.total_bits(),
            NumericFormat::Baseline => 32,
        }
    }

    /// Maps a substrate value onto the format grid with the default
    /// truncation-toward-zero rule. Saturates beyond the representable range,
    /// flushes magnitudes below the smallest representable value to zero, and
    /// normalizes negative zero to positive zero.
    pub fn quantize(&self, x: f64) -> Result<f64> {
        self.quantize_with(x, Rounding::TruncateTowardZero)
    }

    /// [`quantize`](Self::quantize) with an explicit rounding mode. Baseline
    /// always rounds to the nearest single-precision value.
    pub fn quantize_with(&self, x: f64, mode: Rounding) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::NonFinite(x));
        }
        Ok(self.quantize_unchecked(x, mode))
    }

    fn quantize_unchecked(&self, x: f64, mode: Rounding) -> f64 {
        match self {
            NumericFormat::Float(f) => f.quantize(x, mode),
            NumericFormat::Fixed(f) => f.quantize(x, mode),
            NumericFormat::Baseline => {
                if x == 0.0 {
                    return 0.0;
                }
                let v = x as f32;
                if v.is_infinite() {
                    // No infinities leave the quantizer; clamp to the widest
                    // single-precision magnitude.
                    return if v > 0.0 {
                        f32::MAX as f64
                    } else {
                        -f32::MAX as f64
                    };
                }
                if v == 0.0 {
                    return 0.0;
                }
                v as f64
            }
        }
    }

    /// Largest representable magnitude.
    pub fn max_value(&self) -> f64 {
        match self {
            NumericFormat::Float(f) => f.max_value(),
            NumericFormat::Fixed(f) => f.max_value(),
            NumericFormat::Baseline => f32::MAX as f64,
        }
    }

    /// Smallest positive representable magnitude.
    pub fn min_positive(&self) -> f64 {
        match self {
            NumericFormat::Float(f) => f.min_positive(),
            NumericFormat::Fixed(f) => f.step(),
            NumericFormat::Baseline => f64::from(f32::from_bits(1)),
        }
    }

    /// Quantized addition: the sum is formed in the substrate and quantized.
    pub fn qadd(&self, a: f64, b: f64) -> f64 {
        let sum = a + b;
        if sum.is_infinite() {
            // The substrate itself overflowed; clamp to the widest
            // representable substrate value of the format.
            let clamp = self.quantize_unchecked(f64::MAX, Rounding::TruncateTowardZero);
            return if sum > 0.0 { clamp } else { -clamp };
        }
        self.quantize_unchecked(sum, Rounding::TruncateTowardZero)
    }

    /// Quantized multiplication.
    pub fn qmul(&self, a: f64, b: f64) -> f64 {
        let product = a * b;
        if product.is_infinite() {
            let clamp = self.quantize_unchecked(f64::MAX, Rounding::TruncateTowardZero);
            return if product > 0.0 { clamp } else { -clamp };
        }
        self.quantize_unchecked(product, Rounding::TruncateTowardZero)
    }

    /// Multiply-accumulate with one quantization after the multiply and one
    /// after the add, matching truncation after each arithmetic operation.
    pub fn mac(&self, acc: f64, a: f64, b: f64) -> f64 {
        self.qadd(acc, self.qmul(a, b))
    }

    /// Encodes an already-representable value into its bit pattern.
    pub fn encode(&self, x: f64) -> Result<BitPattern> {
        if !x.is_finite() {
            return Err(Error::NonFinite(x));
        }
        if self.quantize_unchecked(x, Rounding::TruncateTowardZero) != x {
            return Err(Error::Unrepresentable {
                value: x,
                format: self.to_string(),
            });
        }
        let bits = match self {
            NumericFormat::Float(f) => {
                let sign = u64::from(x < 0.0);
                let (field, mantissa) = f.encode_magnitude(x.abs());
                (sign << (f.exponent_bits + f.mantissa_bits)) | (field << f.mantissa_bits)
                    | mantissa
            }
            NumericFormat::Fixed(f) => {
                let sign = u64::from(x < 0.0);
                let steps = (x.abs() * exp2i(f.fraction_bits as i64)) as u64;
                (sign << f.magnitude_bits()) | steps
            }
            NumericFormat::Baseline => u64::from((x as f32).to_bits()),
        };
        BitPattern::new(self.total_bits(), bits)
    }

    /// Decodes a bit pattern of this format back into a substrate value.
    /// Inverse of [`encode`](Self::encode) on its image.
    pub fn decode(&self, pattern: &BitPattern) -> Result<f64> {
        if pattern.width() != self.total_bits() {
            return Err(Error::WidthMismatch {
                pattern: pattern.width(),
                format: self.total_bits(),
            });
        }
        let bits = pattern.bits();
        let value = match self {
            NumericFormat::Float(f) => {
                let mantissa = bits & ((1u64 << f.mantissa_bits) - 1);
                let field = (bits >> f.mantissa_bits) & ((1u64 << f.exponent_bits) - 1);
                let sign = (bits >> (f.exponent_bits + f.mantissa_bits)) & 1;
                let magnitude = f.decode_fields(field, mantissa);
                if sign == 1 && magnitude != 0.0 {
                    -magnitude
                } else {
                    magnitude
                }
            }
            NumericFormat::Fixed(f) => {
                let steps = bits & ((1u64 << f.magnitude_bits()) - 1);
                let sign = (bits >> f.magnitude_bits()) & 1;
                let magnitude = steps as f64 * f.step();
                if sign == 1 && magnitude != 0.0 {
                    -magnitude
                } else {
                    magnitude
                }
            }
            NumericFormat::Baseline => {
                let v = f32::from_bits(bits as u32);
                if v == 0.0 {
                    0.0
                } else {
                    f64::from(v)
                }
            }
        };
        Ok(value)
    }

    /// All representable values of the format in ascending order. Refused for
    /// widths above [`MAX_ENUMERABLE_BITS`].
    pub fn enumerate_values(&self) -> Result<Vec<f64>> {
        let width = self.total_bits();
        if width > MAX_ENUMERABLE_BITS {
            return Err(Error::EnumerationTooWide(width, MAX_ENUMERABLE_BITS));
        }
        let mut positives = Vec::new();
        match self {
            NumericFormat::Float(f) => {
                for field in 0..(1u64 << f.exponent_bits) {
                    for mantissa in 0..(1u64 << f.mantissa_bits) {
                        if field == 0 && mantissa == 0 {
                            continue;
                        }
                        positives.push(f.decode_fields(field, mantissa));
                    }
                }
            }
            NumericFormat::Fixed(f) => {
                for steps in 1..=((1u64 << f.magnitude_bits()) - 1) {
                    positives.push(steps as f64 * f.step());
                }
            }
            NumericFormat::Baseline => unreachable!("baseline width exceeds the enumeration cap"),
        }
        positives.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
        let mut values = Vec::with_capacity(positives.len() * 2 + 1);
        values.extend(positives.iter().rev().map(|v| -v));
        values.push(0.0);
        values.extend(positives.iter());
        Ok(values)
    }
}

impl fmt::Display for NumericFormat {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumericFormat::Float(f) => {
                if f.bias == FloatFormat::default_bias(f.exponent_bits) {
                    write!(out, "float:m{}e{}", f.mantissa_bits, f.exponent_bits)
                } else {
                    write!(
                        out,
                        "float:m{}e{}b{}",
                        f.mantissa_bits, f.exponent_bits, f.bias
                    )
                }
            }
            NumericFormat::Fixed(f) => write!(out, "fixed:i{}f{}", f.integer_bits, f.fraction_bits),
            NumericFormat::Baseline => write!(out, "baseline"),
        }
    }
}

impl FromStr for NumericFormat {
    type Err = Error;

    /// Parses a format literal: `baseline`, `float:m<M>e<E>[b<B>]`, or
    /// `fixed:i<I>f<F>`. An omitted bias means the default bias.
    fn from_str(s: &str) -> Result<Self> {
        let err = |reason: &str| Error::ParseFormat {
            literal: s.to_string(),
            reason: reason.to_string(),
        };
        if s == "baseline" {
            return Ok(NumericFormat::Baseline);
        }
        if let Some(body) = s.strip_prefix("float:") {
            let fields = parse_tagged_fields(body).ok_or_else(|| err("expected m<M>e<E>[b<B>]"))?;
            match fields.as_slice() {
                [('m', m), ('e', e)] => {
                    let (m, e) = (int_field(*m, s)?, int_field(*e, s)?);
                    NumericFormat::float(m, e)
                }
                [('m', m), ('e', e), ('b', b)] => {
                    let (m, e) = (int_field(*m, s)?, int_field(*e, s)?);
                    let b = i32::try_from(*b).map_err(|_| err("bias out of range"))?;
                    NumericFormat::float_with_bias(m, e, b)
                }
                _ => Err(err("expected m<M>e<E>[b<B>]")),
            }
        } else if let Some(body) = s.strip_prefix("fixed:") {
            let fields = parse_tagged_fields(body).ok_or_else(|| err("expected i<I>f<F>"))?;
            match fields.as_slice() {
                [('i', i), ('f', f)] => {
                    let (i, f) = (int_field(*i, s)?, int_field(*f, s)?);
                    NumericFormat::fixed(i, f)
                }
                _ => Err(err("expected i<I>f<F>")),
            }
        } else {
            Err(err("unknown format kind; expected baseline, float:, or fixed:"))
        }
    }
}

fn int_field(v: i64, literal: &str) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::ParseFormat {
        literal: literal.to_string(),
        reason: "field must be a nonnegative integer".to_string(),
    })
}

/// Splits `m7e6b-3` into `[('m', 7), ('e', 6), ('b', -3)]`.
fn parse_tagged_fields(body: &str) -> Option<Vec<(char, i64)>> {
    let mut fields = Vec::new();
    let mut chars = body.chars().peekable();
    while let Some(tag) = chars.next() {
        if !tag.is_ascii_lowercase() {
            return None;
        }
        let mut digits = String::new();
        if chars.peek() == Some(&'-') {
            digits.push(chars.next().unwrap());
        }
        while let Some(c) = chars.peek() {
            if c.is_ascii_digit() {
                digits.push(chars.next().unwrap());
            } else {
                break;
            }
        }
        fields.push((tag, digits.parse().ok()?));
    }
    if fields.is_empty() {
        None
    } else {
        Some(fields)
    }
}

/// A raw encoding of a representable value: `width` significant bits laid out
/// as sign | exponent | mantissa (float) or sign | integer | fraction (fixed).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitPattern {
    width: u32,
    bits: u64,
}

impl BitPattern {
    pub fn new(width: u32, bits: u64) -> Result<Self> {
        if width == 0 || width > 64 {
            return Err(Error::InvalidFormat(format!(
                "bit pattern width {width} out of range"
            )));
        }
        if width < 64 && bits >> width != 0 {
            return Err(Error::InvalidFormat(format!(
                "bits {bits:#x} do not fit in {width} bits"
            )));
        }
        Ok(Self { width, bits })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }
}

impl fmt::Display for BitPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:0width$b}", self.bits, width = self.width as usize)
    }
}

/// Splits a positive finite `f64` into (unbiased exponent, significand with
/// the leading 1 at bit `lead`, lead position). Subnormal inputs yield a
/// significand whose lead is below bit 52.
fn decompose(a: f64) -> (i64, u64, u32) {
    debug_assert!(a.is_finite() && a > 0.0);
    let bits = a.to_bits();
    let field = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    if field > 0 {
        (field - 1023, (1u64 << 52) | frac, 52)
    } else {
        let lead = 63 - frac.leading_zeros();
        (lead as i64 - 1074, frac, lead)
    }
}

/// `2^e` as an `f64`, exact over the full finite range, with underflow to 0
/// and overflow to infinity.
pub(crate) fn exp2i(e: i64) -> f64 {
    if e >= -1022 {
        if e > 1023 {
            return f64::INFINITY;
        }
        f64::from_bits(((e + 1023) as u64) << 52)
    } else if e >= -1074 {
        f64::from_bits(1u64 << (e + 1074))
    } else {
        0.0
    }
}

/// `x * 2^k`, split into two steps so the scale factor itself never
/// overflows or underflows the substrate.
fn mul_exp2(x: f64, k: i64) -> f64 {
    if (-1022..=1023).contains(&k) {
        return x * exp2i(k);
    }
    let half = k / 2;
    x * exp2i(half) * exp2i(k - half)
}
