//! Scenarios, tasks, bitstrings, exact rationals and success reports.
//!
//! Bit-order convention used everywhere in this crate: bit 0 of a string is
//! the most significant bit of its integer encoding, so the string `0b0110`
//! of length 4 has x_0 = 0, x_1 = 1, x_2 = 1, x_3 = 0.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};
use std::collections::BTreeMap;
use std::fmt;

use crate::TOL_EXACT;

/// Maximum supported string length.
pub const MAX_BITS: u8 = 16;

#[derive(thiserror::Error, Debug)]
pub enum Error {
    #[error("bit index {index} out of range for length-{len} string")]
    BitIndex { index: u8, len: u8 },
    #[error("invalid bitstring: value {value} does not fit in {len} bits")]
    BitValue { value: u32, len: u8 },
    #[error("invalid scenario: n = {n}, k = {k}")]
    Scenario { n: u8, k: u8 },
    #[error("per-pair table incomplete: missing entry for x = {x}, y = {y}")]
    IncompleteTable { x: u32, y: u8 },
    #[error("strategy shape does not match task: {0}")]
    ShapeMismatch(String),
    #[error("enumeration needs {required} strategies but the cap is {cap}")]
    CapExceeded { required: u128, cap: u128 },
    #[error("unsupported scenario: {0}")]
    Unsupported(String),
    #[error("state not normalized (squared norm {0})")]
    NotNormalized(f64),
    #[error("basis vectors not orthonormal")]
    NotOrthonormal,
    #[error("degenerate measurement direction for y = {0}")]
    DegenerateDirection(u8),
    #[error("assignment search failed: {0}")]
    SearchFailure(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("verification mismatch: {0}")]
    VerificationMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Fixed-length binary word; bit 0 is the most significant bit.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct BitString {
    len: u8,
    value: u32,
}

impl BitString {
    pub fn new(len: u8, value: u32) -> Result<Self> {
        if len == 0 || len > MAX_BITS {
            return Err(Error::InvalidParameter(format!("bad length {len}")));
        }
        if value >> len != 0 {
            return Err(Error::BitValue { value, len });
        }
        Ok(BitString { len, value })
    }

    pub fn len(&self) -> u8 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self) -> u32 {
        self.value
    }

    /// Bit x_i (i = 0 is the most significant position).
    pub fn bit(&self, i: u8) -> Result<u8> {
        if i >= self.len {
            return Err(Error::BitIndex {
                index: i,
                len: self.len,
            });
        }
        Ok(((self.value >> (self.len - 1 - i)) & 1) as u8)
    }

    /// Like [`bit`](Self::bit) but panics on range errors; for internal loops
    /// whose indices are known to be valid.
    pub fn get(&self, i: u8) -> u8 {
        self.bit(i).expect("bit index in range")
    }

    pub fn with_bit(&self, i: u8, b: u8) -> Result<Self> {
        if i >= self.len {
            return Err(Error::BitIndex {
                index: i,
                len: self.len,
            });
        }
        let mask = 1u32 << (self.len - 1 - i);
        let value = if b & 1 == 1 {
            self.value | mask
        } else {
            self.value & !mask
        };
        Ok(BitString {
            len: self.len,
            value,
        })
    }

    pub fn bits(&self) -> impl Iterator<Item = u8> + '_ {
        (0..self.len).map(|i| self.get(i))
    }

    pub fn parse(s: &str) -> Result<Self> {
        let len = s.len() as u8;
        let value = u32::from_str_radix(s, 2)
            .map_err(|_| Error::InvalidParameter(format!("bad bitstring {s:?}")))?;
        BitString::new(len, value)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// An (n,k) scenario: party A_0 holds the first k input bits, each of the
/// n − k relay parties holds one further bit, and party B guesses.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct RacScenario {
    pub n: u8,
    pub k: u8,
}

impl RacScenario {
    pub fn new(n: u8, k: u8) -> Result<Self> {
        if n == 0 || n > MAX_BITS || k == 0 || k > n {
            return Err(Error::Scenario { n, k });
        }
        Ok(RacScenario { n, k })
    }

    /// Number of encoding parties (A_0 plus the relays).
    pub fn encoding_parties(&self) -> u8 {
        self.n - self.k + 1
    }

    pub fn relay_count(&self) -> u8 {
        self.n - self.k
    }

    /// Number of (x, y) pairs: n · 2^n.
    pub fn pair_count(&self) -> u64 {
        (self.n as u64) << self.n
    }

    pub fn input_count(&self) -> u32 {
        1u32 << self.n
    }
}

/// A scenario together with the bivariate target f(x, y).
///
/// Row x of `rows` stores f(x, ·) as a length-n bitstring whose bit y is
/// f(x, y).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RacTask {
    scenario: RacScenario,
    rows: Vec<BitString>,
}

impl RacTask {
    pub fn from_rows(scenario: RacScenario, rows: Vec<BitString>) -> Result<Self> {
        if rows.len() != scenario.input_count() as usize {
            return Err(Error::ShapeMismatch(format!(
                "expected {} rows, got {}",
                scenario.input_count(),
                rows.len()
            )));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != scenario.n) {
            return Err(Error::ShapeMismatch(format!(
                "row length {} does not match n = {}",
                r.len(),
                scenario.n
            )));
        }
        Ok(RacTask { scenario, rows })
    }

    pub fn from_fn(scenario: RacScenario, f: impl Fn(u32, u8) -> u8) -> Self {
        let n = scenario.n;
        let rows = (0..scenario.input_count())
            .map(|x| {
                let mut v = 0u32;
                for y in 0..n {
                    v = (v << 1) | (f(x, y) as u32 & 1);
                }
                BitString::new(n, v).expect("row fits")
            })
            .collect();
        RacTask { scenario, rows }
    }

    /// The standard task f(x, y) = x_y.
    pub fn standard(n: u8, k: u8) -> Result<Self> {
        let scenario = RacScenario::new(n, k)?;
        Ok(Self::from_fn(scenario, |x, y| {
            ((x >> (n - 1 - y)) & 1) as u8
        }))
    }

    pub fn scenario(&self) -> RacScenario {
        self.scenario
    }

    pub fn value(&self, x: u32, y: u8) -> u8 {
        self.rows[x as usize].get(y)
    }

    pub fn rows(&self) -> &[BitString] {
        &self.rows
    }
}

impl Serialize for RacTask {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = ser.serialize_struct("RacTask", 3)?;
        s.serialize_field("n", &self.scenario.n)?;
        s.serialize_field("k", &self.scenario.k)?;
        let table: Vec<String> = self.rows.iter().map(|r| r.to_string()).collect();
        s.serialize_field("table", &table)?;
        s.end()
    }
}

/// Reduced fraction with arbitrary-precision integer parts.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_count(hits: u64, total: u64) -> Self {
        assert!(total != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(hits), BigInt::from(total)))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().expect("finite rational")
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn abs_diff(&self, other: &Rational) -> Rational {
        Rational((&self.0 - &other.0).abs())
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl std::ops::Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Rational) -> Rational {
        Rational(self.0 + rhs.0)
    }
}

impl std::ops::Sub for Rational {
    type Output = Rational;
    fn sub(self, rhs: Rational) -> Rational {
        Rational(self.0 - rhs.0)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Frac {
            num: i64,
            den: i64,
        }
        // All values produced here have denominator dividing n·2^n with
        // n ≤ 16, so i64 parts always suffice.
        let num = self.0.numer().to_i64().ok_or_else(|| {
            serde::ser::Error::custom("rational numerator exceeds i64 range")
        })?;
        let den = self.0.denom().to_i64().ok_or_else(|| {
            serde::ser::Error::custom("rational denominator exceeds i64 range")
        })?;
        Frac { num, den }.serialize(ser)
    }
}

/// Method labels carried by success reports.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Method {
    ClassicalEnumerated,
    ClassicalZigzag,
    EaracBell,
    EaracGhz,
    EaracGrid9,
    Qrac,
    ClosedForm,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ClassicalEnumerated => "classical-enumerated",
            Method::ClassicalZigzag => "classical-zigzag",
            Method::EaracBell => "earac-bell",
            Method::EaracGhz => "earac-ghz",
            Method::EaracGrid9 => "earac-grid9",
            Method::Qrac => "qrac",
            Method::ClosedForm => "closed-form",
        }
    }
}

impl Serialize for Method {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_str(self.as_str())
    }
}

/// Per-pair success probabilities keyed by (x, y).
pub type PairTable = BTreeMap<(u32, u8), f64>;

/// Average success probability with uniform weight 1/(n·2^n).
///
/// Errors if any (x, y) pair is missing from the table.
pub fn average_success(per_pair: &PairTable, scenario: RacScenario) -> Result<f64> {
    let mut sum = 0.0;
    for x in 0..scenario.input_count() {
        for y in 0..scenario.n {
            let p = per_pair
                .get(&(x, y))
                .ok_or(Error::IncompleteTable { x, y })?;
            sum += p;
        }
    }
    Ok(sum / scenario.pair_count() as f64)
}

/// Exact variant of [`average_success`] for 0/1 outcome tables: counts the
/// pairs marked correct.
pub fn average_success_exact(correct: &BTreeMap<(u32, u8), bool>, scenario: RacScenario) -> Result<Rational> {
    let mut hits = 0u64;
    for x in 0..scenario.input_count() {
        for y in 0..scenario.n {
            if *correct
                .get(&(x, y))
                .ok_or(Error::IncompleteTable { x, y })?
            {
                hits += 1;
            }
        }
    }
    Ok(Rational::from_count(hits, scenario.pair_count()))
}

/// A protocol evaluation result.
#[derive(Clone, Debug, Serialize)]
pub struct SuccessReport {
    pub method: Method,
    pub n: u8,
    pub k: u8,
    pub value_exact: Option<Rational>,
    pub value_float: f64,
    pub per_pair: Option<Vec<PairEntry>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairEntry {
    pub x: String,
    pub y: u8,
    pub p: f64,
}

impl SuccessReport {
    pub fn new(
        method: Method,
        scenario: RacScenario,
        value_exact: Option<Rational>,
        value_float: f64,
        per_pair: Option<&PairTable>,
    ) -> Result<Self> {
        if let Some(table) = per_pair {
            let mean = average_success(table, scenario)?;
            if (mean - value_float).abs() > TOL_EXACT {
                return Err(Error::VerificationMismatch(format!(
                    "per-pair mean {mean} disagrees with value {value_float}"
                )));
            }
        }
        if let Some(exact) = &value_exact {
            if (exact.to_f64() - value_float).abs() > TOL_EXACT {
                return Err(Error::VerificationMismatch(format!(
                    "exact value {exact} disagrees with float value {value_float}"
                )));
            }
        }
        let per_pair = per_pair.map(|table| {
            table
                .iter()
                .map(|(&(x, y), &p)| PairEntry {
                    x: BitString::new(scenario.n, x).expect("valid x").to_string(),
                    y,
                    p,
                })
                .collect()
        });
        Ok(SuccessReport {
            method,
            n: scenario.n,
            k: scenario.k,
            value_exact,
            value_float,
            per_pair,
        })
    }
}
