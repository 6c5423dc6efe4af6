//! Named test functions `phi` used by diagnostics, filters and the bench CLI.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// A test function on `R^d`. Scalar variants read the first coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestFn {
    /// `x_1`
    Identity,
    /// `x_1^2`
    Square,
    /// `sin(x_1)`
    Sin,
    /// `tanh(x_1)`
    Tanh,
    /// `||x||_1 / 2`
    HalfL1,
}

impl TestFn {
    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            TestFn::Identity => x[0],
            TestFn::Square => x[0] * x[0],
            TestFn::Sin => x[0].sin(),
            TestFn::Tanh => x[0].tanh(),
            TestFn::HalfL1 => 0.5 * x.iter().map(|v| v.abs()).sum::<f64>(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TestFn::Identity => "x",
            TestFn::Square => "x2",
            TestFn::Sin => "sin",
            TestFn::Tanh => "tanh",
            TestFn::HalfL1 => "half-l1",
        }
    }
}

impl fmt::Display for TestFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Ok(match s {
            "x" => TestFn::Identity,
            "x2" => TestFn::Square,
            "sin" => TestFn::Sin,
            "tanh" => TestFn::Tanh,
            "half-l1" => TestFn::HalfL1,
            other => return Err(Error::InvalidArgument(format!("unknown test function {other:?}"))),
        })
    }
}

impl serde::Serialize for TestFn {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> serde::Deserialize<'de> for TestFn {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
