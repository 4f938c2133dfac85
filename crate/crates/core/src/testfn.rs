//! Closed-form test functions `g` for weighted score measures.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::points::dist2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TestFunction {
    Constant(f64),
    /// `g(x) = x_i` (zero-based).
    Coordinate(usize),
    /// `g(x) = exp(-|x - center|^2 / width^2)`.
    Bump { center: Vec<f64>, width: f64 },
}

impl TestFunction {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            TestFunction::Constant(c) => *c,
            TestFunction::Coordinate(i) => x[*i],
            TestFunction::Bump { center, width } => (-dist2(x, center) / (width * width)).exp(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, TestFunction::Constant(c) if *c == 0.0)
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFunction::Constant(c) => write!(f, "const:{c}"),
            TestFunction::Coordinate(i) => write!(f, "coord:{i}"),
            TestFunction::Bump { center, width } => {
                let c: Vec<String> = center.iter().map(|x| x.to_string()).collect();
                write!(f, "bump:{};{}", c.join(","), width)
            }
        }
    }
}

/// Parses `const:<c>`, `one`, `zero`, `coord:<i>` or `bump:<c1>,<c2>,...;<width>`.
impl FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::Config(format!("cannot parse test function {s:?}"));
        let s = s.trim();
        match s {
            "one" => return Ok(TestFunction::Constant(1.0)),
            "zero" => return Ok(TestFunction::Constant(0.0)),
            _ => {}
        }
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "const" => rest.trim().parse().map(TestFunction::Constant).map_err(|_| bad()),
            "coord" => rest.trim().parse().map(TestFunction::Coordinate).map_err(|_| bad()),
            "bump" => {
                let (c, w) = rest.split_once(';').ok_or_else(bad)?;
                let center = c.split(',').map(|t| t.trim().parse::<f64>()).collect::<Result<Vec<_>, _>>().map_err(|_| bad())?;
                let width: f64 = w.trim().parse().map_err(|_| bad())?;
                if !(width > 0.0) || center.is_empty() {
                    return Err(bad());
                }
                Ok(TestFunction::Bump { center, width })
            }
            _ => Err(bad()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_eval() {
        let g: TestFunction = "bump:1,0;2".parse().unwrap();
        assert_eq!(g.eval(&[1.0, 0.0]), 1.0);
        assert!((g.eval(&[1.0, 2.0]) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!("coord:1".parse::<TestFunction>().unwrap().eval(&[3.0, 4.0]), 4.0);
        assert!("one".parse::<TestFunction>().unwrap() == TestFunction::Constant(1.0));
        assert!("bump:1;0".parse::<TestFunction>().is_err());
        let round: TestFunction = g.to_string().parse().unwrap();
        assert_eq!(round, g);
    }
}
