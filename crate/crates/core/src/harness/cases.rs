//! Manufactured test problems on the unit square.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::mesh::Point;
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regularity {
    Analytic,
    /// `u ∈ H^{3.5-ε}`, singular at the origin.
    Singular,
    Polynomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestCase {
    /// `u = sin(πx) sin(πy)`, `f = 2π² u`.
    SinSin,
    /// `u = r^2.5 sin(2.5θ)`, harmonic, singular at the corner `(0, 0)`.
    Corner25,
    /// `u = x² + y²`, `f = -4`.
    Patch,
}

impl TestCase {
    pub const ALL: [TestCase; 3] = [TestCase::SinSin, TestCase::Corner25, TestCase::Patch];

    pub fn name(self) -> &'static str {
        match self {
            TestCase::SinSin => "sinsin",
            TestCase::Corner25 => "corner25",
            TestCase::Patch => "patch",
        }
    }

    pub fn regularity(self) -> Regularity {
        match self {
            TestCase::SinSin => Regularity::Analytic,
            TestCase::Corner25 => Regularity::Singular,
            TestCase::Patch => Regularity::Polynomial,
        }
    }

    pub fn u(self, x: &Point) -> f64 {
        match self {
            TestCase::SinSin => (PI * x.x).sin() * (PI * x.y).sin(),
            TestCase::Corner25 => {
                let r = x.coords.norm();
                if r == 0.0 {
                    return 0.0;
                }
                r.powf(2.5) * (2.5 * x.y.atan2(x.x)).sin()
            }
            TestCase::Patch => x.x * x.x + x.y * x.y,
        }
    }

    pub fn grad(self, x: &Point) -> [f64; 2] {
        match self {
            TestCase::SinSin => {
                let (sx, cx) = (PI * x.x).sin_cos();
                let (sy, cy) = (PI * x.y).sin_cos();
                [PI * cx * sy, PI * sx * cy]
            }
            TestCase::Corner25 => {
                let r = x.coords.norm();
                if r == 0.0 {
                    return [0.0, 0.0];
                }
                let t = x.y.atan2(x.x);
                let s = 2.5 * r.powf(1.5);
                [s * (1.5 * t).sin(), s * (1.5 * t).cos()]
            }
            TestCase::Patch => [2.0 * x.x, 2.0 * x.y],
        }
    }

    /// Loading `f = -Δu`.
    pub fn f(self, x: &Point) -> f64 {
        match self {
            TestCase::SinSin => 2.0 * PI * PI * self.u(x),
            TestCase::Corner25 => 0.0,
            TestCase::Patch => -4.0,
        }
    }

    pub fn dirichlet(self, x: &Point) -> f64 {
        self.u(x)
    }
}

impl fmt::Display for TestCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        TestCase::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown case `{s}` (expected sinsin, corner25 or patch)")))
    }
}
