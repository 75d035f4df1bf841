//! Mesh family specifications such as `hex:8` or `voronoi:6:seed=3:lloyd=40`.

use std::fmt;
use std::str::FromStr;

use crate::mesh::{generate_hex_mesh, generate_square_mesh, generate_triangle_mesh, generate_voronoi_lloyd, PolygonMesh};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MeshFamily {
    Triangle,
    Square,
    Hex,
    Voronoi,
}

impl MeshFamily {
    pub const ALL: [MeshFamily; 4] = [MeshFamily::Triangle, MeshFamily::Square, MeshFamily::Hex, MeshFamily::Voronoi];

    pub fn name(self) -> &'static str {
        match self {
            MeshFamily::Triangle => "tri",
            MeshFamily::Square => "square",
            MeshFamily::Hex => "hex",
            MeshFamily::Voronoi => "voronoi",
        }
    }

    /// Family parameter giving roughly 64 cells.
    pub fn n_for_64_cells(self) -> usize {
        match self {
            MeshFamily::Triangle => 6,
            _ => 8,
        }
    }
}

impl fmt::Display for MeshFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeshFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tri" | "triangle" => Ok(MeshFamily::Triangle),
            "square" => Ok(MeshFamily::Square),
            "hex" => Ok(MeshFamily::Hex),
            "voronoi" => Ok(MeshFamily::Voronoi),
            _ => Err(Error::InvalidArgument(format!("unknown mesh family `{s}` (expected tri, square, hex or voronoi)"))),
        }
    }
}

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_LLOYD: usize = 50;
const MAX_N: usize = 512;

/// A reproducible member of a mesh family. For the Voronoi family `n` is the
/// number of generators per side, so the mesh has `n²` cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FamilySpec {
    pub family: MeshFamily,
    pub n: usize,
    pub seed: u64,
    pub lloyd: usize,
}

impl FamilySpec {
    pub fn new(family: MeshFamily, n: usize) -> Self {
        FamilySpec { family, n, seed: DEFAULT_SEED, lloyd: DEFAULT_LLOYD }
    }

    pub fn build(&self) -> Result<PolygonMesh> {
        let min = match self.family {
            MeshFamily::Square | MeshFamily::Voronoi => 1,
            MeshFamily::Triangle | MeshFamily::Hex => 2,
        };
        if self.n < min || self.n > MAX_N {
            return Err(Error::InvalidArgument(format!(
                "{} mesh needs {min} <= n <= {MAX_N}, got {}",
                self.family, self.n
            )));
        }
        match self.family {
            MeshFamily::Triangle => generate_triangle_mesh(self.n, self.seed),
            MeshFamily::Square => generate_square_mesh(self.n),
            MeshFamily::Hex => generate_hex_mesh(self.n),
            MeshFamily::Voronoi => generate_voronoi_lloyd(self.n * self.n, self.lloyd, self.seed),
        }
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.family, self.n)?;
        if self.seed != DEFAULT_SEED {
            write!(f, ":seed={}", self.seed)?;
        }
        if self.lloyd != DEFAULT_LLOYD {
            write!(f, ":lloyd={}", self.lloyd)?;
        }
        Ok(())
    }
}

impl FromStr for FamilySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_spec(s, true)
    }
}

impl FamilySpec {
    /// Like `from_str` but `n` may be omitted (it is left at 0), as in the
    /// family lists of a study where the sizes come separately.
    pub fn parse_template(s: &str) -> Result<Self> {
        parse_spec(s, false)
    }
}

fn parse_spec(s: &str, require_n: bool) -> Result<FamilySpec> {
    let bad = |msg: String| Error::InvalidArgument(format!("family spec `{s}`: {msg}"));
    let mut parts = s.split(':').peekable();
    let family: MeshFamily = parts.next().unwrap_or_default().parse()?;
    let n = match parts.peek() {
        Some(part) if !part.contains('=') => {
            let n = part.parse::<usize>().map_err(|e| bad(format!("bad n: {e}")))?;
            parts.next();
            n
        }
        _ if require_n => return Err(bad("missing n".into())),
        _ => 0,
    };
    let mut spec = FamilySpec::new(family, n);
    for opt in parts {
        let (key, value) = opt.split_once('=').ok_or_else(|| bad(format!("expected key=value, got `{opt}`")))?;
        match key {
            "seed" => spec.seed = value.parse().map_err(|e| bad(format!("bad seed: {e}")))?,
            "lloyd" => spec.lloyd = value.parse().map_err(|e| bad(format!("bad lloyd: {e}")))?,
            _ => return Err(bad(format!("unknown option `{key}`"))),
        }
    }
    Ok(spec)
}

/// Parse a comma-separated list; integer ranges may be written `a..b`
/// (inclusive).
pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim) {
        if item.is_empty() {
            return Err(Error::InvalidArgument(format!("empty item in list `{s}`")));
        }
        out.push(item.parse::<T>().map_err(|e| Error::InvalidArgument(format!("`{item}`: {e}")))?);
    }
    Ok(out)
}

const MAX_RANGE: usize = 10_000;

pub fn parse_usize_list(s: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim) {
        let bad = |e: std::num::ParseIntError| Error::InvalidArgument(format!("`{item}`: {e}"));
        match item.split_once("..") {
            Some((a, b)) => {
                let (a, b): (usize, usize) = (a.parse().map_err(bad)?, b.parse().map_err(bad)?);
                if a > b || b - a >= MAX_RANGE {
                    return Err(Error::InvalidArgument(format!("bad range `{item}`")));
                }
                out.extend(a..=b);
            }
            None => out.push(item.parse().map_err(bad)?),
        }
    }
    Ok(out)
}
