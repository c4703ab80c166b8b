use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ConvexPolygon;
use crate::error::{Error, Result};
use crate::norms::{parse_numbers, MinkowskiNorm};

/// Textual description of a domain:
///
/// * `rect:a,k` for `]-a, a[ × ]-k, k[`,
/// * `regular:n,R` for the regular `n`-gon of circumradius `R`,
/// * `wulff:r,n` for an `n`-vertex polygon of the Wulff shape of radius `r`
///   (it depends on the norm of the case),
/// * `poly:x1,y1;x2,y2;...` for an explicit convex polygon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum DomainSpec {
    Rect { a: f64, k: f64 },
    Regular { n: usize, circumradius: f64 },
    Wulff { r: f64, n: usize },
    Poly { vertices: Vec<[f64; 2]> },
}

impl DomainSpec {
    pub fn build(&self, norm: &MinkowskiNorm) -> Result<ConvexPolygon> {
        let poly = match self {
            DomainSpec::Rect { a, k } => ConvexPolygon::rectangle(*a, *k)?,
            DomainSpec::Regular { n, circumradius } => ConvexPolygon::regular(*n, *circumradius)?,
            DomainSpec::Wulff { r, n } => ConvexPolygon::wulff(norm, *r, *n)?,
            DomainSpec::Poly { vertices } => ConvexPolygon::new(vertices.clone(), self.to_string())?,
        };
        Ok(poly)
    }
}

fn as_count(v: f64, s: &str) -> Result<usize> {
    if v >= 1.0 && v.fract() == 0.0 && v < 1e9 {
        Ok(v as usize)
    } else {
        Err(Error::parse("domain", s, format!("`{v}` is not a vertex count")))
    }
}

impl FromStr for DomainSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| Error::parse("domain", s, "expected `rect:a,k`, `regular:n,R`, `wulff:r,n` or `poly:x,y;...`"))?;
        let spec = match kind.trim() {
            "poly" => {
                let vertices = args
                    .split(';')
                    .filter(|t| !t.trim().is_empty())
                    .map(|pair| match parse_numbers(pair)?.as_slice() {
                        [x, y] => Ok([*x, *y]),
                        _ => Err(format!("vertex `{}` needs two coordinates", pair.trim())),
                    })
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|r| Error::parse("domain", s, r))?;
                DomainSpec::Poly { vertices }
            }
            kind => {
                let nums = parse_numbers(args).map_err(|r| Error::parse("domain", s, r))?;
                match (kind, nums.as_slice()) {
                    ("rect", [a, k]) => DomainSpec::Rect { a: *a, k: *k },
                    ("regular", [n, r]) => DomainSpec::Regular { n: as_count(*n, s)?, circumradius: *r },
                    ("wulff", [r, n]) => DomainSpec::Wulff { r: *r, n: as_count(*n, s)? },
                    ("rect" | "regular" | "wulff", _) => {
                        return Err(Error::parse("domain", s, format!("`{kind}` takes two numbers")))
                    }
                    _ => return Err(Error::parse("domain", s, format!("unknown domain kind `{kind}`"))),
                }
            }
        };
        // Validate the parameters eagerly where the norm is not needed.
        let positive = |v: f64| v > 0.0;
        let ok = match &spec {
            DomainSpec::Rect { a, k } => positive(*a) && positive(*k),
            DomainSpec::Regular { n, circumradius } => *n >= 3 && positive(*circumradius),
            DomainSpec::Wulff { r, n } => positive(*r) && *n >= 16,
            DomainSpec::Poly { vertices } => ConvexPolygon::new(vertices.clone(), "poly").is_ok(),
        };
        if !ok {
            return Err(Error::parse("domain", s, "parameters out of range or polygon not convex"));
        }
        Ok(spec)
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainSpec::Rect { a, k } => write!(f, "rect:{a},{k}"),
            DomainSpec::Regular { n, circumradius } => write!(f, "regular:{n},{circumradius}"),
            DomainSpec::Wulff { r, n } => write!(f, "wulff:{r},{n}"),
            DomainSpec::Poly { vertices } => {
                let parts: Vec<String> = vertices.iter().map(|v| format!("{},{}", v[0], v[1])).collect();
                write!(f, "poly:{}", parts.join(";"))
            }
        }
    }
}

impl TryFrom<String> for DomainSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<DomainSpec> for String {
    fn from(d: DomainSpec) -> String {
        d.to_string()
    }
}
