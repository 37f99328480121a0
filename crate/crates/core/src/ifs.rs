//! Iterated function systems: validation, the JSON file format, and bounds.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::exact::{scalar_int, Gauss, PlanarMap, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IfsError {
    #[error("syntax error at {location}: {message}")]
    Syntax { location: String, message: String },
    #[error("unequal factors: map {index} has |u|² = {found}, map 1 has {expected}")]
    UnequalFactors {
        index: usize,
        found: String,
        expected: String,
    },
    #[error("factor must be < 1 (map {index} has |u|² = {found})")]
    FactorTooLarge { index: usize, found: String },
    #[error("map {index} has zero linear part")]
    ZeroLinearPart { index: usize },
    #[error("an IFS needs at least 2 maps, found {count}")]
    TooFewMaps { count: usize },
}

/// The common contraction factor `r` of an IFS.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contraction {
    /// `r²`, exact.
    pub ratio_sq: Scalar,
    /// `r` itself when `r²` is the square of a rational, else a rational upper
    /// bound strictly below 1.
    pub ratio_bound: Scalar,
    /// Whether `ratio_bound` is exactly `r`.
    pub exact: bool,
}

impl Contraction {
    fn from_ratio_sq(ratio_sq: Scalar) -> Contraction {
        if let Some(r) = rational_sqrt(&ratio_sq) {
            return Contraction {
                ratio_sq,
                ratio_bound: r,
                exact: true,
            };
        }
        // Smallest dyadic k/2^bits with (k/2^bits)² ≥ r², refining until it is below 1.
        let approx = ratio_sq.to_f64().unwrap_or(0.0).sqrt();
        for bits in [30u32, 45, 60] {
            let scale = BigInt::from(1u64 << bits);
            let mut num = BigInt::from((approx * (1u64 << bits) as f64).floor() as u64);
            let mut cand = BigRational::new(num.clone(), scale.clone());
            while &cand * &cand < ratio_sq {
                num += 1;
                cand = BigRational::new(num.clone(), scale.clone());
            }
            if cand < Scalar::one() {
                return Contraction {
                    ratio_sq,
                    ratio_bound: cand,
                    exact: false,
                };
            }
        }
        // r is within 2⁻⁶⁰ of 1; (1 + r²)/2 ≥ r still holds and stays below 1.
        let ratio_bound = (ratio_sq.clone() + Scalar::one()) / scalar_int(2);
        Contraction {
            ratio_sq,
            ratio_bound,
            exact: false,
        }
    }

    pub fn ratio(&self) -> f64 {
        self.ratio_sq.to_f64().unwrap_or(f64::NAN).sqrt()
    }
}

fn int_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let s = n.sqrt();
    (&s * &s == *n).then_some(s)
}

fn rational_sqrt(q: &Scalar) -> Option<Scalar> {
    Some(BigRational::new(int_sqrt(q.numer())?, int_sqrt(q.denom())?))
}

/// A validated IFS with equal contraction factors.
#[derive(Clone, Debug, PartialEq)]
pub struct IfsSpec {
    pub name: String,
    pub maps: Vec<PlanarMap>,
    pub contraction: Contraction,
}

impl IfsSpec {
    pub fn new(name: impl Into<String>, maps: Vec<PlanarMap>) -> Result<IfsSpec, IfsError> {
        if maps.len() < 2 {
            return Err(IfsError::TooFewMaps { count: maps.len() });
        }
        for (k, f) in maps.iter().enumerate() {
            if f.u.is_zero() {
                return Err(IfsError::ZeroLinearPart { index: k + 1 });
            }
        }
        let ratio_sq = maps[0].ratio_sq();
        for (k, f) in maps.iter().enumerate().skip(1) {
            let found = f.ratio_sq();
            if found != ratio_sq {
                return Err(IfsError::UnequalFactors {
                    index: k + 1,
                    found: found.to_string(),
                    expected: ratio_sq.to_string(),
                });
            }
        }
        if ratio_sq >= Scalar::one() {
            return Err(IfsError::FactorTooLarge {
                index: 1,
                found: ratio_sq.to_string(),
            });
        }
        Ok(IfsSpec {
            name: name.into(),
            maps,
            contraction: Contraction::from_ratio_sq(ratio_sq),
        })
    }

    /// Number of maps `m`.
    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn ratio(&self) -> f64 {
        self.contraction.ratio()
    }

    pub fn parse(text: &str) -> Result<IfsSpec, IfsError> {
        let value: Value = serde_json::from_str(text).map_err(|e| IfsError::Syntax {
            location: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        IfsSpec::from_json(&value)
    }

    pub fn from_json(value: &Value) -> Result<IfsSpec, IfsError> {
        let obj = value
            .as_object()
            .ok_or_else(|| syntax("$", "expected an object"))?;
        let name = match obj.get("name") {
            None => String::new(),
            Some(Value::String(s)) => s.clone(),
            Some(_) => return Err(syntax("name", "expected a string")),
        };
        let maps = obj
            .get("maps")
            .and_then(Value::as_array)
            .ok_or_else(|| syntax("maps", "expected an array of maps"))?;
        let maps = maps
            .iter()
            .enumerate()
            .map(|(k, m)| parse_map(m, &format!("maps[{k}]")))
            .collect::<Result<Vec<_>, _>>()?;
        IfsSpec::new(name, maps)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "maps": self.maps.iter().map(map_to_json).collect::<Vec<_>>(),
        })
    }

    /// Rational `R` with the attractor inside the closed disk of radius `R`
    /// about the origin: `max_i (|re t_i| + |im t_i|) / (1 - r)`.
    pub fn attractor_radius(&self) -> Scalar {
        let top = self
            .maps
            .iter()
            .map(|f| f.t.l1_norm())
            .max()
            .unwrap_or_else(Scalar::zero);
        top / (Scalar::one() - &self.contraction.ratio_bound)
    }

    /// Similarity dimension `ln m / ln(1/r)`; equals the Hausdorff dimension under OSC.
    pub fn attractor_dimension(&self) -> f64 {
        (self.len() as f64).ln() / (1.0 / self.ratio()).ln()
    }

    /// Map for the piece `A_w`: `f_{w1} ∘ … ∘ f_{wk}`. Letters are 1-based.
    pub fn word_map(&self, word: &[u8]) -> PlanarMap {
        word.iter().fold(PlanarMap::identity(), |acc, &l| {
            acc.compose(&self.maps[l as usize - 1])
        })
    }
}

fn syntax(location: &str, message: &str) -> IfsError {
    IfsError::Syntax {
        location: location.to_string(),
        message: message.to_string(),
    }
}

fn parse_int(v: &Value, loc: &str) -> Result<BigInt, IfsError> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .ok_or_else(|| syntax(loc, "expected an integer")),
        Value::String(s) => s
            .parse::<BigInt>()
            .map_err(|_| syntax(loc, "expected an integer string")),
        _ => Err(syntax(loc, "expected an integer")),
    }
}

fn parse_scalar(v: &Value, loc: &str) -> Result<Scalar, IfsError> {
    match v {
        Value::Array(parts) if parts.len() == 2 => {
            let num = parse_int(&parts[0], &format!("{loc}[0]"))?;
            let den = parse_int(&parts[1], &format!("{loc}[1]"))?;
            if den.is_zero() {
                return Err(syntax(loc, "zero denominator"));
            }
            Ok(BigRational::new(num, den))
        }
        Value::Array(_) => Err(syntax(loc, "expected [numerator, denominator]")),
        other => Ok(BigRational::from_integer(parse_int(other, loc)?)),
    }
}

fn parse_gauss(v: &Value, loc: &str) -> Result<Gauss, IfsError> {
    let obj = v
        .as_object()
        .ok_or_else(|| syntax(loc, "expected {\"re\", \"im\"}"))?;
    let part = |key: &str| {
        let l = format!("{loc}.{key}");
        obj.get(key)
            .ok_or_else(|| syntax(&l, "missing field"))
            .and_then(|x| parse_scalar(x, &l))
    };
    Ok(Gauss::new(part("re")?, part("im")?))
}

fn parse_map(v: &Value, loc: &str) -> Result<PlanarMap, IfsError> {
    let obj = v.as_object().ok_or_else(|| syntax(loc, "expected a map object"))?;
    let u = parse_gauss(
        obj.get("u")
            .ok_or_else(|| syntax(&format!("{loc}.u"), "missing field"))?,
        &format!("{loc}.u"),
    )?;
    let t = parse_gauss(
        obj.get("t")
            .ok_or_else(|| syntax(&format!("{loc}.t"), "missing field"))?,
        &format!("{loc}.t"),
    )?;
    let conj = match obj.get("conj") {
        None => false,
        Some(Value::Bool(b)) => *b,
        Some(_) => return Err(syntax(&format!("{loc}.conj"), "expected a boolean")),
    };
    if u.is_zero() {
        return Err(syntax(&format!("{loc}.u"), "linear part must be nonzero"));
    }
    Ok(PlanarMap::new(u, conj, t))
}

fn scalar_to_json(s: &Scalar) -> Value {
    let num = s.numer().to_i64();
    let den = s.denom().to_i64();
    match (num, den) {
        (Some(n), Some(1)) => json!(n),
        (Some(n), Some(d)) => json!([n, d]),
        _ => json!([s.numer().to_string(), s.denom().to_string()]),
    }
}

fn gauss_to_json(g: &Gauss) -> Value {
    json!({ "re": scalar_to_json(&g.re), "im": scalar_to_json(&g.im) })
}

/// Map record in the IFS file format; also used by the graph export.
pub fn map_to_json(f: &PlanarMap) -> Value {
    json!({ "u": gauss_to_json(&f.u), "conj": f.conj, "t": gauss_to_json(&f.t) })
}

/// Bundled example systems.
pub mod presets {
    use super::IfsSpec;

    pub const NAMES: &[&str] = &[
        "chair",
        "fractal-square",
        "example-a",
        "example-a-prime",
        "example-b",
        "example-c",
        "sierpinski",
        "square-tile",
    ];

    pub fn source(name: &str) -> Option<&'static str> {
        Some(match name {
            "chair" => include_str!("../../../presets/chair.json"),
            "fractal-square" => include_str!("../../../presets/fractal-square.json"),
            "example-a" => include_str!("../../../presets/example-a.json"),
            "example-a-prime" => include_str!("../../../presets/example-a-prime.json"),
            "example-b" => include_str!("../../../presets/example-b.json"),
            "example-c" => include_str!("../../../presets/example-c.json"),
            "sierpinski" => include_str!("../../../presets/sierpinski.json"),
            "square-tile" => include_str!("../../../presets/square-tile.json"),
            _ => return None,
        })
    }

    /// Parses a bundled preset. Panics on unknown names.
    pub fn load(name: &str) -> IfsSpec {
        let text = source(name).unwrap_or_else(|| panic!("unknown preset {name}"));
        IfsSpec::parse(text).expect("bundled presets are valid")
    }
}
