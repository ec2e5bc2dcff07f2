use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::BoundaryPoint;

/// Which summand of the admissible decomposition a part belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ThetaClass {
    /// Form-bounded-below part.
    #[serde(rename = "theta1")]
    Theta1,
    /// Compact (relative to the trace) part.
    #[serde(rename = "theta2")]
    Theta2,
    /// Small part, compared against `delta`.
    #[serde(rename = "theta3")]
    Theta3,
}

impl ThetaClass {
    fn tag(self) -> &'static str {
        match self {
            ThetaClass::Theta1 => "t1",
            ThetaClass::Theta2 => "t2",
            ThetaClass::Theta3 => "t3",
        }
    }
}

/// Named opaque boundary function.
#[derive(Clone)]
pub struct BoundaryFn {
    pub name: String,
    pub f: Arc<dyn Fn(&BoundaryPoint) -> f64 + Send + Sync>,
}

/// Named opaque kernel on pairs of arclength coordinates.
#[derive(Clone)]
pub struct KernelFn {
    pub name: String,
    pub f: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for BoundaryFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BoundaryFn({})", self.name)
    }
}

impl fmt::Debug for KernelFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KernelFn({})", self.name)
    }
}

/// A real function on the boundary.
#[derive(Debug, Clone)]
pub enum Coefficient {
    Const(f64),
    /// One value per polygon side, in vertex order.
    Edges(Vec<f64>),
    Custom(BoundaryFn),
}

impl Coefficient {
    pub fn eval(&self, p: &BoundaryPoint) -> f64 {
        match self {
            Coefficient::Const(v) => *v,
            Coefficient::Edges(v) => v.get(p.side).copied().unwrap_or(f64::NAN),
            Coefficient::Custom(c) => (c.f)(p),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Kernel {
    /// `a cos(2 pi m (s - t) / P)` with `P` the perimeter.
    Cosine {
        a: f64,
        m: u32,
    },
    Custom(KernelFn),
}

impl Kernel {
    pub fn eval(&self, s: f64, t: f64, perimeter: f64) -> f64 {
        match self {
            Kernel::Cosine { a, m } => a * (2.0 * std::f64::consts::PI * f64::from(*m) * (s - t) / perimeter).cos(),
            Kernel::Custom(k) => (k.f)(s, t),
        }
    }
}

/// Symbolic boundary operator `Theta`.
#[derive(Debug, Clone)]
pub enum BoundaryOperatorSpec {
    Zero,
    /// `Theta f = theta f`, with the declared integrability exponent
    /// (`f64::INFINITY` for bounded `theta`).
    Multiplication {
        theta: Coefficient,
        p: f64,
    },
    Kernel(Kernel),
    /// `Theta f = c <g, f> g`.
    RankOne {
        g: Coefficient,
        c: f64,
    },
    Composite(Vec<(BoundaryOperatorSpec, ThetaClass)>),
    /// An operator known only through its abstract pairing; no discrete
    /// form can be built for it.
    Abstract(String),
}

impl BoundaryOperatorSpec {
    pub fn mult_const(v: f64) -> Self {
        Self::Multiplication { theta: Coefficient::Const(v), p: f64::INFINITY }
    }

    /// Class assigned to an untagged part.
    pub fn default_class(&self) -> ThetaClass {
        match self {
            BoundaryOperatorSpec::Composite(parts) => parts.iter().map(|p| p.1).max().unwrap_or(ThetaClass::Theta2),
            _ => ThetaClass::Theta2,
        }
    }

    /// Leaf parts with their classes, composites flattened.
    pub fn parts(&self) -> Vec<(&BoundaryOperatorSpec, ThetaClass)> {
        let mut out = Vec::new();
        self.collect_parts(self.default_class(), &mut out);
        out
    }

    fn collect_parts<'a>(&'a self, class: ThetaClass, out: &mut Vec<(&'a BoundaryOperatorSpec, ThetaClass)>) {
        match self {
            BoundaryOperatorSpec::Composite(parts) => {
                for (p, c) in parts {
                    p.collect_parts(*c, out);
                }
            }
            leaf => out.push((leaf, class)),
        }
    }

    pub fn is_multiplication(&self) -> bool {
        matches!(self, BoundaryOperatorSpec::Multiplication { .. })
    }

    /// `sha256` of the canonical text, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_string().as_bytes()))
    }

    /// Parses the textual syntax:
    ///
    /// ```text
    /// zero
    /// mult:const:<v>[:p=<p>]
    /// mult:edges:<v1>,<v2>,...[:p=<p>]
    /// rank1:const:<c>
    /// kernel:cosine:<a>:<m>
    /// sum:(<spec>;<spec>;...)
    /// abstract:<name>
    /// ```
    ///
    /// Any spec may carry a class tag suffix `@t1`, `@t2` or `@t3`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let (body, tag) = split_tag(text)?;
        let spec = parse_body(body).map_err(|msg| Error::SpecSyntax { spec: text.to_string(), msg })?;
        Ok(match tag {
            Some(class) => BoundaryOperatorSpec::Composite(vec![(spec, class)]),
            None => spec,
        })
    }
}

fn split_tag(text: &str) -> Result<(&str, Option<ThetaClass>)> {
    // a tag belongs to this level only if it follows the closing parenthesis
    // of a sum or a plain leaf
    if let Some(pos) = text.rfind('@') {
        if !text[pos..].contains(')') {
            let class = match &text[pos + 1..] {
                "t1" => ThetaClass::Theta1,
                "t2" => ThetaClass::Theta2,
                "t3" => ThetaClass::Theta3,
                other => {
                    return Err(Error::SpecSyntax { spec: text.into(), msg: format!("unknown class tag '@{other}'") });
                }
            };
            return Ok((text[..pos].trim_end(), Some(class)));
        }
    }
    Ok((text, None))
}

fn num(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

fn parse_exponent(rest: &str) -> std::result::Result<(&str, f64), String> {
    match rest.rsplit_once(":p=") {
        Some((head, p)) => {
            let p = if p.trim() == "inf" { f64::INFINITY } else { p.trim().parse::<f64>().map_err(|_| format!("bad exponent '{p}'"))? };
            if !(p > 1.0) {
                return Err(format!("exponent must exceed 1, got {p}"));
            }
            Ok((head, p))
        }
        None => Ok((rest, f64::INFINITY)),
    }
}

fn parse_body(body: &str) -> std::result::Result<BoundaryOperatorSpec, String> {
    if body == "zero" {
        return Ok(BoundaryOperatorSpec::Zero);
    }
    if let Some(rest) = body.strip_prefix("mult:const:") {
        let (v, p) = parse_exponent(rest)?;
        return Ok(BoundaryOperatorSpec::Multiplication { theta: Coefficient::Const(num(v)?), p });
    }
    if let Some(rest) = body.strip_prefix("mult:edges:") {
        let (v, p) = parse_exponent(rest)?;
        let vals = v.split(',').map(num).collect::<std::result::Result<Vec<_>, _>>()?;
        return Ok(BoundaryOperatorSpec::Multiplication { theta: Coefficient::Edges(vals), p });
    }
    if let Some(rest) = body.strip_prefix("rank1:const:") {
        return Ok(BoundaryOperatorSpec::RankOne { g: Coefficient::Const(1.0), c: num(rest)? });
    }
    if let Some(rest) = body.strip_prefix("kernel:cosine:") {
        let (a, m) = rest.split_once(':').ok_or("expected kernel:cosine:<a>:<m>")?;
        let m: u32 = m.trim().parse().map_err(|_| format!("'{m}' is not a nonnegative integer"))?;
        return Ok(BoundaryOperatorSpec::Kernel(Kernel::Cosine { a: num(a)?, m }));
    }
    if let Some(rest) = body.strip_prefix("abstract:") {
        if rest.is_empty() {
            return Err("abstract operator needs a name".into());
        }
        return Ok(BoundaryOperatorSpec::Abstract(rest.to_string()));
    }
    if let Some(rest) = body.strip_prefix("sum:") {
        let inner = rest.strip_prefix('(').and_then(|r| r.strip_suffix(')')).ok_or("expected sum:(<spec>;...)")?;
        let mut parts = Vec::new();
        for piece in split_top_level(inner)? {
            let (b, tag) = split_tag(piece.trim()).map_err(|e| e.to_string())?;
            let spec = parse_body(b)?;
            let class = tag.unwrap_or_else(|| spec.default_class());
            parts.push((spec, class));
        }
        if parts.is_empty() {
            return Err("empty sum".into());
        }
        return Ok(BoundaryOperatorSpec::Composite(parts));
    }
    Err(format!("unrecognized operator '{body}'"))
}

fn split_top_level(s: &str) -> std::result::Result<Vec<&str>, String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ';' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
        if depth < 0 {
            return Err("unbalanced parentheses".into());
        }
    }
    if depth != 0 {
        return Err("unbalanced parentheses".into());
    }
    out.push(&s[start..]);
    Ok(out)
}

fn write_coefficient(f: &mut fmt::Formatter<'_>, c: &Coefficient) -> fmt::Result {
    match c {
        Coefficient::Const(v) => write!(f, "const:{v}"),
        Coefficient::Edges(v) => {
            write!(f, "edges:")?;
            for (i, x) in v.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
            }
            Ok(())
        }
        Coefficient::Custom(c) => write!(f, "custom:{}", c.name),
    }
}

/// Canonical text; parsing it back yields an equivalent spec.
impl fmt::Display for BoundaryOperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryOperatorSpec::Zero => write!(f, "zero"),
            BoundaryOperatorSpec::Multiplication { theta, p } => {
                write!(f, "mult:")?;
                write_coefficient(f, theta)?;
                if p.is_finite() {
                    write!(f, ":p={p}")?;
                }
                Ok(())
            }
            BoundaryOperatorSpec::Kernel(Kernel::Cosine { a, m }) => write!(f, "kernel:cosine:{a}:{m}"),
            BoundaryOperatorSpec::Kernel(Kernel::Custom(k)) => write!(f, "kernel:custom:{}", k.name),
            BoundaryOperatorSpec::RankOne { g: Coefficient::Const(1.0), c } => write!(f, "rank1:const:{c}"),
            BoundaryOperatorSpec::RankOne { g, c } => {
                write!(f, "rank1:")?;
                write_coefficient(f, g)?;
                write!(f, ":c={c}")
            }
            BoundaryOperatorSpec::Composite(parts) => {
                write!(f, "sum:(")?;
                for (i, (p, class)) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "{p}@{}", class.tag())?;
                }
                write!(f, ")")
            }
            BoundaryOperatorSpec::Abstract(name) => write!(f, "abstract:{name}"),
        }
    }
}
