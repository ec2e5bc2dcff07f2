use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Which hand-authored coarse triangulation a domain uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DomainShape {
    /// Rectangle `[0,a] x [0,b]`; coarse mesh is four triangles meeting at the centroid.
    Rectangle { a: f64, b: f64 },
    /// Regular N-gon centred at the origin; coarse mesh is a fan from the centre.
    RegularNgon { sides: usize, radius: f64 },
    /// Anything else (including the L-shape); coarse mesh by ear clipping.
    General,
}

/// Closed simple polygon, counterclockwise, without holes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonalDomain {
    pub vertices: Vec<Point>,
    pub name: Option<String>,
    pub shape: DomainShape,
}

impl PolygonalDomain {
    /// Validates a user vertex list. Clockwise input is rejected, not reversed.
    pub fn from_vertices(vertices: Vec<Point>) -> Result<Self> {
        let d = Self { vertices, name: None, shape: DomainShape::General };
        d.validate()?;
        Ok(d)
    }

    pub fn unit_square() -> Self {
        Self::rectangle(1.0, 1.0).expect("unit square is valid").named("unit_square")
    }

    pub fn rectangle(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidDomain(format!("rectangle sides must be positive, got {a} x {b}")));
        }
        let d = Self {
            vertices: vec![[0.0, 0.0], [a, 0.0], [a, b], [0.0, b]],
            name: Some(format!("rectangle({a},{b})")),
            shape: DomainShape::Rectangle { a, b },
        };
        d.validate()?;
        Ok(d)
    }

    /// `[0,2]^2` with the square `[1,2]^2` removed; re-entrant corner at (1,1).
    pub fn lshape() -> Self {
        Self {
            vertices: vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]],
            name: Some("lshape".into()),
            shape: DomainShape::General,
        }
    }

    pub fn regular_ngon(sides: usize, radius: f64) -> Result<Self> {
        if sides < 3 {
            return Err(Error::InvalidDomain(format!("regular polygon needs >= 3 sides, got {sides}")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidDomain(format!("radius must be positive, got {radius}")));
        }
        let vertices = (0..sides)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / sides as f64;
                [radius * t.cos(), radius * t.sin()]
            })
            .collect();
        Ok(Self { vertices, name: Some(format!("regular_ngon({sides},{radius})")), shape: DomainShape::RegularNgon { sides, radius } })
    }

    /// Parses a catalog name or an explicit vertex list.
    ///
    /// Accepted forms: `unit_square`, `lshape`, `disk` (64-gon of radius 1),
    /// `rectangle:A:B`, `rectangle(A,B)`, `regular_ngon:N:R`, `regular_ngon(N,R)`,
    /// `ngon:N:R`, and `poly:x0,y0;x1,y1;...`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        let unknown = || Error::UnknownDomain(t.to_string());
        if let Some(rest) = t.strip_prefix("poly:") {
            let mut vertices = Vec::new();
            for pair in rest.split(';').filter(|s| !s.trim().is_empty()) {
                let xy: Vec<f64> = pair
                    .split(',')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::InvalidDomain(format!("bad vertex `{pair}`")))?;
                if xy.len() != 2 {
                    return Err(Error::InvalidDomain(format!("bad vertex `{pair}`")));
                }
                vertices.push([xy[0], xy[1]]);
            }
            return Self::from_vertices(vertices);
        }
        let (head, args) = split_call(t);
        let nums = |n: usize| -> Result<Vec<f64>> {
            if args.len() != n {
                return Err(unknown());
            }
            args.iter().map(|a| a.parse::<f64>().map_err(|_| unknown())).collect()
        };
        match head {
            "unit_square" if args.is_empty() => Ok(Self::unit_square()),
            "lshape" if args.is_empty() => Ok(Self::lshape()),
            "disk" if args.is_empty() => Self::regular_ngon(64, 1.0),
            "rectangle" => {
                let v = nums(2)?;
                Self::rectangle(v[0], v[1])
            }
            "regular_ngon" | "ngon" => {
                let v = nums(2)?;
                let n = v[0];
                if n.fract() != 0.0 || n < 0.0 {
                    return Err(unknown());
                }
                Self::regular_ngon(n as usize, v[1])
            }
            _ => Err(unknown()),
        }
    }

    fn named(mut self, name: &str) -> Self {
        self.name = Some(name.to_string());
        self
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| format!("polygon[{}]", self.vertices.len()))
    }

    pub fn signed_area(&self) -> f64 {
        polygon_signed_area(&self.vertices)
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn perimeter(&self) -> f64 {
        let n = self.vertices.len();
        (0..n).map(|i| dist(self.vertices[i], self.vertices[(i + 1) % n])).sum()
    }

    /// Largest deviation of an interior angle from a straight angle, in radians.
    ///
    /// Stored as descriptive metadata for how far the boundary is from being
    /// flat; it is not a Lipschitz constant.
    pub fn max_angle_deviation(&self) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let prev = self.vertices[(i + n - 1) % n];
                let cur = self.vertices[i];
                let next = self.vertices[(i + 1) % n];
                (PI - interior_angle(prev, cur, next)).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        let v = &self.vertices;
        let n = v.len();
        if n < 3 {
            return Err(Error::InvalidDomain(format!("polygon needs >= 3 vertices, got {n}")));
        }
        if v.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::InvalidDomain("non-finite vertex coordinate".into()));
        }
        for i in 0..n {
            for j in i + 1..n {
                if v[i] == v[j] {
                    return Err(Error::InvalidDomain(format!("duplicate vertex {i} and {j}")));
                }
            }
        }
        for i in 0..n {
            let (a, b) = (v[i], v[(i + 1) % n]);
            for j in i + 1..n {
                let (c, d) = (v[j], v[(j + 1) % n]);
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    // shared endpoint only: reject collinear fold-backs
                    let shared = if j == i + 1 { b } else { a };
                    let other_a = if j == i + 1 { a } else { b };
                    let other_b = if j == i + 1 { d } else { c };
                    let u = sub(other_a, shared);
                    let w = sub(other_b, shared);
                    if cross(u, w).abs() <= 1e-14 * norm(u) * norm(w) && dot(u, w) > 0.0 {
                        return Err(Error::InvalidDomain(format!("edges {i} and {j} overlap")));
                    }
                } else if segments_intersect(a, b, c, d) {
                    return Err(Error::InvalidDomain(format!("edges {i} and {j} intersect; polygon is not simple")));
                }
            }
        }
        if self.signed_area() <= 0.0 {
            return Err(Error::InvalidDomain("vertices are clockwise; counterclockwise order is required".into()));
        }
        Ok(())
    }
}

fn split_call(t: &str) -> (&str, Vec<String>) {
    if let Some(open) = t.find('(') {
        if let Some(inner) = t[open + 1..].strip_suffix(')') {
            let args = inner.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
            return (&t[..open], args);
        }
    }
    let mut parts = t.split(':');
    let head = parts.next().unwrap_or("");
    (head, parts.map(|s| s.trim().to_string()).collect())
}

pub fn polygon_signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|i| cross(v[i], v[(i + 1) % n])).sum::<f64>()
}

fn interior_angle(prev: Point, cur: Point, next: Point) -> f64 {
    let a = sub(next, cur);
    let b = sub(prev, cur);
    // CCW polygon: the interior lies to the left of cur->next
    let ang = cross(a, b).atan2(dot(a, b));
    if ang < 0.0 {
        ang + 2.0 * PI
    } else {
        ang
    }
}

fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

pub(crate) fn orient(a: Point, b: Point, c: Point) -> f64 {
    cross(sub(b, a), sub(c, a))
}

pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

pub(crate) fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub(crate) fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_shapes() {
        let sq = PolygonalDomain::parse("unit_square").unwrap();
        assert_eq!(sq.vertices, vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        assert_eq!(sq.area(), 1.0);

        let l = PolygonalDomain::parse("lshape").unwrap();
        assert_eq!(l.vertices.len(), 6);
        assert_eq!(l.area(), 3.0);
        l.validate().unwrap();

        let g = PolygonalDomain::parse("regular_ngon(64, 1)").unwrap();
        let expect = 32.0 * (2.0 * PI / 64.0).sin();
        assert!((g.area() - expect).abs() <= 1e-13 * expect);
        assert_eq!(PolygonalDomain::parse("ngon:64:1").unwrap().vertices, g.vertices);

        let r = PolygonalDomain::parse("rectangle:2:0.5").unwrap();
        assert_eq!(r.area(), 1.0);
    }

    #[test]
    fn rejects_clockwise_and_unknown() {
        let cw = PolygonalDomain::from_vertices(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]);
        assert!(matches!(cw, Err(Error::InvalidDomain(_))));
        assert!(matches!(PolygonalDomain::parse("circle"), Err(Error::UnknownDomain(_))));
    }

    #[test]
    fn rejects_self_intersection() {
        let bowtie = PolygonalDomain::from_vertices(vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]);
        assert!(bowtie.is_err());
    }

    #[test]
    fn poly_syntax() {
        let d = PolygonalDomain::parse("poly:0,0;1,0;0,1").unwrap();
        assert_eq!(d.vertices.len(), 3);
        assert!((d.area() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn angle_deviation_proxy() {
        // square corners deviate by pi/2 from a straight angle
        let sq = PolygonalDomain::unit_square();
        assert!((sq.max_angle_deviation() - PI / 2.0).abs() < 1e-14);
        // L-shape re-entrant corner is 3pi/2
        assert!((PolygonalDomain::lshape().max_angle_deviation() - PI / 2.0).abs() < 1e-14);
    }
}
