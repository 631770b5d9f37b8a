//! Planar primitives: points, convex hulls, widths, the triple-transversal
//! predicates and a minimum-area enclosing ellipse used as a test oracle.
//!
//! A point set `X` has a line transversal for the translates `rB + x`
//! exactly when `width(X) <= 2r`, so every transversal question in this crate
//! reduces to a width computation.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::GeomError;

/// Global floating-point slack added on top of every analytic margin.
pub const DELTA_FP: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn dist(self, o: Point2) -> f64 {
        (self - o).norm()
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    #[inline]
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    #[inline]
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    #[inline]
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    #[inline]
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

/// Ordered list of planar points.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PointSet(Vec<Point2>);

impl PointSet {
    pub fn new(points: Vec<Point2>) -> Self {
        Self(points)
    }

    pub fn as_slice(&self) -> &[Point2] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Point2> {
        self.0
    }

    pub fn scaled(&self, s: f64) -> PointSet {
        PointSet(self.0.iter().map(|&p| p * s).collect())
    }

    pub fn width(&self) -> f64 {
        width(&self.0)
    }

    pub fn convex_hull(&self) -> PointSet {
        PointSet(convex_hull(&self.0))
    }
}

impl std::ops::Deref for PointSet {
    type Target = [Point2];
    fn deref(&self) -> &[Point2] {
        &self.0
    }
}

impl From<Vec<Point2>> for PointSet {
    fn from(v: Vec<Point2>) -> Self {
        Self(v)
    }
}

impl FromIterator<Point2> for PointSet {
    fn from_iter<I: IntoIterator<Item = Point2>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Counterclockwise convex hull with collinear and duplicate points removed.
///
/// Degenerate inputs give degenerate hulls: one point, or the two endpoints of
/// a segment. An empty input yields an empty hull.
pub fn convex_hull(ps: &[Point2]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = ps.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }

    // Andrew's monotone chain; `<= 0` pops collinear vertices.
    let mut hull: Vec<Point2> = Vec::with_capacity(pts.len() + 1);
    for &p in &pts {
        while hull.len() >= 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

#[inline]
fn turn(o: Point2, a: Point2, b: Point2) -> f64 {
    (a - o).cross(b - o)
}

/// Minimum over directions of the extent of the projections of `ps`.
///
/// Rotating calipers over the hull: for a convex polygon the minimum is
/// attained with one side flush against a supporting line. Sets whose hull has
/// fewer than three vertices (points, segments) have width 0.
pub fn width(ps: &[Point2]) -> f64 {
    let hull = convex_hull(ps);
    hull_width(&hull)
}

/// Width of a CCW convex polygon as produced by [`convex_hull`].
pub fn hull_width(hull: &[Point2]) -> f64 {
    let m = hull.len();
    if m < 3 {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    let mut j = 1usize;
    for i in 0..m {
        let a = hull[i];
        let e = hull[(i + 1) % m] - a;
        let len = e.norm();
        // Advance the antipodal vertex while the distance strictly grows;
        // ties keep the smaller index.
        loop {
            let cur = e.cross(hull[j] - a);
            let next = e.cross(hull[(j + 1) % m] - a);
            if next > cur {
                j = (j + 1) % m;
            } else {
                break;
            }
        }
        let h = e.cross(hull[j] - a) / len;
        if h < best {
            best = h;
        }
    }
    best
}

/// Smallest altitude of the triangle `abc`; equals `width({a, b, c})`.
pub fn min_altitude(a: Point2, b: Point2, c: Point2) -> f64 {
    let longest_sq = (a - b).norm_sq().max((b - c).norm_sq()).max((c - a).norm_sq());
    if longest_sq == 0.0 {
        return 0.0;
    }
    (b - a).cross(c - a).abs() / longest_sq.sqrt()
}

/// Property T(rB): the translates `rB + x` admit a common line transversal.
pub fn satisfies_t(ps: &[Point2], r: f64) -> bool {
    width(ps) <= 2.0 * r
}

/// Largest width over all 3-subsets (0 for fewer than three points).
pub fn max_triple_width(ps: &[Point2]) -> f64 {
    let n = ps.len();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                worst = worst.max(min_altitude(ps[i], ps[j], ps[k]));
            }
        }
    }
    worst
}

/// Property T(rB, 3): every subset of at most three points satisfies T(rB).
pub fn satisfies_t3(ps: &[Point2], r: f64) -> bool {
    let n = ps.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if min_altitude(ps[i], ps[j], ps[k]) > 2.0 * r {
                    return false;
                }
            }
        }
    }
    true
}

/// `x ↦ linear · x + offset`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub linear: [[f64; 2]; 2],
    pub offset: Point2,
}

impl AffineMap {
    pub fn new(linear: [[f64; 2]; 2], offset: Point2) -> Self {
        Self { linear, offset }
    }

    pub fn identity() -> Self {
        Self::new([[1.0, 0.0], [0.0, 1.0]], Point2::default())
    }

    pub fn diagonal(a: f64, b: f64) -> Self {
        Self::new([[a, 0.0], [0.0, b]], Point2::default())
    }

    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new([[c, -s], [s, c]], Point2::default())
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &AffineMap) -> AffineMap {
        let a = &self.linear;
        let b = &other.linear;
        let mut m = [[0.0; 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        let off = self.apply_linear(other.offset) + self.offset;
        AffineMap::new(m, off)
    }

    #[inline]
    pub fn apply_linear(&self, p: Point2) -> Point2 {
        let m = &self.linear;
        Point2::new(m[0][0] * p.x + m[0][1] * p.y, m[1][0] * p.x + m[1][1] * p.y)
    }

    #[inline]
    pub fn apply(&self, p: Point2) -> Point2 {
        self.apply_linear(p) + self.offset
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.linear;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// Largest singular value of the linear part (closed form for 2×2).
    pub fn max_singular_value(&self) -> f64 {
        let m = &self.linear;
        let s = m[0][0].powi(2) + m[0][1].powi(2) + m[1][0].powi(2) + m[1][1].powi(2);
        let det = self.determinant();
        let disc = (s * s - 4.0 * det * det).max(0.0).sqrt();
        ((s + disc) / 2.0).sqrt()
    }
}

/// `‖Mx − My‖ ≤ ‖x − y‖` up to [`DELTA_FP`].
pub fn is_contraction(m: &AffineMap) -> bool {
    m.max_singular_value() <= 1.0 + DELTA_FP
}

/// Closed elliptical disk with semi-axes `r1 >= r2 > 0`; `rotation` turns the
/// `r1` axis away from the x-axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ellipse {
    pub center: Point2,
    pub r1: f64,
    pub r2: f64,
    pub rotation: f64,
}

impl Ellipse {
    pub fn new(center: Point2, r1: f64, r2: f64, rotation: f64) -> Result<Self, GeomError> {
        if !(r2 > 0.0 && r1 >= r2 && r1.is_finite() && center.is_finite() && rotation.is_finite()) {
            return Err(GeomError::InvalidEllipse { r1, r2 });
        }
        Ok(Self { center, r1, r2, rotation })
    }

    /// Centered, axis-aligned `x²/r1² + y²/r2² <= 1`.
    pub fn axis_aligned(r1: f64, r2: f64) -> Result<Self, GeomError> {
        Self::new(Point2::default(), r1, r2, 0.0)
    }

    pub fn unit_disk() -> Self {
        Self { center: Point2::default(), r1: 1.0, r2: 1.0, rotation: 0.0 }
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.r1 * self.r2
    }

    pub fn boundary_point(&self, alpha: f64) -> Point2 {
        ellipse_boundary_point(self, alpha)
    }

    /// Value of the defining quadratic form; `<= 1` inside.
    pub fn level(&self, p: Point2) -> f64 {
        let (s, c) = self.rotation.sin_cos();
        let d = p - self.center;
        let u = c * d.x + s * d.y;
        let v = -s * d.x + c * d.y;
        (u / self.r1).powi(2) + (v / self.r2).powi(2)
    }

    pub fn contains(&self, p: Point2) -> bool {
        self.level(p) <= 1.0 + DELTA_FP
    }

    /// Largest of `|r1 − 1|`, `|r2 − 1|` and `|center|`: distance from the unit
    /// circle in the parameters that do not depend on the rotation.
    pub fn deviation_from_unit_circle(&self) -> f64 {
        (self.r1 - 1.0).abs().max((self.r2 - 1.0).abs()).max(self.center.norm())
    }
}

/// `center + R(rotation) · (r1 cos α, r2 sin α)`.
pub fn ellipse_boundary_point(e: &Ellipse, alpha: f64) -> Point2 {
    let (sa, ca) = alpha.sin_cos();
    let local = Point2::new(e.r1 * ca, e.r2 * sa);
    if e.rotation == 0.0 {
        return e.center + local;
    }
    let (s, c) = e.rotation.sin_cos();
    e.center + Point2::new(c * local.x - s * local.y, s * local.x + c * local.y)
}

const MAE_TOLERANCE: f64 = 1e-12;
const MAE_MAX_ITERATIONS: usize = 100_000;

/// Minimum-area enclosing ellipse (Khachiyan's barycentric scheme with
/// Todd–Yıldırım away steps).
///
/// Iterates until both the forward and the away optimality gaps drop below
/// 1e-12 or 10⁵ iterations pass, then rescales so that every input point is
/// enclosed. Intended as an independent oracle for tests, not for
/// certificates.
pub fn min_area_ellipse(ps: &[Point2]) -> Result<Ellipse, GeomError> {
    if convex_hull(ps).len() < 3 {
        return Err(GeomError::DegenerateInput);
    }
    let n = ps.len();
    let lifted: Vec<[f64; 3]> = ps.iter().map(|p| [p.x, p.y, 1.0]).collect();
    let mut u = vec![1.0 / n as f64; n];
    let dim = 3.0;

    let mut mvals = vec![0.0; n];
    for _ in 0..MAE_MAX_ITERATIONS {
        let inv = match invert3(&moment3(&lifted, &u)) {
            Some(inv) => inv,
            None => return Err(GeomError::DegenerateInput),
        };
        for (m, q) in mvals.iter_mut().zip(&lifted) {
            *m = quad3(&inv, q);
        }
        let (j, &kappa) = mvals.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty");
        let (k, &mu) = mvals
            .iter()
            .enumerate()
            .filter(|(i, _)| u[*i] > 0.0)
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("support nonempty");
        let forward_gap = kappa / dim - 1.0;
        let away_gap = 1.0 - mu / dim;
        if forward_gap <= MAE_TOLERANCE && away_gap <= MAE_TOLERANCE {
            break;
        }
        if forward_gap >= away_gap {
            let step = (kappa - dim) / (dim * (kappa - 1.0));
            for w in u.iter_mut() {
                *w *= 1.0 - step;
            }
            u[j] += step;
        } else {
            let step = ((dim - mu) / (dim * (mu - 1.0))).min(u[k] / (1.0 - u[k]));
            for w in u.iter_mut() {
                *w *= 1.0 + step;
            }
            u[k] -= step;
            if u[k] < 0.0 {
                u[k] = 0.0;
            }
        }
    }

    // Center and shape from the weights.
    let mut c = Point2::default();
    for (p, &w) in ps.iter().zip(&u) {
        c = c + *p * w;
    }
    let mut s = [[0.0f64; 2]; 2];
    for (p, &w) in ps.iter().zip(&u) {
        let d = *p - c;
        s[0][0] += w * d.x * d.x;
        s[0][1] += w * d.x * d.y;
        s[1][1] += w * d.y * d.y;
    }
    s[1][0] = s[0][1];
    // Shape matrix A = (2 S)^{-1}: x ∈ E ⇔ (x−c)ᵀ A (x−c) <= 1.
    let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    if det <= 0.0 {
        return Err(GeomError::DegenerateInput);
    }
    let mut a = [[s[1][1] / (2.0 * det), -s[0][1] / (2.0 * det)], [-s[1][0] / (2.0 * det), s[0][0] / (2.0 * det)]];
    let scale = ps
        .iter()
        .map(|p| {
            let d = *p - c;
            a[0][0] * d.x * d.x + 2.0 * a[0][1] * d.x * d.y + a[1][1] * d.y * d.y
        })
        .fold(0.0f64, f64::max);
    for row in a.iter_mut() {
        for v in row.iter_mut() {
            *v /= scale;
        }
    }
    ellipse_from_shape(c, a)
}

fn ellipse_from_shape(center: Point2, a: [[f64; 2]; 2]) -> Result<Ellipse, GeomError> {
    let (p, q, r) = (a[0][0], a[0][1], a[1][1]);
    let mean = 0.5 * (p + r);
    let half_diff = 0.5 * (p - r);
    let rad = half_diff.hypot(q);
    let lam_small = mean - rad;
    let lam_big = mean + rad;
    if lam_small <= 0.0 {
        return Err(GeomError::DegenerateInput);
    }
    // Eigenvector of the smaller eigenvalue carries the major axis.
    let rotation = if rad == 0.0 { 0.0 } else { 0.5 * (-2.0 * q).atan2(r - p) };
    Ellipse::new(center, 1.0 / lam_small.sqrt(), 1.0 / lam_big.sqrt(), rotation)
}

fn moment3(lifted: &[[f64; 3]], u: &[f64]) -> [[f64; 3]; 3] {
    let mut m = [[0.0; 3]; 3];
    for (q, &w) in lifted.iter().zip(u) {
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += w * q[i] * q[j];
            }
        }
    }
    m
}

fn invert3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let c00 = m[1][1] * m[2][2] - m[1][2] * m[2][1];
    let c01 = m[1][2] * m[2][0] - m[1][0] * m[2][2];
    let c02 = m[1][0] * m[2][1] - m[1][1] * m[2][0];
    let det = m[0][0] * c00 + m[0][1] * c01 + m[0][2] * c02;
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let inv_det = 1.0 / det;
    Some([
        [
            c00 * inv_det,
            (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * inv_det,
            (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * inv_det,
        ],
        [
            c01 * inv_det,
            (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * inv_det,
            (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * inv_det,
        ],
        [
            c02 * inv_det,
            (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * inv_det,
            (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * inv_det,
        ],
    ])
}

#[inline]
fn quad3(m: &[[f64; 3]; 3], q: &[f64; 3]) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += q[i] * m[i][j] * q[j];
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn equilateral(r: f64) -> Vec<Point2> {
        (0..3)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / 3.0 + 0.3;
                Point2::new(r * t.cos(), r * t.sin())
            })
            .collect()
    }

    fn unit_square() -> Vec<Point2> {
        vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(1.0, 1.0), Point2::new(0.0, 1.0)]
    }

    /// Pairwise-orientation oracle: every point is left of (or on) every edge.
    fn hull_is_valid(hull: &[Point2], pts: &[Point2]) -> bool {
        let m = hull.len();
        (0..m).all(|i| {
            let a = hull[i];
            let b = hull[(i + 1) % m];
            pts.iter().all(|&p| turn(a, b, p) >= -1e-12)
        })
    }

    #[test]
    fn hull_single_point() {
        let p = [Point2::new(0.0, 0.0)];
        assert_eq!(convex_hull(&p), vec![Point2::new(0.0, 0.0)]);
    }

    #[test]
    fn hull_drops_interior_point() {
        let mut pts = unit_square();
        pts.push(Point2::new(0.5, 0.5));
        let hull = convex_hull(&pts);
        assert_eq!(hull.len(), 4);
        for i in 0..4 {
            assert!(turn(hull[i], hull[(i + 1) % 4], hull[(i + 2) % 4]) > 0.0);
        }
    }

    #[test]
    fn hull_collinear_is_segment() {
        let pts: Vec<_> = (0..5).map(|i| Point2::new(i as f64, 2.0 * i as f64)).collect();
        let hull = convex_hull(&pts);
        assert_eq!(hull.len(), 2);
        assert_eq!(width(&pts), 0.0);
    }

    #[test]
    fn hull_random_disk_against_orientation_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<Point2> = (0..100)
            .map(|_| {
                let r = rng.gen::<f64>().sqrt();
                let t = rng.gen::<f64>() * 2.0 * PI;
                Point2::new(r * t.cos(), r * t.sin())
            })
            .collect();
        let hull = convex_hull(&pts);
        assert!(hull.len() >= 3);
        assert!(hull_is_valid(&hull, &pts));
        for h in &hull {
            assert!(pts.contains(h));
        }
    }

    #[test]
    fn width_examples() {
        assert!((width(&equilateral(1.0)) - 1.5).abs() < 1e-12);
        assert!((width(&unit_square()) - 1.0).abs() < 1e-12);
        assert_eq!(width(&[Point2::new(3.0, 4.0)]), 0.0);
        assert_eq!(width(&[Point2::new(0.0, 0.0), Point2::new(1.0, 1.0)]), 0.0);
    }

    #[test]
    fn min_altitude_examples() {
        let a = min_altitude(Point2::new(0.0, 0.0), Point2::new(4.0, 0.0), Point2::new(0.0, 3.0));
        assert!((a - 2.4).abs() < 1e-12);
        let t = equilateral(1.0);
        assert!((min_altitude(t[0], t[1], t[2]) - 1.5).abs() < 1e-12);
        let c = min_altitude(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(2.0, 0.0));
        assert_eq!(c, 0.0);
    }

    #[test]
    fn transversal_predicates() {
        let t = equilateral(1.0);
        assert!(satisfies_t(&t, 0.75));
        assert!(!satisfies_t(&t, 0.74));
        assert!(!satisfies_t3(&equilateral(1.4), 1.0));
        let pair = [Point2::new(0.0, 0.0), Point2::new(5.0, 1.0)];
        assert!(satisfies_t3(&pair, 0.0));
    }

    #[test]
    fn contraction_examples() {
        assert!(is_contraction(&AffineMap::identity()));
        assert!(is_contraction(&AffineMap::diagonal(0.5, 0.9)));
        assert!(!is_contraction(&AffineMap::diagonal(1.1, 0.5)));
        let m = AffineMap::rotation(PI / 6.0).compose(&AffineMap::diagonal(1.0, 0.3));
        assert!((m.max_singular_value() - 1.0).abs() < 1e-12);
        assert!(is_contraction(&m));
    }

    #[test]
    fn singular_value_matches_power_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let m = AffineMap::new(
                [
                    [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
                    [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
                ],
                Point2::default(),
            );
            // max over unit vectors of |Mv|, by dense angle sampling
            let brute = (0..20_000)
                .map(|i| {
                    let t = PI * i as f64 / 20_000.0;
                    m.apply_linear(Point2::new(t.cos(), t.sin())).norm()
                })
                .fold(0.0f64, f64::max);
            let s = m.max_singular_value();
            assert!(s >= brute - 1e-12 && s - brute < 1e-6 * s.max(1.0), "{s} vs {brute}");
        }
    }

    #[test]
    fn boundary_points() {
        let e = Ellipse::axis_aligned(2.0, 1.0).unwrap();
        let p = e.boundary_point(0.0);
        assert!((p.x - 2.0).abs() < 1e-15 && p.y.abs() < 1e-15);
        let p = e.boundary_point(PI / 2.0);
        assert!(p.x.abs() < 1e-15 && (p.y - 1.0).abs() < 1e-15);
        let e = Ellipse::axis_aligned(3.0, 1.62).unwrap();
        let p = e.boundary_point(PI);
        assert!((p.x + 3.0).abs() < 1e-15 && p.y.abs() < 1e-15);
        let rot = Ellipse::new(Point2::new(1.0, -1.0), 2.0, 1.0, PI / 2.0).unwrap();
        let p = rot.boundary_point(0.0);
        assert!((p.x - 1.0).abs() < 1e-12 && (p.y - 1.0).abs() < 1e-12);
        assert!((rot.level(p) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ellipse_rejects_bad_axes() {
        assert!(Ellipse::axis_aligned(1.0, 2.0).is_err());
        assert!(Ellipse::axis_aligned(1.0, 0.0).is_err());
    }

    #[test]
    fn mae_square_and_triangle() {
        let sq = [Point2::new(-1.0, -1.0), Point2::new(1.0, -1.0), Point2::new(1.0, 1.0), Point2::new(-1.0, 1.0)];
        let e = min_area_ellipse(&sq).unwrap();
        assert!((e.r1 - 2f64.sqrt()).abs() < 1e-6 && (e.r2 - 2f64.sqrt()).abs() < 1e-6);
        assert!(e.center.norm() < 1e-9);

        let e = min_area_ellipse(&equilateral(1.0)).unwrap();
        assert!(e.deviation_from_unit_circle() < 1e-6, "{e:?}");
    }

    #[test]
    fn mae_recovers_axis_aligned_ellipse() {
        // Four points at ±r1, ±r2 on the axes: the MAE is the ellipse itself.
        let pts = [Point2::new(3.0, 0.0), Point2::new(0.0, 1.5), Point2::new(-3.0, 0.0), Point2::new(0.0, -1.5)];
        let e = min_area_ellipse(&pts).unwrap();
        assert!((e.r1 - 3.0).abs() < 1e-6 && (e.r2 - 1.5).abs() < 1e-6, "{e:?}");
        assert!(e.rotation.abs() < 1e-6 || (e.rotation.abs() - PI).abs() < 1e-6);
        for p in &pts {
            assert!(e.contains(*p));
        }
    }

    #[test]
    fn mae_degenerate() {
        let pts: Vec<_> = (0..4).map(|i| Point2::new(i as f64, 0.0)).collect();
        assert_eq!(min_area_ellipse(&pts), Err(GeomError::DegenerateInput));
    }

    #[test]
    fn width_equals_width_of_hull() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let n = rng.gen_range(1..15);
            let pts: Vec<Point2> =
                (0..n).map(|_| Point2::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0))).collect();
            let h = convex_hull(&pts);
            assert!((width(&pts) - width(&h)).abs() < 1e-12);
        }
    }

    #[test]
    fn width_is_one_lipschitz_in_a_single_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10_000 {
            let n = rng.gen_range(3..9);
            let pts: Vec<Point2> =
                (0..n).map(|_| Point2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect();
            let delta = rng.gen_range(0.0..0.5);
            let t = rng.gen_range(0.0..2.0 * PI);
            let mut moved = pts.clone();
            let i = rng.gen_range(0..n);
            moved[i] = moved[i] + Point2::new(delta * t.cos(), delta * t.sin());
            assert!((width(&moved) - width(&pts)).abs() <= delta + 1e-12);
        }
    }

    #[test]
    fn min_altitude_is_triangle_width() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..2_000 {
            let t: Vec<Point2> =
                (0..3).map(|_| Point2::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0))).collect();
            assert!((min_altitude(t[0], t[1], t[2]) - width(&t)).abs() < 1e-12);
        }
    }

    #[test]
    fn contractions_preserve_transversals() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let mut checked = 0;
        while checked < 1_000 {
            let pts: Vec<Point2> =
                (0..6).map(|_| Point2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-1.0..1.0))).collect();
            let r = width(&pts) / 2.0 + rng.gen_range(0.0..0.1);
            let m = AffineMap::new(
                [
                    [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
                    [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
                ],
                Point2::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)),
            );
            if !is_contraction(&m) || m.determinant().abs() < 1e-6 {
                continue;
            }
            let image: Vec<Point2> = pts.iter().map(|&p| m.apply(p)).collect();
            assert!(satisfies_t(&pts, r));
            assert!(width(&image) <= 2.0 * r + 1e-12);
            checked += 1;
        }
    }

    #[test]
    fn neighbourhood_inflation_preserves_transversals() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..2_000 {
            let pts: Vec<Point2> =
                (0..6).map(|_| Point2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-1.0..1.0))).collect();
            let r = width(&pts) / 2.0;
            let eps = rng.gen_range(0.0..0.3);
            let near: Vec<Point2> = pts
                .iter()
                .map(|&p| {
                    let t = rng.gen_range(0.0..2.0 * PI);
                    let d = rng.gen_range(0.0..eps);
                    p + Point2::new(d * t.cos(), d * t.sin())
                })
                .collect();
            assert!(width(&near) <= 2.0 * (r + eps) + 1e-12);
        }
    }
}
