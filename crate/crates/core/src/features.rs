//! Geometric region descriptors.
//!
//! Every pixel is modelled as a unit square. Pixel `(r, c)` has its centre
//! at `(r, c)` for moment purposes and covers the corner-coordinate square
//! `[r, r+1] × [c, c+1]` for extrema and convex hulls.
//!
//! The ten descriptors flatten into a [`FeatureVector`] of 26 reals, in the
//! order given by [`FEATURE_NAMES`].

use std::collections::VecDeque;

use crate::segment::Region;

pub const FEATURE_LEN: usize = 26;

pub const FEATURE_NAMES: [&str; FEATURE_LEN] = [
    "area",
    "centroid_row",
    "centroid_col",
    "major_axis_length",
    "minor_axis_length",
    "eccentricity",
    "orientation",
    "filled_area",
    "extrema_top_left_row",
    "extrema_top_left_col",
    "extrema_top_right_row",
    "extrema_top_right_col",
    "extrema_right_top_row",
    "extrema_right_top_col",
    "extrema_right_bottom_row",
    "extrema_right_bottom_col",
    "extrema_bottom_right_row",
    "extrema_bottom_right_col",
    "extrema_bottom_left_row",
    "extrema_bottom_left_col",
    "extrema_left_bottom_row",
    "extrema_left_bottom_col",
    "extrema_left_top_row",
    "extrema_left_top_col",
    "solidity",
    "equiv_diameter",
];

/// Area, centroid and per-pixel normalized central second moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSet {
    pub m00: f64,
    /// `(row, col)`.
    pub centroid: (f64, f64),
    /// Row variance, including the 1/12 unit-square term.
    pub mu_rr: f64,
    /// Column variance, including the 1/12 unit-square term.
    pub mu_cc: f64,
    pub mu_rc: f64,
}

pub fn central_moments(region: &Region) -> MomentSet {
    let n = region.area() as f64;
    let (cr, cc) = region.centroid();
    let (mut srr, mut scc, mut src) = (0.0, 0.0, 0.0);
    for &(r, c) in region.pixels() {
        let (dr, dc) = (r as f64 - cr, c as f64 - cc);
        srr += dr * dr;
        scc += dc * dc;
        src += dr * dc;
    }
    MomentSet {
        m00: n,
        centroid: (cr, cc),
        mu_rr: srr / n + 1.0 / 12.0,
        mu_cc: scc / n + 1.0 / 12.0,
        mu_rc: src / n,
    }
}

/// Parameters of the ellipse with the region's second moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    pub major_axis_length: f64,
    pub minor_axis_length: f64,
    pub eccentricity: f64,
    /// Degrees in `(−90, 90]`, counter-clockwise from the column axis with
    /// rows pointing down.
    pub orientation: f64,
}

pub fn ellipse_params(m: &MomentSet) -> Ellipse {
    // x = col, y = −row
    let (uxx, uyy) = (m.mu_cc, m.mu_rr);
    let uxy = -m.mu_rc + 0.0;
    let mean = (uxx + uyy) / 2.0;
    let radius = (((uxx - uyy) / 2.0).powi(2) + uxy * uxy).sqrt();
    let l1 = mean + radius;
    let l2 = (mean - radius).max(0.0);

    let orientation = if (l1 - l2).abs() <= 1e-12 {
        0.0
    } else {
        let theta = 0.5 * (2.0 * uxy).atan2(uxx - uyy).to_degrees();
        if theta <= -90.0 {
            theta + 180.0
        } else {
            theta
        }
    };
    Ellipse {
        major_axis_length: 4.0 * l1.sqrt(),
        minor_axis_length: 4.0 * l2.sqrt(),
        eccentricity: if l1 > 0.0 {
            (1.0 - l2 / l1).max(0.0).sqrt()
        } else {
            0.0
        },
        orientation,
    }
}

/// The region plus every background pixel inside its bounding box that is
/// not 4-connected to the bounding-box border. Returned in raster order.
pub fn fill_holes(region: &Region) -> Vec<(usize, usize)> {
    let bb = region.bbox();
    let (h, w) = (bb.height(), bb.width());
    let mut inside = vec![false; h * w];
    for &(r, c) in region.pixels() {
        inside[(r - bb.min_row) * w + (c - bb.min_col)] = true;
    }
    let mut outside = vec![false; h * w];
    let mut queue = VecDeque::new();
    for r in 0..h {
        for c in 0..w {
            let border = r == 0 || c == 0 || r == h - 1 || c == w - 1;
            if border && !inside[r * w + c] {
                outside[r * w + c] = true;
                queue.push_back((r, c));
            }
        }
    }
    while let Some((r, c)) = queue.pop_front() {
        let mut visit = |rr: usize, cc: usize| {
            let i = rr * w + cc;
            if !inside[i] && !outside[i] {
                outside[i] = true;
                queue.push_back((rr, cc));
            }
        };
        if r > 0 {
            visit(r - 1, c);
        }
        if r + 1 < h {
            visit(r + 1, c);
        }
        if c > 0 {
            visit(r, c - 1);
        }
        if c + 1 < w {
            visit(r, c + 1);
        }
    }
    (0..h * w)
        .filter(|&i| !outside[i])
        .map(|i| (bb.min_row + i / w, bb.min_col + i % w))
        .collect()
}

/// The eight extremal corner points as `(row, col)`: top-left, top-right,
/// right-top, right-bottom, bottom-right, bottom-left, left-bottom,
/// left-top.
pub fn extrema(region: &Region) -> [(f64, f64); 8] {
    let bb = region.bbox();
    let px = region.pixels();
    let cols_in_row = |row: usize| px.iter().filter(move |p| p.0 == row).map(|p| p.1);
    let rows_in_col = |col: usize| px.iter().filter(move |p| p.1 == col).map(|p| p.0);
    let top_left = cols_in_row(bb.min_row).min().unwrap();
    let top_right = cols_in_row(bb.min_row).max().unwrap() + 1;
    let bottom_left = cols_in_row(bb.max_row).min().unwrap();
    let bottom_right = cols_in_row(bb.max_row).max().unwrap() + 1;
    let right_top = rows_in_col(bb.max_col).min().unwrap();
    let right_bottom = rows_in_col(bb.max_col).max().unwrap() + 1;
    let left_top = rows_in_col(bb.min_col).min().unwrap();
    let left_bottom = rows_in_col(bb.min_col).max().unwrap() + 1;

    let (top, bottom) = (bb.min_row as f64, (bb.max_row + 1) as f64);
    let (left, right) = (bb.min_col as f64, (bb.max_col + 1) as f64);
    [
        (top, top_left as f64),
        (top, top_right as f64),
        (right_top as f64, right),
        (right_bottom as f64, right),
        (bottom, bottom_right as f64),
        (bottom, bottom_left as f64),
        (left_bottom as f64, left),
        (left_top as f64, left),
    ]
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Convex hull (monotone chain) of integer points, counter-clockwise in
/// `(row, col)` coordinates, without collinear vertices.
pub fn convex_hull(points: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut pts = points.to_vec();
    pts.sort_unstable();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<(i64, i64)> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Shoelace area of a simple polygon.
pub fn polygon_area(poly: &[(i64, i64)]) -> f64 {
    let n = poly.len();
    let twice: i64 = (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum();
    twice.abs() as f64 / 2.0
}

/// Pixel corners that can lie on the hull: the outer corners of the
/// leftmost and rightmost pixel of every row.
fn hull_candidates(region: &Region) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    let px = region.pixels();
    let mut i = 0;
    while i < px.len() {
        let row = px[i].0;
        let first = px[i].1;
        let mut last = first;
        while i < px.len() && px[i].0 == row {
            last = px[i].1;
            i += 1;
        }
        let (r, c0, c1) = (row as i64, first as i64, last as i64 + 1);
        out.extend([(r, c0), (r, c1), (r + 1, c0), (r + 1, c1)]);
    }
    out
}

/// Area of the convex hull of all pixel corners.
pub fn convex_hull_area(region: &Region) -> f64 {
    polygon_area(&convex_hull(&hull_candidates(region)))
}

/// Area over convex hull area.
pub fn solidity(region: &Region) -> f64 {
    region.area() as f64 / convex_hull_area(region)
}

/// Diameter of the circle with the region's area.
pub fn equiv_diameter(region: &Region) -> f64 {
    (4.0 * region.area() as f64 / std::f64::consts::PI).sqrt()
}

/// The 26 region descriptors in [`FEATURE_NAMES`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    values: [f64; FEATURE_LEN],
}

impl Default for FeatureVector {
    fn default() -> Self {
        Self {
            values: [0.0; FEATURE_LEN],
        }
    }
}

impl FeatureVector {
    pub fn from_values(values: [f64; FEATURE_LEN]) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64; FEATURE_LEN] {
        &self.values
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        FEATURE_NAMES
            .iter()
            .position(|&n| n == name)
            .map(|i| self.values[i])
    }
}

pub fn extract_features(region: &Region) -> FeatureVector {
    let m = central_moments(region);
    let e = ellipse_params(&m);
    let mut values = [0.0; FEATURE_LEN];
    values[0] = m.m00;
    values[1] = m.centroid.0;
    values[2] = m.centroid.1;
    values[3] = e.major_axis_length;
    values[4] = e.minor_axis_length;
    values[5] = e.eccentricity;
    values[6] = e.orientation;
    values[7] = fill_holes(region).len() as f64;
    for (i, (r, c)) in extrema(region).into_iter().enumerate() {
        values[8 + 2 * i] = r;
        values[9 + 2 * i] = c;
    }
    values[24] = solidity(region);
    values[25] = equiv_diameter(region);
    FeatureVector { values }
}
