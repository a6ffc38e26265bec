use crate::error::{Error, Result};

/// Convex hull by Andrew's monotone chain, counterclockwise, without
/// collinear points.
pub fn convex_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64)>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub cu: f64,
    pub cv: f64,
    pub r: f64,
}

/// Algebraic least-squares circle through `points`.
pub fn fit_circle(points: &[(f64, f64)]) -> Result<Circle> {
    if points.len() < 3 {
        return Err(Error::DegenerateSection("circle fit needs three points".into()));
    }
    let n = points.len() as f64;
    let (mu, mv) = points.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0 / n, acc.1 + p.1 / n));
    let (mut suu, mut svv, mut suv, mut suuu, mut svvv, mut suvv, mut svuu) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for &(u, v) in points {
        let (u, v) = (u - mu, v - mv);
        suu += u * u;
        svv += v * v;
        suv += u * v;
        suuu += u * u * u;
        svvv += v * v * v;
        suvv += u * v * v;
        svuu += v * u * u;
    }
    let det = suu * svv - suv * suv;
    if det.abs() <= f64::EPSILON * (suu * svv).abs() {
        return Err(Error::DegenerateSection("points are collinear".into()));
    }
    let b1 = 0.5 * (suuu + suvv);
    let b2 = 0.5 * (svvv + svuu);
    let uc = (b1 * svv - b2 * suv) / det;
    let vc = (b2 * suu - b1 * suv) / det;
    let r = (uc * uc + vc * vc + (suu + svv) / n).sqrt();
    Ok(Circle {
        cu: uc + mu,
        cv: vc + mv,
        r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hull_of_square_with_interior() {
        let pts = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.5, 0.5), (0.5, 0.0)];
        let h = convex_hull(&pts);
        assert_eq!(h, vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
    }

    #[test]
    fn circle_through_samples() {
        let pts: Vec<_> = (0..12)
            .map(|k| {
                let a = k as f64 * 0.5;
                (3.0 + 2.0 * a.cos(), -1.0 + 2.0 * a.sin())
            })
            .collect();
        let c = fit_circle(&pts).unwrap();
        assert!((c.cu - 3.0).abs() < 1e-12 && (c.cv + 1.0).abs() < 1e-12 && (c.r - 2.0).abs() < 1e-12);
        assert!(fit_circle(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)]).is_err());
    }
}
