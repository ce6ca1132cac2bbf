//! Greedy covering of finite point sets by metric balls.

use std::collections::HashMap;

use crate::algebra::HTypeAlgebra;
use crate::group::GroupPoint;
use crate::norm::HomogeneousNorm;

/// Result of a greedy cover: ball centres (indices into the input) and the
/// ball each point was assigned to.
#[derive(Clone, Debug)]
pub struct Cover {
    pub centers: Vec<usize>,
    pub assignment: Vec<usize>,
}

impl Cover {
    pub fn count(&self) -> usize {
        self.centers.len()
    }
}

/// Points are scanned in order of their first horizontal coordinate; each
/// still-uncovered point opens a ball of radius `radius` that claims every
/// uncovered point within that distance. Every point ends up within
/// `radius` of its centre, and centres are pairwise more than `radius` apart.
/// Distances are compared with a relative slack of `1e-9` so that grid
/// neighbours exactly one radius away are not lost to rounding.
pub fn greedy_cover(alg: &HTypeAlgebra, points: &[GroupPoint], radius: f64, norm: &HomogeneousNorm) -> Cover {
    let n = points.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| points[a].x[0].total_cmp(&points[b].x[0]).then(a.cmp(&b)));
    let radius = radius * (1.0 + 1e-9);
    let grid = Buckets::new(alg, points, radius, norm);
    let mut buckets = grid.fill(points);
    let mut assignment = vec![usize::MAX; n];
    let mut centers = Vec::new();
    for &c in &order {
        if assignment[c] != usize::MAX {
            continue;
        }
        let ball = centers.len();
        centers.push(c);
        for key in grid.neighbours(&points[c]) {
            if let Some(list) = buckets.get_mut(&key) {
                list.retain(|&p| {
                    let hit = alg.distance_unchecked(&points[p], &points[c], norm) <= radius;
                    if hit {
                        assignment[p] = ball;
                    }
                    !hit
                });
            }
        }
    }
    Cover { centers, assignment }
}

type Key = [i64; 3];

/// Uniform buckets on `x_0`, `x_1` and `t_0`. A ball of radius `r` about `c`
/// lies within `bx` of `c` horizontally and within `bt + |[x_c, dx]| / 2` of
/// it in `t_0`, which bounds the buckets it can touch.
struct Buckets {
    bx: f64,
    bt: f64,
    /// Bound on `|[u, v]_0| / (|u| |v|)`.
    bracket: f64,
    use_x1: bool,
    use_t: bool,
}

impl Buckets {
    fn new(alg: &HTypeAlgebra, points: &[GroupPoint], radius: f64, norm: &HomogeneousNorm) -> Self {
        let (bx, bt) = norm.ball_box(radius);
        let (bx, bt) = (bx.max(1e-300), bt.max(1e-300));
        let bracket = alg.terms().iter().filter(|t| t.a == 0).map(|t| t.c.abs()).sum();
        // Cells much smaller than the data's spread would only add overhead.
        let spread = |f: &dyn Fn(&GroupPoint) -> f64| {
            let (lo, hi) = points.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
            hi - lo
        };
        let use_x1 = alg.m1() > 1 && spread(&|p| p.x[1]) > 2.0 * bx;
        let use_t = alg.m2() > 0 && spread(&|p| p.t[0]) > 2.0 * bt;
        Self { bx, bt, bracket, use_x1, use_t }
    }

    fn cell(v: f64, size: f64) -> i64 {
        (v / size).floor() as i64
    }

    fn key(&self, p: &GroupPoint) -> Key {
        [
            Self::cell(p.x[0], self.bx),
            if self.use_x1 { Self::cell(p.x[1], self.bx) } else { 0 },
            if self.use_t { Self::cell(p.t[0], self.bt) } else { 0 },
        ]
    }

    fn fill(&self, points: &[GroupPoint]) -> HashMap<Key, Vec<usize>> {
        let mut map: HashMap<Key, Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            map.entry(self.key(p)).or_default().push(i);
        }
        map
    }

    fn neighbours(&self, c: &GroupPoint) -> Vec<Key> {
        let span = |v: f64, w: f64, size: f64| Self::cell(v - w, size)..=Self::cell(v + w, size);
        let r0 = span(c.x[0], self.bx, self.bx);
        let r1 = if self.use_x1 { span(c.x[1], self.bx, self.bx) } else { 0..=0 };
        let r2 = if self.use_t {
            let xc = c.x.iter().map(|v| v * v).sum::<f64>().sqrt();
            span(c.t[0], self.bt + 0.5 * self.bracket * xc * self.bx, self.bt)
        } else {
            0..=0
        };
        let mut out = Vec::new();
        for a in r0 {
            for b in r1.clone() {
                for t in r2.clone() {
                    out.push([a, b, t]);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covers_segment_with_expected_count() {
        let alg = HTypeAlgebra::real_heisenberg(1).unwrap();
        let pts: Vec<GroupPoint> = (0..=1000).map(|k| GroupPoint::new(vec![k as f64 / 1000.0, 0.0], vec![0.0])).collect();
        let norm = HomogeneousNorm::default();
        let c = greedy_cover(&alg, &pts, 0.1, &norm);
        // Centres at 0, 0.101, 0.202, ...
        assert_eq!(c.count(), 10);
        for (i, p) in pts.iter().enumerate() {
            let ctr = &pts[c.centers[c.assignment[i]]];
            assert!(alg.distance_unchecked(p, ctr, &norm) <= 0.1 * (1.0 + 1e-9));
        }
    }

    #[test]
    fn centres_are_separated() {
        let alg = HTypeAlgebra::real_heisenberg(1).unwrap();
        let mut pts = Vec::new();
        for i in 0..20 {
            for j in 0..20 {
                pts.push(GroupPoint::new(vec![i as f64 * 0.05, 0.3], vec![j as f64 * 0.01]));
            }
        }
        let norm = HomogeneousNorm::Cygan;
        let c = greedy_cover(&alg, &pts, 0.2, &norm);
        for (a, &i) in c.centers.iter().enumerate() {
            for &j in &c.centers[a + 1..] {
                assert!(alg.distance_unchecked(&pts[i], &pts[j], &norm) > 0.2);
            }
        }
    }

    fn brute_force(alg: &HTypeAlgebra, pts: &[GroupPoint], r: f64, norm: &HomogeneousNorm) -> Vec<usize> {
        let mut order: Vec<usize> = (0..pts.len()).collect();
        order.sort_by(|&a, &b| pts[a].x[0].total_cmp(&pts[b].x[0]).then(a.cmp(&b)));
        let mut assignment = vec![usize::MAX; pts.len()];
        let mut balls = 0;
        for &c in &order {
            if assignment[c] == usize::MAX {
                for (p, a) in assignment.iter_mut().enumerate() {
                    if *a == usize::MAX && alg.distance_unchecked(&pts[p], &pts[c], norm) <= r * (1.0 + 1e-9) {
                        *a = balls;
                    }
                }
                balls += 1;
            }
        }
        assignment
    }

    #[test]
    fn bucketed_cover_matches_brute_force() {
        let mut rng = crate::rng::seeded(7);
        for alg in [
            HTypeAlgebra::real_heisenberg(2).unwrap(),
            HTypeAlgebra::complex_heisenberg(1).unwrap(),
            HTypeAlgebra::quaternion_heisenberg(1).unwrap(),
        ] {
            let pts: Vec<GroupPoint> = (0..600)
                .map(|_| {
                    let v: Vec<f64> = (0..alg.dim()).map(|_| 6.0 * crate::rng::uniform(&mut rng) - 3.0).collect();
                    alg.point_from_flat(&v).unwrap()
                })
                .collect();
            for norm in [HomogeneousNorm::default(), HomogeneousNorm::Cygan, HomogeneousNorm::Euclidean] {
                for r in [0.3, 1.0, 2.5] {
                    assert_eq!(greedy_cover(&alg, &pts, r, &norm).assignment, brute_force(&alg, &pts, r, &norm));
                }
            }
        }
    }
}
