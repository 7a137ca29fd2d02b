//! Small fixed-size vector type used for positions and normals in R^3.

use core::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

#[allow(unused_imports)] // shadowed by std inherents when std is in the graph
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub const ZERO: Vec3 = Vec3([0.0; 3]);

    pub const fn new(x1: f64, x2: f64, x3: f64) -> Self {
        Vec3([x1, x2, x3])
    }

    pub fn x1(&self) -> f64 {
        self.0[0]
    }

    pub fn x2(&self) -> f64 {
        self.0[1]
    }

    pub fn x3(&self) -> f64 {
        self.0[2]
    }

    pub fn dot(&self, other: &Vec3) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn cross(&self, o: &Vec3) -> Vec3 {
        let [a1, a2, a3] = self.0;
        let [b1, b2, b3] = o.0;
        Vec3([a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1])
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn distance(&self, other: &Vec3) -> f64 {
        (*self - *other).norm()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Symmetric Hausdorff distance between two finite point sets, using an
/// x1-sorted sweep for pruning.
pub fn hausdorff_distance(a: &[Vec3], b: &[Vec3]) -> f64 {
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}

fn directed_hausdorff(from: &[Vec3], to: &[Vec3]) -> f64 {
    use alloc::vec::Vec;
    if from.is_empty() || to.is_empty() {
        return if from.is_empty() { 0.0 } else { f64::INFINITY };
    }
    let mut sorted: Vec<Vec3> = to.to_vec();
    sorted.sort_by(|p, q| p.x1().total_cmp(&q.x1()));
    let mut worst = 0.0_f64;
    for p in from {
        let start = sorted.partition_point(|q| q.x1() < p.x1());
        let mut best = f64::INFINITY;
        let mut hi = start;
        let mut lo = start;
        loop {
            let mut progressed = false;
            if hi < sorted.len() && sorted[hi].x1() - p.x1() < best {
                best = best.min(p.distance(&sorted[hi]));
                hi += 1;
                progressed = true;
            }
            if lo > 0 && p.x1() - sorted[lo - 1].x1() < best {
                best = best.min(p.distance(&sorted[lo - 1]));
                lo -= 1;
                progressed = true;
            }
            if !progressed {
                break;
            }
        }
        worst = worst.max(best);
    }
    worst
}
