//! Linear-in-parameters fuzzy approximators.
//!
//! An approximator is a grid of rules over a box of input variables. Each
//! input axis carries a triangular [`Partition`]; the rule firing strengths
//! are products of the per-axis memberships, normalized into the basis
//! vector `xi`, and the output is `theta . xi`. Because the partitions sum
//! to one on each axis, the basis is a convex-combination weight vector and
//! evaluation interpolates the `theta` values attached to the grid points.
//!
//! Evaluation is read-only and safe to call from multiple threads; `theta`
//! is only mutated by whoever owns the approximator (in this crate, the
//! simulation loop driving the adaptive controller).

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FuzzyError {
    #[error("partition needs at least 2 centers, got {0}")]
    TooFewCenters(usize),
    #[error("partition centers must be finite and strictly increasing (centers[{index}] = {value})")]
    BadCenter { index: usize, value: f64 },
    #[error("membership index {index} out of range for {count} centers")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("input has {got} coordinates, approximator expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("input coordinate {index} is not finite")]
    NonFiniteInput { index: usize },
    #[error("initialization function returned {value} at grid point {index}")]
    NonFiniteSample { index: usize, value: f64 },
    #[error("theta has {got} components, rule grid has {expected}")]
    ThetaLengthMismatch { expected: usize, got: usize },
}

/// Triangular membership partition of one input axis.
///
/// The domain is `[centers.first(), centers.last()]`. Interior memberships
/// are triangles peaking at their center and reaching zero at the neighbor
/// centers; the first and last are shoulders that stay at 1 beyond the
/// domain edge, so every real input gets a valid (saturating) membership.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    centers: Vec<f64>,
}

impl Partition {
    pub fn from_centers(centers: Vec<f64>) -> Result<Self, FuzzyError> {
        if centers.len() < 2 {
            return Err(FuzzyError::TooFewCenters(centers.len()));
        }
        for (i, &c) in centers.iter().enumerate() {
            let increasing = i == 0 || centers[i - 1] < c;
            if !c.is_finite() || !increasing {
                return Err(FuzzyError::BadCenter { index: i, value: c });
            }
        }
        Ok(Self { centers })
    }

    /// `count` evenly spaced centers spanning `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64, count: usize) -> Result<Self, FuzzyError> {
        if count < 2 {
            return Err(FuzzyError::TooFewCenters(count));
        }
        let step = (hi - lo) / (count - 1) as f64;
        let mut centers: Vec<f64> = (0..count).map(|i| lo + step * i as f64).collect();
        // Pin the endpoint so the last center equals hi exactly.
        centers[count - 1] = hi;
        Self::from_centers(centers)
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn lo(&self) -> f64 {
        self.centers[0]
    }

    pub fn hi(&self) -> f64 {
        *self.centers.last().unwrap()
    }

    /// Membership of `x` in the triangle (or shoulder) at `index`.
    pub fn membership(&self, index: usize, x: f64) -> Result<f64, FuzzyError> {
        let n = self.centers.len();
        if index >= n {
            return Err(FuzzyError::IndexOutOfRange { index, count: n });
        }
        if !x.is_finite() {
            return Err(FuzzyError::NonFiniteInput { index: 0 });
        }
        let c = self.centers[index];
        let value = if x < c {
            if index == 0 {
                1.0
            } else {
                let left = self.centers[index - 1];
                ((x - left) / (c - left)).max(0.0)
            }
        } else if x > c {
            if index == n - 1 {
                1.0
            } else {
                let right = self.centers[index + 1];
                ((right - x) / (right - c)).max(0.0)
            }
        } else {
            1.0
        };
        Ok(value)
    }

    /// Memberships of `x` in every triangle of the partition.
    fn memberships(&self, x: f64) -> Result<Vec<f64>, FuzzyError> {
        (0..self.centers.len())
            .map(|i| self.membership(i, x))
            .collect()
    }
}

/// Normalized rule firing strengths for input `x`.
///
/// Rules are ordered lexicographically with the first input's index
/// outermost: for per-axis counts `(p1, p2, p3)`, rule `(i1, i2, i3)` lands
/// at `i1*p2*p3 + i2*p3 + i3`. The result has length `prod(p_i)`, each
/// component in `[0, 1]`, and sums to 1.
pub fn fuzzy_basis(parts: &[Partition], x: &[f64]) -> Result<Vec<f64>, FuzzyError> {
    if parts.len() != x.len() {
        return Err(FuzzyError::DimensionMismatch {
            expected: parts.len(),
            got: x.len(),
        });
    }
    for (index, &xi) in x.iter().enumerate() {
        if !xi.is_finite() {
            return Err(FuzzyError::NonFiniteInput { index });
        }
    }
    let per_axis: Vec<Vec<f64>> = parts
        .iter()
        .zip(x)
        .map(|(p, &xi)| p.memberships(xi))
        .collect::<Result<_, _>>()?;

    let total: usize = per_axis.iter().map(Vec::len).product();
    let mut xi = vec![0.0; total];
    let mut sum = 0.0;
    for (j, slot) in xi.iter_mut().enumerate() {
        let mut rest = j;
        let mut w = 1.0;
        // Decode the lexicographic rule index axis by axis, last axis fastest.
        for axis in per_axis.iter().rev() {
            w *= axis[rest % axis.len()];
            rest /= axis.len();
        }
        *slot = w;
        sum += w;
    }
    // Shoulders guarantee every axis has at least one positive membership.
    assert!(sum > 0.0, "degenerate rule activation");
    for v in &mut xi {
        *v /= sum;
    }
    Ok(xi)
}

/// Grid-based approximator `f(x) ~= theta . fuzzy_basis(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyApproximator {
    partitions: Vec<Partition>,
    theta: Vec<f64>,
}

impl FuzzyApproximator {
    /// Builds an approximator with an explicit parameter vector.
    pub fn new(partitions: Vec<Partition>, theta: Vec<f64>) -> Result<Self, FuzzyError> {
        let expected: usize = partitions.iter().map(|p| p.centers().len()).product();
        if theta.len() != expected {
            return Err(FuzzyError::ThetaLengthMismatch {
                expected,
                got: theta.len(),
            });
        }
        if let Some(index) = theta.iter().position(|v| !v.is_finite()) {
            return Err(FuzzyError::NonFiniteSample {
                index,
                value: theta[index],
            });
        }
        Ok(Self { partitions, theta })
    }

    /// Samples `f` at every grid point: `theta[j] = f(grid point j)`.
    ///
    /// Evaluation afterwards reproduces `f` exactly at grid points and
    /// interpolates in between, which is how controllers get a warm start
    /// from a nominal model.
    pub fn from_function(
        partitions: Vec<Partition>,
        f: impl Fn(&[f64]) -> f64,
    ) -> Result<Self, FuzzyError> {
        let total: usize = partitions.iter().map(|p| p.centers().len()).product();
        let mut theta = Vec::with_capacity(total);
        let mut point = vec![0.0; partitions.len()];
        for j in 0..total {
            grid_point(&partitions, j, &mut point);
            let value = f(&point);
            if !value.is_finite() {
                return Err(FuzzyError::NonFiniteSample { index: j, value });
            }
            theta.push(value);
        }
        Ok(Self { partitions, theta })
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn theta_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    pub fn rule_count(&self) -> usize {
        self.theta.len()
    }

    pub fn basis(&self, x: &[f64]) -> Result<Vec<f64>, FuzzyError> {
        fuzzy_basis(&self.partitions, x)
    }

    /// `theta . fuzzy_basis(x)`; a convex combination of theta components.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64, FuzzyError> {
        let xi = self.basis(x)?;
        Ok(dot(&self.theta, &xi))
    }

    /// Coordinates of grid point `j` in lexicographic rule order.
    pub fn grid_coords(&self, j: usize) -> Vec<f64> {
        let mut point = vec![0.0; self.partitions.len()];
        grid_point(&self.partitions, j, &mut point);
        point
    }

    /// Theta dump as `rule,coord...,value` CSV lines for inspection.
    pub fn theta_csv(&self) -> String {
        let mut out = String::from("rule");
        for i in 0..self.partitions.len() {
            out.push_str(&format!(",x{}", i + 1));
        }
        out.push_str(",value\n");
        let mut point = vec![0.0; self.partitions.len()];
        for (j, v) in self.theta.iter().enumerate() {
            grid_point(&self.partitions, j, &mut point);
            out.push_str(&j.to_string());
            for c in &point {
                out.push_str(&format!(",{c:.17e}"));
            }
            out.push_str(&format!(",{v:.17e}\n"));
        }
        out
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn grid_point(partitions: &[Partition], j: usize, out: &mut [f64]) {
    let mut rest = j;
    for (slot, part) in out.iter_mut().zip(partitions).rev() {
        let p = part.centers().len();
        *slot = part.centers()[rest % p];
        rest /= p;
    }
}
