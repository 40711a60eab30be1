//! Per-dimension evaluation of an intersection-kernel decision function.
//!
//! Because the kernel is a sum over dimensions, the decision function splits
//! into `sum_d f_d(x_d) + bias` with
//! `f_d(v) = sum_i c_i min(s_id, v)`. Each `f_d` is piecewise linear with
//! breakpoints at the sorted support-vector values of dimension `d`: with
//! `k` breakpoints at or below `v`, `f_d(v) = A_k + v B_k` where `A_k` sums
//! `c_i s_id` below and `B_k` sums `c_i` above.

/// How [`FastHik::eval`] evaluates each `f_d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FastHikMode {
    /// Binary search over the breakpoints; matches the kernel expansion up to
    /// rounding.
    Exact,
    /// Linear interpolation on a uniform grid over `[0, max_d]`.
    Grid,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FastHik {
    pub mode: FastHikMode,
    pub samples_per_dim: usize,
    /// Kept so the model can be serialized and rebuilt.
    pub support_vectors: Vec<Vec<f64>>,
    pub coefficients: Vec<f64>,
    dims: Vec<DimTable>,
}

#[derive(Clone, Debug, PartialEq)]
struct DimTable {
    /// Sorted nonzero support-vector values.
    breaks: Vec<f64>,
    /// `prefix[k] = sum of c_i s_i over the first k breakpoints`.
    prefix: Vec<f64>,
    /// `suffix[k] = sum of c_i over breakpoints k..`.
    suffix: Vec<f64>,
    /// Grid samples of `f_d` on `[0, max]`.
    grid: Vec<f64>,
    max: f64,
}

impl DimTable {
    fn new(mut pairs: Vec<(f64, f64)>, samples: usize) -> Self {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let m = pairs.len();
        let mut prefix = Vec::with_capacity(m + 1);
        prefix.push(0.0);
        for &(s, c) in &pairs {
            prefix.push(prefix.last().unwrap() + c * s);
        }
        let mut suffix = vec![0.0; m + 1];
        for k in (0..m).rev() {
            suffix[k] = suffix[k + 1] + pairs[k].1;
        }
        let breaks: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let max = breaks.last().copied().unwrap_or(0.0);
        let mut table = DimTable {
            breaks,
            prefix,
            suffix,
            grid: Vec::new(),
            max,
        };
        if max > 0.0 {
            let h = max / (samples - 1) as f64;
            table.grid = (0..samples)
                .map(|j| table.exact(if j + 1 == samples { max } else { j as f64 * h }))
                .collect();
        }
        table
    }

    #[inline]
    fn exact(&self, v: f64) -> f64 {
        let k = self.breaks.partition_point(|&s| s <= v);
        self.prefix[k] + v * self.suffix[k]
    }

    #[inline]
    fn grid(&self, v: f64) -> f64 {
        if self.grid.is_empty() {
            return 0.0;
        }
        if v >= self.max {
            return *self.grid.last().unwrap();
        }
        let v = v.max(0.0);
        let pos = v / self.max * (self.grid.len() - 1) as f64;
        let j = (pos as usize).min(self.grid.len() - 2);
        let f = pos - j as f64;
        self.grid[j] + f * (self.grid[j + 1] - self.grid[j])
    }

    /// Largest absolute slope of `f_d`.
    fn max_slope(&self) -> f64 {
        self.suffix.iter().fold(0.0f64, |m, s| m.max(s.abs()))
    }
}

impl FastHik {
    pub fn build(
        support_vectors: &[Vec<f64>],
        coefficients: &[f64],
        samples_per_dim: usize,
        mode: FastHikMode,
    ) -> Self {
        let len = support_vectors.first().map_or(0, Vec::len);
        let dims = (0..len)
            .map(|d| {
                // zero entries contribute min(0, v) = 0
                let pairs = support_vectors
                    .iter()
                    .zip(coefficients)
                    .filter(|(sv, _)| sv[d] > 0.0)
                    .map(|(sv, &c)| (sv[d], c))
                    .collect();
                DimTable::new(pairs, samples_per_dim)
            })
            .collect();
        FastHik {
            mode,
            samples_per_dim,
            support_vectors: support_vectors.to_vec(),
            coefficients: coefficients.to_vec(),
            dims,
        }
    }

    /// `sum_d f_d(x_d)`, without the bias.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self.mode {
            FastHikMode::Exact => self.dims.iter().zip(x).map(|(t, &v)| t.exact(v)).sum(),
            FastHikMode::Grid => self.dims.iter().zip(x).map(|(t, &v)| t.grid(v)).sum(),
        }
    }

    /// `f_d(v)` for one dimension using the exact breakpoint search.
    pub fn dimension_value(&self, d: usize, v: f64) -> f64 {
        self.dims[d].exact(v)
    }

    /// Upper bound on `|grid eval - exact eval|`: the sum over dimensions of
    /// the largest slope times the grid spacing.
    pub fn grid_error_bound(&self) -> f64 {
        self.dims
            .iter()
            .filter(|t| t.max > 0.0)
            .map(|t| t.max_slope() * t.max / (self.samples_per_dim - 1) as f64)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_vector_closed_form() {
        let f = FastHik::build(&[vec![0.4, 0.0]], &[1.0], 10, FastHikMode::Exact);
        for v in [0.0, 0.1, 0.4, 0.7, 1.0] {
            assert_eq!(f.dimension_value(0, v), v.min(0.4));
            assert_eq!(f.dimension_value(1, v), 0.0);
        }
    }

    #[test]
    fn grid_is_exact_at_grid_points_and_beyond_max() {
        let f = FastHik::build(&[vec![0.5], vec![0.25]], &[1.0, -2.0], 5, FastHikMode::Grid);
        let exact = |v: f64| 1.0 * v.min(0.5) - 2.0 * v.min(0.25);
        for v in [0.0, 0.125, 0.25, 0.375, 0.5, 0.9] {
            assert!((f.eval(&[v]) - exact(v)).abs() < 1e-15);
        }
    }
}
