//! Tensorized histogram: a product of independently binned one-dimensional
//! histograms with bins `[l·h, (l+1)·h)` anchored at the origin.

use rand::Rng;

use super::{EstimatorError, LogWeight};
use crate::model::Configuration;

/// Occupied bins of one coordinate, sorted by bin index.
#[derive(Debug, Clone, PartialEq)]
struct Axis {
    bins: Vec<i64>,
    counts: Vec<u32>,
    /// `cumulative[j]` is the number of samples in bins `0..=j`.
    cumulative: Vec<u32>,
}

impl Axis {
    fn from_values(values: &mut [f64], h: f64) -> Self {
        values.sort_unstable_by(f64::total_cmp);
        let mut bins = Vec::new();
        let mut counts: Vec<u32> = Vec::new();
        for &v in values.iter() {
            let l = bin_index(v, h);
            match bins.last() {
                Some(&last) if last == l => *counts.last_mut().unwrap() += 1,
                _ => {
                    bins.push(l);
                    counts.push(1);
                }
            }
        }
        let cumulative = counts
            .iter()
            .scan(0u32, |acc, &c| {
                *acc += c;
                Some(*acc)
            })
            .collect();
        Self { bins, counts, cumulative }
    }

    fn count(&self, l: i64) -> u32 {
        self.bins.binary_search(&l).map_or(0, |j| self.counts[j])
    }
}

#[inline]
fn bin_index(v: f64, h: f64) -> i64 {
    (v / h).floor() as i64
}

/// Normalised product histogram over `ℝ^d`.
///
/// Each one-dimensional factor is a density (`count / (K·h)`), so the
/// product integrates to one.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorHistogram {
    bin_width: f64,
    total: u32,
    axes: Vec<Axis>,
}

impl TensorHistogram {
    /// Bins every coordinate of `samples` independently.
    pub fn build(samples: &[Configuration], bin_width: f64) -> Result<Self, EstimatorError> {
        if samples.is_empty() {
            return Err(EstimatorError::EmptySamples);
        }
        if !(bin_width > 0.0 && bin_width.is_finite()) {
            return Err(EstimatorError::InvalidBinWidth(bin_width));
        }
        let dim = samples[0].len();
        if let Some(bad) = samples.iter().find(|s| s.len() != dim) {
            return Err(EstimatorError::RaggedSamples { expected: dim, got: bad.len() });
        }
        let mut column = vec![0.0; samples.len()];
        let axes = (0..dim)
            .map(|i| {
                for (c, s) in column.iter_mut().zip(samples) {
                    *c = s[i];
                }
                Axis::from_values(&mut column, bin_width)
            })
            .collect();
        Ok(Self { bin_width, total: samples.len() as u32, axes })
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width
    }

    pub fn total_count(&self) -> u32 {
        self.total
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Occupied `(bin index, count)` pairs of coordinate `i`, ascending.
    pub fn axis_bins(&self, i: usize) -> impl Iterator<Item = (i64, u32)> + '_ {
        let a = &self.axes[i];
        a.bins.iter().copied().zip(a.counts.iter().copied())
    }

    /// `Σ_i log(K_{l_i(x)} / (K·h))`, or `−∞` when some coordinate falls in
    /// an empty bin.
    pub fn log_density(&self, x: &[f64]) -> LogWeight {
        debug_assert_eq!(x.len(), self.axes.len());
        let log_norm = (self.total as f64 * self.bin_width).ln();
        let mut acc = 0.0;
        for (axis, &v) in self.axes.iter().zip(x) {
            let c = axis.count(bin_index(v, self.bin_width));
            if c == 0 {
                return LogWeight::ZERO;
            }
            acc += (c as f64).ln() - log_norm;
        }
        LogWeight::new(acc)
    }

    /// Draws one point: per coordinate, a bin by inverse CDF over the counts
    /// and then a uniform position inside it.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Configuration {
        let mut out = vec![0.0; self.axes.len()];
        self.sample_into(rng, &mut out);
        Configuration::from_vec_unchecked(out)
    }

    pub(crate) fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let h = self.bin_width;
        let total = self.total as f64;
        for (axis, o) in self.axes.iter().zip(out.iter_mut()) {
            let u: f64 = rng.random();
            let target = u * total;
            // First bin whose cumulative count exceeds u·K.
            let j = axis
                .cumulative
                .partition_point(|&c| (c as f64) <= target)
                .min(axis.bins.len() - 1);
            let offset: f64 = rng.random();
            let lo = axis.bins[j] as f64 * h;
            // Guard the open upper edge against rounding up to (l+1)h.
            let v = lo + offset * h;
            *o = if bin_index(v, h) == axis.bins[j] { v } else { lo };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop, prop_assert, prop_assert_eq, proptest};
    use rand::SeedableRng;

    type TestRng = rand::rngs::StdRng;

    fn configs(rows: &[&[f64]]) -> Vec<Configuration> {
        rows.iter().map(|r| Configuration::from_flat(r.to_vec()).unwrap()).collect()
    }

    #[test]
    fn identical_samples_make_one_bin_per_axis() {
        let x = [0.31, -1.7, 2.05];
        let samples = configs(&[&x, &x, &x, &x, &x]);
        let h = 0.1;
        let hist = TensorHistogram::build(&samples, h).unwrap();
        for i in 0..3 {
            assert_eq!(hist.axis_bins(i).collect::<Vec<_>>().len(), 1);
            assert_eq!(hist.axis_bins(i).next().unwrap().1, 5);
        }
        let expected = 3.0 * (1.0 / h).ln();
        assert!((hist.log_density(&x).value() - expected).abs() < 1e-12);
        let mut rng = TestRng::seed_from_u64(0);
        for _ in 0..200 {
            let y = hist.sample(&mut rng);
            for i in 0..3 {
                assert_eq!(bin_index(y[i], h), bin_index(x[i], h));
            }
        }
    }

    #[test]
    fn adjacent_bins_share_density() {
        let h = 0.5;
        let hist = TensorHistogram::build(&configs(&[&[0.1], &[0.6]]), h).unwrap();
        let d = 1.0 / (2.0 * h);
        assert!((hist.log_density(&[0.2]).value() - d.ln()).abs() < 1e-15);
        assert!((hist.log_density(&[0.9]).value() - d.ln()).abs() < 1e-15);
        assert!(hist.log_density(&[1.2]).is_zero());
        assert!(hist.log_density(&[-0.1]).is_zero());
    }

    #[test]
    fn bins_are_anchored_at_the_origin() {
        let hist = TensorHistogram::build(&configs(&[&[-0.0001], &[0.0], &[0.9999]]), 1.0).unwrap();
        assert_eq!(hist.axis_bins(0).collect::<Vec<_>>(), vec![(-1, 1), (0, 2)]);
    }

    #[test]
    fn errors() {
        assert_eq!(TensorHistogram::build(&[], 1.0), Err(EstimatorError::EmptySamples));
        assert!(matches!(
            TensorHistogram::build(&configs(&[&[0.0]]), 0.0),
            Err(EstimatorError::InvalidBinWidth(_))
        ));
        assert!(matches!(
            TensorHistogram::build(&configs(&[&[0.0], &[0.0, 1.0]]), 1.0),
            Err(EstimatorError::RaggedSamples { .. })
        ));
    }

    #[test]
    fn product_density_integrates_to_one() {
        // Sum of density × bin volume over every occupied cell of a 2-D grid.
        let mut rng = TestRng::seed_from_u64(1);
        let samples: Vec<_> = (0..40)
            .map(|_| Configuration::from_flat(vec![rng.random::<f64>() * 3.0, rng.random::<f64>() - 2.0]).unwrap())
            .collect();
        let h = 0.37;
        let hist = TensorHistogram::build(&samples, h).unwrap();
        let mut mass = 0.0;
        for (l0, _) in hist.axis_bins(0) {
            for (l1, _) in hist.axis_bins(1) {
                let centre = [(l0 as f64 + 0.5) * h, (l1 as f64 + 0.5) * h];
                mass += hist.log_density(&centre).value().exp() * h * h;
            }
        }
        assert!((mass - 1.0).abs() < 1e-10, "mass {mass}");
    }

    #[test]
    fn three_to_one_bin_frequencies() {
        let hist = TensorHistogram::build(&configs(&[&[0.1], &[0.2], &[0.3], &[1.5]]), 1.0).unwrap();
        let mut rng = TestRng::seed_from_u64(2);
        let n = 10_000;
        let low = (0..n).filter(|_| hist.sample(&mut rng)[0] < 1.0).count() as f64 / n as f64;
        // Binomial 99% interval around 0.75.
        let half_width = 2.576 * (0.75f64 * 0.25 / n as f64).sqrt();
        assert!((low - 0.75).abs() < half_width, "{low}");
    }

    proptest! {
        #[test]
        fn samples_have_finite_density(
            rows in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 1..30),
            h in 0.01f64..2.0,
            seed in any::<u64>(),
        ) {
            let samples: Vec<_> = rows.into_iter().map(|r| Configuration::from_flat(r).unwrap()).collect();
            let hist = TensorHistogram::build(&samples, h).unwrap();
            for s in &samples {
                prop_assert!(hist.log_density(s).is_finite());
            }
            let mut rng = TestRng::seed_from_u64(seed);
            for _ in 0..20 {
                let y = hist.sample(&mut rng);
                prop_assert!(hist.log_density(&y).is_finite());
            }
            for i in 0..3 {
                let total: u32 = hist.axis_bins(i).map(|(_, c)| c).sum();
                prop_assert_eq!(total, hist.total_count());
            }
        }
    }
}
