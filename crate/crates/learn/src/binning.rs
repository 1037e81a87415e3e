//! Per-feature discretisation shared by every tree learner.
//!
//! Exact mode gives every distinct value its own bin; quantile mode merges
//! neighbouring values until at most `n_bins` remain. Rows are also kept
//! sorted by `(bin, row)` for the level-wise split scan.

use nalgebra::DMatrix;

use crate::error::{LearnError, Result};

#[derive(Debug, Clone)]
pub(crate) struct BinnedFeature {
    /// Bin index per row.
    pub bins: Vec<u32>,
    /// Smallest and largest raw training value in each bin.
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Row indices ordered by `(bin, row)`.
    pub sorted: Vec<u32>,
    /// Two-bin features only: the less populated bin and its rows, ascending.
    pub minority: Option<(u32, Vec<u32>)>,
}

impl BinnedFeature {
    pub fn n_bins(&self) -> usize {
        self.lo.len()
    }
}

#[derive(Debug, Clone)]
pub(crate) struct BinnedMatrix {
    pub n_rows: usize,
    pub features: Vec<BinnedFeature>,
    /// Features with at least two bins, ascending.
    pub active: Vec<usize>,
}

pub(crate) fn check_finite(x: &DMatrix<f64>, y: &[f64]) -> Result<()> {
    if x.nrows() == 0 {
        return Err(LearnError::EmptyDataset);
    }
    if x.nrows() != y.len() {
        return Err(LearnError::DimensionMismatch { expected: x.nrows(), got: y.len() });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(LearnError::NonFinite("features"));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(LearnError::NonFinite("targets"));
    }
    Ok(())
}

impl BinnedMatrix {
    /// `max_bins = None` keeps every distinct value.
    pub fn new(x: &DMatrix<f64>, max_bins: Option<usize>) -> Self {
        let features: Vec<BinnedFeature> = (0..x.ncols()).map(|j| bin_column(x.column(j).as_slice(), max_bins)).collect();
        let active = features.iter().enumerate().filter(|(_, f)| f.n_bins() > 1).map(|(j, _)| j).collect();
        BinnedMatrix { n_rows: x.nrows(), features, active }
    }
}

fn bin_column(col: &[f64], max_bins: Option<usize>) -> BinnedFeature {
    let n = col.len();
    let mut order: Vec<u32> = (0..n as u32).collect();
    // adding +0.0 folds -0.0 into 0.0
    order.sort_by(|&a, &b| (col[a as usize] + 0.0).total_cmp(&(col[b as usize] + 0.0)).then(a.cmp(&b)));

    // distinct values with their multiplicities
    let mut distinct: Vec<(f64, usize)> = Vec::new();
    for &r in &order {
        let v = col[r as usize];
        match distinct.last_mut() {
            Some((last, c)) if *last == v => *c += 1,
            _ => distinct.push((v, 1)),
        }
    }

    // bin_of_distinct[k] = bin assigned to the k-th distinct value
    let mut bin_of_distinct = Vec::with_capacity(distinct.len());
    match max_bins {
        Some(m) if distinct.len() > m => {
            let mut bin = 0u32;
            let mut boundary = 1usize;
            let mut cum = 0usize;
            for &(_, c) in &distinct {
                bin_of_distinct.push(bin);
                cum += c;
                if boundary < m && cum * m >= boundary * n {
                    bin += 1;
                    while boundary < m && cum * m >= boundary * n {
                        boundary += 1;
                    }
                }
            }
        }
        _ => bin_of_distinct.extend(0..distinct.len() as u32),
    }
    let n_bins = bin_of_distinct.last().map_or(0, |&b| b as usize + 1);
    let mut lo = vec![f64::INFINITY; n_bins];
    let mut hi = vec![f64::NEG_INFINITY; n_bins];
    for (&(v, _), &b) in distinct.iter().zip(&bin_of_distinct) {
        let b = b as usize;
        lo[b] = lo[b].min(v);
        hi[b] = hi[b].max(v);
    }

    let mut bins = vec![0u32; n];
    let mut k = 0usize;
    for &r in &order {
        while col[r as usize] != distinct[k].0 {
            k += 1;
        }
        bins[r as usize] = bin_of_distinct[k];
    }
    // counting sort by bin, rows ascending within a bin
    let mut start = vec![0usize; n_bins + 1];
    for &b in &bins {
        start[b as usize + 1] += 1;
    }
    for b in 0..n_bins {
        start[b + 1] += start[b];
    }
    let mut sorted = vec![0u32; n];
    for (r, &b) in bins.iter().enumerate() {
        sorted[start[b as usize]] = r as u32;
        start[b as usize] += 1;
    }
    let minority = (n_bins == 2).then(|| {
        let ones = bins.iter().filter(|&&b| b == 1).count();
        let b = if ones <= n - ones { 1u32 } else { 0 };
        (b, (0..n as u32).filter(|&r| bins[r as usize] == b).collect())
    });
    BinnedFeature { bins, lo, hi, sorted, minority }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_bins_every_value() {
        let f = bin_column(&[3.0, 1.0, 2.0, 1.0], None);
        assert_eq!(f.bins, vec![2, 0, 1, 0]);
        assert_eq!(f.sorted, vec![1, 3, 2, 0]);
        assert_eq!(f.lo, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn quantile_bins_are_bounded_and_ordered() {
        let col: Vec<f64> = (0..1000).map(|i| ((i * 7919) % 1000) as f64).collect();
        for m in [2, 3, 16, 255] {
            let f = bin_column(&col, Some(m));
            assert!(f.n_bins() <= m && f.n_bins() >= 2, "{m}: {}", f.n_bins());
            for b in 1..f.n_bins() {
                assert!(f.hi[b - 1] < f.lo[b]);
            }
            for (r, &b) in f.bins.iter().enumerate() {
                assert!(f.lo[b as usize] <= col[r] && col[r] <= f.hi[b as usize]);
            }
        }
        let f = bin_column(&col, Some(4));
        let mut counts = vec![0; 4];
        f.bins.iter().for_each(|&b| counts[b as usize] += 1);
        assert_eq!(counts, vec![250; 4]);
    }

    #[test]
    fn binary_column_two_bins() {
        let f = bin_column(&[0.0, 1.0, 1.0, 0.0, 1.0], Some(2));
        assert_eq!(f.n_bins(), 2);
        assert_eq!(f.bins, vec![0, 1, 1, 0, 1]);
        assert_eq!(f.minority, Some((0, vec![0, 3])));
        assert_eq!(bin_column(&[0.0, 1.0, 0.0, 0.0], None).minority, Some((1, vec![1])));
    }

    #[test]
    fn constant_column_inactive() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 5.0, 2.0, 5.0, 3.0, 5.0]);
        let b = BinnedMatrix::new(&x, None);
        assert_eq!(b.active, vec![0]);
    }
}
