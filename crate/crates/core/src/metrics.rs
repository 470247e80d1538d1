//! Angular-error statistics, Sets' Angular Error (SAE) and nearest-angle
//! histograms.

use std::io::{self, Write};

use crate::color::{angular_distance, Illuminant};
use crate::error::{Error, Result};

/// The usual six-number summary of a set of angular errors, in degrees.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorSummary {
    pub mean: f64,
    pub median: f64,
    pub trimean: f64,
    pub best25: f64,
    pub worst25: f64,
    /// Geometric mean of the five statistics above.
    pub avg: f64,
    pub count: usize,
}

/// Linearly interpolated quantile of sorted data at position `(n - 1) q`.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = (sorted.len() - 1) as f64 * q;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Geometric mean of the five location statistics.
pub fn geometric_mean(stats: &[f64]) -> f64 {
    if stats.iter().any(|&s| s <= 0.0) {
        return 0.0;
    }
    (stats.iter().map(|s| s.ln()).sum::<f64>() / stats.len() as f64).exp()
}

/// Summarizes a set of non-negative angular errors.
///
/// Median averages the middle pair for even counts, quartiles for the
/// trimean are interpolated at `(n - 1) q`, and the best/worst 25% are means
/// of the `max(1, floor(n / 4))` smallest/largest errors.
pub fn summarize(errors: &[f64]) -> Result<ErrorSummary> {
    if errors.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(&e) = errors.iter().find(|e| e.is_nan() || **e < 0.0) {
        return Err(Error::NegativeError(e));
    }
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 { sorted[n / 2] } else { 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]) };
    let trimean = 0.25 * (quantile(&sorted, 0.25) + 2.0 * quantile(&sorted, 0.5) + quantile(&sorted, 0.75));
    let quarter = (n / 4).max(1);
    let best25 = mean(&sorted[..quarter]);
    let worst25 = mean(&sorted[n - quarter..]);
    let mean = mean(&sorted);
    let avg = geometric_mean(&[mean, median, trimean, best25, worst25]);
    Ok(ErrorSummary { mean, median, trimean, best25, worst25, avg, count: n })
}

/// Angular errors between paired estimates and ground truths.
pub fn angular_errors(gts: &[Illuminant], ests: &[Illuminant]) -> Result<Vec<f64>> {
    if gts.len() != ests.len() {
        return Err(Error::LengthMismatch { left: gts.len(), right: ests.len() });
    }
    Ok(gts.iter().zip(ests).map(|(g, e)| angular_distance(g, e)).collect())
}

/// Minimum-cost perfect matching on a square cost matrix (row-major, `n x n`).
///
/// Shortest augmenting path Hungarian method with row/column potentials,
/// `O(n^3)`. Returns `col_of_row`.
pub fn solve_assignment(cost: &[f64], n: usize) -> Vec<usize> {
    assert_eq!(cost.len(), n * n, "cost matrix must be n x n");
    if n == 0 {
        return Vec::new();
    }
    // 1-based bookkeeping; index 0 is the virtual root column.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut row_of_col = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        row_of_col[0] = row;
        let mut col0 = 0;
        let mut min_to = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let i0 = row_of_col[col0];
            let mut delta = f64::INFINITY;
            let mut col1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if reduced < min_to[j] {
                    min_to[j] = reduced;
                    way[j] = col0;
                }
                if min_to[j] < delta {
                    delta = min_to[j];
                    col1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_to[j] -= delta;
                }
            }
            col0 = col1;
            if row_of_col[col0] == 0 {
                break;
            }
        }
        loop {
            let prev = way[col0];
            row_of_col[col0] = row_of_col[prev];
            col0 = prev;
            if col0 == 0 {
                break;
            }
        }
    }
    let mut col_of_row = vec![0usize; n];
    for j in 1..=n {
        col_of_row[row_of_col[j] - 1] = j - 1;
    }
    col_of_row
}

/// Result of [`sae`].
#[derive(Clone, Debug, PartialEq)]
pub struct SaeResult {
    /// Minimal mean angle over all one-to-one pairings, degrees.
    pub sae: f64,
    /// `assignment[i]` is the estimate paired with ground truth `i`.
    pub assignment: Vec<usize>,
}

/// Sets' Angular Error: the smallest mean angle achievable by pairing every
/// ground truth with a distinct estimate.
pub fn sae(gts: &[Illuminant], ests: &[Illuminant]) -> Result<SaeResult> {
    if gts.len() != ests.len() {
        return Err(Error::LengthMismatch { left: gts.len(), right: ests.len() });
    }
    if gts.is_empty() {
        return Err(Error::EmptyInput);
    }
    let m = gts.len();
    let cost: Vec<f64> = gts.iter().flat_map(|g| ests.iter().map(move |e| angular_distance(g, e))).collect();
    let assignment = solve_assignment(&cost, m);
    let total: f64 = assignment.iter().enumerate().map(|(i, &j)| cost[i * m + j]).sum();
    Ok(SaeResult { sae: total / m as f64, assignment })
}

/// Distribution of angles from each element of one set to its nearest
/// element in another.
#[derive(Clone, Debug, PartialEq)]
pub struct NearestAngleHistogram {
    pub bin_width: f64,
    /// Nearest angle of every `from` element, in input order.
    pub angles: Vec<f64>,
    /// Share of `from` elements per bin, in percent. Bin `i` covers
    /// `[i w, (i + 1) w)`.
    pub percents: Vec<f64>,
}

impl NearestAngleHistogram {
    /// `(bin_start, bin_end, percent)` rows.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.percents.iter().enumerate().map(move |(i, &p)| {
            (i as f64 * self.bin_width, (i + 1) as f64 * self.bin_width, p)
        })
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "bin_start,bin_end,percent")?;
        for (a, b, p) in self.rows() {
            writeln!(w, "{a},{b},{p}")?;
        }
        Ok(())
    }
}

pub fn nearest_angle_histogram(
    from_set: &[Illuminant],
    to_set: &[Illuminant],
    bin_width: f64,
) -> Result<NearestAngleHistogram> {
    if from_set.is_empty() || to_set.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !bin_width.is_finite() || bin_width <= 0.0 {
        return Err(Error::InvalidConfig(format!("bin width {bin_width} must be positive")));
    }
    let angles: Vec<f64> = from_set
        .iter()
        .map(|f| to_set.iter().map(|t| angular_distance(f, t)).fold(f64::INFINITY, f64::min))
        .collect();
    let max = angles.iter().copied().fold(0.0, f64::max);
    let bins = (max / bin_width).floor() as usize + 1;
    let mut counts = vec![0usize; bins];
    for a in &angles {
        counts[((a / bin_width).floor() as usize).min(bins - 1)] += 1;
    }
    let total = angles.len() as f64;
    let percents = counts.iter().map(|&c| 100.0 * c as f64 / total).collect();
    Ok(NearestAngleHistogram { bin_width, angles, percents })
}

pub const SUMMARY_CSV_HEADER: &str = "method,mean,median,trimean,best25,worst25,avg";

impl ErrorSummary {
    /// Machine-readable row matching [`SUMMARY_CSV_HEADER`], full precision.
    pub fn csv_row(&self, method: &str) -> String {
        format!(
            "{method},{},{},{},{},{},{}",
            self.mean, self.median, self.trimean, self.best25, self.worst25, self.avg
        )
    }

    /// Human-readable row with four decimals.
    pub fn table_row(&self, method: &str) -> String {
        format!(
            "{method:<28} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
            self.mean, self.median, self.trimean, self.best25, self.worst25, self.avg
        )
    }
}

pub fn table_header() -> String {
    format!(
        "{:<28} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "method", "mean", "median", "trimean", "best25", "worst25", "avg"
    )
}

/// Writes a summary table as CSV.
pub fn write_summary_csv<W: Write>(mut w: W, rows: &[(String, ErrorSummary)]) -> io::Result<()> {
    writeln!(w, "{SUMMARY_CSV_HEADER}")?;
    for (method, s) in rows {
        writeln!(w, "{}", s.csv_row(method))?;
    }
    Ok(())
}
