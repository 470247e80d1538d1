//! Spherical k-means over illuminant directions and percentile trimming of
//! far-off members.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::color::{angular_distance, normalize, Illuminant};
use crate::error::{Error, Result};

/// Lloyd iterations stop here even if assignments are still moving.
pub const MAX_ITERATIONS: usize = 100;

/// Directions closer than this (degrees) count as the same direction.
const DISTINCT_EPS_DEG: f64 = 1e-7;

/// Result of [`spherical_kmeans`].
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterModel {
    pub centers: Vec<Illuminant>,
    /// Center index of every input point.
    pub assignments: Vec<usize>,
    pub k: usize,
    pub iterations_run: usize,
    pub seed: u64,
}

/// Index of the center with the smallest angle to `p`; ties go to the lower index.
pub fn nearest_center(centers: &[Illuminant], p: &Illuminant) -> usize {
    let mut best = 0;
    let mut best_dot = f64::NEG_INFINITY;
    for (i, c) in centers.iter().enumerate() {
        let d = c.dot(p);
        if d > best_dot {
            best_dot = d;
            best = i;
        }
    }
    best
}

fn assign_all(points: &[Illuminant], centers: &[Illuminant]) -> Vec<usize> {
    points.iter().map(|p| nearest_center(centers, p)).collect()
}

fn distinct_directions_at_least(points: &[Illuminant], k: usize) -> bool {
    let mut seen: Vec<&Illuminant> = Vec::with_capacity(k);
    for p in points {
        if seen.iter().all(|s| angular_distance(s, p) > DISTINCT_EPS_DEG) {
            seen.push(p);
            if seen.len() >= k {
                return true;
            }
        }
    }
    false
}

/// k-means++ seeding with squared angular distance as the sampling weight.
fn seed_centers(points: &[Illuminant], k: usize, rng: &mut Xoshiro256PlusPlus) -> Vec<Illuminant> {
    let mut centers = vec![points[rng.random_range(0..points.len())]];
    let mut weights = vec![0.0f64; points.len()];
    while centers.len() < k {
        let mut total = 0.0;
        for (w, p) in weights.iter_mut().zip(points) {
            let d = centers.iter().map(|c| angular_distance(c, p)).fold(f64::INFINITY, f64::min);
            *w = if d > DISTINCT_EPS_DEG { d * d } else { 0.0 };
            total += *w;
        }
        let target = rng.random::<f64>() * total;
        let mut cumulative = 0.0;
        let mut chosen = None;
        for (i, w) in weights.iter().enumerate() {
            if *w == 0.0 {
                continue;
            }
            cumulative += w;
            chosen = Some(i);
            if cumulative > target {
                break;
            }
        }
        // Guaranteed by the distinct-direction precondition.
        let i = chosen.expect("no uncovered point left while seeding");
        centers.push(points[i]);
    }
    centers
}

/// Recomputes centers as normalized member sums. An empty cluster takes the
/// point lying farthest from its current center.
fn update_centers(points: &[Illuminant], assign: &[usize], previous: &[Illuminant]) -> Vec<Illuminant> {
    let k = previous.len();
    let mut sums = vec![[0.0f64; 3]; k];
    let mut counts = vec![0usize; k];
    for (p, &a) in points.iter().zip(assign) {
        let v = p.to_array();
        for c in 0..3 {
            sums[a][c] += v[c];
        }
        counts[a] += 1;
    }
    let mut taken = vec![false; points.len()];
    let mut centers = Vec::with_capacity(k);
    for j in 0..k {
        if counts[j] > 0 {
            if let Ok(c) = normalize(sums[j]) {
                centers.push(c);
                continue;
            }
        }
        let mut far = None;
        let mut far_angle = -1.0;
        for (i, (p, &a)) in points.iter().zip(assign).enumerate() {
            if taken[i] {
                continue;
            }
            let angle = angular_distance(p, &previous[a]);
            if angle > far_angle {
                far_angle = angle;
                far = Some(i);
            }
        }
        match far {
            Some(i) => {
                taken[i] = true;
                centers.push(points[i]);
            }
            None => centers.push(previous[j]),
        }
    }
    centers
}

/// Spherical k-means: angular assignment, centers are normalized means of
/// their members. Deterministic for a given `seed`.
pub fn spherical_kmeans(points: &[Illuminant], k: usize, seed: u64) -> Result<ClusterModel> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    if !distinct_directions_at_least(points, k) {
        return Err(Error::DegenerateInput(format!("fewer than {k} distinct directions")));
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut centers = seed_centers(points, k, &mut rng);
    let mut assign = assign_all(points, &centers);
    let mut iterations_run = 0;
    for iter in 1..=MAX_ITERATIONS {
        iterations_run = iter;
        centers = update_centers(points, &assign, &centers);
        let next = assign_all(points, &centers);
        if next == assign {
            break;
        }
        assign = next;
        if iter == MAX_ITERATIONS {
            centers = update_centers(points, &assign, &centers);
        }
    }
    Ok(ClusterModel { centers, assignments: assign, k, iterations_run, seed })
}

/// Trim fraction and center count for [`trim`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrimConfig {
    pub t: f64,
    pub k: usize,
}

impl TrimConfig {
    pub fn new(t: f64, k: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&t) {
            return Err(Error::InvalidConfig(format!("trim fraction {t} outside [0, 1)")));
        }
        if k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        Ok(TrimConfig { t, k })
    }
}

impl Default for TrimConfig {
    fn default() -> Self {
        TrimConfig { t: 0.3, k: 2 }
    }
}

/// 1-based rank of the `q`-th percentile among `n` sorted values:
/// `max(1, floor(q * n / 100))`.
pub fn percentile_rank(q: u32, n: usize) -> usize {
    ((q as usize * n) / 100).clamp(1, n.max(1))
}

/// Percentile used for a trim fraction: `floor(100 * (1 - t))`.
pub fn keep_percentile(t: f64) -> u32 {
    // The epsilon absorbs representation error, e.g. 100 * (1 - 0.3).
    (100.0 * (1.0 - t) + 1e-9).floor() as u32
}

/// Clusters `points`, then drops from every cluster the members whose angle
/// to the cluster center exceeds the cluster's `floor(100 (1 - t))`-th
/// percentile. Kept points are returned in input order.
pub fn trim(points: &[Illuminant], cfg: TrimConfig, seed: u64) -> Result<Vec<Illuminant>> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let model = spherical_kmeans(points, cfg.k, seed)?;
    let angles: Vec<f64> = points
        .iter()
        .zip(&model.assignments)
        .map(|(p, &a)| angular_distance(&model.centers[a], p))
        .collect();
    let q = keep_percentile(cfg.t);
    let mut cutoff = vec![f64::INFINITY; cfg.k];
    for (j, cut) in cutoff.iter_mut().enumerate() {
        let mut member: Vec<f64> =
            angles.iter().zip(&model.assignments).filter(|(_, &a)| a == j).map(|(x, _)| *x).collect();
        if member.is_empty() {
            continue;
        }
        member.sort_by(f64::total_cmp);
        *cut = member[percentile_rank(q, member.len()) - 1];
    }
    Ok(points
        .iter()
        .zip(angles.iter().zip(&model.assignments))
        .filter(|(_, (angle, &a))| **angle <= cutoff[a])
        .map(|(p, _)| *p)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::color::offset_direction as offset;
    use proptest::prelude::{prop_assert, prop_assert_eq, prop_assert_ne, proptest, ProptestConfig};

    fn bundle(center: &Illuminant, n: usize, spread: f64, seed: u64) -> Vec<Illuminant> {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        (0..n)
            .map(|_| offset(center, rng.random::<f64>() * spread, rng.random::<f64>() * std::f64::consts::TAU))
            .collect()
    }

    fn normalized_mean(points: &[Illuminant]) -> Illuminant {
        let mut s = [0.0; 3];
        for p in points {
            for (acc, v) in s.iter_mut().zip(p.to_array()) {
                *acc += v;
            }
        }
        normalize(s).unwrap()
    }

    #[test]
    fn two_bundles_recovered() {
        let a = Illuminant::new(1.0, 0.8, 0.6).unwrap();
        let b = Illuminant::new(0.6, 0.8, 1.0).unwrap();
        let pa = bundle(&a, 50, 2.0, 1);
        let pb = bundle(&b, 50, 2.0, 2);
        let (ma, mb) = (normalized_mean(&pa), normalized_mean(&pb));
        let mut points = pa.clone();
        points.extend(pb.iter().copied());
        let model = spherical_kmeans(&points, 2, 42).unwrap();
        let (ca, cb) = if model.centers[0].dot(&ma) > model.centers[1].dot(&ma) {
            (model.centers[0], model.centers[1])
        } else {
            (model.centers[1], model.centers[0])
        };
        assert!(angular_distance(&ca, &ma) < 0.5);
        assert!(angular_distance(&cb, &mb) < 0.5);
    }

    #[test]
    fn identical_points_single_center() {
        let p = Illuminant::new(0.3, 0.5, 0.2).unwrap();
        let model = spherical_kmeans(&vec![p; 12], 1, 0).unwrap();
        assert!(angular_distance(&model.centers[0], &p) < 1e-12);
        assert!(matches!(spherical_kmeans(&vec![p; 12], 2, 0), Err(Error::DegenerateInput(_))));
        assert!(matches!(spherical_kmeans(&[], 1, 0), Err(Error::EmptyInput)));
    }

    #[test]
    fn deterministic_for_seed() {
        let a = Illuminant::new(1.0, 0.9, 0.5).unwrap();
        let points = bundle(&a, 200, 25.0, 9);
        let m1 = spherical_kmeans(&points, 3, 1234).unwrap();
        let m2 = spherical_kmeans(&points, 3, 1234).unwrap();
        for (x, y) in m1.centers.iter().zip(&m2.centers) {
            assert_eq!(x.to_array().map(f64::to_bits), y.to_array().map(f64::to_bits));
        }
        assert_eq!(m1.assignments, m2.assignments);
    }

    #[test]
    fn percentile_ranks() {
        assert_eq!(keep_percentile(0.3), 70);
        assert_eq!(keep_percentile(0.0), 100);
        assert_eq!(keep_percentile(0.29), 71);
        assert_eq!(percentile_rank(70, 10), 7);
        assert_eq!(percentile_rank(70, 11), 7);
        assert_eq!(percentile_rank(100, 11), 11);
        assert_eq!(percentile_rank(10, 3), 1);
        assert_eq!(percentile_rank(0, 5), 1);
    }

    /// Two clusters of ten with one 30 degree outlier among each ten.
    #[test]
    fn trim_removes_outliers() {
        let a = Illuminant::new(1.0, 0.7, 0.4).unwrap();
        let b = Illuminant::new(0.4, 0.7, 1.0).unwrap();
        let mut points = Vec::new();
        for (center, phase) in [(a, 0.3), (b, 1.7)] {
            for i in 0..9 {
                points.push(offset(&center, 0.2 * i as f64, i as f64));
            }
            points.push(offset(&center, 30.0, phase));
        }
        let outliers = [points[9], points[19]];
        let kept = trim(&points, TrimConfig::new(0.3, 2).unwrap(), 5).unwrap();
        // 70th percentile of 10 angles is the 7th smallest.
        assert_eq!(kept.len(), 14);
        for o in &outliers {
            assert!(!kept.contains(o));
        }
        let all = trim(&points, TrimConfig::new(0.0, 2).unwrap(), 5).unwrap();
        assert_eq!(all, points);
        assert!(TrimConfig::new(1.0, 2).is_err());
        assert!(matches!(trim(&[], TrimConfig::default(), 0), Err(Error::EmptyInput)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn centers_are_normalized_member_sums(seed in 0u64..10_000, k in 1usize..4) {
            let base = Illuminant::new(0.7, 0.6, 0.4).unwrap();
            let points = bundle(&base, 60, 20.0, seed);
            let model = spherical_kmeans(&points, k, seed).unwrap();
            prop_assert_eq!(model.centers.len(), k);
            if model.iterations_run < MAX_ITERATIONS {
                for (j, c) in model.centers.iter().enumerate() {
                    let members: Vec<Illuminant> = points.iter().zip(&model.assignments)
                        .filter(|(_, &a)| a == j).map(|(p, _)| *p).collect();
                    prop_assert!(!members.is_empty());
                    prop_assert!(angular_distance(c, &normalized_mean(&members)) < 1e-9);
                }
            }
        }

        #[test]
        fn trim_cuts_by_angle(seed in 0u64..10_000, t in 0.0f64..0.9) {
            let base = Illuminant::new(0.5, 0.6, 0.7).unwrap();
            let points = bundle(&base, 50, 15.0, seed);
            let cfg = TrimConfig::new(t, 2).unwrap();
            let kept = trim(&points, cfg, seed).unwrap();
            let model = spherical_kmeans(&points, 2, seed).unwrap();
            prop_assert!(!kept.is_empty());
            // Sub-multiset in input order.
            let mut it = points.iter();
            for k in &kept {
                prop_assert!(it.any(|p| p == k));
            }
            for j in 0..2 {
                let angle_of = |p: &Illuminant| angular_distance(&model.centers[j], p);
                let members: Vec<&Illuminant> = points.iter().zip(&model.assignments)
                    .filter(|(_, &a)| a == j).map(|(p, _)| p).collect();
                let (kept_m, removed_m): (Vec<&Illuminant>, Vec<&Illuminant>) =
                    members.iter().partition(|p| kept.contains(p));
                let max_kept = kept_m.iter().map(|p| angle_of(p)).fold(0.0, f64::max);
                let max_all = members.iter().map(|p| angle_of(p)).fold(0.0, f64::max);
                prop_assert!(max_kept <= max_all);
                for r in &removed_m {
                    prop_assert!(angle_of(r) >= max_kept);
                }
            }
        }

        #[test]
        fn separated_modes_found(seed in 0u64..10_000, sep in 15.0f64..40.0) {
            let a = Illuminant::new(0.6, 0.6, 0.5).unwrap();
            let b = offset(&a, sep, 0.9);
            let mut points = bundle(&a, 40, 3.0, seed);
            points.extend(bundle(&b, 40, 3.0, seed + 1));
            let model = spherical_kmeans(&points, 2, seed).unwrap();
            let ia = nearest_center(&model.centers, &a);
            let ib = nearest_center(&model.centers, &b);
            prop_assert_ne!(ia, ib);
            prop_assert!(angular_distance(&model.centers[ia], &a) < 2.0);
            prop_assert!(angular_distance(&model.centers[ib], &b) < 2.0);
        }
    }
}
