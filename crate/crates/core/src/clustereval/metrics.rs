use super::{pam, DissimilarityMatrix, PamFit, Partition};
use crate::error::{Error, Result};

/// Average silhouette width.
///
/// Points in singleton clusters score 0, as do points with `a = b = 0`.
pub fn silhouette_width(d: &DissimilarityMatrix, p: &Partition) -> Result<f64> {
    let n = d.n();
    if p.len() != n {
        return Err(Error::DimensionMismatch { left: p.len(), right: n });
    }
    let k = p.k();
    if k < 2 {
        return Err(Error::Parameter("silhouette width needs at least 2 clusters".into()));
    }
    let sizes = p.sizes();
    let labels = p.labels();
    let mut sums = vec![0.0; k];
    let mut total = 0.0;
    for i in 0..n {
        let own = labels[i] - 1;
        if sizes[own] == 1 {
            continue;
        }
        sums.iter_mut().for_each(|s| *s = 0.0);
        for (j, &v) in d.row(i).iter().enumerate() {
            sums[labels[j] - 1] += v;
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    Ok(total / n as f64)
}

/// PAM for `k = 2..=k_max`, keeping the `k` with the largest average
/// silhouette width (the smaller `k` on ties).
pub fn choose_k(d: &DissimilarityMatrix, k_max: usize) -> Result<(usize, PamFit)> {
    let n = d.n();
    if k_max < 2 || k_max + 1 > n {
        return Err(Error::Parameter(format!(
            "k_max = {k_max} must lie in 2..={}",
            n.saturating_sub(1)
        )));
    }
    let mut best: Option<(f64, usize, PamFit)> = None;
    for k in 2..=k_max {
        let fit = pam(d, k)?;
        let width = silhouette_width(d, &fit.partition)?;
        if best.as_ref().is_none_or(|(w, _, _)| width > *w) {
            best = Some((width, k, fit));
        }
    }
    let (_, k, fit) = best.expect("k range is nonempty");
    Ok((k, fit))
}

fn choose2(x: usize) -> f64 {
    let x = x as f64;
    x * (x - 1.0) / 2.0
}

/// Hubert-Arabie adjusted Rand index. Returns 1 when the index is `0 / 0`
/// (both partitions trivial and identical in pair structure).
pub fn adjusted_rand(p: &Partition, q: &Partition) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { left: p.len(), right: q.len() });
    }
    let (kp, kq) = (p.k(), q.k());
    let mut table = vec![0usize; kp * kq];
    for (&a, &b) in p.labels().iter().zip(q.labels()) {
        table[(a - 1) * kq + (b - 1)] += 1;
    }
    let index: f64 = table.iter().map(|&c| choose2(c)).sum();
    let rows: f64 = p.sizes().into_iter().map(choose2).sum();
    let cols: f64 = q.sizes().into_iter().map(choose2).sum();
    let expected = rows * cols / choose2(p.len());
    let max_index = 0.5 * (rows + cols);
    let denom = max_index - expected;
    let numer = index - expected;
    if denom == 0.0 {
        return Ok(if numer == 0.0 { 1.0 } else { 0.0 });
    }
    Ok(numer / denom)
}

/// Median; the mean of the two middle values for even lengths.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use proptest::prelude::*;
    use rand::Rng;

    fn blocks(sizes: &[usize]) -> (DissimilarityMatrix, Partition) {
        let labels: Vec<usize> = sizes
            .iter()
            .enumerate()
            .flat_map(|(c, &g)| std::iter::repeat_n(c + 1, g))
            .collect();
        let d = DissimilarityMatrix::from_fn(labels.len(), |i, j| if labels[i] == labels[j] { 0.0 } else { 1.0 })
            .unwrap();
        (d, Partition::new(labels).unwrap())
    }

    /// Pair-counting definition: agreements over all pairs, corrected by the
    /// expectation under the permutation model.
    fn ari_by_pairs(p: &[usize], q: &[usize]) -> f64 {
        let n = p.len();
        let (mut both, mut only_p, mut only_q, mut pairs) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..n {
            for j in i + 1..n {
                let sp = p[i] == p[j];
                let sq = q[i] == q[j];
                both += (sp && sq) as u8 as f64;
                only_p += sp as u8 as f64;
                only_q += sq as u8 as f64;
                pairs += 1.0;
            }
        }
        let expected = only_p * only_q / pairs;
        (both - expected) / (0.5 * (only_p + only_q) - expected)
    }

    #[test]
    fn silhouette_examples() {
        let (d, p) = blocks(&[3, 2]);
        assert_eq!(silhouette_width(&d, &p).unwrap(), 1.0);
        let zero = DissimilarityMatrix::from_fn(4, |_, _| 0.0).unwrap();
        assert_eq!(silhouette_width(&zero, &Partition::new(vec![1, 1, 2, 2]).unwrap()).unwrap(), 0.0);
        assert!(silhouette_width(&zero, &Partition::new(vec![1, 1, 1, 1]).unwrap()).is_err());
    }

    #[test]
    fn silhouette_by_hand() {
        // points 0, 1 | 2, 3 with
        // d01 = 1, d23 = 2, d02 = 4, d03 = 5, d12 = 3, d13 = 6
        let rows = vec![
            vec![0.0, 1.0, 4.0, 5.0],
            vec![1.0, 0.0, 3.0, 6.0],
            vec![4.0, 3.0, 0.0, 2.0],
            vec![5.0, 6.0, 2.0, 0.0],
        ];
        let d = DissimilarityMatrix::from_rows(&rows).unwrap();
        let p = Partition::new(vec![1, 1, 2, 2]).unwrap();
        // s0: a=1, b=4.5 -> 3.5/4.5; s1: a=1, b=4.5 -> 3.5/4.5
        // s2: a=2, b=3.5 -> 1.5/3.5; s3: a=2, b=5.5 -> 3.5/5.5
        let expected = (3.5 / 4.5 + 3.5 / 4.5 + 1.5 / 3.5 + 3.5 / 5.5) / 4.0;
        assert!((silhouette_width(&d, &p).unwrap() - expected).abs() < 1e-15);
        // singleton cluster scores zero
        let p = Partition::new(vec![1, 1, 1, 2]).unwrap();
        let s0 = (5.0 - 2.5_f64) / 5.0;
        let s1 = (6.0 - 2.0_f64) / 6.0;
        let s2 = (2.0 - 3.5_f64) / 3.5;
        assert!((silhouette_width(&d, &p).unwrap() - (s0 + s1 + s2) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn choose_k_on_blocks() {
        assert_eq!(choose_k(&blocks(&[5, 4, 6]).0, 10).unwrap().0, 3);
        assert_eq!(choose_k(&blocks(&[5, 4]).0, 8).unwrap().0, 2);
        assert!(choose_k(&blocks(&[2, 1]).0, 3).is_err());
        assert!(choose_k(&blocks(&[2, 1]).0, 1).is_err());
    }

    #[test]
    fn adjusted_rand_examples() {
        let p = Partition::new(vec![1, 1, 2, 2]).unwrap();
        let q = Partition::new(vec![1, 2, 1, 2]).unwrap();
        assert_eq!(adjusted_rand(&p, &p).unwrap(), 1.0);
        // pairs: only (0,1) and (2,3) are together in p, (0,2) and (1,3) in q;
        // both = 0, expected = 2 * 2 / 6, max = 2 -> (0 - 2/3) / (2 - 2/3) = -0.5
        assert!((adjusted_rand(&p, &q).unwrap() + 0.5).abs() < 1e-15);
        let a = Partition::new(vec![1, 1, 1, 2, 2, 3]).unwrap();
        let b = Partition::new(vec![1, 1, 2, 2, 2, 2]).unwrap();
        let by_pairs = ari_by_pairs(a.labels(), b.labels());
        assert!((adjusted_rand(&a, &b).unwrap() - by_pairs).abs() < 1e-15);
        let one = Partition::new(vec![1; 5]).unwrap();
        assert_eq!(adjusted_rand(&one, &one).unwrap(), 1.0);
        assert!(adjusted_rand(&one, &p).is_err());
    }

    #[test]
    fn adjusted_rand_of_random_partitions_is_near_zero() {
        let mut rng = stream_rng(21, 0);
        let trials = 200;
        let mut total = 0.0;
        for _ in 0..trials {
            let p: Vec<usize> = (0..200).map(|_| rng.random_range(0..3)).collect();
            let q: Vec<usize> = (0..200).map(|_| rng.random_range(0..4)).collect();
            total += adjusted_rand(&Partition::from_raw(&p).unwrap(), &Partition::from_raw(&q).unwrap()).unwrap();
        }
        assert!((total / trials as f64).abs() < 0.02);
    }

    #[test]
    fn median_convention() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&[]).is_nan());
    }

    proptest! {
        #[test]
        fn adjusted_rand_symmetry_and_relabeling(
            raw_p in prop::collection::vec(0usize..4, 3..40),
            seed in any::<u64>(),
        ) {
            let mut rng = stream_rng(seed, 0);
            let raw_q: Vec<usize> = raw_p.iter().map(|_| rng.random_range(0..3)).collect();
            let p = Partition::from_raw(&raw_p).unwrap();
            let q = Partition::from_raw(&raw_q).unwrap();
            let pq = adjusted_rand(&p, &q).unwrap();
            prop_assert!((pq - adjusted_rand(&q, &p).unwrap()).abs() < 1e-12);
            let permuted: Vec<usize> = raw_p.iter().map(|l| 10 - l).collect();
            let pp = Partition::from_raw(&permuted).unwrap();
            prop_assert!((pq - adjusted_rand(&pp, &q).unwrap()).abs() < 1e-12);
            let by_pairs = ari_by_pairs(&raw_p, &raw_q);
            if by_pairs.is_finite() {
                prop_assert!((pq - by_pairs).abs() < 1e-9);
            }
        }

        #[test]
        fn silhouette_in_range(xs in prop::collection::vec(-5.0..5.0f64, 4..30), seed in any::<u64>()) {
            let d = DissimilarityMatrix::from_fn(xs.len(), |i, j| (xs[i] - xs[j]).abs()).unwrap();
            let mut rng = stream_rng(seed, 1);
            let mut labels: Vec<usize> = (0..xs.len()).map(|_| rng.random_range(1..=3)).collect();
            labels[0] = 1;
            labels[1] = 2;
            let p = Partition::from_raw(&labels).unwrap();
            let s = silhouette_width(&d, &p).unwrap();
            prop_assert!((-1.0..=1.0).contains(&s));
        }
    }
}
