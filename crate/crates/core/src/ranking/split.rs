use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Splits row indices into (train, test), sampling `test_fraction` of every
/// target decile. Both halves come back sorted.
pub fn stratified_split(targets: &[f64], test_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..targets.len()).collect();
    order.sort_by(|&a, &b| targets[a].total_cmp(&targets[b]).then(a.cmp(&b)));
    let n = order.len();
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for d in 0..10 {
        let mut decile = order[d * n / 10..(d + 1) * n / 10].to_vec();
        decile.shuffle(&mut rng);
        let k = (decile.len() as f64 * test_fraction).round() as usize;
        test.extend_from_slice(&decile[..k]);
        train.extend_from_slice(&decile[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

/// Fold assignment of `n` rows into `k` near-equal shuffled folds.
pub fn kfold(n: usize, k: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng);
    let mut folds = vec![Vec::new(); k];
    for (i, row) in idx.into_iter().enumerate() {
        folds[i % k].push(row);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    folds
}
