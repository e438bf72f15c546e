//! Small shared helpers.

/// Unordered pairs {i, j} of {0..n-1} in lexicographic order:
/// (0,1), (0,2), ..., (0,n-1), (1,2), ...
///
/// This is the canonical index order shared by the two-pulse codebook and the
/// pair action of the symmetric group; both sides must agree on it.
pub(crate) fn pair_list(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            out.push((i, j));
        }
    }
    out
}

/// Index of the unordered pair {i, j} in `pair_list(n)` order.
pub(crate) fn pair_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    // pairs starting below i, then offset within row i
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for t in 0..k {
        acc = acc * (n - t) / (t + 1);
    }
    acc
}
