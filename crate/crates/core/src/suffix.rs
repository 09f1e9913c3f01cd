//! Suffix array by prefix doubling with counting sorts, and Kasai's LCP.

/// Sorted suffix start positions of `s`.
pub(crate) fn suffix_array(s: &[u32]) -> Vec<u32> {
    let n = s.len();
    if n == 0 {
        return Vec::new();
    }
    let alphabet = *s.iter().max().unwrap() as usize + 1;
    let mut rank: Vec<u32> = s.to_vec();
    let mut sa: Vec<u32> = Vec::with_capacity(n);
    let mut buckets = vec![0usize; alphabet.max(n) + 1];

    counting_sort(
        &(0..n as u32).collect::<Vec<_>>(),
        &rank,
        alphabet,
        &mut buckets,
        &mut sa,
    );
    let mut classes = relabel(&sa, &mut rank, |a, b, r| r[a] == r[b]);

    let mut h = 1usize;
    let mut order = Vec::with_capacity(n);
    let mut next = Vec::with_capacity(n);
    while classes < n && h < n {
        order.clear();
        order.extend((n - h) as u32..n as u32);
        order.extend(
            sa.iter()
                .filter(|&&p| p as usize >= h)
                .map(|&p| p - h as u32),
        );
        counting_sort(&order, &rank, classes, &mut buckets, &mut next);
        std::mem::swap(&mut sa, &mut next);
        let second = |r: &[u32], i: usize| if i + h < n { r[i + h] as i64 } else { -1 };
        classes = relabel(&sa, &mut rank, |a, b, r| {
            r[a] == r[b] && second(r, a) == second(r, b)
        });
        h *= 2;
    }
    sa
}

/// Stable sort of `items` by `key[item]`, keys in `0..range`.
fn counting_sort(
    items: &[u32],
    key: &[u32],
    range: usize,
    buckets: &mut [usize],
    out: &mut Vec<u32>,
) {
    buckets[..=range].iter_mut().for_each(|b| *b = 0);
    for &i in items {
        buckets[key[i as usize] as usize + 1] += 1;
    }
    for c in 1..=range {
        buckets[c] += buckets[c - 1];
    }
    out.clear();
    out.resize(items.len(), 0);
    for &i in items {
        let slot = &mut buckets[key[i as usize] as usize];
        out[*slot] = i;
        *slot += 1;
    }
}

/// Reassigns dense ranks following `sa`, merging neighbours that `same`
/// considers equal under the old ranks. Returns the number of classes.
fn relabel(sa: &[u32], rank: &mut Vec<u32>, same: impl Fn(usize, usize, &[u32]) -> bool) -> usize {
    let mut fresh = vec![0u32; rank.len()];
    let mut class = 0u32;
    for w in 1..sa.len() {
        let (a, b) = (sa[w - 1] as usize, sa[w] as usize);
        if !same(a, b, rank) {
            class += 1;
        }
        fresh[b] = class;
    }
    *rank = fresh;
    class as usize + 1
}

/// `lcp[i]` is the longest common prefix of suffixes `sa[i - 1]` and `sa[i]`;
/// `lcp[0] = 0`.
pub(crate) fn lcp_array(s: &[u32], sa: &[u32]) -> Vec<u32> {
    let n = s.len();
    let mut inverse = vec![0u32; n];
    for (i, &p) in sa.iter().enumerate() {
        inverse[p as usize] = i as u32;
    }
    let mut lcp = vec![0u32; n];
    let mut h = 0usize;
    for p in 0..n {
        let r = inverse[p] as usize;
        if r == 0 {
            h = 0;
            continue;
        }
        let q = sa[r - 1] as usize;
        while p + h < n && q + h < n && s[p + h] == s[q + h] {
            h += 1;
        }
        lcp[r] = h as u32;
        h = h.saturating_sub(1);
    }
    lcp
}
