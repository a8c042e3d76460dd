//! Set partitions and the Möbius function of the partition lattice.

/// All set partitions of `items`, each block in ascending item order.
pub fn set_partitions(items: &[usize]) -> Vec<Vec<Vec<usize>>> {
    let Some((&first, rest)) = items.split_first() else {
        return vec![Vec::new()];
    };
    let mut out = Vec::new();
    for partition in set_partitions(rest) {
        // `first` opens its own block...
        let mut alone = vec![vec![first]];
        alone.extend(partition.iter().cloned());
        out.push(alone);
        // ...or joins an existing one.
        for i in 0..partition.len() {
            let mut joined = partition.clone();
            joined[i].insert(0, first);
            out.push(joined);
        }
    }
    out
}

/// `mu(pi, 1)` on the partition lattice: `(-1)^(k-1) (k-1)!` for `k` blocks.
pub fn mobius_to_top(blocks: usize) -> f64 {
    assert!(blocks >= 1);
    let k = blocks - 1;
    let fact: f64 = (1..=k).map(|x| x as f64).product();
    if k.is_multiple_of(2) {
        fact
    } else {
        -fact
    }
}
