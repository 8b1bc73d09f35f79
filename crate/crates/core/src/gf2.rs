//! Small dense GF(2) solver over packed symplectic rows.
//!
//! A Pauli on n ≤ 64 qubits packs into one `u128`: X bits in the low word, Z
//! bits in the high word. That is enough for every code this crate builds.

/// Packs `(x, z)` into a single symplectic row.
#[inline]
pub fn pack(x: u64, z: u64) -> u128 {
    (x as u128) | ((z as u128) << 64)
}

/// Finds a subset of `rows` whose XOR equals `target` on the columns selected
/// by `mask`. Returns the subset as a bitmask over row indices.
///
/// At most 64 rows are supported.
pub fn solve(rows: &[u128], target: u128, mask: u128) -> Option<u64> {
    debug_assert!(rows.len() <= 64);
    // Reduced basis: (vector, combination of original rows that produced it).
    let mut basis: Vec<(u128, u64)> = Vec::with_capacity(rows.len());
    for (i, &row) in rows.iter().enumerate() {
        let mut v = row & mask;
        let mut combo = 1u64 << i;
        for &(b, c) in &basis {
            if v & lowest_bit(b) != 0 {
                v ^= b;
                combo ^= c;
            }
        }
        if v != 0 {
            let pivot = lowest_bit(v);
            for entry in basis.iter_mut() {
                if entry.0 & pivot != 0 {
                    entry.0 ^= v;
                    entry.1 ^= combo;
                }
            }
            basis.push((v, combo));
        }
    }
    let mut t = target & mask;
    let mut combo = 0u64;
    for &(b, c) in &basis {
        if t & lowest_bit(b) != 0 {
            t ^= b;
            combo ^= c;
        }
    }
    (t == 0).then_some(combo)
}

/// Rank of `rows` restricted to `mask`.
pub fn rank(rows: &[u128], mask: u128) -> usize {
    let mut basis: Vec<u128> = Vec::new();
    for &row in rows {
        let mut v = row & mask;
        for &b in &basis {
            if v & lowest_bit(b) != 0 {
                v ^= b;
            }
        }
        if v != 0 {
            let pivot = lowest_bit(v);
            for b in basis.iter_mut() {
                if *b & pivot != 0 {
                    *b ^= v;
                }
            }
            basis.push(v);
        }
    }
    basis.len()
}

/// Combinations of `rows` that XOR to zero on `mask`, as a list of basis
/// bitmasks over row indices.
pub fn kernel(rows: &[u128], mask: u128) -> Vec<u64> {
    let mut basis: Vec<(u128, u64)> = Vec::new();
    let mut null = Vec::new();
    for (i, &row) in rows.iter().enumerate() {
        let mut v = row & mask;
        let mut combo = 1u64 << i;
        for &(b, c) in &basis {
            if v & lowest_bit(b) != 0 {
                v ^= b;
                combo ^= c;
            }
        }
        if v == 0 {
            null.push(combo);
        } else {
            let pivot = lowest_bit(v);
            for entry in basis.iter_mut() {
                if entry.0 & pivot != 0 {
                    entry.0 ^= v;
                    entry.1 ^= combo;
                }
            }
            basis.push((v, combo));
        }
    }
    null
}

#[inline]
fn lowest_bit(v: u128) -> u128 {
    v & v.wrapping_neg()
}
