use crate::error::{Error, Result};
use crate::is_power_of_two;

/// Leaf position (1-based) of relation `(x, y)` under Z-order, with `x` the
/// relabelled origin and `y` the relabelled destination, both 1-based.
///
/// `z(1, 1) = 1`; otherwise with `p` the largest power of two strictly below
/// `max(x, y)`:
///
/// ```text
/// z(x, y) =   p² + z(x, y − p)       x ≤ p < y
///           2·p² + z(x − p, y)       y ≤ p < x
///           3·p² + z(x − p, y − p)   p < x, y
/// ```
pub fn morton_index(x: usize, y: usize, n: usize) -> Result<usize> {
    if !is_power_of_two(n) {
        return Err(Error::NotPowerOfTwo { what: "vertex count", value: n });
    }
    if x == 0 || y == 0 || x > n || y > n {
        return Err(Error::CoordinateOutOfRange { x, y, n });
    }
    let (mut x, mut y) = (x, y);
    let mut z = 1;
    while x.max(y) > 1 {
        let m = x.max(y);
        let p = if is_power_of_two(m) { m / 2 } else { 1 << (usize::BITS - 1 - m.leading_zeros()) };
        match (x > p, y > p) {
            (false, true) => {
                z += p * p;
                y -= p;
            }
            (true, false) => {
                z += 2 * p * p;
                x -= p;
            }
            (true, true) => {
                z += 3 * p * p;
                x -= p;
                y -= p;
            }
            (false, false) => unreachable!("p < max(x, y)"),
        }
    }
    Ok(z)
}

/// Same mapping computed by bit interleaving: the bits of `x − 1` occupy the
/// odd (more significant) positions and the bits of `y − 1` the even ones.
pub fn morton_index_interleaved(x: usize, y: usize, n: usize) -> Result<usize> {
    if !is_power_of_two(n) {
        return Err(Error::NotPowerOfTwo { what: "vertex count", value: n });
    }
    if x == 0 || y == 0 || x > n || y > n {
        return Err(Error::CoordinateOutOfRange { x, y, n });
    }
    let (x, y) = (x - 1, y - 1);
    let mut z = 0usize;
    for b in 0..n.trailing_zeros() {
        z |= ((y >> b) & 1) << (2 * b);
        z |= ((x >> b) & 1) << (2 * b + 1);
    }
    Ok(z + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::VertexSplit;
    use alloc::vec;
    use alloc::vec::Vec;

    #[test]
    fn base_cases() {
        assert_eq!(morton_index(1, 1, 1).unwrap(), 1);
        assert_eq!(morton_index(1, 2, 2).unwrap(), 2);
        assert_eq!(morton_index(2, 1, 2).unwrap(), 3);
        assert_eq!(morton_index(2, 2, 2).unwrap(), 4);
    }

    #[test]
    fn errors() {
        assert!(morton_index(0, 1, 4).is_err());
        assert!(morton_index(5, 1, 4).is_err());
        assert!(morton_index(1, 1, 3).is_err());
    }

    #[test]
    fn bijection_and_agrees_with_interleaving() {
        for n in [1usize, 2, 4, 8, 16] {
            let mut seen = vec![false; n * n + 1];
            for x in 1..=n {
                for y in 1..=n {
                    let z = morton_index(x, y, n).unwrap();
                    assert_eq!(z, morton_index_interleaved(x, y, n).unwrap());
                    assert!((1..=n * n).contains(&z));
                    assert!(!seen[z]);
                    seen[z] = true;
                }
            }
        }
    }

    /// Brute-force oracle: the explicit interleaved origin/destination tree
    /// under the identity relabelling puts `(u, v)` at `z(u+1, v+1) − 1`.
    #[test]
    fn agrees_with_explicit_quadtree() {
        for n in [2usize, 4, 8] {
            let tree = VertexSplit::identity(n).unwrap().relation_tree().unwrap();
            for u in 0..n {
                for v in 0..n {
                    let pos = tree.leaf_position(u * n + v);
                    assert_eq!(pos + 1, morton_index(u + 1, v + 1, n).unwrap(), "n={n} ({u},{v})");
                }
            }
        }
    }

    #[test]
    fn agrees_with_explicit_quadtree_under_relabeling() {
        let order: Vec<u32> = vec![5, 2, 7, 0, 1, 6, 3, 4];
        let split = VertexSplit::from_vertex_order(order).unwrap();
        let relabel = split.relabeling();
        let tree = split.relation_tree().unwrap();
        for u in 0..8usize {
            for v in 0..8usize {
                let z = morton_index(relabel[u] as usize + 1, relabel[v] as usize + 1, 8).unwrap();
                assert_eq!(tree.leaf_position(u * 8 + v) + 1, z);
            }
        }
    }
}
