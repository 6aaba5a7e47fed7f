use super::{for_each_combination, fvector_of_complex, FVector};
use crate::error::{Error, Result};

/// Facets of the cyclic polytope `c(n, d)` as vertex-index sets, selected by
/// Gale's evenness condition: a `d`-subset is a facet iff every two indices
/// outside it are separated by an even number of its members.
pub fn cyclic_facets(n: usize, d: usize) -> Result<Vec<Vec<usize>>> {
    if !(2..=8).contains(&d) || n < d + 1 || n > 64 {
        return Err(Error::InvalidArgument(format!(
            "cyclic polytope needs 2 <= d <= 8 and d + 1 <= n <= 64, got n = {n}, d = {d}"
        )));
    }
    let mut facets = Vec::new();
    for_each_combination(n, d, |s| {
        let mask: u64 = s.iter().fold(0, |m, &i| m | (1 << i));
        let outside: Vec<usize> = (0..n).filter(|i| mask & (1 << i) == 0).collect();
        let even = outside.windows(2).all(|w| {
            let between = mask & ((1u64 << w[1]) - 1) & !((1u64 << (w[0] + 1)) - 1);
            between.count_ones() % 2 == 0
        });
        if even {
            facets.push(s.to_vec());
        }
    });
    Ok(facets)
}

pub fn cyclic_fvector(n: usize, d: usize) -> Result<FVector> {
    Ok(fvector_of_complex(&cyclic_facets(n, d)?, d))
}

/// `n` points `(t, t^2, ..., t^d)` at centered integer parameters.
pub fn moment_curve(n: usize, d: usize) -> Vec<Vec<f64>> {
    let mid = (n as f64 - 1.0) / 2.0;
    (0..n)
        .map(|i| {
            let t = i as f64 - mid;
            (1..=d as i32).map(|e| t.powi(e)).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cyclic_polytopes() {
        assert_eq!(cyclic_fvector(4, 3).unwrap().counts, vec![4, 6, 4]);
        assert_eq!(cyclic_fvector(6, 3).unwrap().counts, vec![6, 12, 8]);
        assert_eq!(cyclic_fvector(7, 4).unwrap().counts[3], 14);
    }

    #[test]
    fn four_dimensional_cyclic_is_neighborly() {
        // every pair of vertices spans an edge when d >= 4
        assert_eq!(cyclic_fvector(8, 4).unwrap().counts[1], 28);
    }

    #[test]
    fn out_of_range_arguments() {
        assert!(cyclic_fvector(3, 3).is_err());
        assert!(cyclic_fvector(10, 9).is_err());
    }
}
