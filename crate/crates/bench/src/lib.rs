//! Seeded workloads shared by the criterion benches.

use isorelabel::oracle::{half_swap, random_ranks};
use isorelabel::Instance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SEED: u64 = 0x5eed;

/// Chain with uniform ranks over `1..=labels`.
pub fn random_chain(n: usize, labels: usize) -> Instance {
    random_ranks(&mut ChaCha8Rng::seed_from_u64(SEED ^ n as u64), n, labels)
}

/// Chain whose first and last vertices violate everything, so every vertex
/// is a violator.
pub fn all_violating_chain(n: usize) -> Instance {
    assert!(n >= 2, "needs two endpoints");
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ n as u64);
    let mut f: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(0..1000))).collect();
    f[0] = 1000.0;
    f[n - 1] = -1.0;
    Instance::linear(&f).expect("finite values")
}

/// Chain whose violator closure has `n²/4` edges.
pub fn half_swap_chain(n: usize) -> Instance {
    half_swap(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn workloads_are_deterministic() {
        assert_eq!(random_chain(50, 10).values(), random_chain(50, 10).values());
        assert!(all_violating_chain(40).violator_mask().iter().all(|&b| b));
        assert_eq!(half_swap_chain(6).len(), 6);
    }
}
