//! Seeded node-to-supernode hashing and hyperedge vectorization.
//!
//! A node token is first reduced to a 64-bit FNV-1a digest. Each hash
//! function is then `mix64(seed ^ digest) % M`, where `mix64` is the
//! SplitMix64 finalizer. Both stages are defined on bytes only, so bucket
//! assignments are identical on every platform.

use crate::error::{Error, Result};
use crate::stream::Hyperedge;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a digest of a node token.
pub fn token_digest(token: &[u8]) -> u64 {
    token.iter().fold(FNV_OFFSET, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(FNV_PRIME)
    })
}

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
fn bucket_of_digest(digest: u64, seed: u64, num_supernodes: usize) -> usize {
    (mix64(seed ^ digest) % num_supernodes as u64) as usize
}

/// Maps a node token to a supernode in `[0, num_supernodes)`.
pub fn hash_node(node: &[u8], seed: u64, num_supernodes: usize) -> usize {
    assert!(num_supernodes >= 1, "num_supernodes must be positive");
    bucket_of_digest(token_digest(node), seed, num_supernodes)
}

/// Parameters of the K hash functions: the number of supernodes M and one
/// seed per function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashConfig {
    num_supernodes: usize,
    seeds: Vec<u64>,
}

impl HashConfig {
    pub fn new(num_supernodes: usize, seeds: Vec<u64>) -> Result<Self> {
        if num_supernodes == 0 {
            return Err(Error::InvalidConfig("M must be at least 1".into()));
        }
        if num_supernodes > u32::MAX as usize {
            return Err(Error::InvalidConfig("M must fit in 32 bits".into()));
        }
        if seeds.is_empty() {
            return Err(Error::InvalidConfig("K must be at least 1".into()));
        }
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig("hash seeds must be distinct".into()));
        }
        Ok(Self {
            num_supernodes,
            seeds,
        })
    }

    /// Derives `num_functions` distinct seeds from one base seed using the
    /// SplitMix64 sequence.
    pub fn from_base_seed(
        num_supernodes: usize,
        num_functions: usize,
        base_seed: u64,
    ) -> Result<Self> {
        let mut state = base_seed;
        let mut seeds = Vec::with_capacity(num_functions);
        while seeds.len() < num_functions {
            state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
            let candidate = mix64(state);
            if !seeds.contains(&candidate) {
                seeds.push(candidate);
            }
        }
        Self::new(num_supernodes, seeds)
    }

    pub fn num_supernodes(&self) -> usize {
        self.num_supernodes
    }

    pub fn num_functions(&self) -> usize {
        self.seeds.len()
    }

    pub fn seeds(&self) -> &[u64] {
        &self.seeds
    }
}

/// Sparse supernode count vector of one hyperedge.
///
/// Entries are `(supernode, multiplicity)` pairs sorted by supernode, every
/// multiplicity is at least one, and the multiplicities sum to `size`, the
/// node count of the original hyperedge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupernodeVector {
    entries: Vec<(u32, u32)>,
    size: u32,
}

impl SupernodeVector {
    /// Builds a vector from explicit `(supernode, multiplicity)` pairs.
    /// Repeated supernodes are merged; zero multiplicities are dropped.
    pub fn from_counts<I>(counts: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, u32)>,
    {
        let mut buckets: Vec<u32> = Vec::new();
        for (k, c) in counts {
            let k = u32::try_from(k)
                .map_err(|_| Error::InvalidConfig("supernode index out of range".into()))?;
            buckets.extend(std::iter::repeat_n(k, c as usize));
        }
        Self::from_buckets(buckets)
    }

    fn from_buckets(mut buckets: Vec<u32>) -> Result<Self> {
        if buckets.is_empty() {
            return Err(Error::EmptyHyperedge);
        }
        let size = buckets.len() as u32;
        buckets.sort_unstable();
        let mut entries: Vec<(u32, u32)> = Vec::with_capacity(buckets.len());
        for b in buckets {
            match entries.last_mut() {
                Some((k, c)) if *k == b => *c += 1,
                _ => entries.push((b, 1)),
            }
        }
        Ok(Self { entries, size })
    }

    /// Node count of the hyperedge, i.e. the sum of multiplicities.
    pub fn size(&self) -> u32 {
        self.size
    }

    /// Number of distinct supernodes.
    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|&(k, _)| k as usize)
    }

    /// `(supernode, multiplicity)` pairs in increasing supernode order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.entries.iter().map(|&(k, c)| (k as usize, c))
    }

    pub fn count(&self, supernode: usize) -> u32 {
        self.entries
            .binary_search_by_key(&(supernode as u32), |&(k, _)| k)
            .map(|i| self.entries[i].1)
            .unwrap_or(0)
    }

    /// Largest supernode index present.
    pub fn max_supernode(&self) -> usize {
        self.entries.last().map(|&(k, _)| k as usize).unwrap_or(0)
    }
}

/// Hashes every node of `e` and counts nodes per supernode.
pub fn vectorize(e: &Hyperedge, seed: u64, num_supernodes: usize) -> SupernodeVector {
    let digests: Vec<u64> = e
        .nodes()
        .iter()
        .map(|v| token_digest(v.as_bytes()))
        .collect();
    vectorize_digests(&digests, seed, num_supernodes)
}

/// Same as [`vectorize`] but starting from precomputed token digests, so a
/// hyperedge is digested once and reused across all K hash functions.
pub fn vectorize_digests(digests: &[u64], seed: u64, num_supernodes: usize) -> SupernodeVector {
    assert!(num_supernodes >= 1, "num_supernodes must be positive");
    let buckets = digests
        .iter()
        .map(|&d| bucket_of_digest(d, seed, num_supernodes) as u32)
        .collect();
    SupernodeVector::from_buckets(buckets).expect("a Hyperedge is never empty")
}

/// Vectorizes `e` once per hash function of `config`.
pub fn vectorize_all(e: &Hyperedge, config: &HashConfig) -> Vec<SupernodeVector> {
    let digests: Vec<u64> = e
        .nodes()
        .iter()
        .map(|v| token_digest(v.as_bytes()))
        .collect();
    config
        .seeds()
        .iter()
        .map(|&seed| vectorize_digests(&digests, seed, config.num_supernodes()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_bucket_is_always_zero() {
        assert_eq!(hash_node(b"a", 7, 1), 0);
        assert_eq!(hash_node(b"anything at all", 123, 1), 0);
    }

    #[test]
    fn hash_is_deterministic() {
        assert_eq!(hash_node(b"a", 7, 5), hash_node(b"a", 7, 5));
    }

    #[test]
    fn known_digests_are_stable() {
        // Published FNV-1a 64 test vectors.
        assert_eq!(token_digest(b""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(token_digest(b"a"), 0xaf63_dc4c_8601_ec8c);
        assert_eq!(token_digest(b"foobar"), 0x8594_4171_f739_67e8);
    }

    #[test]
    fn chi_square_uniformity_over_sixteen_buckets() {
        // chi2.ppf(0.999, df=15), computed with scipy.
        const CRITICAL: f64 = 37.697_298_218_353_83;
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let m = 16;
        let n = 10_000;
        let mut tokens = std::collections::HashSet::new();
        while tokens.len() < n {
            let len = rng.gen_range(4..=12);
            let token: String = (0..len)
                .map(|_| rng.gen_range(b'a'..=b'z') as char)
                .collect();
            tokens.insert(token);
        }
        let mut counts = vec![0usize; m];
        for token in &tokens {
            counts[hash_node(token.as_bytes(), 42, m)] += 1;
        }
        let expected = n as f64 / m as f64;
        let stat: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        assert!(stat < CRITICAL, "chi-square statistic {stat}");
    }

    #[test]
    fn sequential_integer_ids_spread_evenly() {
        const CRITICAL: f64 = 37.697_298_218_353_83;
        let m = 16;
        let n = 10_000;
        let mut counts = vec![0usize; m];
        for i in 0..n {
            counts[hash_node(i.to_string().as_bytes(), 9, m)] += 1;
        }
        let expected = n as f64 / m as f64;
        let stat: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        assert!(stat < CRITICAL, "chi-square statistic {stat}");
    }

    #[test]
    fn vectorize_counts_collisions() {
        let v = SupernodeVector::from_buckets(vec![0, 0, 2]).unwrap();
        assert_eq!(v.iter().collect::<Vec<_>>(), vec![(0, 2), (2, 1)]);
        assert_eq!(v.size(), 3);
        assert_eq!(v.count(0), 2);
        assert_eq!(v.count(1), 0);
        assert_eq!(v.support_len(), 2);
    }

    #[test]
    fn hundred_nodes_into_four_buckets() {
        let e = Hyperedge::new((0..100).map(|i| format!("n{i}"))).unwrap();
        let v = vectorize(&e, 3, 4);
        assert!(v.support_len() <= 4);
        assert_eq!(v.size(), 100);
    }

    #[test]
    fn seeds_change_the_mapping() {
        let nodes: Vec<String> = (0..1000).map(|i| i.to_string()).collect();
        let a: Vec<usize> = nodes
            .iter()
            .map(|v| hash_node(v.as_bytes(), 1, 8))
            .collect();
        let b: Vec<usize> = nodes
            .iter()
            .map(|v| hash_node(v.as_bytes(), 2, 8))
            .collect();
        assert_ne!(a, b);
    }

    #[test]
    fn config_validation() {
        assert!(HashConfig::new(0, vec![1]).is_err());
        assert!(HashConfig::new(4, vec![]).is_err());
        assert!(HashConfig::new(4, vec![3, 3]).is_err());
        let cfg = HashConfig::from_base_seed(20, 15, 42).unwrap();
        assert_eq!(cfg.num_functions(), 15);
        assert_eq!(cfg, HashConfig::from_base_seed(20, 15, 42).unwrap());
    }

    #[test]
    fn from_counts_rejects_empty() {
        assert!(SupernodeVector::from_counts(Vec::new()).is_err());
        assert!(SupernodeVector::from_counts([(3, 0)]).is_err());
    }

    proptest! {
        #[test]
        fn size_is_conserved_and_support_bounded(
            nodes in proptest::collection::vec("[a-z0-9]{1,6}", 1..40),
            seed in any::<u64>(),
            m in 1usize..64,
        ) {
            let e = Hyperedge::new(nodes).unwrap();
            let v = vectorize(&e, seed, m);
            let total: u32 = v.iter().map(|(_, c)| c).sum();
            prop_assert_eq!(total as usize, e.len());
            prop_assert_eq!(v.size() as usize, e.len());
            prop_assert!(v.support_len() <= m.min(e.len()));
            prop_assert!(v.iter().all(|(k, c)| k < m && c >= 1));
        }

        #[test]
        fn input_order_is_irrelevant(
            mut nodes in proptest::collection::vec("[a-z]{1,4}", 1..20),
            seed in any::<u64>(),
        ) {
            let a = vectorize(&Hyperedge::new(nodes.clone()).unwrap(), seed, 7);
            nodes.reverse();
            let b = vectorize(&Hyperedge::new(nodes).unwrap(), seed, 7);
            prop_assert_eq!(a, b);
        }
    }
}
