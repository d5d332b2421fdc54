//! Structured terminal sets from affine-plane lines under 3-wise-independent
//! quadratic hashing: O(k²log n) sets of size O(n/k) such that any pair with
//! a small cut lands, with constant probability per hash, in a set avoiding
//! that cut. Pair-to-set lookup is O(1) per hash via modular inverses.

use std::collections::BTreeSet;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Vertex;

/// Quadratic hash h(x) = (a·x² + b·x + c) mod p0, with (a,b) ≠ (0,0) so the
/// map is at most 2-to-1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HashFunction {
    pub a: u64,
    pub b: u64,
    pub c: u64,
}

impl HashFunction {
    pub fn eval(&self, x: u64, p0: u64) -> u64 {
        let x = x as u128 % p0 as u128;
        ((self.a as u128 * x % p0 as u128 * x + self.b as u128 * x + self.c as u128)
            % p0 as u128) as u64
    }
}

/// Identifies one terminal set U_{s,j} of one hash.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SetId {
    pub hash: usize,
    pub s: u64,
    pub j: u64,
}

/// The full family: a p×r grid of hash values (rows t = ⌊y/p⌋, columns
/// y mod p), p² lines per hash, membership lists materialized per line.
#[derive(Clone, Debug)]
pub struct AffinePlaneFamily {
    pub n: usize,
    pub k: usize,
    pub p0: u64,
    pub p: u64,
    pub r: u64,
    pub hashes: Vec<HashFunction>,
    inv: Vec<u64>,
    members: Vec<Vec<Vec<Vertex>>>,
}

/// Smallest prime strictly greater than `x`.
pub fn next_prime(x: u64) -> u64 {
    let mut c = x + 1;
    loop {
        if is_prime(c) {
            return c;
        }
        c += 1;
    }
}

fn is_prime(x: u64) -> bool {
    if x < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= x {
        if x % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn mod_pow(b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc: u128 = 1;
    let mut bb = b as u128 % m as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * bb % m as u128;
        }
        bb = bb * bb % m as u128;
        e >>= 1;
    }
    acc as u64
}

pub fn default_h_count(n: usize) -> usize {
    let log = (usize::BITS - n.max(2).saturating_sub(1).leading_zeros()) as usize;
    8 * log.max(1)
}

/// Draws `h_count` independent hashes and materializes every line's
/// membership list.
pub fn build_family<R: Rng>(
    n: usize,
    k: usize,
    h_count: usize,
    rng: &mut R,
) -> Result<AffinePlaneFamily> {
    if k < 1 || k > n {
        return Err(Error::InvalidArgument("build_family: need 1 ≤ k ≤ n".into()));
    }
    let p0 = next_prime(n as u64);
    let p = next_prime(2 * k as u64);
    let r = p0.div_ceil(p);
    let mut hashes = Vec::with_capacity(h_count);
    while hashes.len() < h_count {
        let h = HashFunction {
            a: rng.gen_range(0..p0),
            b: rng.gen_range(0..p0),
            c: rng.gen_range(0..p0),
        };
        if h.a == 0 && h.b == 0 {
            continue;
        }
        hashes.push(h);
    }
    let mut inv = vec![0u64; p as usize];
    for x in 1..p {
        inv[x as usize] = mod_pow(x, p - 2, p);
    }
    // each vertex lies on exactly one line per slope: j = (col − s·row) mod p
    let mut members = vec![vec![Vec::new(); (p * p) as usize]; h_count];
    for (hi, h) in hashes.iter().enumerate() {
        for x in 0..n {
            let y = h.eval(x as u64, p0);
            let (t, c) = (y / p, y % p);
            for s in 0..p {
                let j = (c + p * p - s * (t % p) % p) % p;
                members[hi][(s * p + j) as usize].push(x);
            }
        }
    }
    let fam = AffinePlaneFamily { n, k, p0, p, r, hashes, inv, members };
    debug_assert!(fam.max_set_size() <= 2 * fam.r as usize);
    Ok(fam)
}

impl AffinePlaneFamily {
    pub fn h_count(&self) -> usize {
        self.hashes.len()
    }

    pub fn set_count(&self) -> usize {
        self.h_count() * (self.p * self.p) as usize
    }

    pub fn max_set_size(&self) -> usize {
        self.members
            .iter()
            .flat_map(|per_hash| per_hash.iter().map(Vec::len))
            .max()
            .unwrap_or(0)
    }

    fn grid_point(&self, hash: usize, x: Vertex) -> (u64, u64) {
        let y = self.hashes[hash].eval(x as u64, self.p0);
        (y / self.p, y % self.p)
    }

    /// For each hash whose grid rows for u and v differ mod p, the unique
    /// line through both points. At most h_count entries.
    pub fn sets_for_pair(&self, u: Vertex, v: Vertex) -> Result<Vec<SetId>> {
        if u == v || u >= self.n || v >= self.n {
            return Err(Error::InvalidArgument("sets_for_pair: need distinct in-range vertices".into()));
        }
        let p = self.p;
        let mut out = Vec::new();
        for hash in 0..self.h_count() {
            let (t1, c1) = self.grid_point(hash, u);
            let (t2, c2) = self.grid_point(hash, v);
            if t1 % p == t2 % p {
                continue;
            }
            let dt = (t2 % p + p - t1 % p) % p;
            let dc = (c2 + p - c1) % p;
            let s = dc * self.inv[dt as usize] % p;
            let j = (c1 + p * p - s * (t1 % p) % p) % p;
            out.push(SetId { hash, s, j });
        }
        Ok(out)
    }

    pub fn set_members(&self, id: SetId) -> Result<&[Vertex]> {
        if id.hash >= self.h_count() || id.s >= self.p || id.j >= self.p {
            return Err(Error::InvalidArgument("set_members: id out of range".into()));
        }
        Ok(&self.members[id.hash][(id.s * self.p + id.j) as usize])
    }

    /// True when the set identified by `id` avoids every vertex of `cut`.
    pub fn set_avoids(&self, id: SetId, cut: &BTreeSet<Vertex>) -> bool {
        self.set_members(id).map_or(false, |m| m.iter().all(|v| !cut.contains(v)))
    }

    /// All SetIds, for enumeration by the oracle builder.
    pub fn all_ids(&self) -> impl Iterator<Item = SetId> + '_ {
        (0..self.h_count()).flat_map(move |hash| {
            (0..self.p).flat_map(move |s| (0..self.p).map(move |j| SetId { hash, s, j }))
        })
    }

    /// Rebuilds a family from its serialized parameters.
    pub fn from_parts(n: usize, k: usize, hashes: Vec<HashFunction>) -> Result<Self> {
        if k < 1 || k > n {
            return Err(Error::Format("family parameters out of range".into()));
        }
        let p0 = next_prime(n as u64);
        let p = next_prime(2 * k as u64);
        let r = p0.div_ceil(p);
        for h in &hashes {
            if (h.a == 0 && h.b == 0) || h.a >= p0 || h.b >= p0 || h.c >= p0 {
                return Err(Error::Format("invalid hash coefficients".into()));
            }
        }
        let mut inv = vec![0u64; p as usize];
        for x in 1..p {
            inv[x as usize] = mod_pow(x, p - 2, p);
        }
        let mut members = vec![vec![Vec::new(); (p * p) as usize]; hashes.len()];
        for (hi, h) in hashes.iter().enumerate() {
            for x in 0..n {
                let y = h.eval(x as u64, p0);
                let (t, c) = (y / p, y % p);
                for s in 0..p {
                    let j = (c + p * p - s * (t % p) % p) % p;
                    members[hi][(s * p + j) as usize].push(x);
                }
            }
        }
        Ok(AffinePlaneFamily { n, k, p0, p, r, hashes, inv, members })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn next_prime_examples() {
        assert_eq!(next_prime(10), 11);
        assert_eq!(next_prime(11), 13);
        assert_eq!(next_prime(2), 3);
        assert_eq!(next_prime(4), 5);
    }

    #[test]
    fn family_arithmetic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let fam = build_family(10, 2, 6, &mut rng).unwrap();
        assert_eq!((fam.p0, fam.p, fam.r), (11, 5, 3));
        assert_eq!(fam.set_count(), 6 * 25);
        assert!(fam.max_set_size() <= 6);

        let fam = build_family(4, 1, 4, &mut rng).unwrap();
        assert_eq!((fam.p0, fam.p, fam.r), (5, 3, 2));
        assert!(fam.max_set_size() <= 4);
    }

    #[test]
    fn hand_line_example() {
        // a=0,b=1,c=0 with p0=11, p=5: u=0→(0,0), v=7→(1,2) → s=2, j=0
        let fam = AffinePlaneFamily::from_parts(
            10,
            2,
            vec![HashFunction { a: 0, b: 1, c: 0 }],
        )
        .unwrap();
        let ids = fam.sets_for_pair(0, 7).unwrap();
        assert_eq!(ids, vec![SetId { hash: 0, s: 2, j: 0 }]);
        let m = fam.set_members(ids[0]).unwrap();
        assert!(m.contains(&0) && m.contains(&7));
    }

    #[test]
    fn membership_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let fam = build_family(50, 3, 8, &mut rng).unwrap();
        for id in fam.all_ids() {
            for &x in fam.set_members(id).unwrap() {
                // h(x) must lie on ℓ_{s,j}: col ≡ j + s·row (mod p)
                let (t, c) = fam.grid_point(id.hash, x);
                assert_eq!(c, (id.j + id.s * (t % fam.p)) % fam.p);
            }
        }
        // and conversely, every vertex on the line is in the list
        for hash in 0..fam.h_count() {
            for x in 0..fam.n {
                let (t, c) = fam.grid_point(hash, x);
                for s in 0..fam.p {
                    let j = (c + fam.p * fam.p - s * (t % fam.p) % fam.p) % fam.p;
                    assert!(fam.set_members(SetId { hash, s, j }).unwrap().contains(&x));
                }
            }
        }
    }

    #[test]
    fn pair_coverage_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let fam = build_family(80, 4, 10, &mut rng).unwrap();
        for _ in 0..300 {
            let u = rng.gen_range(0..80);
            let mut v = rng.gen_range(0..80);
            if v == u {
                v = (v + 1) % 80;
            }
            let ids = fam.sets_for_pair(u, v).unwrap();
            assert!(ids.len() <= fam.h_count());
            for id in ids {
                let m = fam.set_members(id).unwrap();
                assert!(m.contains(&u) && m.contains(&v), "pair ({u},{v}) id {id:?}");
            }
        }
    }

    #[test]
    fn load_bound_always() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for &(n, k) in &[(30, 2), (100, 5), (200, 4), (64, 8)] {
            let fam = build_family(n, k, 8, &mut rng).unwrap();
            assert!(
                fam.max_set_size() <= 2 * fam.r as usize,
                "n={n} k={k}: {} > {}",
                fam.max_set_size(),
                2 * fam.r
            );
        }
    }

    #[test]
    fn three_wise_independence_exact() {
        // over the full coefficient cube [p0]³, (h(x1),h(x2),h(x3)) hits
        // every value triple exactly once for distinct x1,x2,x3
        let p0 = 7u64;
        for (x1, x2, x3) in [(0u64, 1, 2), (1, 3, 6), (0, 4, 5)] {
            let mut counts = vec![0u32; (p0 * p0 * p0) as usize];
            for a in 0..p0 {
                for b in 0..p0 {
                    for c in 0..p0 {
                        let h = HashFunction { a, b, c };
                        let k = (h.eval(x1, p0) * p0 + h.eval(x2, p0)) * p0 + h.eval(x3, p0);
                        counts[k as usize] += 1;
                    }
                }
            }
            assert!(counts.iter().all(|&c| c == 1));
        }
    }

    #[test]
    fn capture_rate_planted_cuts() {
        // plant cuts of size ≤ k and measure the per-hash capture rate:
        // rows differ and the line's set avoids the cut
        let (n, k) = (200usize, 4usize);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let fam = build_family(n, k, 8, &mut rng).unwrap();
        let mut captured = 0usize;
        let mut total = 0usize;
        for _ in 0..1000 {
            let mut verts: Vec<Vertex> = (0..n).collect();
            verts.shuffle(&mut rng);
            let (u, v) = (verts[0], verts[1]);
            let cut: BTreeSet<Vertex> = verts[2..2 + k].iter().copied().collect();
            total += fam.h_count();
            for id in fam.sets_for_pair(u, v).unwrap() {
                if fam.set_avoids(id, &cut) {
                    captured += 1;
                }
            }
        }
        let rate = captured as f64 / total as f64;
        assert!(rate >= 0.25, "capture rate {rate}");
    }

    #[test]
    fn argument_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        assert!(build_family(5, 9, 4, &mut rng).is_err());
        let fam = build_family(10, 2, 4, &mut rng).unwrap();
        assert!(fam.sets_for_pair(3, 3).is_err());
        assert!(fam.sets_for_pair(0, 10).is_err());
        assert!(fam.set_members(SetId { hash: 99, s: 0, j: 0 }).is_err());
    }
}
