//! Counter-based randomness: every random quantity is a pure function of a
//! seed, a domain tag and integer coordinates, so sub-rectangles and
//! sub-windows can be regenerated in any order.

/// Domain tags keep the streams used by different constructions disjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Weight = 0x57_45_49_47_48_54,
    Clock = 0x43_4c_4f_43_4b,
    AuxClock = 0x41_55_58_43_4c,
    CornerWeight = 0x43_4f_52_4e_45_52,
    Occupation = 0x4f_43_43_55_50,
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
const K1: u64 = 0xd6e8_feb8_6659_fd93;
const K2: u64 = 0xa076_1d64_78bd_642f;

/// The splitmix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
pub fn hash3(seed: u64, domain: Domain, a: i64, b: i64, c: u64) -> u64 {
    let mut h = mix64(seed ^ (domain as u64).wrapping_mul(GOLDEN));
    h = mix64(h ^ (a as u64).wrapping_mul(K1));
    h = mix64(h ^ (b as u64).wrapping_mul(K2));
    mix64(h ^ c.wrapping_mul(GOLDEN))
}

/// A uniform in `(0, 1)` with 53 random bits. The value `0` is rejected by
/// rehashing with a bumped counter, so `-ln(1 - u)` is strictly positive.
#[inline]
pub fn uniform_open(seed: u64, domain: Domain, a: i64, b: i64) -> f64 {
    let mut attempt = 0u64;
    loop {
        let h = hash3(seed, domain, a, b, attempt);
        let u = (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        if u > 0.0 {
            return u;
        }
        attempt += 1;
    }
}

/// Exp(1) by inverse CDF: `-ln(1 - u)`.
#[inline]
pub fn exp1(seed: u64, domain: Domain, a: i64, b: i64) -> f64 {
    exp1_from_uniform(uniform_open(seed, domain, a, b))
}

#[inline]
pub fn exp1_from_uniform(u: f64) -> f64 {
    -(-u).ln_1p()
}
