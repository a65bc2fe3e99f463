//! Fixtures shared by the benchmarks.

use towerforce::medini::{medini_add_point, Coloring, MediniCondition};
use towerforce::setalg::parse_bits;
use towerforce::{AId, Tower, UPSet, Universe};

pub fn set(s: &str) -> UPSet {
    s.parse().expect("valid set literal")
}

/// A set with a long prefix and period, so word-wise ops have work to do.
pub fn long_set(seed: u64, p: usize, q: usize) -> UPSet {
    let mut x = seed | 1;
    let mut next = move || {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        x & 1 == 1
    };
    let prefix = (0..p).map(|_| next()).collect();
    let period = (0..q).map(|_| next()).collect();
    UPSet::new(prefix, period).expect("nonempty period")
}

/// Four minted levels over `|110` and three b-points.
pub fn small_universe(capacity: usize) -> Universe {
    let prefixes: Vec<_> = ["0001", "00001", "000001", "0000001"].iter().map(|s| parse_bits(s).unwrap()).collect();
    let tower = Tower::generate(set("|110"), &prefixes, capacity).expect("tower");
    let mut uni = Universe::new(tower);
    for w in ["1", "01", "001"] {
        uni.mint_b(&parse_bits(w).unwrap()).expect("b-point");
    }
    uni
}

/// A Medini condition with one point in its domain.
pub fn medini_start(uni: &mut Universe) -> MediniCondition {
    let mut coloring = Coloring::round_robin(2, &uni.registry).expect("coloring");
    medini_add_point(&MediniCondition::minimal(), AId(1), &mut coloring, uni).expect("add point")
}
