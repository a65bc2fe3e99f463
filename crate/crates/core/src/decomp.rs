//! Maximal open intervals of `(0,1) ∖ F` for finite `F`, the interval map
//! induced by an order isomorphism `F → G`, and assembly of a global map
//! from per-interval pieces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{Interval, Rational};

/// Nonempty, strictly increasing points of `(0,1)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Rational>", into = "Vec<Rational>")]
pub struct FiniteNwdSet {
    points: Vec<Rational>,
}

impl FiniteNwdSet {
    pub fn new(points: Vec<Rational>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Validation("F must be nonempty".into()));
        }
        if points.iter().any(|x| *x <= Rational::zero() || *x >= Rational::one()) {
            return Err(Error::Validation("F must lie inside (0,1)".into()));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation("F must be strictly increasing".into()));
        }
        Ok(FiniteNwdSet { points })
    }

    pub fn points(&self) -> &[Rational] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl TryFrom<Vec<Rational>> for FiniteNwdSet {
    type Error = Error;
    fn try_from(v: Vec<Rational>) -> Result<Self> {
        FiniteNwdSet::new(v)
    }
}

impl From<FiniteNwdSet> for Vec<Rational> {
    fn from(f: FiniteNwdSet) -> Self {
        f.points
    }
}

pub type Decomposition = Vec<Interval>;

/// `(0, f_1), (f_1, f_2), …, (f_r, 1)`.
pub fn max_intervals(f: &FiniteNwdSet) -> Decomposition {
    let mut cuts = Vec::with_capacity(f.len() + 2);
    cuts.push(Rational::zero());
    cuts.extend(f.points.iter().cloned());
    cuts.push(Rational::one());
    cuts.windows(2)
        .map(|w| Interval::open(w[0].clone(), w[1].clone()).expect("points increase"))
        .collect()
}

pub fn check_order_iso(m: &[(Rational, Rational)]) -> bool {
    m.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1)
}

fn check_phi(phi: &[(Rational, Rational)], f: &FiniteNwdSet, g: &FiniteNwdSet) -> Result<()> {
    if f.len() != g.len() {
        return Err(Error::Precondition(format!("|F| = {} but |G| = {}", f.len(), g.len())));
    }
    let matches = phi.len() == f.len()
        && phi.iter().zip(f.points()).all(|((x, _), y)| x == y)
        && phi.iter().zip(g.points()).all(|((_, x), y)| x == y);
    if !matches || !check_order_iso(phi) {
        return Err(Error::Precondition("φ is not an order isomorphism F → G".into()));
    }
    Ok(())
}

/// The `k`-th interval of `M(F)` goes to the `k`-th of `M(G)`.
pub fn induced_iso(phi: &[(Rational, Rational)], f: &FiniteNwdSet, g: &FiniteNwdSet) -> Result<Vec<(Interval, Interval)>> {
    check_phi(phi, f, g)?;
    Ok(max_intervals(f).into_iter().zip(max_intervals(g)).collect())
}

/// `Φ = ⋃ ψ_I ∪ φ`, sorted. `psi[k]` maps points of the `k`-th interval of
/// `M(F)` into the `k`-th interval of `M(G)`.
pub fn assemble(
    phi: &[(Rational, Rational)],
    psi: &[Vec<(Rational, Rational)>],
    f: &FiniteNwdSet,
    g: &FiniteNwdSet,
) -> Result<Vec<(Rational, Rational)>> {
    let hat = induced_iso(phi, f, g)?;
    if psi.len() != hat.len() {
        return Err(Error::Precondition(format!("{} ψ pieces for {} intervals", psi.len(), hat.len())));
    }
    let mut out: Vec<(Rational, Rational)> = phi.to_vec();
    for (k, (piece, (i, j))) in psi.iter().zip(&hat).enumerate() {
        if !check_order_iso(piece) {
            return Err(Error::Precondition(format!("ψ on interval {k} is not increasing")));
        }
        for (x, y) in piece {
            if !i.contains(x) {
                return Err(Error::Precondition(format!("ψ on interval {k}: {x} lies outside {i}")));
            }
            if !j.contains(y) {
                return Err(Error::Precondition(format!("ψ on interval {k}: {y} lies outside {j}")));
            }
        }
        out.extend(piece.iter().cloned());
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{interval, rat};

    fn nwd(xs: &[&str]) -> FiniteNwdSet {
        FiniteNwdSet::new(xs.iter().map(|s| rat(s)).collect()).unwrap()
    }

    fn zipped(f: &FiniteNwdSet, g: &FiniteNwdSet) -> Vec<(Rational, Rational)> {
        f.points().iter().cloned().zip(g.points().iter().cloned()).collect()
    }

    #[test]
    fn max_interval_examples() {
        let shown = |f: &FiniteNwdSet| max_intervals(f).iter().map(|i| i.to_string()).collect::<Vec<_>>();
        assert_eq!(shown(&nwd(&["1/3", "1/2"])), ["(0/1,1/3)", "(1/3,1/2)", "(1/2,1/1)"]);
        assert_eq!(max_intervals(&nwd(&["1/2"])).len(), 2);
        assert_eq!(max_intervals(&nwd(&["1/4", "1/2", "3/4"])).len(), 4);
        assert!(FiniteNwdSet::new(vec![]).is_err());
        assert!(FiniteNwdSet::new(vec![rat("1/2"), rat("1/3")]).is_err());
    }

    #[test]
    fn induced_examples() {
        let (f, g) = (nwd(&["1/3", "1/2"]), nwd(&["1/4", "3/4"]));
        let hat = induced_iso(&zipped(&f, &g), &f, &g).unwrap();
        assert_eq!(hat[1], (interval("(1/3,1/2)"), interval("(1/4,3/4)")));
        assert_eq!(hat[2], (interval("(1/2,1)"), interval("(3/4,1)")));
        let same = induced_iso(&zipped(&f, &f), &f, &f).unwrap();
        assert!(same.iter().all(|(i, j)| i == j));
        assert!(induced_iso(&zipped(&f, &g), &f, &nwd(&["1/2"])).is_err());
    }

    #[test]
    fn assemble_examples() {
        let (f, g) = (nwd(&["1/3", "1/2"]), nwd(&["1/4", "3/4"]));
        let phi = zipped(&f, &g);
        let none = vec![vec![]; 3];
        assert_eq!(assemble(&phi, &none, &f, &g).unwrap(), phi);

        let mid = vec![(rat("2/5"), rat("1/3")), (rat("5/12"), rat("1/2")), (rat("9/20"), rat("2/3"))];
        let m = assemble(&phi, &[vec![], mid, vec![]], &f, &g).unwrap();
        assert_eq!(m.len(), 5);
        assert!(check_order_iso(&m));

        let stray = vec![(rat("2/5"), rat("4/5"))];
        assert!(assemble(&phi, &[vec![], stray, vec![]], &f, &g).is_err());
    }

    #[test]
    fn order_iso_examples() {
        assert!(check_order_iso(&[]));
        assert!(!check_order_iso(&[(rat("1/3"), rat("3/4")), (rat("1/2"), rat("1/4"))]));
    }
}
