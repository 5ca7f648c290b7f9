//! Exact rational evaluation of acyclic, fully active frameworks under the
//! semantics whose influence functions are rational (Quadratic Energy and
//! DF-QuAD). Used to settle cases where a change is below f64 resolution.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use gradarg_core::{ArgumentId, Framework, Polarity, SemanticsKind};

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

fn qe(tau: &BigRational, energy: &BigRational) -> BigRational {
    let e2 = energy * energy;
    let h = &e2 / (BigRational::one() + &e2);
    if energy <= &BigRational::zero() {
        tau - tau * h
    } else {
        tau + (BigRational::one() - tau) * h
    }
}

fn dfquad(tau: &BigRational, attackers: &[BigRational], supporters: &[BigRational]) -> BigRational {
    let mass = |xs: &[BigRational]| {
        BigRational::one()
            - xs.iter()
                .fold(BigRational::one(), |acc, s| acc * (BigRational::one() - s))
    };
    let (va, vs) = (mass(attackers), mass(supporters));
    if va >= vs {
        tau - tau * (va - vs)
    } else {
        tau + (BigRational::one() - tau) * (vs - va)
    }
}

/// Exact strengths, or `None` for Euler-based semantics, inactive arguments or cycles.
pub fn strengths(fw: &Framework, kind: SemanticsKind) -> Option<BTreeMap<ArgumentId, BigRational>> {
    if kind == SemanticsKind::EulerBased || fw.arguments().any(|a| !a.active) {
        return None;
    }
    let mut done: BTreeMap<ArgumentId, BigRational> = BTreeMap::new();
    while done.len() < fw.len() {
        let before = done.len();
        for a in fw.arguments() {
            if done.contains_key(&a.id) || fw.incoming(&a.id).any(|(s, _)| !done.contains_key(s)) {
                continue;
            }
            let tau = exact(a.base_score);
            let (mut att, mut sup) = (Vec::new(), Vec::new());
            for (s, p) in fw.incoming(&a.id) {
                match p {
                    Polarity::Attack => att.push(done[s].clone()),
                    Polarity::Support => sup.push(done[s].clone()),
                }
            }
            let value = match kind {
                SemanticsKind::QuadraticEnergy => {
                    let energy = sup.iter().sum::<BigRational>() - att.iter().sum::<BigRational>();
                    qe(&tau, &energy)
                }
                _ => dfquad(&tau, &att, &sup),
            };
            done.insert(a.id.clone(), value);
        }
        if done.len() == before {
            return None;
        }
    }
    Some(done)
}

/// Exact σ(o1) − σ(o2) after minus before; `None` when exact evaluation does not apply.
pub fn gap_change(
    before: &Framework,
    after: &Framework,
    o1: &ArgumentId,
    o2: &ArgumentId,
    kind: SemanticsKind,
) -> Option<BigRational> {
    let b = strengths(before, kind)?;
    let a = strengths(after, kind)?;
    Some((&a[o1] - &a[o2]) - (&b[o1] - &b[o2]))
}

pub fn is_positive(x: &BigRational) -> bool {
    x.numer() * x.denom() > BigInt::zero()
}
