#![allow(dead_code)]

use indiga_core::tower::partial_product;
use indiga_core::{
    rat, Centers, Derivation, DerivationConfig, Poly, TowerElement, TowerRing, Universe, VarId,
};

pub fn var(u: &std::sync::Arc<Universe>, name: &str) -> Poly {
    Poly::var(u, &VarId::named(name)).unwrap()
}

/// `u ↦ u²` on the `u`-adic completion of `k[u]`.
pub fn ufc() -> (TowerRing, Derivation) {
    let u = VarId::named("u");
    let uni = Universe::new(vec![u.clone()]).unwrap();
    let up = Poly::var(&uni, &u).unwrap();
    let t = TowerRing::adic(&[u.clone()], &[], &[up.clone()]).unwrap();
    let d = Derivation::from_polys(&t, vec![(u, up.pow(2))], None, DerivationConfig::default()).unwrap();
    (t, d)
}

/// Cutoff tower in `X[i]` with a derivation given by an index rule.
pub fn cutoff_derivation(rule: impl Fn(u32) -> Option<(u32, i64)> + Send + Sync + 'static) -> (TowerRing, Derivation) {
    let t = TowerRing::cutoff("X", Centers::constant(rat(0)), 0);
    let t2 = t.clone();
    let d = Derivation::new(
        &t,
        move |v| {
            let i = v.index().unwrap();
            Ok(match rule(i) {
                Some((j, c)) => TowerElement::generator(&t2, &VarId::indexed("X", j)).scale(&rat(c)),
                None => TowerElement::zero(&t2),
            })
        },
        None,
        DerivationConfig::default(),
    )
    .unwrap();
    (t, d)
}

/// `∂₊(X_i) = (i+1) X_{i+1}`.
pub fn dplus() -> (TowerRing, Derivation) {
    cutoff_derivation(|i| Some((i + 1, i as i64 + 1)))
}

/// `∂(X_0) = X_1`, `∂(X_{2i-1}) = X_{2i+1}`, `∂(X_{2i}) = X_{2i-2}`.
pub fn mixed() -> (TowerRing, Derivation) {
    cutoff_derivation(|i| {
        Some(if i == 0 {
            (1, 1)
        } else if i % 2 == 1 {
            (i + 2, 1)
        } else {
            (i - 2, 1)
        })
    })
}

/// `d/dx` on `k[x]` with the discrete topology.
pub fn d_dx() -> (TowerRing, Derivation) {
    let x = VarId::named("x");
    let uni = Universe::new(vec![x.clone()]).unwrap();
    let t = TowerRing::discrete(&[x.clone()], &[]).unwrap();
    let d = Derivation::from_polys(&t, vec![(x, Poly::one(&uni))], None, DerivationConfig::default()).unwrap();
    (t, d)
}

/// `∂(x) = 0`, `∂(y) = x` on discrete `k[x, y]`.
pub fn triangular() -> (TowerRing, Derivation) {
    let (x, y) = (VarId::named("x"), VarId::named("y"));
    let u = Universe::new(vec![x.clone(), y.clone()]).unwrap();
    let t = TowerRing::discrete(&[x.clone(), y.clone()], &[]).unwrap();
    let d = Derivation::from_polys(
        &t,
        vec![(x.clone(), Poly::zero(&u)), (y, Poly::var(&u, &x).unwrap())],
        None,
        DerivationConfig::default(),
    )
    .unwrap();
    (t, d)
}

pub struct Danielewski {
    pub base: TowerRing,
    pub derivation: Derivation,
    pub x: TowerElement,
    pub y: TowerElement,
    pub z: TowerElement,
    /// `xz - y²`
    pub relation: TowerElement,
}

/// `k{X} ⊗ k[y, z]` over the center-1 cutoff tower with `x = ∏ X_i`,
/// `∂(y) = x`, `∂(z) = 2y`, `∂(X_i) = 0`.
pub fn danielewski() -> Danielewski {
    let cut = TowerRing::cutoff("X", Centers::constant(rat(1)), 1);
    let (yv, zv) = (VarId::named("y"), VarId::named("z"));
    let disc = TowerRing::discrete(&[yv.clone(), zv.clone()], &[]).unwrap();
    let base = TowerRing::tensor(&cut, &disc).unwrap();
    let x = partial_product(&cut, "X").transport(&base);
    let y = TowerElement::generator(&base, &yv);
    let z = TowerElement::generator(&base, &zv);
    let (b2, x2, y2) = (base.clone(), x.clone(), y.clone());
    let derivation = Derivation::new(
        &base,
        move |v| {
            Ok(if v.name() == "y" {
                x2.clone()
            } else if v.name() == "z" {
                y2.scale(&rat(2))
            } else {
                TowerElement::zero(&b2)
            })
        },
        None,
        DerivationConfig::default(),
    )
    .unwrap();
    let relation = x.mul(&z).unwrap().sub(&y.pow(2)).unwrap();
    Danielewski {
        base,
        derivation,
        x,
        y,
        z,
        relation,
    }
}
