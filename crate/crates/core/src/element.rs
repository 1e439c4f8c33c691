//! Elements of a tower as lazily promoted, memoized level representatives.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::{Poly, Rational, Universe, VarId};
use crate::tower::TowerRing;

type Promoter = dyn Fn(usize) -> Result<Poly> + Send + Sync;

struct Inner {
    tower: TowerRing,
    promoter: Box<Promoter>,
    cache: Mutex<BTreeMap<usize, Poly>>,
}

/// An element of `lim A_n`, given by a procedure producing a representative at
/// each level. Representatives are normal-formed, memoized, and audited for
/// compatibility with the nearest cached levels on every new promotion.
#[derive(Clone)]
pub struct TowerElement {
    inner: Arc<Inner>,
}

impl fmt::Debug for TowerElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cache = self.inner.cache.lock().expect("element cache poisoned");
        f.debug_map()
            .entries(cache.iter().map(|(n, p)| (n, p.to_string())))
            .finish()
    }
}

impl TowerElement {
    /// `promoter(n)` may return any polynomial in tower generators; it is
    /// mapped to `A_n` and reduced.
    pub fn from_fn(
        tower: &TowerRing,
        promoter: impl Fn(usize) -> Result<Poly> + Send + Sync + 'static,
    ) -> Self {
        TowerElement {
            inner: Arc::new(Inner {
                tower: tower.clone(),
                promoter: Box::new(promoter),
                cache: Mutex::new(BTreeMap::new()),
            }),
        }
    }

    /// The image of a polynomial in tower generators.
    pub fn from_poly(tower: &TowerRing, p: Poly) -> Self {
        Self::from_fn(tower, move |_| Ok(p.clone()))
    }

    pub fn constant(tower: &TowerRing, c: Rational) -> Self {
        Self::from_poly(tower, Poly::constant(&Universe::empty(), c))
    }

    pub fn zero(tower: &TowerRing) -> Self {
        Self::constant(tower, Rational::zero())
    }

    pub fn one(tower: &TowerRing) -> Self {
        Self::constant(tower, Rational::one())
    }

    pub fn generator(tower: &TowerRing, v: &VarId) -> Self {
        let v = v.clone();
        Self::from_fn(tower, move |_| {
            let u = Universe::new(vec![v.clone()])?;
            Poly::var(&u, &v)
        })
    }

    pub fn tower(&self) -> &TowerRing {
        &self.inner.tower
    }

    /// The same element seen in `target`, whose generators include this tower's.
    pub fn transport(&self, target: &TowerRing) -> TowerElement {
        let src = self.clone();
        TowerElement::from_fn(target, move |n| src.at(n))
    }

    /// Representative in `A_n`.
    pub fn at(&self, n: usize) -> Result<Poly> {
        let (lower, higher) = {
            let cache = self.inner.cache.lock().expect("element cache poisoned");
            if let Some(p) = cache.get(&n) {
                return Ok(p.clone());
            }
            (
                cache.range(..n).next_back().map(|(k, p)| (*k, p.clone())),
                cache.range(n + 1..).next().map(|(k, p)| (*k, p.clone())),
            )
        };
        let tower = &self.inner.tower;
        let raw = (self.inner.promoter)(n)?;
        let rep = tower.lift(&raw, n)?;
        if let Some((l, pl)) = lower {
            let down = tower.transition(n, l, &rep)?;
            if down != pl {
                return Err(Error::Compatibility(format!(
                    "level {n} representative {rep} maps to {down} at level {l}, expected {pl}"
                )));
            }
        }
        if let Some((h, ph)) = higher {
            let down = tower.transition(h, n, &ph)?;
            if down != rep {
                return Err(Error::Compatibility(format!(
                    "level {h} representative {ph} maps to {down} at level {n}, expected {rep}"
                )));
            }
        }
        self.inner
            .cache
            .lock()
            .expect("element cache poisoned")
            .insert(n, rep.clone());
        Ok(rep)
    }

    fn check_same(&self, other: &TowerElement) -> Result<()> {
        if self.tower().same(other.tower()) {
            Ok(())
        } else {
            Err(Error::universe("elements of different towers"))
        }
    }

    /// Levelwise map `n, rep_n ↦ f(n, rep_n)`; `f` must commute with transitions.
    pub fn map_levels(
        &self,
        f: impl Fn(usize, &Poly) -> Result<Poly> + Send + Sync + 'static,
    ) -> TowerElement {
        let a = self.clone();
        TowerElement::from_fn(self.tower(), move |n| f(n, &a.at(n)?))
    }

    pub fn add(&self, other: &TowerElement) -> Result<TowerElement> {
        self.check_same(other)?;
        let (a, b) = (self.clone(), other.clone());
        Ok(TowerElement::from_fn(self.tower(), move |n| {
            a.at(n)?.checked_add(&b.at(n)?)
        }))
    }

    pub fn sub(&self, other: &TowerElement) -> Result<TowerElement> {
        self.check_same(other)?;
        let (a, b) = (self.clone(), other.clone());
        Ok(TowerElement::from_fn(self.tower(), move |n| {
            a.at(n)?.checked_sub(&b.at(n)?)
        }))
    }

    pub fn mul(&self, other: &TowerElement) -> Result<TowerElement> {
        self.check_same(other)?;
        let (a, b) = (self.clone(), other.clone());
        Ok(TowerElement::from_fn(self.tower(), move |n| {
            a.at(n)?.checked_mul(&b.at(n)?)
        }))
    }

    pub fn neg(&self) -> TowerElement {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, c: &Rational) -> TowerElement {
        let c = c.clone();
        self.map_levels(move |_, p| Ok(p.scale(&c)))
    }

    pub fn pow(&self, e: u32) -> TowerElement {
        let tower = self.tower().clone();
        self.map_levels(move |n, p| {
            let level = tower.level(n)?;
            let mut acc = level.constant(Rational::one())?;
            for _ in 0..e {
                acc = level.mul(&acc, p)?;
            }
            Ok(acc)
        })
    }

    /// `true` if the representatives vanish at every level up to `depth`.
    pub fn is_zero_to_depth(&self, depth: usize) -> Result<bool> {
        for n in 0..=depth {
            if !self.at(n)?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Canonical rendering of the level-`n` representative.
    pub fn render_at(&self, n: usize) -> Result<String> {
        let level = self.tower().level(n)?;
        Ok(level.render(&self.at(n)?))
    }
}

/// Result of comparing two elements level by level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Comparison {
    pub depth: usize,
    pub equal_to_depth: bool,
    pub first_divergence: Option<usize>,
    /// `0` when equal to depth; `1/2^(m-1)` for a first divergence at level `m >= 1`; `1` at level 0.
    pub metric: Rational,
}

/// Compares `a` and `b` at levels `0..=depth`.
///
/// A first divergence at level `m` means `a - b ∈ 𝔞_{m-1} \ 𝔞_m`, so the
/// distance is `1/2^(m-1)`.
pub fn element_compare(a: &TowerElement, b: &TowerElement, depth: usize) -> Result<Comparison> {
    a.check_same(b)?;
    for n in 0..=depth {
        if a.at(n)? != b.at(n)? {
            let metric = if n == 0 {
                Rational::one()
            } else {
                Rational::new(BigInt::one(), BigInt::from(2u8).pow((n - 1) as u32))
            };
            return Ok(Comparison {
                depth,
                equal_to_depth: false,
                first_divergence: Some(n),
                metric,
            });
        }
    }
    Ok(Comparison {
        depth,
        equal_to_depth: true,
        first_divergence: None,
        metric: Rational::zero(),
    })
}
