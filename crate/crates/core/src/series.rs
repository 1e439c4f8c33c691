//! Restricted power series `A{T_1, ..., T_r}` over a tower.
//!
//! At level `n` a restricted series is a polynomial in the parameters with
//! coefficients in `A_n`; convergence of the coefficients to zero is encoded
//! by the representation itself.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::element::TowerElement;
use crate::error::{Error, Result};
use crate::poly::{Poly, Rational, Universe};
use crate::tower::{LevelRing, TowerRing};

/// Most parameters a series may carry.
pub const MAX_PARAMS: usize = 3;

/// Multi-index of parameter exponents.
pub type MultiIndex = Vec<u32>;

fn binomial(n: u32, k: u32) -> Rational {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    Rational::from_integer(acc)
}

fn index_degree(i: &[u32]) -> u32 {
    i.iter().sum()
}

/// The level-`n` representative of a restricted series: a polynomial in the
/// parameters with coefficients over the level universe.
#[derive(Clone, Debug)]
pub struct LevelSeries {
    universe: Arc<Universe>,
    arity: usize,
    coeffs: BTreeMap<MultiIndex, Poly>,
}

impl PartialEq for LevelSeries {
    fn eq(&self, other: &Self) -> bool {
        self.arity == other.arity
            && Universe::same(&self.universe, &other.universe)
            && self.coeffs == other.coeffs
    }
}

impl Eq for LevelSeries {}

impl LevelSeries {
    pub fn zero(universe: &Arc<Universe>, arity: usize) -> Self {
        LevelSeries {
            universe: universe.clone(),
            arity,
            coeffs: BTreeMap::new(),
        }
    }

    /// `p` as a series constant in the parameters.
    pub fn constant(p: Poly, arity: usize) -> Self {
        let mut s = LevelSeries::zero(p.universe(), arity);
        s.add_term(vec![0; arity], p);
        s
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Adds `c · T^index` (coefficients must share the universe).
    pub fn add_term(&mut self, index: MultiIndex, c: Poly) {
        assert_eq!(index.len(), self.arity, "multi-index arity mismatch");
        if c.is_zero() {
            return;
        }
        let sum = match self.coeffs.remove(&index) {
            Some(old) => &old + &c,
            None => c,
        };
        if !sum.is_zero() {
            self.coeffs.insert(index, sum);
        }
    }

    pub fn coefficient(&self, index: &[u32]) -> Poly {
        self.coeffs
            .get(index)
            .cloned()
            .unwrap_or_else(|| Poly::zero(&self.universe))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Poly)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Total degree in the parameters, `None` for the zero series.
    pub fn t_degree(&self) -> Option<u32> {
        self.coeffs.keys().map(|i| index_degree(i)).max()
    }

    fn check(&self, other: &LevelSeries) -> Result<()> {
        if self.arity != other.arity {
            return Err(Error::universe("series with different parameter counts"));
        }
        if !Universe::same(&self.universe, &other.universe) {
            return Err(Error::universe("series over different levels"));
        }
        Ok(())
    }

    pub fn add(&self, other: &LevelSeries) -> Result<LevelSeries> {
        self.check(other)?;
        let mut out = self.clone();
        for (i, c) in &other.coeffs {
            out.add_term(i.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &LevelSeries) -> Result<LevelSeries> {
        self.check(other)?;
        let mut out = self.clone();
        for (i, c) in &other.coeffs {
            out.add_term(i.clone(), -c);
        }
        Ok(out)
    }

    pub fn mul(&self, other: &LevelSeries, level: &LevelRing) -> Result<LevelSeries> {
        self.check(other)?;
        let mut out = LevelSeries::zero(&self.universe, self.arity);
        for (i, a) in &self.coeffs {
            for (j, b) in &other.coeffs {
                let k: MultiIndex = i.iter().zip(j).map(|(x, y)| x + y).collect();
                out.add_term(k, a.checked_mul(b)?);
            }
        }
        out.normalize(level)
    }

    /// Normal-forms every coefficient in `level`.
    pub fn normalize(&self, level: &LevelRing) -> Result<LevelSeries> {
        let mut out = LevelSeries::zero(level.universe(), self.arity);
        for (i, c) in &self.coeffs {
            out.add_term(i.clone(), level.normal_form(&c.embed(level.universe())?)?);
        }
        Ok(out)
    }

    /// Applies `p_{m,n}` to every coefficient.
    pub fn transport(&self, tower: &TowerRing, n: usize) -> Result<LevelSeries> {
        let level = tower.level(n)?;
        let mut out = LevelSeries::zero(level.universe(), self.arity);
        for (i, c) in &self.coeffs {
            out.add_term(i.clone(), tower.lift(c, n)?);
        }
        Ok(out)
    }

    /// `T_k ↦ T_k + T_new`, the new parameter appended last.
    pub fn comultiply(&self, k: usize) -> Result<LevelSeries> {
        if k >= self.arity {
            return Err(Error::universe(format!("no parameter at position {k}")));
        }
        if self.arity + 1 > MAX_PARAMS {
            return Err(Error::universe(format!("at most {MAX_PARAMS} parameters")));
        }
        let mut out = LevelSeries::zero(&self.universe, self.arity + 1);
        for (i, c) in &self.coeffs {
            for a in 0..=i[k] {
                let mut j = i.clone();
                j[k] = a;
                j.push(i[k] - a);
                out.add_term(j, c.scale(&binomial(i[k], a)));
            }
        }
        Ok(out)
    }

    /// Every parameter ↦ 0.
    pub fn counit(&self) -> Poly {
        self.coefficient(&vec![0; self.arity])
    }

    /// Every parameter ↦ its negative.
    pub fn coinvert(&self) -> LevelSeries {
        let mut out = LevelSeries::zero(&self.universe, self.arity);
        for (i, c) in &self.coeffs {
            let c = if index_degree(i) % 2 == 1 { -c } else { c.clone() };
            out.add_term(i.clone(), c);
        }
        out
    }

    /// Every parameter ↦ a single parameter `T`.
    pub fn diagonal(&self) -> LevelSeries {
        let mut out = LevelSeries::zero(&self.universe, 1);
        for (i, c) in &self.coeffs {
            out.add_term(vec![index_degree(i)], c.clone());
        }
        out
    }

    /// `T_i ↦ a T_i` for every parameter.
    pub fn scale(&self, a: &Poly, level: &LevelRing) -> Result<LevelSeries> {
        let mut powers = vec![level.constant(Rational::one())?];
        let mut out = LevelSeries::zero(&self.universe, self.arity);
        for (i, c) in &self.coeffs {
            let d = index_degree(i) as usize;
            while powers.len() <= d {
                let next = level.mul(powers.last().expect("nonempty"), a)?;
                powers.push(next);
            }
            out.add_term(i.clone(), c.checked_mul(&powers[d])?);
        }
        out.normalize(level)
    }

    /// Every parameter ↦ `t`.
    pub fn eval_at(&self, t: &Poly, level: &LevelRing) -> Result<Poly> {
        let mut out = Poly::zero(&self.universe);
        let mut powers = vec![level.constant(Rational::one())?];
        for (i, c) in &self.coeffs {
            let d = index_degree(i) as usize;
            while powers.len() <= d {
                let next = level.mul(powers.last().expect("nonempty"), t)?;
                powers.push(next);
            }
            out = out.checked_add(&c.checked_mul(&powers[d])?)?;
        }
        level.normal_form(&out)
    }

    /// `T_i ↦ 1` for `i ∈ positions`; the remaining parameters keep their order.
    pub fn eval_ones(&self, positions: &[usize]) -> Result<LevelSeries> {
        let set: BTreeSet<usize> = positions.iter().copied().collect();
        if let Some(bad) = set.iter().find(|&&p| p >= self.arity) {
            return Err(Error::universe(format!("no parameter at position {bad}")));
        }
        let mut out = LevelSeries::zero(&self.universe, self.arity - set.len());
        for (i, c) in &self.coeffs {
            let j: MultiIndex = i
                .iter()
                .enumerate()
                .filter(|(k, _)| !set.contains(k))
                .map(|(_, e)| *e)
                .collect();
            out.add_term(j, c.clone());
        }
        Ok(out)
    }

    /// Canonical rendering `c_0 + c_1*T + ...` with terms by increasing multi-index.
    pub fn render(&self, level: &LevelRing, params: &[String]) -> String {
        if self.coeffs.is_empty() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (i, c) in &self.coeffs {
            let mono: Vec<String> = i
                .iter()
                .zip(params)
                .filter(|(e, _)| **e > 0)
                .map(|(e, p)| if *e == 1 { p.clone() } else { format!("{p}^{e}") })
                .collect();
            let coeff = level.render(c);
            if mono.is_empty() {
                parts.push(coeff);
            } else if c.num_terms() == 1 {
                let v = c.constant_value();
                if v.as_ref().is_some_and(|v| v.is_one()) {
                    parts.push(mono.join("*"));
                } else if v.is_some_and(|v| (-v).is_one()) {
                    parts.push(format!("-{}", mono.join("*")));
                } else {
                    parts.push(format!("{}*{}", coeff, mono.join("*")));
                }
            } else {
                parts.push(format!("({})*{}", coeff, mono.join("*")));
            }
        }
        let mut out = parts[0].clone();
        for p in &parts[1..] {
            match p.strip_prefix('-') {
                Some(rest) => {
                    out.push_str(" - ");
                    out.push_str(rest);
                }
                None => {
                    out.push_str(" + ");
                    out.push_str(p);
                }
            }
        }
        out
    }
}

type SeriesPromoter = dyn Fn(usize) -> Result<LevelSeries> + Send + Sync;

struct Inner {
    base: TowerRing,
    params: Vec<String>,
    promoter: Box<SeriesPromoter>,
    cache: Mutex<BTreeMap<usize, LevelSeries>>,
}

/// An element of `A{T_1, ..., T_r}` with `r <= 3`, given level by level.
#[derive(Clone)]
pub struct RestrictedSeries {
    inner: Arc<Inner>,
}

impl fmt::Debug for RestrictedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RestrictedSeries({:?})", self.inner.params)
    }
}

/// A time parameter for evaluation: a rational or a tower element.
#[derive(Clone, Debug)]
pub enum Evaluation {
    Rational(Rational),
    Element(TowerElement),
}

impl Evaluation {
    pub fn at(&self, tower: &TowerRing, n: usize) -> Result<Poly> {
        match self {
            Evaluation::Rational(q) => tower.level(n)?.constant(q.clone()),
            Evaluation::Element(e) => {
                if !e.tower().same(tower) {
                    return Err(Error::universe("evaluation point from another tower"));
                }
                e.at(n)
            }
        }
    }
}

impl RestrictedSeries {
    /// `promoter(n)` returns the level-`n` series; coefficients are normal-formed.
    pub fn from_fn(
        base: &TowerRing,
        params: &[&str],
        promoter: impl Fn(usize) -> Result<LevelSeries> + Send + Sync + 'static,
    ) -> Result<Self> {
        if params.len() > MAX_PARAMS {
            return Err(Error::universe(format!("at most {MAX_PARAMS} parameters")));
        }
        let distinct: BTreeSet<&&str> = params.iter().collect();
        if distinct.len() != params.len() {
            return Err(Error::universe("duplicate parameter names"));
        }
        Ok(RestrictedSeries {
            inner: Arc::new(Inner {
                base: base.clone(),
                params: params.iter().map(|s| s.to_string()).collect(),
                promoter: Box::new(promoter),
                cache: Mutex::new(BTreeMap::new()),
            }),
        })
    }

    /// The constant series `i_0(a)`.
    pub fn constant_embed(a: &TowerElement, params: &[&str]) -> Result<Self> {
        let a = a.clone();
        let arity = params.len();
        Self::from_fn(&a.tower().clone(), params, move |n| {
            Ok(LevelSeries::constant(a.at(n)?, arity))
        })
    }

    /// `Σ c_I T^I` for finitely many tower-element coefficients.
    pub fn polynomial(base: &TowerRing, params: &[&str], terms: Vec<(MultiIndex, TowerElement)>) -> Result<Self> {
        let arity = params.len();
        for (i, c) in &terms {
            if i.len() != arity {
                return Err(Error::universe("multi-index arity mismatch"));
            }
            if !c.tower().same(base) {
                return Err(Error::universe("coefficient from another tower"));
            }
        }
        let tower = base.clone();
        Self::from_fn(base, params, move |n| {
            let level = tower.level(n)?;
            let mut s = LevelSeries::zero(level.universe(), arity);
            for (i, c) in &terms {
                s.add_term(i.clone(), c.at(n)?);
            }
            Ok(s)
        })
    }

    pub fn base(&self) -> &TowerRing {
        &self.inner.base
    }

    pub fn params(&self) -> &[String] {
        &self.inner.params
    }

    fn param_refs(&self) -> Vec<&str> {
        self.inner.params.iter().map(|s| s.as_str()).collect()
    }

    /// Level-`n` representative, audited against the nearest cached lower level.
    pub fn at(&self, n: usize) -> Result<LevelSeries> {
        let lower = {
            let cache = self.inner.cache.lock().expect("series cache poisoned");
            if let Some(s) = cache.get(&n) {
                return Ok(s.clone());
            }
            cache.range(..n).next_back().map(|(k, s)| (*k, s.clone()))
        };
        let level = self.inner.base.level(n)?;
        let raw = (self.inner.promoter)(n)?;
        if raw.arity() != self.inner.params.len() {
            return Err(Error::universe("promoted series has the wrong parameter count"));
        }
        let rep = if Universe::same(raw.universe(), level.universe()) {
            raw.normalize(&level)?
        } else {
            raw.transport(&self.inner.base, n)?
        };
        if let Some((l, sl)) = lower {
            let down = rep.transport(&self.inner.base, l)?;
            if down != sl {
                return Err(Error::Compatibility(format!(
                    "series representative at level {n} does not map to the one at level {l}"
                )));
            }
        }
        self.inner
            .cache
            .lock()
            .expect("series cache poisoned")
            .insert(n, rep.clone());
        Ok(rep)
    }

    pub fn coefficient(&self, index: &[u32], n: usize) -> Result<Poly> {
        if index.len() != self.inner.params.len() {
            return Err(Error::universe("multi-index arity mismatch"));
        }
        Ok(self.at(n)?.coefficient(index))
    }

    fn check(&self, other: &RestrictedSeries) -> Result<()> {
        if !self.base().same(other.base()) {
            return Err(Error::universe("series over different towers"));
        }
        if self.params() != other.params() {
            return Err(Error::universe(format!(
                "parameter lists differ: {:?} vs {:?}",
                self.params(),
                other.params()
            )));
        }
        Ok(())
    }

    fn derive(
        &self,
        params: &[&str],
        f: impl Fn(usize, LevelSeries) -> Result<LevelSeries> + Send + Sync + 'static,
    ) -> Result<RestrictedSeries> {
        let s = self.clone();
        Self::from_fn(self.base(), params, move |n| f(n, s.at(n)?))
    }

    pub fn add(&self, other: &RestrictedSeries) -> Result<RestrictedSeries> {
        self.check(other)?;
        let o = other.clone();
        self.derive(&self.param_refs(), move |n, a| a.add(&o.at(n)?))
    }

    pub fn sub(&self, other: &RestrictedSeries) -> Result<RestrictedSeries> {
        self.check(other)?;
        let o = other.clone();
        self.derive(&self.param_refs(), move |n, a| a.sub(&o.at(n)?))
    }

    pub fn mul(&self, other: &RestrictedSeries) -> Result<RestrictedSeries> {
        self.check(other)?;
        let o = other.clone();
        let tower = self.base().clone();
        self.derive(&self.param_refs(), move |n, a| {
            a.mul(&o.at(n)?, &*tower.level(n)?)
        })
    }

    /// `T_k ↦ T_k + new`.
    pub fn comultiply(&self, k: usize, new: &str) -> Result<RestrictedSeries> {
        let mut params = self.param_refs();
        if params.contains(&new) {
            return Err(Error::universe(format!("parameter {new} already present")));
        }
        params.push(new);
        self.derive(&params, move |_, a| a.comultiply(k))
    }

    pub fn counit(&self) -> TowerElement {
        let s = self.clone();
        TowerElement::from_fn(self.base(), move |n| Ok(s.at(n)?.counit()))
    }

    pub fn coinvert(&self) -> Result<RestrictedSeries> {
        self.derive(&self.param_refs(), |_, a| Ok(a.coinvert()))
    }

    pub fn diagonal(&self, name: &str) -> Result<RestrictedSeries> {
        self.derive(&[name], |_, a| Ok(a.diagonal()))
    }

    pub fn scale(&self, a: &TowerElement) -> Result<RestrictedSeries> {
        if !a.tower().same(self.base()) {
            return Err(Error::universe("scaling element from another tower"));
        }
        let a = a.clone();
        let tower = self.base().clone();
        self.derive(&self.param_refs(), move |n, s| {
            s.scale(&a.at(n)?, &*tower.level(n)?)
        })
    }

    pub fn eval_at(&self, t: &Evaluation) -> TowerElement {
        let s = self.clone();
        let t = t.clone();
        let tower = self.base().clone();
        TowerElement::from_fn(self.base(), move |n| {
            let level = tower.level(n)?;
            s.at(n)?.eval_at(&t.at(&tower, n)?, &level)
        })
    }

    pub fn eval_ones(&self, positions: &[usize]) -> Result<RestrictedSeries> {
        let set: BTreeSet<usize> = positions.iter().copied().collect();
        if let Some(bad) = set.iter().find(|&&p| p >= self.params().len()) {
            return Err(Error::universe(format!("no parameter at position {bad}")));
        }
        let params: Vec<&str> = self
            .param_refs()
            .into_iter()
            .enumerate()
            .filter(|(i, _)| !set.contains(i))
            .map(|(_, p)| p)
            .collect();
        let positions = positions.to_vec();
        self.derive(&params, move |_, s| s.eval_ones(&positions))
    }

    /// The element of a parameter-free series.
    pub fn to_element(&self) -> Result<TowerElement> {
        if !self.params().is_empty() {
            return Err(Error::universe("series still has parameters"));
        }
        Ok(self.counit())
    }

    pub fn render_at(&self, n: usize) -> Result<String> {
        let level = self.base().level(n)?;
        Ok(format!(
            "{} (mod level {n})",
            self.at(n)?.render(&level, self.params())
        ))
    }
}

/// `C(n, k)`, zero for `k > n`.
pub fn binomial_coefficient(n: u32, k: u32) -> Rational {
    if k > n {
        Rational::zero()
    } else {
        binomial(n, k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rat, VarId};

    fn u_adic() -> (TowerRing, TowerElement) {
        let u = VarId::named("u");
        let uni = Universe::new(vec![u.clone()]).unwrap();
        let t = TowerRing::adic(&[u.clone()], &[], &[Poly::var(&uni, &u).unwrap()]).unwrap();
        let e = TowerElement::generator(&t, &u);
        (t, e)
    }

    #[test]
    fn conjugate_product() {
        let (t, u) = u_adic();
        let one = TowerElement::one(&t);
        let a = RestrictedSeries::polynomial(&t, &["T"], vec![(vec![0], one.clone()), (vec![1], u.clone())]).unwrap();
        let b = RestrictedSeries::polynomial(&t, &["T"], vec![(vec![0], one), (vec![1], u.neg())]).unwrap();
        let p = a.mul(&b).unwrap();
        assert_eq!(p.render_at(5).unwrap(), "1 - u^2*T^2 (mod level 5)");
        assert_eq!(p.render_at(2).unwrap(), "1 (mod level 2)");
    }

    #[test]
    fn geometric_series_truncates() {
        let (t, u) = u_adic();
        let uu = u.clone();
        let tower = t.clone();
        let s = RestrictedSeries::from_fn(&t, &["T"], move |n| {
            let level = tower.level(n)?;
            let mut out = LevelSeries::zero(level.universe(), 1);
            for i in 0..n as u32 {
                out.add_term(vec![i], uu.pow(i + 1).at(n)?);
            }
            Ok(out)
        })
        .unwrap();
        assert_eq!(s.render_at(4).unwrap(), "u + u^2*T + u^3*T^2 (mod level 4)");
    }

    #[test]
    fn comultiply_parameter() {
        let (t, _) = u_adic();
        let s = RestrictedSeries::polynomial(&t, &["T"], vec![(vec![1], TowerElement::one(&t))]).unwrap();
        let c = s.comultiply(0, "T'").unwrap();
        assert_eq!(c.render_at(3).unwrap(), "T' + T (mod level 3)");
    }

    #[test]
    fn scale_and_counit() {
        let (t, u) = u_adic();
        let s = RestrictedSeries::polynomial(
            &t,
            &["T"],
            vec![(vec![0], u.clone()), (vec![1], TowerElement::one(&t)), (vec![2], TowerElement::one(&t))],
        )
        .unwrap();
        let scaled = s.scale(&u).unwrap();
        assert_eq!(scaled.render_at(4).unwrap(), "u + u*T + u^2*T^2 (mod level 4)");
        assert_eq!(s.counit().render_at(3).unwrap(), "u");
        assert!(s.eval_ones(&[1]).is_err());
        let e = s.eval_at(&Evaluation::Rational(rat(2))).render_at(3).unwrap();
        assert_eq!(e, "u + 6");
    }
}
