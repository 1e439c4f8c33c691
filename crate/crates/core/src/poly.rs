//! Sparse multivariate polynomials over the rationals.
//!
//! A [`Poly`] lives over a [`Universe`], an ordered list of named variables.
//! Terms are stored as a map from dense exponent vectors (aligned with the
//! universe) to nonzero coefficients, so the zero polynomial is the empty map.
//! Arithmetic between polynomials of different universes is rejected.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational coefficient, always kept in lowest terms with positive denominator.
pub type Rational = BigRational;

/// Exponent vector aligned with a universe.
pub type Monomial = Vec<u32>;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Renders a rational as `n` or `n/d`.
pub fn render_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// A variable name, optionally indexed for countable families `X[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId {
    name: Arc<str>,
    index: Option<u32>,
}

impl VarId {
    pub fn named(name: &str) -> Self {
        VarId {
            name: Arc::from(name),
            index: None,
        }
    }

    pub fn indexed(name: &str, index: u32) -> Self {
        VarId {
            name: Arc::from(name),
            index: Some(index),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn index(&self) -> Option<u32> {
        self.index
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(i) => write!(f, "{}[{}]", self.name, i),
            None => write!(f, "{}", self.name),
        }
    }
}

/// An ordered, duplicate-free list of variables.
#[derive(Debug)]
pub struct Universe {
    vars: Vec<VarId>,
    lookup: HashMap<VarId, usize>,
}

impl Universe {
    pub fn new(vars: Vec<VarId>) -> Result<Arc<Self>> {
        let mut lookup = HashMap::with_capacity(vars.len());
        for (i, v) in vars.iter().enumerate() {
            if lookup.insert(v.clone(), i).is_some() {
                return Err(Error::universe(format!("duplicate variable {v}")));
            }
        }
        Ok(Arc::new(Universe { vars, lookup }))
    }

    pub fn empty() -> Arc<Self> {
        Arc::new(Universe {
            vars: Vec::new(),
            lookup: HashMap::new(),
        })
    }

    pub fn vars(&self) -> &[VarId] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn position(&self, v: &VarId) -> Option<usize> {
        self.lookup.get(v).copied()
    }

    pub fn contains(&self, v: &VarId) -> bool {
        self.lookup.contains_key(v)
    }

    pub fn same(a: &Arc<Universe>, b: &Arc<Universe>) -> bool {
        Arc::ptr_eq(a, b) || a.vars == b.vars
    }
}

/// Monomial orders used for leading terms and normal forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MonomialOrder {
    Lex,
    GrevLex,
    /// The first `block` variables are eliminated: compared by grevlex first,
    /// ties broken by grevlex on the remaining variables.
    Elimination { block: usize },
}

impl Default for MonomialOrder {
    fn default() -> Self {
        MonomialOrder::GrevLex
    }
}

fn grevlex_key(m: &[u32], out: &mut Vec<i64>) {
    out.push(m.iter().map(|&e| e as i64).sum());
    out.extend(m.iter().rev().map(|&e| -(e as i64)));
}

impl MonomialOrder {
    /// A vector whose lexicographic order coincides with this monomial order.
    pub fn sort_key(&self, m: &[u32]) -> Vec<i64> {
        let mut key = Vec::with_capacity(m.len() + 2);
        match *self {
            MonomialOrder::Lex => key.extend(m.iter().map(|&e| e as i64)),
            MonomialOrder::GrevLex => grevlex_key(m, &mut key),
            MonomialOrder::Elimination { block } => {
                let split = block.min(m.len());
                grevlex_key(&m[..split], &mut key);
                grevlex_key(&m[split..], &mut key);
            }
        }
        key
    }

    pub fn cmp(&self, a: &[u32], b: &[u32]) -> Ordering {
        match *self {
            MonomialOrder::Lex => a.cmp(b),
            _ => self.sort_key(a).cmp(&self.sort_key(b)),
        }
    }
}

pub fn divides(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

pub fn lcm(a: &[u32], b: &[u32]) -> Monomial {
    a.iter().zip(b).map(|(x, y)| *x.max(y)).collect()
}

pub fn mono_degree(m: &[u32]) -> u64 {
    m.iter().map(|&e| e as u64).sum()
}

fn mono_mul(a: &[u32], b: &[u32]) -> Result<Monomial> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.checked_add(*y).ok_or(Error::ExponentOverflow))
        .collect()
}

/// Exact sparse polynomial over a variable universe.
#[derive(Clone, Debug)]
pub struct Poly {
    universe: Arc<Universe>,
    terms: BTreeMap<Monomial, Rational>,
}

impl PartialEq for Poly {
    fn eq(&self, other: &Self) -> bool {
        Universe::same(&self.universe, &other.universe) && self.terms == other.terms
    }
}

impl Eq for Poly {}

impl Poly {
    pub fn zero(universe: &Arc<Universe>) -> Self {
        Poly {
            universe: universe.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(universe: &Arc<Universe>, c: Rational) -> Self {
        let mut p = Poly::zero(universe);
        if !c.is_zero() {
            p.terms.insert(vec![0; universe.len()], c);
        }
        p
    }

    pub fn one(universe: &Arc<Universe>) -> Self {
        Poly::constant(universe, Rational::one())
    }

    pub fn var(universe: &Arc<Universe>, v: &VarId) -> Result<Self> {
        let i = universe
            .position(v)
            .ok_or_else(|| Error::universe(format!("variable {v} not in universe")))?;
        let mut m = vec![0; universe.len()];
        m[i] = 1;
        Ok(Poly::monomial(universe, m, Rational::one()))
    }

    pub fn monomial(universe: &Arc<Universe>, m: Monomial, c: Rational) -> Self {
        assert_eq!(m.len(), universe.len(), "monomial length mismatch");
        let mut p = Poly::zero(universe);
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    /// Builds a polynomial from `(monomial, coefficient)` pairs, combining duplicates.
    pub fn from_terms(
        universe: &Arc<Universe>,
        terms: impl IntoIterator<Item = (Monomial, Rational)>,
    ) -> Self {
        let mut p = Poly::zero(universe);
        for (m, c) in terms {
            assert_eq!(m.len(), universe.len(), "monomial length mismatch");
            p.add_term(m, c);
        }
        p
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &[u32]) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.iter().all(|&e| e == 0))
    }

    pub fn constant_value(&self) -> Option<Rational> {
        if self.is_zero() {
            return Some(Rational::zero());
        }
        if self.is_constant() {
            return self.terms.values().next().cloned();
        }
        None
    }

    pub fn total_degree(&self) -> Option<u64> {
        self.terms.keys().map(|m| mono_degree(m)).max()
    }

    pub fn degree_in(&self, v: &VarId) -> Result<u32> {
        let i = self.position(v)?;
        Ok(self.terms.keys().map(|m| m[i]).max().unwrap_or(0))
    }

    fn position(&self, v: &VarId) -> Result<usize> {
        self.universe
            .position(v)
            .ok_or_else(|| Error::universe(format!("variable {v} not in universe")))
    }

    /// Leading term under `order`, if nonzero.
    pub fn leading_term(&self, order: MonomialOrder) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().max_by(|a, b| order.cmp(a.0, b.0))
    }

    fn check_universe(&self, other: &Poly) -> Result<()> {
        if Universe::same(&self.universe, &other.universe) {
            Ok(())
        } else {
            Err(Error::universe(format!(
                "operands over different universes [{}] and [{}]",
                join_vars(&self.universe),
                join_vars(&other.universe)
            )))
        }
    }

    pub fn checked_add(&self, other: &Poly) -> Result<Poly> {
        self.check_universe(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Poly) -> Result<Poly> {
        self.check_universe(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Poly) -> Result<Poly> {
        self.check_universe(other)?;
        let mut out = Poly::zero(&self.universe);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(mono_mul(ma, mb)?, ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.universe);
        }
        Poly {
            universe: self.universe.clone(),
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    /// Multiplies by the monomial `c * m`.
    pub fn mul_term(&self, m: &[u32], c: &Rational) -> Result<Poly> {
        let mut out = Poly::zero(&self.universe);
        if c.is_zero() {
            return Ok(out);
        }
        for (ma, ca) in &self.terms {
            out.terms.insert(mono_mul(ma, m)?, ca * c);
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut result = Poly::one(&self.universe);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Formal partial derivative with respect to `v`.
    pub fn formal_partial(&self, v: &VarId) -> Result<Poly> {
        let i = self.position(v)?;
        let mut out = Poly::zero(&self.universe);
        for (m, c) in &self.terms {
            if m[i] == 0 {
                continue;
            }
            let mut dm = m.clone();
            dm[i] -= 1;
            out.add_term(dm, c * Rational::from_integer(BigInt::from(m[i])));
        }
        Ok(out)
    }

    /// Ring homomorphism sending each variable of `self` to `assign(var)`,
    /// landing in the polynomial ring over `target`.
    ///
    /// Variables that actually occur in `self` must be assigned.
    pub fn substitute<F>(&self, target: &Arc<Universe>, mut assign: F) -> Result<Poly>
    where
        F: FnMut(&VarId) -> Option<Poly>,
    {
        let n = self.universe.len();
        let mut images: Vec<Option<Poly>> = vec![None; n];
        let mut powers: Vec<Vec<Poly>> = vec![Vec::new(); n];
        let mut out = Poly::zero(target);
        for (m, c) in &self.terms {
            let mut term = Poly::constant(target, c.clone());
            for (i, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if images[i].is_none() {
                    let v = &self.universe.vars[i];
                    let img = assign(v).ok_or_else(|| {
                        Error::universe(format!("substitution does not cover variable {v}"))
                    })?;
                    img.check_in(target)?;
                    powers[i].push(Poly::one(target));
                    images[i] = Some(img);
                }
                let img = images[i].as_ref().expect("image cached");
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().expect("nonempty").checked_mul(img)?;
                    powers[i].push(next);
                }
                term = term.checked_mul(&powers[i][e as usize])?;
            }
            out = out.checked_add(&term)?;
        }
        Ok(out)
    }

    fn check_in(&self, target: &Arc<Universe>) -> Result<()> {
        if Universe::same(&self.universe, target) {
            Ok(())
        } else {
            Err(Error::universe(format!(
                "substituted image lives over [{}], expected [{}]",
                join_vars(&self.universe),
                join_vars(target)
            )))
        }
    }

    /// Re-expresses the polynomial over a universe containing all its occurring variables.
    pub fn embed(&self, target: &Arc<Universe>) -> Result<Poly> {
        if Universe::same(&self.universe, target) {
            return Ok(Poly {
                universe: target.clone(),
                terms: self.terms.clone(),
            });
        }
        let mut map = Vec::with_capacity(self.universe.len());
        for v in &self.universe.vars {
            map.push(target.position(v));
        }
        let mut out = Poly::zero(target);
        for (m, c) in &self.terms {
            let mut tm = vec![0; target.len()];
            for (i, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let j = map[i].ok_or_else(|| {
                    Error::universe(format!(
                        "variable {} missing from target universe",
                        self.universe.vars[i]
                    ))
                })?;
                tm[j] = e;
            }
            out.terms.insert(tm, c.clone());
        }
        Ok(out)
    }

    /// Variables that occur with a positive exponent.
    pub fn occurring_vars(&self) -> Vec<VarId> {
        let mut seen = vec![false; self.universe.len()];
        for m in self.terms.keys() {
            for (i, &e) in m.iter().enumerate() {
                if e > 0 {
                    seen[i] = true;
                }
            }
        }
        seen.iter()
            .enumerate()
            .filter(|(_, &s)| s)
            .map(|(i, _)| self.universe.vars[i].clone())
            .collect()
    }

    /// Canonical text rendering with terms in decreasing `order`.
    pub fn render(&self, order: MonomialOrder) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|a, b| order.cmp(b.0, a.0));
        let mut out = String::new();
        for (k, (m, c)) in terms.into_iter().enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            if k == 0 {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            let mono = render_monomial(&self.universe, m);
            match (mono.is_empty(), abs.is_one()) {
                (true, _) => out.push_str(&render_rational(&abs)),
                (false, true) => out.push_str(&mono),
                (false, false) => {
                    out.push_str(&render_rational(&abs));
                    out.push('*');
                    out.push_str(&mono);
                }
            }
        }
        out
    }

    /// Every coefficient is in lowest terms with a positive denominator and nonzero.
    pub fn is_normalized(&self) -> bool {
        use num_integer::Integer;
        self.terms.values().all(|c| {
            !c.is_zero() && c.denom().is_positive() && c.numer().gcd(c.denom()).is_one()
        })
    }
}

fn render_monomial(u: &Universe, m: &[u32]) -> String {
    let mut parts = Vec::new();
    for (i, &e) in m.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(u.vars[i].to_string()),
            _ => parts.push(format!("{}^{}", u.vars[i], e)),
        }
    }
    parts.join("*")
}

fn join_vars(u: &Universe) -> String {
    u.vars
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(MonomialOrder::GrevLex))
    }
}

// Operator impls are for code paths where the universes are known to agree;
// they panic otherwise. Use the `checked_*` methods at API boundaries.

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        self.checked_add(rhs).expect("poly add")
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self.checked_sub(rhs).expect("poly sub")
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        self.checked_mul(rhs).expect("poly mul")
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-Rational::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xyz() -> Arc<Universe> {
        Universe::new(vec![VarId::named("x"), VarId::named("y"), VarId::named("z")]).unwrap()
    }

    fn v(u: &Arc<Universe>, name: &str) -> Poly {
        Poly::var(u, &VarId::named(name)).unwrap()
    }

    #[test]
    fn difference_of_squares() {
        let u = xyz();
        let (x, y) = (v(&u, "x"), v(&u, "y"));
        let prod = &(&x + &y) * &(&x - &y);
        assert_eq!(prod, &x.pow(2) - &y.pow(2));
        assert_eq!(prod.to_string(), "x^2 - y^2");
    }

    #[test]
    fn multiply_by_zero() {
        let u = xyz();
        let p = &v(&u, "x") + &Poly::constant(&u, ratio(3, 2));
        assert!((&p * &Poly::zero(&u)).is_zero());
    }

    #[test]
    fn substitute_binomial() {
        let u = Universe::new(vec![VarId::named("u"), VarId::named("T")]).unwrap();
        let uu = Poly::var(&u, &VarId::named("u")).unwrap();
        let t = Poly::var(&u, &VarId::named("T")).unwrap();
        let shifted = &uu + &t;
        let out = uu
            .pow(2)
            .substitute(&u, |var| {
                Some(if var.name() == "u" {
                    shifted.clone()
                } else {
                    t.clone()
                })
            })
            .unwrap();
        assert_eq!(out.to_string(), "u^2 + 2*u*T + T^2");
    }

    #[test]
    fn substitution_must_cover_occurring_vars() {
        let u = xyz();
        let err = v(&u, "y").substitute(&u, |_| None).unwrap_err();
        assert!(matches!(err, Error::Universe(_)));
        // unassigned variables that do not occur are fine
        let c = Poly::constant(&u, rat(5));
        assert_eq!(c.substitute(&u, |_| None).unwrap(), c);
    }

    #[test]
    fn partials() {
        let u = xyz();
        let (x, y, z) = (v(&u, "x"), v(&u, "y"), v(&u, "z"));
        let y_id = VarId::named("y");
        assert_eq!(y.pow(3).formal_partial(&y_id).unwrap(), y.pow(2).scale(&rat(3)));
        let p = &(&x * &z) - &y.pow(2);
        assert_eq!(p.formal_partial(&y_id).unwrap(), y.scale(&rat(-2)));
        let w = Universe::new(vec![VarId::named("u"), VarId::named("T")]).unwrap();
        let uu = Poly::var(&w, &VarId::named("u")).unwrap();
        assert!(uu.pow(4).formal_partial(&VarId::named("T")).unwrap().is_zero());
        assert!(matches!(
            x.formal_partial(&VarId::named("q")),
            Err(Error::Universe(_))
        ));
    }

    #[test]
    fn universe_mismatch_is_an_error() {
        let a = xyz();
        let b = Universe::new(vec![VarId::named("x")]).unwrap();
        let err = v(&a, "x").checked_add(&Poly::var(&b, &VarId::named("x")).unwrap());
        assert!(matches!(err, Err(Error::Universe(_))));
    }

    #[test]
    fn duplicate_variables_rejected() {
        assert!(Universe::new(vec![VarId::indexed("X", 1), VarId::indexed("X", 1)]).is_err());
        assert!(Universe::new(vec![VarId::indexed("X", 1), VarId::named("X")]).is_ok());
    }

    #[test]
    fn rendering_is_canonical() {
        let u = Universe::new(vec![VarId::indexed("X", 0), VarId::indexed("X", 1)]).unwrap();
        let x0 = Poly::var(&u, &VarId::indexed("X", 0)).unwrap();
        let x1 = Poly::var(&u, &VarId::indexed("X", 1)).unwrap();
        let p = &(&x0.scale(&ratio(-1, 2)) + &x1.pow(3)) - &Poly::one(&u);
        assert_eq!(p.render(MonomialOrder::GrevLex), "X[1]^3 - 1/2*X[0] - 1");
        assert_eq!(p.render(MonomialOrder::Lex), "-1/2*X[0] + X[1]^3 - 1");
        assert_eq!(Poly::zero(&u).to_string(), "0");
    }

    #[test]
    fn orders() {
        let lex = MonomialOrder::Lex;
        let grevlex = MonomialOrder::GrevLex;
        // x*z^2 vs y^3 (degree 3 both): grevlex prefers the smaller last exponent
        assert_eq!(grevlex.cmp(&[1, 0, 2], &[0, 3, 0]), Ordering::Less);
        assert_eq!(lex.cmp(&[1, 0, 2], &[0, 3, 0]), Ordering::Greater);
        let elim = MonomialOrder::Elimination { block: 1 };
        assert_eq!(elim.cmp(&[1, 0, 0], &[0, 5, 5]), Ordering::Greater);
        assert_eq!(elim.cmp(&[0, 2, 0], &[0, 1, 0]), Ordering::Greater);
    }

    #[test]
    fn exponent_overflow_detected() {
        let u = Universe::new(vec![VarId::named("x")]).unwrap();
        let big = Poly::monomial(&u, vec![u32::MAX], rat(1));
        let x = Poly::var(&u, &VarId::named("x")).unwrap();
        assert_eq!(big.checked_mul(&x), Err(Error::ExponentOverflow));
    }
}
