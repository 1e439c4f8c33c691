//! Buchberger's algorithm and normal forms over the rationals.
//!
//! Level ideals of every tower are held as reduced Gröbner bases; ideal
//! membership is `normal_form(p) == 0`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::{divides, lcm, mono_degree, Monomial, MonomialOrder, Poly, Rational, Universe};

/// Caps on Buchberger's pair queue and on reduction steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroebnerLimits {
    pub max_pairs: usize,
    pub max_reductions: usize,
}

impl Default for GroebnerLimits {
    fn default() -> Self {
        GroebnerLimits {
            max_pairs: 100_000,
            max_reductions: 100_000,
        }
    }
}

#[derive(Clone, Debug)]
struct Element {
    poly: Poly,
    lm: Monomial,
    lc: Rational,
    // terms other than the leading one
    tail: Vec<(Monomial, Rational)>,
}

impl Element {
    fn new(poly: Poly, order: MonomialOrder) -> Option<Self> {
        let (lm, lc) = {
            let (m, c) = poly.leading_term(order)?;
            (m.clone(), c.clone())
        };
        let tail = poly
            .terms()
            .filter(|(m, _)| **m != lm)
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        Some(Element { poly, lm, lc, tail })
    }
}

/// A Gröbner basis of an ideal in the polynomial ring over `universe`.
#[derive(Clone, Debug)]
pub struct GroebnerBasis {
    universe: Arc<Universe>,
    order: MonomialOrder,
    elements: Vec<Element>,
    reduced: bool,
    limits: GroebnerLimits,
}

impl PartialEq for GroebnerBasis {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order
            && self.reduced == other.reduced
            && self.elements.len() == other.elements.len()
            && self
                .elements
                .iter()
                .zip(&other.elements)
                .all(|(a, b)| a.poly == b.poly)
    }
}

impl GroebnerBasis {
    /// Basis of the zero ideal.
    pub fn zero_ideal(universe: &Arc<Universe>, order: MonomialOrder) -> Self {
        GroebnerBasis {
            universe: universe.clone(),
            order,
            elements: Vec::new(),
            reduced: true,
            limits: GroebnerLimits::default(),
        }
    }

    pub fn generators(&self) -> impl Iterator<Item = &Poly> {
        self.elements.iter().map(|e| &e.poly)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn order(&self) -> MonomialOrder {
        self.order
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    pub fn limits(&self) -> GroebnerLimits {
        self.limits
    }

    pub fn leading_monomials(&self) -> impl Iterator<Item = &Monomial> {
        self.elements.iter().map(|e| &e.lm)
    }

    /// `true` when the ideal is the whole ring.
    pub fn is_unit_ideal(&self) -> bool {
        self.elements
            .iter()
            .any(|e| e.lm.iter().all(|&x| x == 0))
    }

    /// Fully reduced remainder of `p`.
    pub fn normal_form(&self, p: &Poly) -> Result<Poly> {
        self.check_universe(p)?;
        let mut steps = 0;
        reduce(p, &self.elements, self.order, &mut steps, self.limits, None)
    }

    /// Remainder together with cofactors `q_i` such that `p = Σ q_i g_i + r`.
    pub fn divide(&self, p: &Poly) -> Result<(Vec<Poly>, Poly)> {
        self.check_universe(p)?;
        let mut steps = 0;
        let mut quotients = vec![Poly::zero(&self.universe); self.elements.len()];
        let r = reduce(
            p,
            &self.elements,
            self.order,
            &mut steps,
            self.limits,
            Some(&mut quotients),
        )?;
        Ok((quotients, r))
    }

    pub fn contains(&self, p: &Poly) -> Result<bool> {
        Ok(self.normal_form(p)?.is_zero())
    }

    /// Standard monomials (not divisible by any leading monomial) of total degree ≤ `bound`,
    /// in increasing monomial order.
    pub fn standard_monomials(&self, bound: u32) -> Vec<Monomial> {
        let n = self.universe.len();
        let mut out = Vec::new();
        let mut current = vec![0u32; n];
        enumerate_monomials(n, 0, bound, &mut current, &mut out);
        out.retain(|m| !self.elements.iter().any(|e| divides(&e.lm, m)));
        out.sort_by(|a, b| self.order.cmp(a, b));
        out
    }

    /// Checks Buchberger's criterion: every S-polynomial reduces to zero.
    pub fn audit_s_pairs(&self) -> Result<bool> {
        for i in 0..self.elements.len() {
            for j in i + 1..self.elements.len() {
                let s = s_polynomial(&self.elements[i], &self.elements[j])?;
                if !self.normal_form(&s)?.is_zero() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn check_universe(&self, p: &Poly) -> Result<()> {
        if Universe::same(&self.universe, p.universe()) {
            Ok(())
        } else {
            Err(Error::Universe(
                "polynomial and basis live over different universes".into(),
            ))
        }
    }

    pub fn render(&self) -> String {
        let gens: Vec<String> = self
            .elements
            .iter()
            .map(|e| e.poly.render(self.order))
            .collect();
        format!("[{}]", gens.join(", "))
    }
}

impl fmt::Display for GroebnerBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn enumerate_monomials(n: usize, i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
    if i == n {
        out.push(cur.clone());
        return;
    }
    for e in 0..=left {
        cur[i] = e;
        enumerate_monomials(n, i + 1, left - e, cur, out);
    }
    cur[i] = 0;
}

fn mono_sub(a: &[u32], b: &[u32]) -> Monomial {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn mono_add(a: &[u32], b: &[u32]) -> Result<Monomial> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.checked_add(*y).ok_or(Error::ExponentOverflow))
        .collect()
}

fn reduce(
    p: &Poly,
    basis: &[Element],
    order: MonomialOrder,
    steps: &mut usize,
    limits: GroebnerLimits,
    mut quotients: Option<&mut Vec<Poly>>,
) -> Result<Poly> {
    let universe = p.universe().clone();
    let mut working: BTreeMap<Vec<i64>, (Monomial, Rational)> = p
        .terms()
        .map(|(m, c)| (order.sort_key(m), (m.clone(), c.clone())))
        .collect();
    let mut remainder = Vec::new();
    while let Some((_, (m, c))) = working.pop_last() {
        let Some((idx, g)) = basis.iter().enumerate().find(|(_, g)| divides(&g.lm, &m)) else {
            remainder.push((m, c));
            continue;
        };
        *steps += 1;
        if *steps > limits.max_reductions {
            return Err(Error::ResourceExceeded(format!(
                "normal form exceeded {} reduction steps",
                limits.max_reductions
            )));
        }
        let factor = &c / &g.lc;
        let shift = mono_sub(&m, &g.lm);
        if let Some(qs) = quotients.as_deref_mut() {
            let q = Poly::monomial(&universe, shift.clone(), factor.clone());
            qs[idx] = qs[idx].checked_add(&q)?;
        }
        for (tm, tc) in &g.tail {
            let nm = mono_add(tm, &shift)?;
            let delta = -(&factor * tc);
            let key = order.sort_key(&nm);
            match working.get_mut(&key) {
                Some(entry) => {
                    entry.1 += delta;
                    if entry.1.is_zero() {
                        working.remove(&key);
                    }
                }
                None => {
                    working.insert(key, (nm, delta));
                }
            }
        }
    }
    Ok(Poly::from_terms(&universe, remainder))
}

fn make_monic(p: &Poly, order: MonomialOrder) -> Poly {
    match p.leading_term(order) {
        Some((_, c)) => {
            let inv = Rational::one() / c;
            p.scale(&inv)
        }
        None => p.clone(),
    }
}

fn s_polynomial(a: &Element, b: &Element) -> Result<Poly> {
    let l = lcm(&a.lm, &b.lm);
    let fa = a.poly.mul_term(&mono_sub(&l, &a.lm), &(Rational::one() / &a.lc))?;
    let fb = b.poly.mul_term(&mono_sub(&l, &b.lm), &(Rational::one() / &b.lc))?;
    fa.checked_sub(&fb)
}

fn coprime(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| *x == 0 || *y == 0)
}

/// Reduced Gröbner basis of the ideal generated by `generators`.
///
/// Pairs are selected by the normal strategy (smallest lcm first) and pruned
/// with Buchberger's coprime and chain criteria. The result is canonical for
/// the ideal and order, hence independent of generator order.
pub fn buchberger(
    universe: &Arc<Universe>,
    generators: &[Poly],
    order: MonomialOrder,
    limits: GroebnerLimits,
) -> Result<GroebnerBasis> {
    let mut basis: Vec<Element> = Vec::new();
    let mut steps = 0usize;
    for g in generators {
        if !Universe::same(universe, g.universe()) {
            return Err(Error::Universe(
                "generator outside the basis universe".into(),
            ));
        }
        let r = reduce(g, &basis, order, &mut steps, limits, None)?;
        if let Some(e) = Element::new(make_monic(&r, order), order) {
            basis.push(e);
        }
    }

    // pair queue ordered by (lcm degree, lcm order key, i, j)
    let mut queue: BTreeSet<(u64, Vec<i64>, usize, usize)> = BTreeSet::new();
    let mut pending: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut created = 0usize;
    let mut push_pair = |i: usize,
                         j: usize,
                         basis: &[Element],
                         queue: &mut BTreeSet<(u64, Vec<i64>, usize, usize)>,
                         pending: &mut BTreeSet<(usize, usize)>|
     -> Result<()> {
        created += 1;
        if created > limits.max_pairs {
            return Err(Error::ResourceExceeded(format!(
                "Buchberger pair queue exceeded {} pairs",
                limits.max_pairs
            )));
        }
        let l = lcm(&basis[i].lm, &basis[j].lm);
        queue.insert((mono_degree(&l), order.sort_key(&l), i, j));
        pending.insert((i, j));
        Ok(())
    };
    for j in 0..basis.len() {
        for i in 0..j {
            push_pair(i, j, &basis, &mut queue, &mut pending)?;
        }
    }

    while let Some((_, _, i, j)) = queue.pop_first() {
        pending.remove(&(i, j));
        if coprime(&basis[i].lm, &basis[j].lm) {
            continue;
        }
        let l = lcm(&basis[i].lm, &basis[j].lm);
        let chain = (0..basis.len()).any(|k| {
            k != i
                && k != j
                && divides(&basis[k].lm, &l)
                && !pending.contains(&(i.min(k), i.max(k)))
                && !pending.contains(&(j.min(k), j.max(k)))
        });
        if chain {
            continue;
        }
        let s = s_polynomial(&basis[i], &basis[j])?;
        let r = reduce(&s, &basis, order, &mut steps, limits, None)?;
        if let Some(e) = Element::new(make_monic(&r, order), order) {
            basis.push(e);
            let k = basis.len() - 1;
            for i in 0..k {
                push_pair(i, k, &basis, &mut queue, &mut pending)?;
            }
        }
    }

    // minimalize
    let mut keep: Vec<Element> = Vec::new();
    for (i, e) in basis.iter().enumerate() {
        let redundant = basis.iter().enumerate().any(|(j, f)| {
            j != i && divides(&f.lm, &e.lm) && (f.lm != e.lm || j < i)
        });
        if !redundant {
            keep.push(e.clone());
        }
    }
    // interreduce
    let mut reduced = Vec::with_capacity(keep.len());
    for i in 0..keep.len() {
        let others: Vec<Element> = keep
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, e)| e.clone())
            .collect();
        let r = reduce(&keep[i].poly, &others, order, &mut steps, limits, None)?;
        let e = Element::new(make_monic(&r, order), order)
            .expect("minimal basis element does not reduce to zero");
        reduced.push(e);
    }
    reduced.sort_by(|a, b| order.cmp(&b.lm, &a.lm));
    Ok(GroebnerBasis {
        universe: universe.clone(),
        order,
        elements: reduced,
        reduced: true,
        limits,
    })
}
