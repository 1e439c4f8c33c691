//! Evaluation of script expressions to polynomials in named generators.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use indiga_core::{Poly, Rational, TowerElement, TowerRing, Universe, VarId};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::ast::{Expr, FoldOp, Pattern, Rule};

type Mono = BTreeMap<VarId, u32>;

/// A sparse polynomial over whatever generators occur in it.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Sym(BTreeMap<Mono, Rational>);

impl Sym {
    pub fn constant(c: Rational) -> Self {
        let mut s = Sym::default();
        s.add_term(Mono::new(), c);
        s
    }

    pub fn var(v: VarId) -> Self {
        let mut m = Mono::new();
        m.insert(v, 1);
        let mut s = Sym::default();
        s.add_term(m, Rational::one());
        s
    }

    fn add_term(&mut self, m: Mono, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.0.entry(m.clone()).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.0.remove(&m);
        }
    }

    pub fn from_poly(p: &Poly) -> Self {
        let vars = p.universe().vars();
        let mut s = Sym::default();
        for (m, c) in p.terms() {
            let mono = vars
                .iter()
                .zip(m)
                .filter(|(_, e)| **e > 0)
                .map(|(v, e)| (v.clone(), *e))
                .collect();
            s.add_term(mono, c.clone());
        }
        s
    }

    /// The polynomial over exactly the occurring generators, in sorted order.
    pub fn to_poly(&self) -> Result<Poly, String> {
        let mut vars: Vec<VarId> = self.0.keys().flat_map(|m| m.keys().cloned()).collect();
        vars.sort();
        vars.dedup();
        let u: Arc<Universe> = Universe::new(vars.clone()).map_err(|e| e.to_string())?;
        let terms = self.0.iter().map(|(m, c)| {
            let exps = vars.iter().map(|v| m.get(v).copied().unwrap_or(0)).collect();
            (exps, c.clone())
        });
        Ok(Poly::from_terms(&u, terms))
    }

    pub fn constant_value(&self) -> Option<Rational> {
        match self.0.len() {
            0 => Some(Rational::zero()),
            1 => self.0.get(&Mono::new()).cloned(),
            _ => None,
        }
    }

    fn integer(&self, what: &str) -> Result<BigInt, String> {
        match self.constant_value() {
            Some(q) if q.is_integer() => Ok(q.to_integer()),
            _ => Err(format!("{what} must be an integer constant")),
        }
    }

    fn add(&self, other: &Sym) -> Sym {
        let mut out = self.clone();
        for (m, c) in &other.0 {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    fn scale(&self, k: &Rational) -> Sym {
        let mut out = Sym::default();
        for (m, c) in &self.0 {
            out.add_term(m.clone(), c * k);
        }
        out
    }

    fn mul(&self, other: &Sym) -> Sym {
        let mut out = Sym::default();
        for (m1, c1) in &self.0 {
            for (m2, c2) in &other.0 {
                let mut m = m1.clone();
                for (v, e) in m2 {
                    *m.entry(v.clone()).or_insert(0) += e;
                }
                out.add_term(m, c1 * c2);
            }
        }
        out
    }

    /// Splits off the powers of `t`: `Σ c_i t^i ↦ [(i, c_i)]`.
    pub fn split_by(&self, t: &VarId) -> BTreeMap<u32, Sym> {
        let mut out: BTreeMap<u32, Sym> = BTreeMap::new();
        for (m, c) in &self.0 {
            let mut m = m.clone();
            let i = m.remove(t).unwrap_or(0);
            out.entry(i).or_default().add_term(m, c.clone());
        }
        out
    }
}

/// Looks up free identifiers during evaluation.
pub trait Resolver {
    fn name(&self, name: &str) -> Result<Option<Sym>, String>;
    fn indexed(&self, family: &str, index: u32) -> Result<Option<Sym>, String>;
}

const FOLD_LIMIT: i64 = 4096;

/// Evaluates `e` with the integer bindings `ints` (innermost last).
pub fn eval(e: &Expr, r: &dyn Resolver, ints: &mut Vec<(String, BigInt)>) -> Result<Sym, String> {
    Ok(match e {
        Expr::Num(n) => Sym::constant(Rational::from_integer(n.clone())),
        Expr::Name(name) => {
            if let Some((_, v)) = ints.iter().rev().find(|(k, _)| k == name) {
                return Ok(Sym::constant(Rational::from_integer(v.clone())));
            }
            r.name(name)?.ok_or_else(|| format!("unknown name '{name}'"))?
        }
        Expr::Indexed(family, idx) => {
            let i = eval(idx, r, ints)?.integer("an index")?;
            let i = i
                .to_u32()
                .ok_or_else(|| format!("index {family}[{i}] is out of range"))?;
            r.indexed(family, i)?
                .ok_or_else(|| format!("unknown generator {family}[{i}]"))?
        }
        Expr::Neg(a) => eval(a, r, ints)?.scale(&-Rational::one()),
        Expr::Add(a, b) => eval(a, r, ints)?.add(&eval(b, r, ints)?),
        Expr::Sub(a, b) => eval(a, r, ints)?.add(&eval(b, r, ints)?.scale(&-Rational::one())),
        Expr::Mul(a, b) => eval(a, r, ints)?.mul(&eval(b, r, ints)?),
        Expr::Div(a, b) => {
            let d = eval(b, r, ints)?
                .constant_value()
                .ok_or("division is only by constants")?;
            if d.is_zero() {
                return Err("division by zero".into());
            }
            eval(a, r, ints)?.scale(&d.recip())
        }
        Expr::Pow(a, b) => {
            let k = eval(b, r, ints)?.integer("an exponent")?;
            if k.is_negative() || k > BigInt::from(1024) {
                return Err(format!("exponent {k} is out of range"));
            }
            let base = eval(a, r, ints)?;
            let mut acc = Sym::constant(Rational::one());
            for _ in 0..k.to_u32().expect("bounded exponent") {
                acc = acc.mul(&base);
            }
            acc
        }
        Expr::Fold { op, var, lo, hi, body } => {
            let lo = eval(lo, r, ints)?.integer("a lower bound")?;
            let hi = eval(hi, r, ints)?.integer("an upper bound")?;
            if &hi - &lo > BigInt::from(FOLD_LIMIT) {
                return Err(format!("range {lo}..{hi} is too long"));
            }
            let mut acc = match op {
                FoldOp::Sum => Sym::default(),
                FoldOp::Prod => Sym::constant(Rational::one()),
            };
            let mut i = lo;
            while i <= hi {
                ints.push((var.clone(), i.clone()));
                let v = eval(body, r, ints);
                ints.pop();
                let v = v?;
                acc = match op {
                    FoldOp::Sum => acc.add(&v),
                    FoldOp::Prod => acc.mul(&v),
                };
                i += 1;
            }
            acc
        }
    })
}

/// Names only: the plain polynomial ring on `vars`, plus an optional extra parameter.
pub struct RingScope<'a> {
    pub vars: &'a [String],
    pub extra: Option<&'a str>,
}

impl Resolver for RingScope<'_> {
    fn name(&self, name: &str) -> Result<Option<Sym>, String> {
        if self.vars.iter().any(|v| v == name) || self.extra == Some(name) {
            Ok(Some(Sym::var(VarId::named(name))))
        } else {
            Ok(None)
        }
    }

    fn indexed(&self, _family: &str, _index: u32) -> Result<Option<Sym>, String> {
        Ok(None)
    }
}

/// Bound elements, tower generators and the level variable `n`, at level `n`.
pub struct TowerScope<'a> {
    pub tower: &'a TowerRing,
    pub elements: &'a HashMap<String, TowerElement>,
    pub level: usize,
    pub extra: Option<&'a str>,
}

impl Resolver for TowerScope<'_> {
    fn name(&self, name: &str) -> Result<Option<Sym>, String> {
        if self.extra == Some(name) {
            return Ok(Some(Sym::var(VarId::named(name))));
        }
        if let Some(e) = self.elements.get(name) {
            let p = e.at(self.level).map_err(|e| e.to_string())?;
            return Ok(Some(Sym::from_poly(&p)));
        }
        let v = VarId::named(name);
        if self.tower.has_generator(&v) {
            return Ok(Some(Sym::var(v)));
        }
        if name == "n" {
            return Ok(Some(Sym::constant(Rational::from_integer(self.level.into()))));
        }
        Ok(None)
    }

    fn indexed(&self, family: &str, index: u32) -> Result<Option<Sym>, String> {
        let v = VarId::indexed(family, index);
        Ok(self.tower.has_generator(&v).then(|| Sym::var(v)))
    }
}

fn core_error(msg: String) -> indiga_core::Error {
    indiga_core::Error::Presentation(msg)
}

/// The element of `tower` given by `expr`, evaluated afresh at every level.
pub fn element(
    tower: &TowerRing,
    elements: &HashMap<String, TowerElement>,
    expr: &Expr,
    ints: Vec<(String, BigInt)>,
) -> TowerElement {
    let (t, env, expr) = (tower.clone(), elements.clone(), expr.clone());
    TowerElement::from_fn(tower, move |n| {
        let scope = TowerScope {
            tower: &t,
            elements: &env,
            level: n,
            extra: None,
        };
        let mut ints = ints.clone();
        eval(&expr, &scope, &mut ints)
            .and_then(|s| s.to_poly())
            .map_err(core_error)
    })
}

/// Evaluates `expr` as a polynomial over the plain ring `vars`.
pub fn ring_poly(universe: &Arc<Universe>, expr: &Expr, extra: Option<&str>) -> Result<Poly, String> {
    let vars: Vec<String> = universe.vars().iter().map(|v| v.to_string()).collect();
    let scope = RingScope { vars: &vars, extra };
    let s = eval(expr, &scope, &mut Vec::new())?;
    s.to_poly()?.embed(universe).map_err(|e| e.to_string())
}

/// The rule matching `v`: literal indices first, then affine patterns, then names.
/// Returns the body and the integer binding of the pattern variable.
pub fn match_rule<'r>(rules: &'r [Rule], v: &VarId) -> Option<(&'r Expr, Vec<(String, BigInt)>)> {
    let (name, index) = (v.name(), v.index());
    for r in rules {
        if let Pattern::Literal(f, k) = &r.pattern {
            if f == name && index == Some(*k) {
                return Some((&r.body, Vec::new()));
            }
        }
    }
    if let Some(k) = index {
        let k = k as i64;
        for r in rules {
            if let Pattern::Affine { family, var, a, b } = &r.pattern {
                if family == name && (k - b) >= 0 && (k - b) % a == 0 {
                    return Some((&r.body, vec![(var.clone(), BigInt::from((k - b) / a))]));
                }
            }
        }
    }
    for r in rules {
        if let Pattern::Named(f) = &r.pattern {
            if f == name && index.is_none() {
                return Some((&r.body, Vec::new()));
            }
        }
    }
    None
}
