//! Restricted exponential homomorphisms `e = exp(T∂)`, the coaction axioms,
//! flows, invariants, and combination of exponentials.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::derivation::{Derivation, IntegrabilityVerdict, LevelOrder, Transform, Window};
use crate::element::TowerElement;
use crate::error::{Error, Result};
use crate::poly::{Poly, Rational, Universe, VarId};
use crate::series::{Evaluation, LevelSeries, MultiIndex, RestrictedSeries};
use crate::tower::TowerRing;

/// A candidate coaction given level by level: `A_n -> A_n[T]`.
pub trait LevelCoaction {
    fn tower(&self) -> &TowerRing;
    fn apply_level(&self, n: usize, p: &Poly) -> Result<LevelSeries>;
}

/// `exp(T∂)` for a derivation with an integrability certificate.
#[derive(Clone, Debug)]
pub struct RestrictedExponential {
    derivation: Derivation,
    window: Window,
    orders: Arc<Vec<LevelOrder>>,
}

impl RestrictedExponential {
    /// Attaches a certificate; anything but a certified verdict is rejected.
    pub fn new(derivation: &Derivation, verdict: &IntegrabilityVerdict) -> Result<Self> {
        match verdict {
            IntegrabilityVerdict::Certified { window, orders } => Ok(RestrictedExponential {
                derivation: derivation.clone(),
                window: *window,
                orders: Arc::new(orders.clone()),
            }),
            other => Err(Error::RequiresCertificate(format!(
                "integrability verdict is {}",
                other.status()
            ))),
        }
    }

    /// Runs the integrability procedure and attaches its certificate.
    pub fn certify(derivation: &Derivation, window: Window) -> Result<Self> {
        let verdict = derivation.check_integrable(window)?;
        Self::new(derivation, &verdict)
    }

    pub fn derivation(&self) -> &Derivation {
        &self.derivation
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn orders(&self) -> &[LevelOrder] {
        &self.orders
    }

    /// Nilpotency order of the level action on generators.
    pub fn order(&self, n: usize) -> Result<usize> {
        if n > self.window.max_level {
            return Err(Error::RequiresCertificate(format!(
                "level {n} lies beyond the certified window (max level {})",
                self.window.max_level
            )));
        }
        Ok(self
            .orders
            .iter()
            .find(|o| o.level == n)
            .map(|o| o.order)
            .unwrap_or(0))
    }

    /// `Σ_i D^(i)(p) T^i` in `A_n[T]`.
    pub fn level_series(&self, n: usize, p: &Poly) -> Result<LevelSeries> {
        let order = self.order(n)?;
        let tower = self.derivation.tower();
        let level = tower.level(n)?;
        let mut q = tower.lift(p, n)?;
        let degree = q.total_degree().unwrap_or(0) as usize;
        let cap = degree * order.saturating_sub(1) + 1;
        let mut out = LevelSeries::zero(level.universe(), 1);
        let mut i = 0u32;
        while !q.is_zero() {
            if i as usize > cap {
                return Err(Error::RequiresCertificate(format!(
                    "iterated derivatives do not vanish within {cap} steps at level {n}"
                )));
            }
            out.add_term(vec![i], q.clone());
            i += 1;
            let next = self.derivation.apply_level(n, &q)?;
            q = next.scale(&(Rational::one() / Rational::from_integer(BigInt::from(i))));
        }
        Ok(out)
    }

    /// `e(b)` as a restricted series in one parameter `T`.
    pub fn exp_series(&self, b: &TowerElement) -> Result<RestrictedSeries> {
        self.exp_series_in(b, "T")
    }

    pub fn exp_series_in(&self, b: &TowerElement, param: &str) -> Result<RestrictedSeries> {
        if !b.tower().same(self.derivation.tower()) {
            return Err(Error::universe("element of another tower"));
        }
        let (e, b) = (self.clone(), b.clone());
        RestrictedSeries::from_fn(self.derivation.tower(), &[param], move |n| {
            e.level_series(n, &b.at(n)?)
        })
    }

    /// Checks `e(b) = i_0(b)` at levels `0..=depth`.
    pub fn invariant_test(&self, b: &TowerElement, depth: usize) -> Result<InvariantOutcome> {
        let s = self.exp_series(b)?;
        for n in 0..=depth {
            let level = s.at(n)?;
            if level.t_degree().unwrap_or(0) > 0 {
                return Ok(InvariantOutcome {
                    invariant: false,
                    first_failure: Some(n),
                });
            }
        }
        Ok(InvariantOutcome {
            invariant: true,
            first_failure: None,
        })
    }

    /// `flow(t)(b) = π_(1)(e_{λ(t)}(b))`: scale the parameter by `t`, then set it to 1.
    ///
    /// A non-constant `t` must be invariant to `depth`.
    pub fn flow(&self, t: &Evaluation, b: &TowerElement, depth: usize) -> Result<TowerElement> {
        let tower = self.derivation.tower();
        let t = match t {
            Evaluation::Rational(q) => TowerElement::constant(tower, q.clone()),
            Evaluation::Element(e) => {
                let outcome = self.invariant_test(e, depth)?;
                if let Some(n) = outcome.first_failure {
                    return Err(Error::precondition(
                        "flow",
                        format!("time {} is not invariant at level {n}", e.render_at(n)?),
                    ));
                }
                e.clone()
            }
        };
        self.exp_series(b)?.scale(&t)?.eval_ones(&[0])?.to_element()
    }

    /// The action of `t ∈ G_a` on a function `f` of the dual-coordinate
    /// fixture, evaluated at a rational point: `(t·f)(x0)` computed through the
    /// tower versus `f(exp(-tδ)(x)(x0))` computed in the ring.
    pub fn orbit_evaluate(&self, t: &Rational, f: &Poly, x0: &[Rational]) -> Result<OrbitRecord> {
        let tower = self.derivation.tower();
        let data = tower
            .dual_data()
            .ok_or_else(|| Error::precondition("orbit_evaluate", "tower is not a dual-coordinate tower"))?
            .clone();
        let ring = data.ring().clone();
        if x0.len() != ring.len() {
            return Err(Error::universe("evaluation point has the wrong dimension"));
        }
        let f = f.embed(&ring)?;
        let mut level = None;
        for n in 0..=self.window.max_level {
            if let Some(c) = data.coordinates(&f, n)? {
                level = Some((n, c));
                break;
            }
        }
        let (n, coords) = level.ok_or_else(|| {
            Error::precondition(
                "orbit_evaluate",
                format!("{f} does not lie in the exhaustion up to level {}", self.window.max_level),
            )
        })?;
        let lv = tower.level(n)?;
        let neg_t = -t.clone();
        let point: HashMap<VarId, Rational> = lv
            .universe()
            .vars()
            .iter()
            .cloned()
            .zip(coords.iter().cloned())
            .collect();
        let basis = data.basis(n)?;
        let mut moved = Poly::zero(&ring);
        for (i, b) in basis.iter().enumerate() {
            let xi = lv.var(&lv.universe().vars()[i])?;
            let image = self.level_series(n, &xi)?.eval_at(&lv.constant(neg_t.clone())?, &lv)?;
            let coord = evaluate(&image, |v| point.get(v).cloned())?;
            moved = moved.checked_add(&b.scale(&coord))?;
        }
        let x0_map: HashMap<VarId, Rational> = ring.vars().iter().cloned().zip(x0.iter().cloned()).collect();
        let through_tower = evaluate(&moved, |v| x0_map.get(v).cloned())?;

        let mut shifted = HashMap::new();
        for v in ring.vars() {
            let mut acc = Poly::zero(&ring);
            let mut term = Poly::var(&ring, v)?;
            let mut k = 0u32;
            while !term.is_zero() {
                if k > 256 {
                    return Err(Error::NotLocallyNilpotent {
                        generator: v.to_string(),
                        bound: 256,
                    });
                }
                acc = acc.checked_add(&term)?;
                k += 1;
                term = data
                    .apply_delta(&term)?
                    .scale(&(neg_t.clone() / Rational::from_integer(BigInt::from(k))));
            }
            shifted.insert(v.clone(), evaluate(&acc, |w| x0_map.get(w).cloned())?);
        }
        let direct = evaluate(&f, |v| shifted.get(v).cloned())?;
        Ok(OrbitRecord {
            level: n,
            through_tower: through_tower.clone(),
            direct: direct.clone(),
            agree: through_tower == direct,
        })
    }

    /// Builds a new exponential from this one, auditing preconditions and the
    /// defining identity of the combination at levels up to `depth`.
    pub fn combine(&self, mode: &Combine, depth: usize) -> Result<RestrictedExponential> {
        let tower = self.derivation.tower().clone();
        let first = tower.first_level();
        match mode {
            Combine::Conjugate { alpha, alpha_inv } => {
                let alpha = Arc::new(alpha.clone());
                let alpha_inv = Arc::new(alpha_inv.clone());
                for n in first..=depth {
                    let level = tower.level(n)?;
                    for v in level.universe().vars() {
                        let x = level.var(v)?;
                        for (a, b, label) in [(&alpha, &alpha_inv, "α∘α⁻¹"), (&alpha_inv, &alpha, "α⁻¹∘α")] {
                            let there = apply_assignment(&tower, n, &x, b)?;
                            let back = apply_assignment(&tower, n, &there, a)?;
                            if back != x {
                                return Err(Error::precondition(
                                    "conjugate",
                                    format!("{label}({v}) = {} at level {n}", level.render(&back)),
                                ));
                            }
                        }
                    }
                }
                let (base, t2, a2, ai2) = (self.derivation.clone(), tower.clone(), alpha.clone(), alpha_inv.clone());
                let derivation = Derivation::new(
                    &tower,
                    move |v| {
                        let (base, t3, a3, ai3, v) = (base.clone(), t2.clone(), a2.clone(), ai2.clone(), v.clone());
                        Ok(TowerElement::from_fn(&t2, move |n| {
                            let level = t3.level(n)?;
                            let pre = apply_assignment(&t3, n, &level.var(&v)?, &ai3)?;
                            apply_assignment(&t3, n, &base.apply_level(n, &pre)?, &a3)
                        }))
                    },
                    Some(0),
                    self.derivation.config(),
                )?;
                let combined = RestrictedExponential::certify(&derivation, self.window)?;
                for n in first..=depth.min(self.window.max_level) {
                    let level = tower.level(n)?;
                    for v in level.universe().vars() {
                        let x = level.var(v)?;
                        let pre = apply_assignment(&tower, n, &x, &alpha_inv)?;
                        let base = self.level_series(n, &pre)?;
                        let mut expected = LevelSeries::zero(level.universe(), 1);
                        for (i, c) in base.terms() {
                            expected.add_term(i.clone(), apply_assignment(&tower, n, c, &alpha)?);
                        }
                        let got = combined.level_series(n, &x)?;
                        if got != expected.normalize(&level)? {
                            return Err(Error::precondition(
                                "conjugate",
                                format!("(α⊗id)∘e∘α⁻¹ and exp(T α∂α⁻¹) differ on {v} at level {n}"),
                            ));
                        }
                    }
                }
                Ok(combined)
            }
            Combine::ComposeCommuting(other) => {
                let sum = self
                    .derivation
                    .derive_transform(&Transform::SumCommuting(other.derivation.clone()), depth)?;
                let window = Window {
                    max_level: self.window.max_level.min(other.window.max_level),
                    max_power: self.window.max_power + other.window.max_power,
                };
                let combined = RestrictedExponential::certify(&sum, window)?;
                for n in first..=depth.min(window.max_level) {
                    let level = tower.level(n)?;
                    for v in level.universe().vars() {
                        let x = level.var(v)?;
                        let inner = other.level_series(n, &x)?;
                        let mut expected = LevelSeries::zero(level.universe(), 1);
                        for (j, c) in inner.terms() {
                            for (i, d) in self.level_series(n, c)?.terms() {
                                expected.add_term(vec![i[0] + j[0]], d.clone());
                            }
                        }
                        if combined.level_series(n, &x)? != expected.normalize(&level)? {
                            return Err(Error::precondition(
                                "compose_commuting",
                                format!("Δ∘(e⊗id)∘e' and exp(T(∂+∂')) differ on {v} at level {n}"),
                            ));
                        }
                    }
                }
                Ok(combined)
            }
        }
    }
}

impl LevelCoaction for RestrictedExponential {
    fn tower(&self) -> &TowerRing {
        self.derivation.tower()
    }

    fn apply_level(&self, n: usize, p: &Poly) -> Result<LevelSeries> {
        self.level_series(n, p)
    }
}

/// Ways of combining exponentials.
#[derive(Clone, Debug)]
pub enum Combine {
    /// `(α⊗id)∘e∘α⁻¹` for an automorphism given by generator images.
    Conjugate {
        alpha: Vec<(VarId, Poly)>,
        alpha_inv: Vec<(VarId, Poly)>,
    },
    /// `Δ∘(e⊗id)∘e'` for an exponential whose derivation commutes with this one.
    ComposeCommuting(RestrictedExponential),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantOutcome {
    pub invariant: bool,
    pub first_failure: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitRecord {
    pub level: usize,
    pub through_tower: Rational,
    pub direct: Rational,
    pub agree: bool,
}

type ImageRule = dyn Fn(&VarId, usize) -> Result<Option<Vec<(u32, Poly)>>> + Send + Sync;

/// A homomorphism `A -> A[T]` given by generator images `v ↦ Σ c_i T^i`;
/// generators without an image are fixed.
#[derive(Clone)]
pub struct SubstitutionCoaction {
    tower: TowerRing,
    images: Arc<ImageRule>,
}

impl std::fmt::Debug for SubstitutionCoaction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SubstitutionCoaction({:?})", self.tower)
    }
}

impl SubstitutionCoaction {
    /// Fixed polynomial images in tower generators.
    pub fn new(tower: &TowerRing, images: Vec<(VarId, Vec<(u32, Poly)>)>) -> Result<Self> {
        for (v, _) in &images {
            if !tower.has_generator(v) {
                return Err(Error::universe(format!("{v} is not a generator")));
            }
        }
        let map: HashMap<VarId, Vec<(u32, Poly)>> = images.into_iter().collect();
        Ok(Self::from_fn(tower, move |v, _| Ok(map.get(v).cloned())))
    }

    /// Images computed per level; `None` fixes the generator.
    pub fn from_fn(
        tower: &TowerRing,
        images: impl Fn(&VarId, usize) -> Result<Option<Vec<(u32, Poly)>>> + Send + Sync + 'static,
    ) -> Self {
        SubstitutionCoaction {
            tower: tower.clone(),
            images: Arc::new(images),
        }
    }
}

impl LevelCoaction for SubstitutionCoaction {
    fn tower(&self) -> &TowerRing {
        &self.tower
    }

    fn apply_level(&self, n: usize, p: &Poly) -> Result<LevelSeries> {
        let level = self.tower.level(n)?;
        let p = self.tower.lift(p, n)?;
        let mut images: HashMap<VarId, LevelSeries> = HashMap::new();
        for v in p.occurring_vars() {
            let mut s = LevelSeries::zero(level.universe(), 1);
            match (self.images)(&v, n)? {
                Some(terms) => {
                    for (i, c) in terms {
                        s.add_term(vec![i], self.tower.lift(&c, n)?);
                    }
                }
                None => s.add_term(vec![0], level.var(&v)?),
            }
            images.insert(v, s);
        }
        let mut out = LevelSeries::zero(level.universe(), 1);
        let vars = p.universe().vars().to_vec();
        for (m, c) in p.terms() {
            let mut term = LevelSeries::constant(level.constant(c.clone())?, 1);
            for (k, &e) in m.iter().enumerate() {
                for _ in 0..e {
                    term = term.mul(&images[&vars[k]], &level)?;
                }
            }
            out = out.add(&term)?;
        }
        out.normalize(&level)
    }
}

/// The first violation found by [`verify_coaction`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoactionViolation {
    pub law: &'static str,
    pub sample: usize,
    pub level: usize,
    /// `[i]` for the counit; `[i, j]` for the coefficient of `T^i T'^j`.
    pub index: MultiIndex,
    /// Left side minus right side at that coefficient.
    pub difference: Poly,
    pub rendered: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoactionReport {
    pub passed: bool,
    pub checks: usize,
    pub violation: Option<CoactionViolation>,
}

/// Checks the counit law and coassociativity `(e⊗id)∘e = (id⊗m)∘e` on
/// samples at levels up to `depth`, exactly.
pub fn verify_coaction(
    e: &dyn LevelCoaction,
    samples: &[TowerElement],
    depth: usize,
) -> Result<CoactionReport> {
    let tower = e.tower();
    let mut checks = 0;
    for n in tower.first_level()..=depth {
        let level = tower.level(n)?;
        for (k, s) in samples.iter().enumerate() {
            if !s.tower().same(tower) {
                return Err(Error::universe("sample from another tower"));
            }
            let b = s.at(n)?;
            let series = e.apply_level(n, &b)?;
            checks += 1;
            let counit = series.counit();
            if counit != b {
                let difference = counit.checked_sub(&b)?;
                return Ok(violation("counit", k, n, vec![0], difference, &level));
            }
            // (e⊗id)(Σ b_i T^i) = Σ_i e(b_i)(T') T^i
            let mut lhs = LevelSeries::zero(level.universe(), 2);
            for (i, c) in series.terms() {
                for (j, d) in e.apply_level(n, c)?.terms() {
                    lhs.add_term(vec![i[0], j[0]], d.clone());
                }
            }
            let rhs = series.comultiply(0)?;
            let diff = lhs.sub(&rhs)?.normalize(&level)?;
            let first = diff.terms().next().map(|(i, c)| (i.clone(), c.clone()));
            if let Some((index, c)) = first {
                return Ok(violation("coassociativity", k, n, index, c, &level));
            }
        }
    }
    Ok(CoactionReport {
        passed: true,
        checks,
        violation: None,
    })
}

fn violation(
    law: &'static str,
    sample: usize,
    level: usize,
    index: MultiIndex,
    difference: Poly,
    ring: &crate::tower::LevelRing,
) -> CoactionReport {
    let rendered = ring.render(&difference);
    CoactionReport {
        passed: false,
        checks: 0,
        violation: Some(CoactionViolation {
            law,
            sample,
            level,
            index,
            difference,
            rendered,
        }),
    }
}

/// Applies a generator assignment at level `n`; unassigned generators are fixed.
fn apply_assignment(tower: &TowerRing, n: usize, p: &Poly, map: &[(VarId, Poly)]) -> Result<Poly> {
    let level = tower.level(n)?;
    let mut failure = None;
    let sub = p.substitute(level.universe(), |v| {
        let image = match map.iter().find(|(w, _)| w == v) {
            Some((_, img)) => tower.lift(img, n),
            None => tower.project_var(v, n),
        };
        match image {
            Ok(img) => Some(img),
            Err(e) => {
                failure = Some(e);
                None
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    level.normal_form(&sub?)
}

/// Evaluates `p` at rational values of its variables.
fn evaluate(p: &Poly, value: impl Fn(&VarId) -> Option<Rational>) -> Result<Rational> {
    let empty = Universe::empty();
    let r = p.substitute(&empty, |v| value(v).map(|q| Poly::constant(&empty, q)))?;
    Ok(r.constant_value().unwrap_or_else(Rational::zero))
}
