//! Continuous derivations on towers, their iterates, and the integrability
//! decision procedure.
//!
//! A derivation is fixed by the images of the tower generators. On a
//! polynomial `p` in generators it acts by the Leibniz extension
//! `Σ_v (∂p/∂v) ∂(v)`, reduced in the target level. A shift `d` with
//! `∂(𝔞_{n+d}) ⊆ 𝔞_n` makes `∂(a)_n` computable from `a_{n+d}`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::element::TowerElement;
use crate::error::{Error, Result};
use crate::groebner::{buchberger, GroebnerLimits};
use crate::linalg::{kernel, to_sparse};
use crate::poly::{MonomialOrder, Poly, Rational, Universe, VarId};
use crate::tower::{DualExhaustion, Exhaustion, TowerRing};

/// How far construction-time audits look.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DerivationConfig {
    /// Levels audited for well-definedness.
    pub audit_depth: usize,
    /// Largest shift tried when none is declared.
    pub max_shift: usize,
    /// Members of infinite ideal-generator families examined per level.
    pub family_window: usize,
}

impl Default for DerivationConfig {
    fn default() -> Self {
        DerivationConfig {
            audit_depth: 6,
            max_shift: 4,
            family_window: 6,
        }
    }
}

type ImageFn = dyn Fn(&VarId) -> Result<TowerElement> + Send + Sync;

struct Inner {
    tower: TowerRing,
    images: Box<ImageFn>,
    cache: Mutex<HashMap<VarId, TowerElement>>,
    shift: usize,
    config: DerivationConfig,
}

/// A continuous derivation of a tower.
#[derive(Clone)]
pub struct Derivation {
    inner: Arc<Inner>,
}

impl fmt::Debug for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Derivation(shift={}, {:?})", self.inner.shift, self.inner.tower)
    }
}

/// Search window of the integrability procedure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub max_level: usize,
    pub max_power: usize,
}

impl Default for Window {
    fn default() -> Self {
        Window {
            max_level: 6,
            max_power: 12,
        }
    }
}

/// Nilpotency order of the level action: the least `N` with `∂^N` killing every generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelOrder {
    pub level: usize,
    pub order: usize,
}

/// An element `g ∈ 𝔞_j` whose `power`-th derivative is nonzero at `level`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EscapeWitness {
    pub generator: Poly,
    pub ideal_level: usize,
    pub power: usize,
    pub level: usize,
    pub image: Poly,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IntegrabilityVerdict {
    /// The derivation preserves every level ideal and acts nilpotently on each level.
    Certified { window: Window, orders: Vec<LevelOrder> },
    /// For every `j` in the window some element of `𝔞_j` escapes `𝔞_level` under a power of `∂`.
    Refuted {
        window: Window,
        shift: usize,
        level: usize,
        family: Vec<EscapeWitness>,
    },
    Inconclusive { window: Window, shift: usize, reason: String },
}

impl IntegrabilityVerdict {
    pub fn status(&self) -> &'static str {
        match self {
            IntegrabilityVerdict::Certified { .. } => "certified",
            IntegrabilityVerdict::Refuted { .. } => "refuted",
            IntegrabilityVerdict::Inconclusive { .. } => "inconclusive",
        }
    }

    pub fn is_certified(&self) -> bool {
        matches!(self, IntegrabilityVerdict::Certified { .. })
    }
}

/// Constructions producing a new derivation from an old one.
#[derive(Clone, Debug)]
pub enum Transform {
    /// `f∂` for an invariant `f`.
    ScaleByInvariant(TowerElement),
    /// `∂ + ∂'` for a commuting `∂'`.
    SumCommuting(Derivation),
    /// The induced derivation on the quotient by the given generators.
    Quotient(Vec<TowerElement>),
    /// The induced derivation on the completed localization at an invariant.
    Localize(TowerElement),
}

impl Transform {
    pub fn mode(&self) -> &'static str {
        match self {
            Transform::ScaleByInvariant(_) => "scale_by_invariant",
            Transform::SumCommuting(_) => "sum_commuting",
            Transform::Quotient(_) => "quotient",
            Transform::Localize(_) => "localize",
        }
    }
}

fn factorial(i: usize) -> Rational {
    let mut acc = BigInt::one();
    for k in 2..=i {
        acc *= BigInt::from(k);
    }
    Rational::from_integer(acc)
}

impl Derivation {
    /// Builds the derivation with generator images `images`, auditing that
    /// relations are respected and finding (or checking) the shift.
    pub fn new(
        tower: &TowerRing,
        images: impl Fn(&VarId) -> Result<TowerElement> + Send + Sync + 'static,
        shift: Option<usize>,
        config: DerivationConfig,
    ) -> Result<Self> {
        let probe = Self::assemble(tower, Box::new(images), 0, config);
        let first = tower.first_level();
        let depth = config.audit_depth.max(first);

        for r in tower.presentation_relations() {
            for n in first..=depth {
                if !probe.apply_poly(&r, n)?.is_zero() {
                    return Err(Error::IllDefinedDerivation {
                        generator: r.to_string(),
                        level: n,
                    });
                }
            }
        }

        let candidates: Vec<usize> = match shift {
            Some(d) => vec![d],
            None => (0..=config.max_shift).collect(),
        };
        let mut found = None;
        let mut failure = None;
        'shift: for d in candidates {
            for n in first..=depth {
                for g in tower.filtration_generators(n + d, config.family_window)? {
                    if !probe.apply_poly(&g, n)?.is_zero() {
                        failure = Some((g.to_string(), n));
                        continue 'shift;
                    }
                }
            }
            found = Some(d);
            break;
        }
        let Some(d) = found else {
            let (generator, level) = failure.expect("a failing shift records its witness");
            return Err(Error::IllDefinedDerivation { generator, level });
        };

        let Inner { images, cache, .. } = Arc::try_unwrap(probe.inner)
            .unwrap_or_else(|_| unreachable!("probe derivation is not shared"));
        let der = Derivation {
            inner: Arc::new(Inner {
                tower: tower.clone(),
                images,
                cache,
                shift: d,
                config,
            }),
        };
        for (k, rel) in tower.element_relations()?.iter().enumerate() {
            let image = der.apply(rel);
            for n in first..=depth {
                if !image.at(n)?.is_zero() {
                    return Err(Error::IllDefinedDerivation {
                        generator: format!("relation #{k} ({})", rel.render_at(n)?),
                        level: n,
                    });
                }
            }
        }
        Ok(der)
    }

    fn assemble(tower: &TowerRing, images: Box<ImageFn>, shift: usize, config: DerivationConfig) -> Self {
        Derivation {
            inner: Arc::new(Inner {
                tower: tower.clone(),
                images,
                cache: Mutex::new(HashMap::new()),
                shift,
                config,
            }),
        }
    }

    /// Images given by polynomials in generators; generators without a listed
    /// image are sent to `fallback(v)` if provided, otherwise rejected.
    pub fn from_polys(
        tower: &TowerRing,
        images: Vec<(VarId, Poly)>,
        shift: Option<usize>,
        config: DerivationConfig,
    ) -> Result<Self> {
        let map: HashMap<VarId, Poly> = images.into_iter().collect();
        let t = tower.clone();
        Self::new(
            tower,
            move |v| match map.get(v) {
                Some(p) => Ok(TowerElement::from_poly(&t, p.clone())),
                None => Err(Error::Presentation(format!("no image given for generator {v}"))),
            },
            shift,
            config,
        )
    }

    /// The zero derivation.
    pub fn zero(tower: &TowerRing) -> Result<Self> {
        let t = tower.clone();
        Self::new(tower, move |_| Ok(TowerElement::zero(&t)), Some(0), DerivationConfig::default())
    }

    pub fn tower(&self) -> &TowerRing {
        &self.inner.tower
    }

    pub fn shift(&self) -> usize {
        self.inner.shift
    }

    pub fn config(&self) -> DerivationConfig {
        self.inner.config
    }

    /// `∂(v)` for a generator `v`.
    pub fn image(&self, v: &VarId) -> Result<TowerElement> {
        if let Some(e) = self.inner.cache.lock().expect("image cache poisoned").get(v) {
            return Ok(e.clone());
        }
        if !self.inner.tower.has_generator(v) {
            return Err(Error::universe(format!("{v} is not a generator")));
        }
        let e = (self.inner.images)(v)?;
        if !e.tower().same(&self.inner.tower) {
            return Err(Error::universe(format!("image of {v} lives in another tower")));
        }
        self.inner
            .cache
            .lock()
            .expect("image cache poisoned")
            .insert(v.clone(), e.clone());
        Ok(e)
    }

    /// `∂(p)` at level `n` for a polynomial `p` in tower generators, read as
    /// an element of the limit ring.
    pub fn apply_poly(&self, p: &Poly, n: usize) -> Result<Poly> {
        let tower = &self.inner.tower;
        let level = tower.level(n)?;
        let mut acc = level.zero();
        for v in p.occurring_vars() {
            let img = self.image(&v)?.at(n)?;
            if img.is_zero() {
                continue;
            }
            let dv = tower.lift(&p.formal_partial(&v)?, n)?;
            acc = acc.checked_add(&dv.checked_mul(&img)?)?;
        }
        level.normal_form(&acc)
    }

    /// The level action `A_n -> A_n`; requires a filtration-preserving derivation.
    pub fn apply_level(&self, n: usize, p: &Poly) -> Result<Poly> {
        if self.inner.shift != 0 {
            return Err(Error::RequiresCertificate(format!(
                "derivation with shift {} has no level action",
                self.inner.shift
            )));
        }
        self.apply_poly(p, n)
    }

    /// `∂(a)` as a lazily promoted element.
    pub fn apply(&self, a: &TowerElement) -> TowerElement {
        let der = self.clone();
        let a = a.clone();
        let d = self.inner.shift;
        TowerElement::from_fn(self.tower(), move |n| der.apply_poly(&a.at(n + d)?, n))
    }

    /// `∂^i(a)` at level `n`.
    pub fn apply_power(&self, i: usize, a: &TowerElement, n: usize) -> Result<Poly> {
        if !a.tower().same(self.tower()) {
            return Err(Error::universe("element of another tower"));
        }
        let d = self.inner.shift;
        let mut p = a.at(n + i * d)?;
        for k in 0..i {
            p = self.apply_poly(&p, n + (i - k - 1) * d)?;
        }
        Ok(p)
    }

    /// `D^(i)(a) = ∂^i(a)/i!` at level `n`.
    pub fn higher_component(&self, i: usize, a: &TowerElement, n: usize) -> Result<Poly> {
        Ok(self.apply_power(i, a, n)?.scale(&(Rational::one() / factorial(i))))
    }

    /// `D^(i)(a)` as a lazily promoted element.
    pub fn higher_element(&self, i: usize, a: &TowerElement) -> TowerElement {
        let der = self.clone();
        let a = a.clone();
        TowerElement::from_fn(self.tower(), move |n| der.higher_component(i, &a, n))
    }

    /// Decides topological integrability within `window`.
    ///
    /// Certification: shift 0 and every level's generators are killed by a
    /// power of `∂` at most `max_power`. Refutation: at some level `i`, every
    /// `𝔞_j` with `i <= j <= max_level` contains a generator `g` with
    /// `∂^p(g) ∉ 𝔞_i` for some `p <= max_power`.
    pub fn check_integrable(&self, window: Window) -> Result<IntegrabilityVerdict> {
        let tower = self.tower();
        let first = tower.first_level();
        let shift = self.inner.shift;
        let mut reason = if shift == 0 {
            None
        } else {
            Some(format!("derivation only satisfies ∂(𝔞_(n+{shift})) ⊆ 𝔞_n"))
        };

        if reason.is_none() {
            let mut orders = Vec::new();
            'levels: for i in first..=window.max_level {
                let level = tower.level(i)?;
                let mut order = 0;
                for v in level.universe().vars() {
                    let mut p = level.var(v)?;
                    let mut k = 0;
                    while !p.is_zero() {
                        if k == window.max_power {
                            reason = Some(format!(
                                "∂^{} of {v} is nonzero at level {i}",
                                window.max_power
                            ));
                            break 'levels;
                        }
                        p = self.apply_level(i, &p)?;
                        k += 1;
                    }
                    order = order.max(k);
                }
                orders.push(LevelOrder { level: i, order });
            }
            if reason.is_none() {
                return Ok(IntegrabilityVerdict::Certified { window, orders });
            }
        }

        let extra = 2 * window.max_power;
        for i in first..=window.max_level {
            let mut family = Vec::new();
            for j in i..=window.max_level {
                match self.find_escape(i, j, extra, window.max_power)? {
                    Some(w) => family.push(w),
                    None => break,
                }
            }
            if family.len() == window.max_level - i + 1 {
                return Ok(IntegrabilityVerdict::Refuted {
                    window,
                    shift,
                    level: i,
                    family,
                });
            }
        }
        Ok(IntegrabilityVerdict::Inconclusive {
            window,
            shift,
            reason: reason.unwrap_or_default(),
        })
    }

    fn find_escape(&self, i: usize, j: usize, extra: usize, max_power: usize) -> Result<Option<EscapeWitness>> {
        for g in self.tower().filtration_generators(j, extra)? {
            let elem = TowerElement::from_poly(self.tower(), g.clone());
            for p in 1..=max_power {
                let image = self.apply_power(p, &elem, i)?;
                if !image.is_zero() {
                    return Ok(Some(EscapeWitness {
                        generator: g,
                        ideal_level: j,
                        power: p,
                        level: i,
                        image,
                    }));
                }
            }
        }
        Ok(None)
    }

    /// Basis of the kernel of `∂` on the standard monomials of level `n` of
    /// degree at most `degree_bound`.
    ///
    /// Monomials are read as polynomials in generators and differentiated at
    /// level `n + 1`, so that derivatives leaving the live variables of level
    /// `n` are not lost to truncation.
    pub fn kernel_basis(&self, n: usize, degree_bound: u32) -> Result<Vec<Poly>> {
        let level = self.tower().level(n)?;
        let monos = level.standard_monomials(degree_bound);
        let probe = n + 1;
        let mut images = Vec::with_capacity(monos.len());
        for m in &monos {
            let p = Poly::monomial(level.universe(), m.clone(), Rational::one());
            images.push(to_sparse(&self.apply_poly(&p, probe)?));
        }
        let mut basis = Vec::new();
        for v in kernel(&images) {
            let p = Poly::from_terms(
                level.universe(),
                v.into_iter().map(|(j, c)| (monos[j].clone(), c)),
            );
            basis.push(level.normal_form(&p)?);
        }
        Ok(basis)
    }

    /// Applies a derived construction, auditing its precondition at levels up to `depth`.
    pub fn derive_transform(&self, mode: &Transform, depth: usize) -> Result<Derivation> {
        let tower = self.tower().clone();
        let first = tower.first_level();
        let config = self.inner.config;
        let invariant_audit = |f: &TowerElement, name: &str| -> Result<()> {
            if !f.tower().same(&tower) {
                return Err(Error::universe("element of another tower"));
            }
            let df = self.apply(f);
            for n in first..=depth {
                let v = df.at(n)?;
                if !v.is_zero() {
                    return Err(Error::precondition(
                        name,
                        format!("∂(f) = {} at level {n}", tower.level(n)?.render(&v)),
                    ));
                }
            }
            Ok(())
        };
        match mode {
            Transform::ScaleByInvariant(f) => {
                invariant_audit(f, mode.mode())?;
                let (base, f) = (self.clone(), f.clone());
                Derivation::new(
                    &tower,
                    move |v| f.mul(&base.image(v)?),
                    Some(self.shift()),
                    config,
                )
            }
            Transform::SumCommuting(other) => {
                if !other.tower().same(&tower) {
                    return Err(Error::universe("derivations on different towers"));
                }
                for n in first..=depth {
                    let level = tower.level(n)?;
                    for v in level.universe().vars() {
                        let c = self
                            .apply(&other.image(v)?)
                            .sub(&other.apply(&self.image(v)?))?
                            .at(n)?;
                        if !c.is_zero() {
                            return Err(Error::precondition(
                                mode.mode(),
                                format!("[∂, ∂']({v}) = {} at level {n}", level.render(&c)),
                            ));
                        }
                    }
                }
                let (a, b) = (self.clone(), other.clone());
                Derivation::new(
                    &tower,
                    move |v| a.image(v)?.add(&b.image(v)?),
                    Some(self.shift().max(other.shift())),
                    config,
                )
            }
            Transform::Quotient(gens) => {
                let q = TowerRing::quotient(&tower, gens)?;
                for (k, g) in gens.iter().enumerate() {
                    let dg = self.apply(g);
                    for n in first..=depth {
                        let r = q.lift(&dg.at(n)?, n)?;
                        if !r.is_zero() {
                            return Err(Error::precondition(
                                mode.mode(),
                                format!(
                                    "∂(generator #{k}) reduces to {} at level {n}",
                                    q.level(n)?.render(&r)
                                ),
                            ));
                        }
                    }
                }
                let (base, qt) = (self.clone(), q.clone());
                Derivation::new(
                    &q,
                    move |v| Ok(base.image(v)?.transport(&qt)),
                    Some(self.shift()),
                    config,
                )
            }
            Transform::Localize(f) => {
                invariant_audit(f, mode.mode())?;
                let loc = TowerRing::localize(&tower, f)?;
                let w = loc.localization_var().expect("localized tower").clone();
                let (base, lt, df) = (self.clone(), loc.clone(), self.apply(f));
                Derivation::new(
                    &loc,
                    move |v| {
                        if *v == w {
                            let wv = TowerElement::generator(&lt, &w);
                            Ok(wv.pow(2).mul(&df.transport(&lt))?.neg())
                        } else {
                            Ok(base.image(v)?.transport(&lt))
                        }
                    },
                    Some(self.shift()),
                    config,
                )
            }
        }
    }
}

/// Builds the dual-coordinate tower of `R = k[ring]/(relations)` for the
/// exhaustion `V_n`, closed under the locally nilpotent derivation `δ`, and the
/// derivation `∂(X_i) = Σ_j [b_i-coefficient of δ(b_j)] X_j` dual to `δ`.
///
/// `delta` lists `δ(v)` for every ring variable; `None` means `δ = 0`.
pub fn dual_derivation(
    ring: &Arc<Universe>,
    relations: &[Poly],
    delta: Option<Vec<Poly>>,
    exhaustion: Exhaustion,
    bound: usize,
    family: &str,
) -> Result<(TowerRing, Derivation)> {
    if let Some(images) = &delta {
        let gb = buchberger(ring, relations, MonomialOrder::GrevLex, GroebnerLimits::default())?;
        for r in relations {
            let mut dr = Poly::zero(ring);
            for (v, img) in ring.vars().iter().zip(images) {
                dr = dr.checked_add(&r.formal_partial(v)?.checked_mul(img)?)?;
            }
            if !gb.normal_form(&dr)?.is_zero() {
                return Err(Error::IllDefinedDerivation {
                    generator: r.to_string(),
                    level: 0,
                });
            }
        }
    }
    let data = DualExhaustion::new(ring, relations, delta, exhaustion, bound)?;
    let tower = TowerRing::dual_coordinate(family, data);
    let data = tower.dual_data().expect("dual tower").clone();
    // δ-matrix of W_n: column j holds the coordinates of δ(b_j)
    let matrices: Arc<Mutex<HashMap<usize, Arc<Vec<Vec<Rational>>>>>> = Arc::default();
    let fam = family.to_string();
    let t = tower.clone();
    let images = move |v: &VarId| -> Result<TowerElement> {
        let i = v.index().expect("dual generators are indexed") as usize;
        let (data, matrices, fam) = (data.clone(), matrices.clone(), fam.clone());
        Ok(TowerElement::from_fn(&t, move |n| {
            let matrix = {
                let cached = matrices.lock().expect("matrix cache poisoned").get(&n).cloned();
                match cached {
                    Some(m) => m,
                    None => {
                        let mut cols = Vec::new();
                        for b in data.basis(n)? {
                            let db = data.apply_delta(&b)?;
                            let coords = data.coordinates(&db, n)?.ok_or_else(|| {
                                Error::Presentation(format!("W_{n} is not stable under the derivation"))
                            })?;
                            cols.push(coords);
                        }
                        let m = Arc::new(cols);
                        matrices.lock().expect("matrix cache poisoned").insert(n, m.clone());
                        m
                    }
                }
            };
            let vars: Vec<VarId> = (0..matrix.len() as u32).map(|j| VarId::indexed(&fam, j)).collect();
            let u = Universe::new(vars.clone())?;
            let mut out = Poly::zero(&u);
            if i < matrix.len() {
                for (j, col) in matrix.iter().enumerate() {
                    if !col[i].is_zero() {
                        out = &out + &Poly::var(&u, &vars[j])?.scale(&col[i]);
                    }
                }
            }
            Ok(out)
        }))
    };
    let der = Derivation::new(&tower, images, Some(0), DerivationConfig::default())?;
    Ok((tower, der))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;
    use crate::tower::Centers;

    fn u_adic_u2() -> (TowerRing, Derivation, TowerElement) {
        let u = VarId::named("u");
        let uni = Universe::new(vec![u.clone()]).unwrap();
        let up = Poly::var(&uni, &u).unwrap();
        let t = TowerRing::adic(&[u.clone()], &[], &[up.clone()]).unwrap();
        let d = Derivation::from_polys(&t, vec![(u.clone(), up.pow(2))], None, Default::default()).unwrap();
        let e = TowerElement::generator(&t, &u);
        (t, d, e)
    }

    #[test]
    fn second_power_and_divided_power() {
        let (t, d, u) = u_adic_u2();
        let l = t.level(6).unwrap();
        assert_eq!(l.render(&d.apply_power(2, &u, 6).unwrap()), "2*u^3");
        assert_eq!(l.render(&d.higher_component(2, &u, 6).unwrap()), "u^3");
        assert_eq!(d.apply_power(0, &u, 6).unwrap(), u.at(6).unwrap());
        assert_eq!(d.shift(), 0);
    }

    #[test]
    fn u_squared_is_certified() {
        let (_, d, _) = u_adic_u2();
        let v = d.check_integrable(Window::default()).unwrap();
        let IntegrabilityVerdict::Certified { orders, .. } = v else {
            panic!("expected certificate, got {v:?}");
        };
        assert_eq!(orders.last().unwrap(), &LevelOrder { level: 6, order: 5 });
    }

    #[test]
    fn relation_violation_is_reported() {
        let (x, y) = (VarId::named("x"), VarId::named("y"));
        let u = Universe::new(vec![x.clone(), y.clone()]).unwrap();
        let yp = Poly::var(&u, &y).unwrap();
        let t = TowerRing::discrete(&[x.clone(), y.clone()], &[yp]).unwrap();
        let err = Derivation::from_polys(
            &t,
            vec![(x, Poly::zero(&u)), (y.clone(), Poly::one(&u))],
            None,
            Default::default(),
        )
        .unwrap_err();
        assert_eq!(
            err,
            Error::IllDefinedDerivation {
                generator: "y".into(),
                level: 0
            }
        );
    }

    #[test]
    fn d_du_on_adic_tower_is_refuted() {
        let u = VarId::named("u");
        let uni = Universe::new(vec![u.clone()]).unwrap();
        let up = Poly::var(&uni, &u).unwrap();
        let t = TowerRing::adic(&[u.clone()], &[], &[up]).unwrap();
        let d = Derivation::from_polys(&t, vec![(u, Poly::one(&uni))], None, Default::default()).unwrap();
        assert_eq!(d.shift(), 1);
        let v = d.check_integrable(Window { max_level: 4, max_power: 6 }).unwrap();
        assert_eq!(v.status(), "refuted");
    }

    #[test]
    fn plus_derivation_kernel_is_constants() {
        let t = TowerRing::cutoff("X", Centers::constant(rat(0)), 0);
        let t2 = t.clone();
        let d = Derivation::new(
            &t,
            move |v| {
                let i = v.index().unwrap();
                let next = VarId::indexed("X", i + 1);
                Ok(TowerElement::generator(&t2, &next).scale(&rat(i as i64 + 1)))
            },
            None,
            Default::default(),
        )
        .unwrap();
        assert_eq!(d.shift(), 0);
        let k = d.kernel_basis(4, 2).unwrap();
        assert_eq!(k.len(), 1);
        assert_eq!(k[0].to_string(), "1");
    }

    #[test]
    fn dual_of_d_dx() {
        let x = VarId::named("x");
        let ring = Universe::new(vec![x]).unwrap();
        let (t, d) = dual_derivation(&ring, &[], Some(vec![Poly::one(&ring)]), Exhaustion::Degree, 64, "X").unwrap();
        let l = t.level(3).unwrap();
        for i in 0..3u32 {
            let img = d.image(&VarId::indexed("X", i)).unwrap().at(3).unwrap();
            let expect = Poly::var(l.universe(), &VarId::indexed("X", i + 1)).unwrap().scale(&rat(i as i64 + 1));
            assert_eq!(img, expect);
        }
        assert!(d.image(&VarId::indexed("X", 3)).unwrap().at(3).unwrap().is_zero());
    }
}
