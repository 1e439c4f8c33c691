//! Complete topological rings presented as towers `A_0 <- A_1 <- A_2 <- ...`.
//!
//! Level `n` is a polynomial ring over the rationals in finitely many live
//! generators modulo a reduced Gröbner basis. Generators that are not live at
//! a level project to a constant (a cutoff center, or zero for dual
//! coordinates), which makes every transition `p_{m,n}` a substitution
//! followed by a normal form and makes surjectivity structural: the live
//! generators of `A_n` are live in `A_m` for `m >= n` and map to themselves.
//!
//! Levels are built on first request and memoized.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};
use rand::Rng;

use crate::element::TowerElement;
use crate::error::{Error, Result};
use crate::groebner::{buchberger, GroebnerBasis, GroebnerLimits};
use crate::linalg::{to_sparse, LinearSpan};
use crate::poly::{rat, render_rational, Monomial, MonomialOrder, Poly, Rational, Universe, VarId};

/// One level `A_n = 𝒜/𝔞_n` of a tower.
#[derive(Debug)]
pub struct LevelRing {
    index: usize,
    universe: Arc<Universe>,
    ideal: GroebnerBasis,
}

impl LevelRing {
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    pub fn ideal(&self) -> &GroebnerBasis {
        &self.ideal
    }

    pub fn order(&self) -> MonomialOrder {
        self.ideal.order()
    }

    pub fn is_zero_ring(&self) -> bool {
        self.ideal.is_unit_ideal()
    }

    pub fn normal_form(&self, p: &Poly) -> Result<Poly> {
        self.ideal.normal_form(p)
    }

    pub fn var(&self, v: &VarId) -> Result<Poly> {
        self.normal_form(&Poly::var(&self.universe, v)?)
    }

    pub fn zero(&self) -> Poly {
        Poly::zero(&self.universe)
    }

    pub fn constant(&self, c: Rational) -> Result<Poly> {
        self.normal_form(&Poly::constant(&self.universe, c))
    }

    pub fn mul(&self, a: &Poly, b: &Poly) -> Result<Poly> {
        self.normal_form(&a.checked_mul(b)?)
    }

    pub fn render(&self, p: &Poly) -> String {
        p.render(self.order())
    }

    /// Standard monomials of total degree at most `bound`.
    pub fn standard_monomials(&self, bound: u32) -> Vec<Monomial> {
        if self.is_zero_ring() {
            return Vec::new();
        }
        self.ideal.standard_monomials(bound)
    }
}

/// Center constants `c_i` of a cutoff tower, whose level ideals are `(X_i - c_i)_{i >= n}`.
#[derive(Clone)]
pub struct Centers {
    rule: Arc<dyn Fn(u32) -> Rational + Send + Sync>,
    label: String,
}

impl Centers {
    pub fn constant(c: Rational) -> Self {
        let label = render_rational(&c);
        Centers {
            rule: Arc::new(move |_| c.clone()),
            label,
        }
    }

    pub fn from_fn(label: &str, rule: impl Fn(u32) -> Rational + Send + Sync + 'static) -> Self {
        Centers {
            rule: Arc::new(rule),
            label: label.to_string(),
        }
    }

    pub fn at(&self, i: u32) -> Rational {
        (self.rule)(i)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for Centers {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Centers({})", self.label)
    }
}

/// How the finite-dimensional subspaces `V_n` of a dual-coordinate tower are chosen.
#[derive(Clone)]
pub enum Exhaustion {
    /// `V_n` = polynomials of total degree at most `n`.
    Degree,
    /// `V_n` spanned by the returned polynomials (over the ring's universe).
    Custom(Arc<dyn Fn(usize) -> Vec<Poly> + Send + Sync>),
}

impl fmt::Debug for Exhaustion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exhaustion::Degree => f.write_str("degree"),
            Exhaustion::Custom(_) => f.write_str("custom"),
        }
    }
}

#[derive(Default)]
struct DualState {
    span: LinearSpan,
    basis: Vec<Poly>,
    dims: Vec<usize>,
}

/// A finitely presented algebra `R` with an exhaustion by finite-dimensional
/// subspaces, optionally closed under a locally nilpotent derivation `δ`.
///
/// The adapted basis `b_0, b_1, ...` extends a basis of `W_n` to one of
/// `W_{n+1}`; the dual coordinate `X_i` reads off the coefficient of `b_i`.
pub struct DualExhaustion {
    ring: Arc<Universe>,
    relations: GroebnerBasis,
    delta: Option<Vec<Poly>>,
    exhaustion: Exhaustion,
    bound: usize,
    state: Mutex<DualState>,
}

impl fmt::Debug for DualExhaustion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DualExhaustion")
            .field("ring", &self.ring.vars())
            .field("exhaustion", &self.exhaustion)
            .finish()
    }
}

impl DualExhaustion {
    /// `relations` present `R = k[ring]/(relations)`; `delta`, if given, lists `δ(v)`
    /// for every ring variable in order, and `W_n` is the `δ`-closure of `V_n`.
    pub fn new(
        ring: &Arc<Universe>,
        relations: &[Poly],
        delta: Option<Vec<Poly>>,
        exhaustion: Exhaustion,
        bound: usize,
    ) -> Result<Self> {
        let relations = buchberger(ring, relations, MonomialOrder::GrevLex, GroebnerLimits::default())?;
        if relations.is_unit_ideal() {
            return Err(Error::Presentation("relations generate the unit ideal".into()));
        }
        if let Some(images) = &delta {
            if images.len() != ring.len() {
                return Err(Error::Presentation(
                    "derivation images must cover every ring variable".into(),
                ));
            }
            for img in images {
                if !Universe::same(ring, img.universe()) {
                    return Err(Error::universe("derivation image outside the ring"));
                }
            }
        }
        Ok(DualExhaustion {
            ring: ring.clone(),
            relations,
            delta,
            exhaustion,
            bound,
            state: Mutex::new(DualState::default()),
        })
    }

    pub fn ring(&self) -> &Arc<Universe> {
        &self.ring
    }

    pub fn relations(&self) -> &GroebnerBasis {
        &self.relations
    }

    pub fn has_delta(&self) -> bool {
        self.delta.is_some()
    }

    /// `δ(p)` reduced modulo the relations; zero when no derivation was given.
    pub fn apply_delta(&self, p: &Poly) -> Result<Poly> {
        let Some(images) = &self.delta else {
            return Ok(Poly::zero(&self.ring));
        };
        let mut out = Poly::zero(&self.ring);
        for (v, img) in self.ring.vars().iter().zip(images) {
            let dp = p.formal_partial(v)?;
            if !dp.is_zero() {
                out = out.checked_add(&dp.checked_mul(img)?)?;
            }
        }
        self.relations.normal_form(&out)
    }

    fn spanning_set(&self, n: usize) -> Result<Vec<Poly>> {
        let raw = match &self.exhaustion {
            Exhaustion::Degree => {
                let mut monos = Vec::new();
                for d in 0..=n as u32 {
                    let mut layer = Vec::new();
                    let mut cur = vec![0u32; self.ring.len()];
                    exact_degree(self.ring.len(), 0, d, &mut cur, &mut layer);
                    layer.sort_by(|a, b| b.cmp(a));
                    monos.extend(layer);
                }
                monos
                    .into_iter()
                    .map(|m| Poly::monomial(&self.ring, m, Rational::one()))
                    .collect()
            }
            Exhaustion::Custom(f) => f(n),
        };
        raw.iter()
            .map(|p| {
                if !Universe::same(&self.ring, p.universe()) {
                    return Err(Error::universe("exhaustion element outside the ring"));
                }
                self.relations.normal_form(p)
            })
            .collect()
    }

    fn ensure(&self, n: usize) -> Result<()> {
        let mut state = self.state.lock().expect("dual state poisoned");
        while state.dims.len() <= n {
            let k = state.dims.len();
            let spanning = self.spanning_set(k)?;
            if k > 0 {
                let mut fresh = LinearSpan::new();
                for s in &spanning {
                    fresh.insert(&to_sparse(s));
                }
                for s in self.spanning_set(k - 1)? {
                    if fresh.express(&to_sparse(&s)).is_none() {
                        return Err(Error::Presentation(format!(
                            "exhaustion is not nested: {} lies in V_{} but not in V_{}",
                            s,
                            k - 1,
                            k
                        )));
                    }
                }
            }
            for s in spanning {
                let mut e = s;
                let mut steps = 0usize;
                while !e.is_zero() {
                    let v = to_sparse(&e);
                    if state.span.express(&v).is_none() {
                        state.span.insert(&v);
                        state.basis.push(e.clone());
                    }
                    if self.delta.is_none() {
                        break;
                    }
                    steps += 1;
                    if steps > self.bound {
                        return Err(Error::NotLocallyNilpotent {
                            generator: e.to_string(),
                            bound: self.bound,
                        });
                    }
                    e = self.apply_delta(&e)?;
                }
            }
            let dim = state.basis.len();
            state.dims.push(dim);
        }
        Ok(())
    }

    /// `dim W_n`.
    pub fn dim(&self, n: usize) -> Result<usize> {
        self.ensure(n)?;
        Ok(self.state.lock().expect("dual state poisoned").dims[n])
    }

    /// The adapted basis of `W_n`.
    pub fn basis(&self, n: usize) -> Result<Vec<Poly>> {
        self.ensure(n)?;
        let state = self.state.lock().expect("dual state poisoned");
        Ok(state.basis[..state.dims[n]].to_vec())
    }

    /// Coordinates of `f` in the adapted basis of `W_n`, or `None` if `f ∉ W_n`.
    pub fn coordinates(&self, f: &Poly, n: usize) -> Result<Option<Vec<Rational>>> {
        self.ensure(n)?;
        let f = self.relations.normal_form(f)?;
        let state = self.state.lock().expect("dual state poisoned");
        let dim = state.dims[n];
        let Some(expr) = state.span.express(&to_sparse(&f)) else {
            return Ok(None);
        };
        if expr.keys().any(|&i| i >= dim) {
            return Ok(None);
        }
        let mut coords = vec![Rational::zero(); dim];
        for (i, c) in expr {
            coords[i] = c;
        }
        Ok(Some(coords))
    }
}

fn exact_degree(n: usize, i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
    if i + 1 == n {
        cur[i] = left;
        out.push(cur.clone());
        cur[i] = 0;
        return;
    }
    if n == 0 {
        if left == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for e in (0..=left).rev() {
        cur[i] = e;
        exact_degree(n, i + 1, left - e, cur, out);
    }
    cur[i] = 0;
}

#[derive(Debug)]
enum Kind {
    Adic {
        universe: Arc<Universe>,
        relations: Vec<Poly>,
        ideal: Vec<Poly>,
    },
    Cutoff {
        family: Arc<str>,
        centers: Centers,
        extra: usize,
    },
    Discrete {
        universe: Arc<Universe>,
        relations: Vec<Poly>,
    },
    Dual {
        family: Arc<str>,
        data: Arc<DualExhaustion>,
    },
    Quotient {
        base: TowerRing,
        gens: Vec<TowerElement>,
    },
    Tensor {
        left: TowerRing,
        right: TowerRing,
    },
    Localized {
        base: TowerRing,
        f: TowerElement,
        w: VarId,
    },
}

struct Inner {
    kind: Kind,
    limits: GroebnerLimits,
    levels: Mutex<BTreeMap<usize, Arc<LevelRing>>>,
}

/// A complete topological ring given by its tower of levels. Cloning is cheap
/// and clones share the level cache.
#[derive(Clone)]
pub struct TowerRing {
    inner: Arc<Inner>,
}

impl fmt::Debug for TowerRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TowerRing({})", self.describe())
    }
}

fn polys_over(universe: &Arc<Universe>, polys: &[Poly]) -> Result<Vec<Poly>> {
    polys.iter().map(|p| p.embed(universe)).collect()
}

/// All products of `k` elements of `gens` (as multisets).
fn ideal_power(universe: &Arc<Universe>, gens: &[Poly], k: usize) -> Vec<Poly> {
    let mut layer: Vec<(usize, Poly)> = vec![(0, Poly::one(universe))];
    for _ in 0..k {
        let mut next = Vec::new();
        for (start, p) in &layer {
            for (i, g) in gens.iter().enumerate().skip(*start) {
                next.push((i, p * g));
            }
        }
        layer = next;
    }
    layer.into_iter().map(|(_, p)| p).collect()
}

impl TowerRing {
    fn from_kind(kind: Kind, limits: GroebnerLimits) -> Self {
        TowerRing {
            inner: Arc::new(Inner {
                kind,
                limits,
                levels: Mutex::new(BTreeMap::new()),
            }),
        }
    }

    /// The `J`-adic completion of `k[vars]/(relations)`: level `n` is
    /// `k[vars]/(relations + J^n)`, level 0 the zero ring.
    pub fn adic(vars: &[VarId], relations: &[Poly], ideal: &[Poly]) -> Result<Self> {
        let universe = Universe::new(vars.to_vec())?;
        let relations = polys_over(&universe, relations)?;
        let ideal = polys_over(&universe, ideal)?;
        if ideal.is_empty() {
            return Err(Error::Presentation("adic ideal needs at least one generator".into()));
        }
        let mut gens = relations.clone();
        gens.extend(ideal.iter().cloned());
        let gb = buchberger(&universe, &gens, MonomialOrder::GrevLex, GroebnerLimits::default())?;
        if gb.is_unit_ideal() {
            return Err(Error::Presentation(
                "adic ideal is not proper in the base ring".into(),
            ));
        }
        Ok(Self::from_kind(
            Kind::Adic {
                universe,
                relations,
                ideal,
            },
            GroebnerLimits::default(),
        ))
    }

    /// Countably many variables `X_0, X_1, ...` with level ideals `(X_i - c_i)_{i >= n + extra}`.
    /// Level `n >= 1` is `k[X_0, ..., X_{n-1+extra}]`; level 0 is the zero ring.
    pub fn cutoff(family: &str, centers: Centers, extra: usize) -> Self {
        Self::from_kind(
            Kind::Cutoff {
                family: Arc::from(family),
                centers,
                extra,
            },
            GroebnerLimits::default(),
        )
    }

    /// The discrete topology on `k[vars]/(relations)`: every level is the ring itself.
    pub fn discrete(vars: &[VarId], relations: &[Poly]) -> Result<Self> {
        let universe = Universe::new(vars.to_vec())?;
        let relations = polys_over(&universe, relations)?;
        let gb = buchberger(&universe, &relations, MonomialOrder::GrevLex, GroebnerLimits::default())?;
        if gb.is_unit_ideal() {
            return Err(Error::Presentation("relations generate the unit ideal".into()));
        }
        Ok(Self::from_kind(
            Kind::Discrete {
                universe,
                relations,
            },
            GroebnerLimits::default(),
        ))
    }

    /// The tower `lim Sym(W_n^∨)` of polynomial rings in the dual coordinates `family[i]`.
    pub fn dual_coordinate(family: &str, data: DualExhaustion) -> Self {
        Self::from_kind(
            Kind::Dual {
                family: Arc::from(family),
                data: Arc::new(data),
            },
            GroebnerLimits::default(),
        )
    }

    /// Levelwise quotient by the closed ideal generated by `gens`.
    pub fn quotient(base: &TowerRing, gens: &[TowerElement]) -> Result<Self> {
        for g in gens {
            if !g.tower().same(base) {
                return Err(Error::universe("quotient generator from another tower"));
            }
        }
        Ok(Self::from_kind(
            Kind::Quotient {
                base: base.clone(),
                gens: gens.to_vec(),
            },
            base.inner.limits,
        ))
    }

    /// Completed tensor product; level `n` is `left_n ⊗ right_n`.
    pub fn tensor(left: &TowerRing, right: &TowerRing) -> Result<Self> {
        let l = left.generator_names();
        for name in right.generator_names() {
            if l.contains(&name) {
                return Err(Error::universe(format!(
                    "tensor factors share the generator name {name}"
                )));
            }
        }
        Ok(Self::from_kind(
            Kind::Tensor {
                left: left.clone(),
                right: right.clone(),
            },
            left.inner.limits,
        ))
    }

    /// Separated completed localization at `f`: level `n` is `A_n[w]/(w f_n - 1)`.
    pub fn localize(base: &TowerRing, f: &TowerElement) -> Result<Self> {
        let names = base.generator_names();
        let mut name = "w".to_string();
        let mut k = 1;
        while names.contains(&name) {
            name = format!("w{k}");
            k += 1;
        }
        Self::localize_with(base, f, VarId::named(&name))
    }

    pub fn localize_with(base: &TowerRing, f: &TowerElement, w: VarId) -> Result<Self> {
        if !f.tower().same(base) {
            return Err(Error::universe("localizing element from another tower"));
        }
        if base.generator_names().contains(&w.name().to_string()) {
            return Err(Error::universe(format!("{w} already names a generator")));
        }
        Ok(Self::from_kind(
            Kind::Localized {
                base: base.clone(),
                f: f.clone(),
                w,
            },
            base.inner.limits,
        ))
    }

    /// A copy of this tower (with a fresh cache) using different Gröbner caps.
    pub fn with_limits(&self, limits: GroebnerLimits) -> Self {
        let kind = match &self.inner.kind {
            Kind::Adic {
                universe,
                relations,
                ideal,
            } => Kind::Adic {
                universe: universe.clone(),
                relations: relations.clone(),
                ideal: ideal.clone(),
            },
            Kind::Cutoff {
                family,
                centers,
                extra,
            } => Kind::Cutoff {
                family: family.clone(),
                centers: centers.clone(),
                extra: *extra,
            },
            Kind::Discrete {
                universe,
                relations,
            } => Kind::Discrete {
                universe: universe.clone(),
                relations: relations.clone(),
            },
            Kind::Dual { family, data } => Kind::Dual {
                family: family.clone(),
                data: data.clone(),
            },
            Kind::Quotient { base, gens } => Kind::Quotient {
                base: base.clone(),
                gens: gens.clone(),
            },
            Kind::Tensor { left, right } => Kind::Tensor {
                left: left.clone(),
                right: right.clone(),
            },
            Kind::Localized { base, f, w } => Kind::Localized {
                base: base.clone(),
                f: f.clone(),
                w: w.clone(),
            },
        };
        Self::from_kind(kind, limits)
    }

    pub fn limits(&self) -> GroebnerLimits {
        self.inner.limits
    }

    /// Identity of towers (shared construction), not isomorphism.
    pub fn same(&self, other: &TowerRing) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
    }

    pub fn kind_name(&self) -> &'static str {
        match &self.inner.kind {
            Kind::Adic { .. } => "adic",
            Kind::Cutoff { .. } => "cutoff",
            Kind::Discrete { .. } => "discrete",
            Kind::Dual { .. } => "dual",
            Kind::Quotient { .. } => "quotient",
            Kind::Tensor { .. } => "tensor",
            Kind::Localized { .. } => "localized",
        }
    }

    /// Construction record.
    pub fn describe(&self) -> String {
        let list = |ps: &[Poly]| {
            ps.iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        };
        let vars = |u: &Arc<Universe>| {
            u.vars()
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        };
        match &self.inner.kind {
            Kind::Adic {
                universe,
                relations,
                ideal,
            } => format!(
                "adic(vars=[{}], rels=[{}], ideal=[{}])",
                vars(universe),
                list(relations),
                list(ideal)
            ),
            Kind::Cutoff {
                family,
                centers,
                extra,
            } => format!("cutoff(family={family}, centers={}, extra={extra})", centers.label()),
            Kind::Discrete {
                universe,
                relations,
            } => format!("discrete(vars=[{}], rels=[{}])", vars(universe), list(relations)),
            Kind::Dual { family, data } => format!(
                "dual(family={family}, ring=[{}], exhaustion={:?})",
                vars(&data.ring),
                data.exhaustion
            ),
            Kind::Quotient { base, gens } => format!(
                "quotient({}, gens={})",
                base.describe(),
                gens.len()
            ),
            Kind::Tensor { left, right } => {
                format!("tensor({}, {})", left.describe(), right.describe())
            }
            Kind::Localized { base, w, .. } => format!("localize({}, {w})", base.describe()),
        }
    }

    /// First level that is not forced to be the zero ring by the `𝔞_0 = 𝒜` convention.
    pub fn first_level(&self) -> usize {
        match &self.inner.kind {
            Kind::Adic { .. } | Kind::Cutoff { .. } => 1,
            Kind::Discrete { .. } | Kind::Dual { .. } => 0,
            Kind::Quotient { base, .. } | Kind::Localized { base, .. } => base.first_level(),
            Kind::Tensor { left, right } => left.first_level().max(right.first_level()),
        }
    }

    /// Names of generators and generator families.
    pub fn generator_names(&self) -> Vec<String> {
        match &self.inner.kind {
            Kind::Adic { universe, .. } | Kind::Discrete { universe, .. } => {
                universe.vars().iter().map(|v| v.name().to_string()).collect()
            }
            Kind::Cutoff { family, .. } | Kind::Dual { family, .. } => vec![family.to_string()],
            Kind::Quotient { base, .. } => base.generator_names(),
            Kind::Tensor { left, right } => {
                let mut names = left.generator_names();
                names.extend(right.generator_names());
                names
            }
            Kind::Localized { base, w, .. } => {
                let mut names = base.generator_names();
                names.push(w.name().to_string());
                names
            }
        }
    }

    pub fn has_generator(&self, v: &VarId) -> bool {
        match &self.inner.kind {
            Kind::Adic { universe, .. } | Kind::Discrete { universe, .. } => universe.contains(v),
            Kind::Cutoff { family, .. } | Kind::Dual { family, .. } => {
                v.name() == &**family && v.index().is_some()
            }
            Kind::Quotient { base, .. } => base.has_generator(v),
            Kind::Tensor { left, right } => left.has_generator(v) || right.has_generator(v),
            Kind::Localized { base, w, .. } => v == w || base.has_generator(v),
        }
    }

    /// The dual-coordinate data of a dual tower.
    pub fn dual_data(&self) -> Option<&Arc<DualExhaustion>> {
        match &self.inner.kind {
            Kind::Dual { data, .. } => Some(data),
            _ => None,
        }
    }

    /// The underlying tower of a quotient or localized tower.
    pub fn base(&self) -> Option<&TowerRing> {
        match &self.inner.kind {
            Kind::Quotient { base, .. } | Kind::Localized { base, .. } => Some(base),
            _ => None,
        }
    }

    /// The variable inverting the localizing element of a localized tower.
    pub fn localization_var(&self) -> Option<&VarId> {
        match &self.inner.kind {
            Kind::Localized { w, .. } => Some(w),
            _ => None,
        }
    }

    pub fn level(&self, n: usize) -> Result<Arc<LevelRing>> {
        if let Some(l) = self.inner.levels.lock().expect("level cache poisoned").get(&n) {
            return Ok(l.clone());
        }
        let level = Arc::new(self.build_level(n)?);
        let mut cache = self.inner.levels.lock().expect("level cache poisoned");
        Ok(cache.entry(n).or_insert(level).clone())
    }

    fn basis(&self, universe: &Arc<Universe>, gens: &[Poly], order: MonomialOrder) -> Result<GroebnerBasis> {
        buchberger(universe, gens, order, self.inner.limits)
    }

    fn build_level(&self, n: usize) -> Result<LevelRing> {
        let grevlex = MonomialOrder::GrevLex;
        let (universe, ideal) = match &self.inner.kind {
            Kind::Adic {
                universe,
                relations,
                ideal,
            } => {
                let mut gens = relations.clone();
                if n == 0 {
                    gens.push(Poly::one(universe));
                } else {
                    gens.extend(ideal_power(universe, ideal, n));
                }
                (universe.clone(), self.basis(universe, &gens, grevlex)?)
            }
            Kind::Cutoff { family, extra, .. } => {
                if n == 0 {
                    let u = Universe::empty();
                    let gb = self.basis(&u, &[Poly::one(&u)], grevlex)?;
                    (u, gb)
                } else {
                    let count = (n + extra) as u32;
                    let u = Universe::new((0..count).map(|i| VarId::indexed(family, i)).collect())?;
                    (u.clone(), GroebnerBasis::zero_ideal(&u, grevlex))
                }
            }
            Kind::Discrete {
                universe,
                relations,
            } => (universe.clone(), self.basis(universe, relations, grevlex)?),
            Kind::Dual { family, data } => {
                let dim = data.dim(n)? as u32;
                let u = Universe::new((0..dim).map(|i| VarId::indexed(family, i)).collect())?;
                (u.clone(), GroebnerBasis::zero_ideal(&u, grevlex))
            }
            Kind::Quotient { base, gens } => {
                let bl = base.level(n)?;
                let mut all: Vec<Poly> = bl.ideal().generators().cloned().collect();
                for g in gens {
                    all.push(g.at(n)?);
                }
                (bl.universe().clone(), self.basis(bl.universe(), &all, bl.order())?)
            }
            Kind::Tensor { left, right } => {
                let (ll, rl) = (left.level(n)?, right.level(n)?);
                let mut vars = ll.universe().vars().to_vec();
                vars.extend(rl.universe().vars().iter().cloned());
                let u = Universe::new(vars)?;
                let mut all = Vec::new();
                for g in ll.ideal().generators().chain(rl.ideal().generators()) {
                    all.push(g.embed(&u)?);
                }
                let gb = self.basis(&u, &all, grevlex)?;
                (u, gb)
            }
            Kind::Localized { base, f, w } => {
                let bl = base.level(n)?;
                let mut vars = vec![w.clone()];
                vars.extend(bl.universe().vars().iter().cloned());
                let u = Universe::new(vars)?;
                let mut all = Vec::new();
                for g in bl.ideal().generators() {
                    all.push(g.embed(&u)?);
                }
                let wv = Poly::var(&u, w)?;
                all.push(&(&wv * &f.at(n)?.embed(&u)?) - &Poly::one(&u));
                let gb = self.basis(&u, &all, MonomialOrder::Elimination { block: 1 })?;
                (u, gb)
            }
        };
        Ok(LevelRing {
            index: n,
            universe,
            ideal,
        })
    }

    /// Image of the generator `v` in `A_n` (not yet normal-formed).
    pub fn project_var(&self, v: &VarId, n: usize) -> Result<Poly> {
        let level = self.level(n)?;
        let u = level.universe();
        let unknown = || Error::universe(format!("{v} is not a generator of {}", self.kind_name()));
        match &self.inner.kind {
            Kind::Adic { universe, .. } | Kind::Discrete { universe, .. } => {
                if !universe.contains(v) {
                    return Err(unknown());
                }
                Poly::var(u, v)
            }
            Kind::Cutoff { family, centers, .. } => {
                let i = match v.index() {
                    Some(i) if v.name() == &**family => i,
                    _ => return Err(unknown()),
                };
                if u.contains(v) {
                    Poly::var(u, v)
                } else if n == 0 {
                    Ok(Poly::zero(u))
                } else {
                    Ok(Poly::constant(u, centers.at(i)))
                }
            }
            Kind::Dual { family, .. } => {
                if v.name() != &**family || v.index().is_none() {
                    return Err(unknown());
                }
                if u.contains(v) {
                    Poly::var(u, v)
                } else {
                    Ok(Poly::zero(u))
                }
            }
            Kind::Quotient { base, .. } => base.project_var(v, n)?.embed(u),
            Kind::Tensor { left, right } => {
                if left.has_generator(v) {
                    left.project_var(v, n)?.embed(u)
                } else if right.has_generator(v) {
                    right.project_var(v, n)?.embed(u)
                } else {
                    Err(unknown())
                }
            }
            Kind::Localized { base, w, .. } => {
                if v == w {
                    Poly::var(u, v)
                } else {
                    base.project_var(v, n)?.embed(u)
                }
            }
        }
    }

    /// Normal form in `A_n` of a polynomial in tower generators.
    pub fn lift(&self, p: &Poly, n: usize) -> Result<Poly> {
        let level = self.level(n)?;
        if Universe::same(p.universe(), level.universe()) {
            return level.normal_form(p);
        }
        let mut images: HashMap<VarId, Poly> = HashMap::new();
        let mut failure = None;
        let sub = p.substitute(level.universe(), |v| {
            if let Some(img) = images.get(v) {
                return Some(img.clone());
            }
            match self.project_var(v, n) {
                Ok(img) => {
                    images.insert(v.clone(), img.clone());
                    Some(img)
                }
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

    /// The transition `p_{m,n}: A_m -> A_n` applied to a level-`m` polynomial.
    pub fn transition(&self, m: usize, n: usize, p: &Poly) -> Result<Poly> {
        if n > m {
            return Err(Error::Presentation(format!(
                "no transition from level {m} up to level {n}"
            )));
        }
        let lm = self.level(m)?;
        if !Universe::same(p.universe(), lm.universe()) {
            return Err(Error::universe(format!("polynomial is not over level {m}")));
        }
        self.lift(p, n)
    }

    /// Relations of the presentation, as polynomials in generators.
    pub fn presentation_relations(&self) -> Vec<Poly> {
        match &self.inner.kind {
            Kind::Adic { relations, .. } | Kind::Discrete { relations, .. } => relations.clone(),
            Kind::Cutoff { .. } | Kind::Dual { .. } => Vec::new(),
            Kind::Quotient { base, .. } | Kind::Localized { base, .. } => base.presentation_relations(),
            Kind::Tensor { left, right } => {
                let mut r = left.presentation_relations();
                r.extend(right.presentation_relations());
                r
            }
        }
    }

    /// Relations given by tower elements (quotient generators, `w f - 1`), transported to this tower.
    pub fn element_relations(&self) -> Result<Vec<TowerElement>> {
        Ok(match &self.inner.kind {
            Kind::Adic { .. } | Kind::Cutoff { .. } | Kind::Discrete { .. } | Kind::Dual { .. } => {
                Vec::new()
            }
            Kind::Quotient { base, gens } => {
                let mut r: Vec<_> = base
                    .element_relations()?
                    .iter()
                    .map(|g| g.transport(self))
                    .collect();
                r.extend(gens.iter().map(|g| g.transport(self)));
                r
            }
            Kind::Tensor { left, right } => left
                .element_relations()?
                .iter()
                .chain(right.element_relations()?.iter())
                .map(|g| g.transport(self))
                .collect(),
            Kind::Localized { base, f, w } => {
                let mut r: Vec<_> = base
                    .element_relations()?
                    .iter()
                    .map(|g| g.transport(self))
                    .collect();
                let wv = TowerElement::generator(self, w);
                let rel = wv.mul(&f.transport(self))?.sub(&TowerElement::one(self))?;
                r.push(rel);
                r
            }
        })
    }

    /// Generators of the open ideal `𝔞_j` as polynomials in tower generators.
    /// Infinite families are truncated to `extra` members.
    pub fn filtration_generators(&self, j: usize, extra: usize) -> Result<Vec<Poly>> {
        let unit = || -> Result<Vec<Poly>> { Ok(vec![Poly::one(&Universe::empty())]) };
        match &self.inner.kind {
            Kind::Adic { universe, ideal, .. } => {
                if j == 0 {
                    return unit();
                }
                Ok(ideal_power(universe, ideal, j))
            }
            Kind::Cutoff {
                family,
                centers,
                extra: shift,
            } => {
                if j == 0 {
                    return unit();
                }
                let start = (j + shift) as u32;
                (start..start + extra as u32)
                    .map(|i| {
                        let v = VarId::indexed(family, i);
                        let u = Universe::new(vec![v.clone()])?;
                        Ok(&Poly::var(&u, &v)? - &Poly::constant(&u, centers.at(i)))
                    })
                    .collect()
            }
            Kind::Discrete { .. } => Ok(Vec::new()),
            Kind::Dual { family, data } => {
                let start = data.dim(j)? as u32;
                (start..start + extra as u32)
                    .map(|i| {
                        let v = VarId::indexed(family, i);
                        let u = Universe::new(vec![v.clone()])?;
                        Poly::var(&u, &v)
                    })
                    .collect()
            }
            Kind::Quotient { base, .. } | Kind::Localized { base, .. } => {
                base.filtration_generators(j, extra)
            }
            Kind::Tensor { left, right } => {
                let mut g = left.filtration_generators(j, extra)?;
                g.extend(right.filtration_generators(j, extra)?);
                Ok(g)
            }
        }
    }

    /// Checks `p_{m,n} ∘ p_{l,m} = p_{l,n}` on the generators of every level up to `depth`.
    pub fn audit_transitions(&self, depth: usize) -> Result<()> {
        for l in 0..=depth {
            let ll = self.level(l)?;
            for v in ll.universe().vars() {
                let g = ll.var(v)?;
                for m in 0..=l {
                    let gm = self.transition(l, m, &g)?;
                    for n in 0..=m {
                        let two_step = self.transition(m, n, &gm)?;
                        let direct = self.transition(l, n, &g)?;
                        if two_step != direct {
                            return Err(Error::Presentation(format!(
                                "transitions incoherent on {v}: levels {l} -> {m} -> {n}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Checks that every generator of `A_n` is the image of the same generator of `A_m`.
    pub fn audit_surjectivity(&self, depth: usize) -> Result<()> {
        for m in 0..=depth {
            let lm = self.level(m)?;
            for n in 0..=m {
                let ln = self.level(n)?;
                for v in ln.universe().vars() {
                    if !lm.universe().contains(v) {
                        return Err(Error::Presentation(format!(
                            "generator {v} of level {n} has no preimage at level {m}"
                        )));
                    }
                    if self.transition(m, n, &lm.var(v)?)? != ln.var(v)? {
                        return Err(Error::Presentation(format!(
                            "generator {v} is not fixed by the transition {m} -> {n}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// A random polynomial in the live generators of level `level`, as a tower element.
    pub fn random_element<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        level: usize,
        degree: u32,
        terms: usize,
    ) -> Result<TowerElement> {
        let u = self.level(level)?.universe().clone();
        Ok(TowerElement::from_poly(self, random_poly(rng, &u, degree, terms)))
    }
}

/// A random polynomial with at most `terms` terms of degree at most `degree`
/// and small integer or half-integer coefficients.
pub fn random_poly<R: Rng + ?Sized>(rng: &mut R, u: &Arc<Universe>, degree: u32, terms: usize) -> Poly {
    let mut out = Poly::zero(u);
    for _ in 0..terms {
        let mut m = vec![0u32; u.len()];
        if !m.is_empty() {
            let d = rng.gen_range(0..=degree);
            for _ in 0..d {
                let i = rng.gen_range(0..m.len());
                m[i] += 1;
            }
        }
        let num = rng.gen_range(-5i64..=5);
        let den = if rng.gen_bool(0.2) { 2 } else { 1 };
        out.add_term(m, crate::poly::ratio(num, den));
    }
    out
}

/// Per-level outcome of localizing at an element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZeroLocalization {
    /// `(level, localized level is the zero ring)`
    pub levels: Vec<(usize, bool)>,
    pub zero_to_depth: bool,
}

/// Decides, level by level up to `depth`, whether `1` lies in the localized level ideal.
pub fn is_zero_localization(
    tower: &TowerRing,
    f: &TowerElement,
    depth: usize,
) -> Result<(TowerRing, ZeroLocalization)> {
    let loc = TowerRing::localize(tower, f)?;
    let mut levels = Vec::new();
    for n in tower.first_level()..=depth {
        levels.push((n, loc.level(n)?.is_zero_ring()));
    }
    let zero_to_depth = levels.iter().all(|(_, z)| *z);
    Ok((
        loc,
        ZeroLocalization {
            levels,
            zero_to_depth,
        },
    ))
}

/// The product `X_0 ⋯ X_n` at level `n` of a cutoff family, as a tower element.
pub fn partial_product(tower: &TowerRing, family: &str) -> TowerElement {
    let family = family.to_string();
    TowerElement::from_fn(tower, move |n| {
        let vars: Vec<VarId> = (0..=n as u32).map(|i| VarId::indexed(&family, i)).collect();
        let u = Universe::new(vars.clone())?;
        let mut p = Poly::one(&u);
        for v in &vars {
            p = &p * &Poly::var(&u, v)?;
        }
        Ok(p)
    })
}

/// Convenience: the constant rational `c` as an element.
pub fn constant_element(tower: &TowerRing, c: i64) -> TowerElement {
    TowerElement::constant(tower, rat(c))
}
